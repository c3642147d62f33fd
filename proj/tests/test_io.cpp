#include "support.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>

using namespace test;

TEST_CASE("CSV quoting") {
  CHECK(io::csv_field("plain") == "plain");
  CHECK(io::csv_field("a,b") == "\"a,b\"");
  CHECK(io::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(io::csv_row({"a", "b,c", ""}) == "a,\"b,c\",\n");
}

TEST_CASE("doubles print shortest round-trip") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1e300, 0.0}) CHECK(std::stod(io::format_double(v)) == v);
  CHECK(io::format_double(0.5) == "0.5");
}

TEST_CASE("JSON files: round trip and errors") {
  std::string path = "roelab_io_test.json";
  io::write_text(path, "{\"a\": [1, 2]}");
  auto j = io::read_json_file(path);
  CHECK(j["a"][1] == 2);
  io::write_text(path, "{broken");
  CHECK_THROWS_AS(io::read_json_file(path), UsageError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(io::read_json_file("does/not/exist.json"), UsageError);
}

TEST_CASE("character table JSON round trip") {
  auto ct = io::character_table_from_json(io::read_json_file(data_path("z3.json")));
  auto back = io::character_table_from_json(io::to_json(ct));
  CHECK(back.order == 3);
  CHECK(back.square_class == ct.square_class);
  CHECK(std::abs(back.chars[1][1] - ct.chars[1][1]) < 1e-15);
}

TEST_CASE("symmetry spec and model config JSON round trip") {
  auto m = model("kitaev", lattice(1, {10}), {{"mu", 0.3}});
  auto s = io::spec_from_json(io::to_json(m.spec));
  CHECK(sym::classify(s) == sym::classify(m.spec));
  CHECK((s.C_unitary - m.spec.C_unitary).norm() == 0.0);
  auto c = io::model_config_from_json(io::to_json(m.config));
  CHECK(c.name == "kitaev");
  CHECK(c.params.at("mu") == 0.3);
  CHECK_THROWS_AS(io::model_config_from_json(io::json::array()), UsageError);
}

TEST_CASE("operator files reject malformed blocks") {
  auto m = model("qwz", square(3));
  auto j = io::operator_to_json(m.H, m.spec);
  j["blocks"][0][0] = 99;
  CHECK_THROWS_AS(io::operator_from_json(j), UsageError);
}

TEST_CASE("K-group and gap certificate JSON") {
  auto g = io::to_json(sym::kgroup_rotation(sym::CartanLabel::AII, 2, 3));
  CHECK(g["group"] == "Z + Z2");
  auto m = model("ssh", lattice(1, {40}));
  auto c = io::to_json(ops::certify_gap(m.H));
  CHECK(c["valid"] == true);
  CHECK(c.contains("epsilon"));
}
