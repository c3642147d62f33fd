#include "roelab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace roelab::io {

namespace {

template <class T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw UsageError(std::string("missing JSON field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad JSON field '") + key + "': " + e.what());
  }
}

json vec_to_json(const Eigen::VectorXi& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXi vec_from_json(const json& j) {
  auto v = j.get<std::vector<int>>();
  return Eigen::Map<Eigen::VectorXi>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const geometry::PointSet& ps) {
  json j;
  j["dim"] = ps.dim();
  json w = json::array();
  for (int a = 0; a < ps.dim(); ++a) w.push_back({ps.window().lo[a], ps.window().hi[a]});
  j["window"] = w;
  json pts = json::array();
  for (int i = 0; i < ps.size(); ++i) {
    json p = json::array({i});
    for (int a = 0; a < ps.dim(); ++a) p.push_back(ps.coord(i)[a]);
    pts.push_back(p);
  }
  j["points"] = pts;
  return j;
}

geometry::PointSet pointset_from_json(const json& j) {
  int d = field<int>(j, "dim");
  if (d < 1) throw UsageError("point set dimension must be positive");
  auto w = field<std::vector<std::vector<double>>>(j, "window");
  if (static_cast<int>(w.size()) != d) throw UsageError("window must have one [lo, hi] pair per axis");
  geometry::Box box{Eigen::VectorXd(d), Eigen::VectorXd(d)};
  for (int a = 0; a < d; ++a) {
    if (w[static_cast<std::size_t>(a)].size() != 2) throw UsageError("window entries must be [lo, hi]");
    box.lo[a] = w[static_cast<std::size_t>(a)][0];
    box.hi[a] = w[static_cast<std::size_t>(a)][1];
  }
  auto pts = field<std::vector<std::vector<double>>>(j, "points");
  Eigen::MatrixXd coords(d, static_cast<Eigen::Index>(pts.size()));
  std::vector<char> seen(pts.size(), 0);
  for (const auto& p : pts) {
    if (static_cast<int>(p.size()) != d + 1) throw UsageError("point entries must be [id, x_1, ..., x_d]");
    double idv = p[0];
    if (idv < 0 || idv >= static_cast<double>(pts.size()) || idv != std::floor(idv))
      throw UsageError("point ids must be dense integers 0..N-1");
    auto id = static_cast<std::size_t>(idv);
    if (seen[id]) throw UsageError("duplicate point id " + std::to_string(id));
    seen[id] = 1;
    for (int a = 0; a < d; ++a) coords(a, static_cast<Eigen::Index>(id)) = p[static_cast<std::size_t>(a + 1)];
  }
  return geometry::PointSet(d, std::move(coords), std::move(box));
}

json matrix_to_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back({m(i, k).real(), m(i, k).imag()});
    rows.push_back(r);
  }
  return rows;
}

Eigen::MatrixXcd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw UsageError("matrix must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& r = j[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols) throw UsageError("matrix rows have unequal length");
    for (Eigen::Index k = 0; k < cols; ++k) {
      const auto& z = r[static_cast<std::size_t>(k)];
      if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
        throw UsageError("complex entries must be [re, im] pairs");
      m(i, k) = {z[0].get<double>(), z[1].get<double>()};
    }
  }
  return m;
}

json to_json(const sym::SymmetrySpec& s) {
  json j = json::object();
  if (s.has_T) j["T"] = {{"square", s.T_sq}, {"unitary", matrix_to_json(s.T_unitary)}};
  if (s.has_C) j["C"] = {{"square", s.C_sq}, {"unitary", matrix_to_json(s.C_unitary)}};
  if (s.has_P) j["P"] = {{"unitary", matrix_to_json(s.P_unitary)}};
  if (s.CR_sign) j["CR_sign"] = *s.CR_sign;
  if (s.TR_sign) j["TR_sign"] = *s.TR_sign;
  if (s.PR_sign) j["PR_sign"] = *s.PR_sign;
  j["label"] = sym::to_string(sym::classify(s));
  return j;
}

sym::SymmetrySpec spec_from_json(const json& j) {
  if (!j.is_object()) throw UsageError("symmetry spec must be a JSON object");
  sym::SymmetrySpec s;
  if (j.contains("T")) {
    s.has_T = true;
    s.T_sq = field<int>(j["T"], "square");
    s.T_unitary = matrix_from_json(j["T"].at("unitary"));
  }
  if (j.contains("C")) {
    s.has_C = true;
    s.C_sq = field<int>(j["C"], "square");
    s.C_unitary = matrix_from_json(j["C"].at("unitary"));
  }
  if (j.contains("P")) {
    s.has_P = true;
    s.P_unitary = matrix_from_json(j["P"].at("unitary"));
  }
  if (j.contains("CR_sign")) s.CR_sign = field<int>(j, "CR_sign");
  if (j.contains("TR_sign")) s.TR_sign = field<int>(j, "TR_sign");
  if (j.contains("PR_sign")) s.PR_sign = field<int>(j, "PR_sign");
  s.validate();
  return s;
}

json to_json(const models::ModelConfig& c) {
  json p = json::object();
  for (const auto& [k, v] : c.params) p[k] = number_or_null(v);
  return {{"name", c.name}, {"params", p}, {"boundary", c.boundary}};
}

models::ModelConfig model_config_from_json(const json& j) {
  models::ModelConfig c;
  c.name = field<std::string>(j, "name");
  if (j.contains("boundary")) c.boundary = field<std::string>(j, "boundary");
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw UsageError("model params must be an object");
    for (const auto& [k, v] : j["params"].items()) {
      if (v.is_null()) c.params[k] = std::numeric_limits<double>::quiet_NaN();
      else if (v.is_number()) c.params[k] = v.get<double>();
      else throw UsageError("model parameter '" + k + "' must be a number");
    }
  }
  return c;
}

json operator_to_json(const ops::ControlledOperator& h, const std::optional<sym::SymmetrySpec>& spec,
                      const std::optional<models::ModelConfig>& recipe, double fermi) {
  const auto& m = h.module();
  json mod = {{"points", to_json(*m.points)},
              {"orbitals", m.orbitals},
              {"grading", vec_to_json(m.grading)},
              {"periodic", m.periodic}};
  if (m.spin) mod["spin"] = vec_to_json(*m.spin);
  json blocks = json::array();
  const int n = m.sites();
  std::vector<std::vector<int>> cols(static_cast<std::size_t>(n));
  const auto& mat = h.matrix();
  for (int r = 0; r < mat.outerSize(); ++r)
    for (ops::SparseMatrix::InnerIterator it(mat, r); it; ++it) {
      auto& c = cols[static_cast<std::size_t>(m.site_of(static_cast<int>(it.row())))];
      int y = m.site_of(static_cast<int>(it.col()));
      if (c.empty() || c.back() != y) c.push_back(y);
    }
  for (int x = 0; x < n; ++x) {
    auto& c = cols[static_cast<std::size_t>(x)];
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    for (int y : c) blocks.push_back({x, y, matrix_to_json(h.block(x, y))});
  }
  json j = {{"module", mod},
            {"hermitian", h.hermitian()},
            {"propagation", h.declared_propagation()},
            {"blocks", blocks},
            {"fermi", fermi}};
  if (spec) j["spec"] = to_json(*spec);
  if (recipe) j["recipe"] = to_json(*recipe);
  return j;
}

OperatorFile operator_from_json(const json& j) {
  const json& mj = j.contains("module") ? j["module"] : throw UsageError("missing JSON field 'module'");
  auto ps = std::make_shared<const geometry::PointSet>(pointset_from_json(field<json>(mj, "points")));
  int orb = field<int>(mj, "orbitals");
  if (orb < 1) throw UsageError("orbitals must be positive");
  std::optional<Eigen::VectorXi> grading, spin;
  if (mj.contains("grading")) grading = vec_from_json(mj["grading"]);
  if (mj.contains("spin")) spin = vec_from_json(mj["spin"]);
  auto base = ops::make_module(ps, orb, grading, spin);
  auto mod = std::make_shared<ops::SiteModule>(*base);
  if (mj.contains("periodic")) mod->periodic = field<bool>(mj, "periodic");
  std::vector<Eigen::Triplet<ops::cplx>> t;
  for (const auto& b : field<json>(j, "blocks")) {
    if (!b.is_array() || b.size() != 3) throw UsageError("blocks must be [x, y, matrix] triples");
    int x = b[0].get<int>(), y = b[1].get<int>();
    if (x < 0 || y < 0 || x >= ps->size() || y >= ps->size()) throw UsageError("block site id out of range");
    Eigen::MatrixXcd blk = matrix_from_json(b[2]);
    if (blk.rows() != orb || blk.cols() != orb) throw UsageError("block size does not match the orbital count");
    for (int a = 0; a < orb; ++a)
      for (int c = 0; c < orb; ++c)
        if (std::abs(blk(a, c)) > ops::kZero) t.emplace_back(mod->index(x, a), mod->index(y, c), blk(a, c));
  }
  ops::SparseMatrix s(mod->dimension(), mod->dimension());
  s.setFromTriplets(t.begin(), t.end());
  ops::ModulePtr mp = mod;
  OperatorFile f{ops::ControlledOperator(mp, std::move(s), field<double>(j, "propagation"), field<bool>(j, "hermitian")),
                 std::nullopt, std::nullopt, 0.0};
  if (j.contains("spec")) f.spec = spec_from_json(j["spec"]);
  if (j.contains("recipe")) f.recipe = model_config_from_json(j["recipe"]);
  if (j.contains("fermi")) f.fermi = field<double>(j, "fermi");
  return f;
}

json to_json(const idx::IndexReport& r) {
  json j;
  j["raw"] = number_or_null(r.raw);
  j["imag"] = number_or_null(r.imag);
  if (!r.snapped_ok) j["snapped"] = nullptr;
  else if (r.is_z2) j["snapped"] = "Z2:" + std::to_string(r.snapped);
  else j["snapped"] = r.snapped;
  j["group"] = r.group;
  j["error"] = number_or_null(r.error);
  j["formula"] = r.formula;
  j["windows"] = r.windows;
  json wv = json::array();
  for (double v : r.window_values) wv.push_back(number_or_null(v));
  j["window_values"] = wv;
  j["warnings"] = r.warnings;
  return j;
}

json to_json(const sym::KGroup& g) { return {{"group", g.render()}, {"z", g.z}, {"z2", g.z2}, {"provenance", g.provenance}}; }

json to_json(const ops::GapCertificate& g) {
  return {{"epsilon", g.epsilon},
          {"lower_spectrum_max", g.lower_spectrum_max},
          {"upper_spectrum_min", g.upper_spectrum_min},
          {"fermi", g.fermi},
          {"method", g.method},
          {"valid", g.valid},
          {"excluded_states", g.excluded_states}};
}

json to_json(const BoundaryMap& b) {
  json prof = json::array();
  for (std::size_t k = 0; k < b.profile_distance.size(); ++k) prof.push_back({b.profile_distance[k], b.profile_value[k]});
  return {{"unitarity_defect", b.unitarity_defect},
          {"off_interface_deviation", b.off_interface_deviation},
          {"deep_distance", b.deep_distance},
          {"decay_length", number_or_null(b.decay_length)},
          {"decay_prefactor", b.decay_prefactor},
          {"profile", prof}};
}

json to_json(const BecReport& r) {
  json j;
  j["label"] = r.label;
  j["dim"] = r.dim;
  j["epsilon"] = r.epsilon;
  j["bulk"] = to_json(r.bulk);
  j["edge"] = to_json(r.edge);
  if (r.plateau) j["plateau"] = to_json(*r.plateau);
  if (r.boundary_pairing) j["boundary_pairing"] = to_json(*r.boundary_pairing);
  j["pass"] = r.pass;
  json sw = json::array();
  for (const auto& e : r.sweeps) {
    json s = {{"kind", e.kind}, {"parameter", e.parameter}, {"seed", e.seed}, {"epsilon", e.epsilon}, {"pass", e.pass}};
    s["bulk"] = e.bulk ? to_json(*e.bulk) : json(nullptr);
    s["edge"] = e.edge ? to_json(*e.edge) : json(nullptr);
    if (!e.error.empty()) s["error"] = e.error;
    sw.push_back(s);
  }
  j["sweeps"] = sw;
  j["notes"] = r.notes;
  return j;
}

json to_json(const sym::CharacterTable& ct) {
  json classes = json::array();
  for (std::size_t c = 0; c < ct.class_sizes.size(); ++c)
    classes.push_back({{"size", ct.class_sizes[c]}, {"square_class", ct.square_class[c]}});
  json chars = json::array();
  for (const auto& row : ct.chars) {
    json r = json::array();
    for (const auto& z : row) r.push_back({z.real(), z.imag()});
    chars.push_back(r);
  }
  return {{"order", ct.order}, {"classes", classes}, {"chars", chars}};
}

sym::CharacterTable character_table_from_json(const json& j) {
  sym::CharacterTable ct;
  ct.order = field<int>(j, "order");
  for (const auto& c : field<json>(j, "classes")) {
    ct.class_sizes.push_back(field<int>(c, "size"));
    ct.square_class.push_back(field<int>(c, "square_class"));
  }
  for (const auto& row : field<json>(j, "chars")) {
    std::vector<std::complex<double>> r;
    for (const auto& z : row) {
      if (z.is_number()) r.emplace_back(z.get<double>(), 0.0);
      else if (z.is_array() && z.size() == 2) r.emplace_back(z[0].get<double>(), z[1].get<double>());
      else throw UsageError("characters must be numbers or [re, im] pairs");
    }
    ct.chars.push_back(std::move(r));
  }
  ct.validate();
  return ct;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + csv_field(fields[i]);
  return out + "\n";
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace roelab::io
