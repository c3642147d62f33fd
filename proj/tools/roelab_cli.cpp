#include "roelab/bulkedge.hpp"
#include "roelab/io.hpp"

#include <CLI11.hpp>

#include <future>
#include <iostream>
#include <sstream>

using namespace roelab;
using io::json;

namespace {

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("bad number '") + item + "' in " + what);
    }
  }
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Shared output handling: JSON to --out (or stdout) and optional plot columns.
struct Output {
  std::string out = "-";
  std::string plot;

  void add(CLI::App* app) {
    app->add_option("--out", out, "output file (default stdout)");
    app->add_option("--emit-plot-data", plot, "write whitespace-separated x/y columns for plotting");
  }
  void write(const json& j) const { io::write_text(out, j.dump(2) + "\n"); }
  void write_plot(const std::vector<std::pair<double, double>>& xy, const std::string& header) const {
    if (plot.empty()) return;
    std::string text = "# " + header + "\n";
    for (const auto& [x, y] : xy) text += io::format_double(x) + " " + io::format_double(y) + "\n";
    io::write_text(plot, text);
  }
};

// ---------------------------------------------------------------------------
// build

struct BuildArgs {
  std::string model;
  std::vector<int> extent;
  int size = 0;
  std::string generator = "lattice";
  double jitter = 0.0;
  std::uint64_t geometry_seed = 0;
  std::string points_file;
  std::string boundary = "open";
  double fermi = 0.0;
  std::vector<std::string> params;
};

geometry::PointSetPtr build_points(const BuildArgs& a, int dim) {
  if (!a.points_file.empty()) return std::make_shared<const geometry::PointSet>(io::pointset_from_json(io::read_json_file(a.points_file)));
  std::vector<int> ext = a.extent;
  if (ext.empty()) {
    if (a.size <= 0) throw UsageError("give --size, --n, --extent or --points");
    ext.assign(static_cast<std::size_t>(dim), a.size);
  }
  if (static_cast<int>(ext.size()) != dim) throw UsageError("--extent needs " + std::to_string(dim) + " entries");
  for (int e : ext)
    if (e < 1) throw UsageError("extent entries must be positive");
  if (a.generator == "lattice") return std::make_shared<const geometry::PointSet>(geometry::generate(geometry::LatticeSpec{dim, ext, 1.0}));
  if (a.generator == "perturbed")
    return std::make_shared<const geometry::PointSet>(
        geometry::generate(geometry::PerturbedLatticeSpec{dim, ext, a.jitter, a.geometry_seed}));
  throw UsageError("unknown generator '" + a.generator + "' (lattice, perturbed)");
}

/// Model parameters come as "--name value" pairs after the known options.
models::ModelConfig build_config(const BuildArgs& a) {
  models::ModelConfig c{a.model, {}, a.boundary};
  auto defaults = models::model_defaults(a.model);
  const std::vector<std::string> common = {"W", "seed", "decay", "cutoff"};
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    std::string key = a.params[i];
    std::string value;
    if (key.rfind("--", 0) != 0) throw UsageError("unexpected argument '" + key + "'");
    key = key.substr(2);
    if (auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (i + 1 >= a.params.size()) throw UsageError("parameter --" + key + " needs a value");
      value = a.params[++i];
    }
    if (!defaults.count(key) && std::find(common.begin(), common.end(), key) == common.end()) {
      std::string known;
      for (const auto& [k, v] : defaults) known += " " + k;
      throw UsageError("model '" + a.model + "' has no parameter '" + key + "'; known:" + known + " W seed decay cutoff");
    }
    c.params[key] = parse_list(value, key.c_str()).at(0);
  }
  return c;
}

int cmd_build(const BuildArgs& a, const Output& o) {
  int dim = models::model_dimension(a.model);
  auto cfg = build_config(a);
  auto model = models::build_model(cfg, build_points(a, dim));
  auto rep = sym::verify_symmetry(model.H, model.spec, 1e-8);
  if (!rep.pass) throw ComputationError("built operator violates its symmetries");
  o.write(io::operator_to_json(model.H, model.spec, model.config, a.fermi));
  return 0;
}

// ---------------------------------------------------------------------------
// loading a model file

struct Loaded {
  io::OperatorFile file;
  sym::SymmetrySpec spec;
};

Loaded load(const std::string& path) {
  Loaded l{io::operator_from_json(io::read_json_file(path)), {}};
  l.spec = l.file.spec.value_or(sym::no_symmetry());
  return l;
}

BulkSystem load_bulk(const std::string& path) {
  auto l = load(path);
  return make_bulk(l.file.H, l.spec, l.file.fermi, l.file.recipe);
}

// ---------------------------------------------------------------------------
// index

int cmd_index(const std::string& file, std::string formula, const std::string& windows, const std::string& csv,
              const Output& o) {
  BulkSystem bulk = load_bulk(file);
  const auto& ps = *bulk.points();
  auto w = windows.empty() ? idx::default_windows(ps) : parse_list(windows, "--windows");
  auto label = sym::classify(bulk.spec);
  const int d = ps.dim();
  if (formula == "auto") {
    if (label == sym::CartanLabel::A && d == 2) formula = "chern_even";
    else if (label == sym::CartanLabel::AIII && (d == 1 || d == 3)) formula = "chern_odd";
    else if (label == sym::CartanLabel::AII && d == 2) formula = "kane_mele";
    else if (label == sym::CartanLabel::D && d == 1) formula = "majorana";
    else throw UsageError("no bulk formula for class " + sym::to_string(label) + " in d = " + std::to_string(d));
  }
  idx::IndexReport r;
  if (formula == "chern_even") {
    r = idx::chern_even(idx::negative_projection(sym::symmetric_flatten(bulk.H, bulk.gap, bulk.spec)), w);
  } else if (formula == "chern_odd") {
    r = idx::chern_odd(sym::symmetric_flatten(bulk.H, bulk.gap, bulk.spec), bulk.spec, w);
  } else if (formula == "kane_mele") {
    r = idx::kane_mele(bulk.H, bulk.spec, w, bulk.fermi);
  } else if (formula == "majorana") {
    if (!bulk.recipe) throw UsageError("majorana formula needs a model file with a recipe");
    r = idx::majorana_number(*bulk.recipe, bulk.points());
  } else {
    throw UsageError("unknown formula '" + formula + "' (auto, chern_even, chern_odd, kane_mele, majorana)");
  }
  json j = io::to_json(r);
  j["label"] = sym::to_string(label);
  j["gap"] = io::to_json(bulk.gap);
  o.write(j);
  if (!csv.empty()) {
    std::string text = io::csv_row({"formula", "label", "raw", "snapped", "error"});
    text += io::csv_row({formula, sym::to_string(label), io::format_double(r.raw), r.snapped_text(), io::format_double(r.error)});
    io::write_text(csv, text);
  }
  std::vector<std::pair<double, double>> xy;
  for (std::size_t k = 0; k < r.windows.size() && k < r.window_values.size(); ++k) xy.emplace_back(r.windows[k], r.window_values[k]);
  o.write_plot(xy, "window value");
  return 0;
}

// ---------------------------------------------------------------------------
// cut flags shared by edge-index and verify-bec

struct CutArgs {
  std::string normal;
  std::optional<double> offset, thickness, depth;

  void add(CLI::App* app) {
    app->add_option("--normal", normal, "cut normal, comma separated (default e_1)");
    app->add_option("--offset", offset, "plus side is <normal, x> >= offset (default through the sample centre)");
    app->add_option("--thickness", thickness, "interface thickness");
    app->add_option("--depth", depth, "depth of the edge strip");
  }

  geometry::Partition partition(const geometry::PointSet& ps) const {
    Eigen::VectorXd n = normal.empty() ? Eigen::VectorXd::Unit(ps.dim(), 0) : to_vector(parse_list(normal, "--normal"));
    if (n.size() != ps.dim()) throw UsageError("--normal needs " + std::to_string(ps.dim()) + " entries");
    if (!(n.norm() > 0)) throw UsageError("--normal must be nonzero");
    double off = offset.value_or(n.normalized().dot(ps.bounding_box().center()) * n.norm());
    return geometry::partition_halfspace(ps, n, off, thickness);
  }
};

int cmd_edge_index(const std::string& file, const CutArgs& cut, std::string formula, const std::string& delta_s,
                   const std::string& windows, bool sharp, const Output& o) {
  BulkSystem bulk = load_bulk(file);
  auto part = cut.partition(*bulk.points());
  EdgeSystem e = make_edge(bulk, part, cut.depth);
  auto label = sym::classify(bulk.spec);
  const int d = bulk.points()->dim();
  auto w = parse_list(windows, "--windows");
  if (formula == "auto") {
    if ((label == sym::CartanLabel::A || label == sym::CartanLabel::AII) && d == 2) formula = "conductance";
    else if (label == sym::CartanLabel::AIII && d == 1) formula = "fredholm";
    else if (label == sym::CartanLabel::AIII && d == 3) formula = "chiral3d";
    else if (label == sym::CartanLabel::D && d == 1) formula = "majorana";
    else throw UsageError("no edge formula for class " + sym::to_string(label) + " in d = " + std::to_string(d));
  }
  const double f = bulk.fermi, eps = bulk.gap.epsilon;
  idx::IndexReport r;
  json extra = json::object();
  if (formula == "conductance") {
    std::pair<double, double> delta{f - eps / 3, f + eps / 3};
    if (!delta_s.empty()) {
      auto v = parse_list(delta_s, "--delta");
      if (v.size() != 2) throw UsageError("--delta needs two numbers a,b");
      delta = {v[0], v[1]};
    }
    auto h = label == sym::CartanLabel::AII ? idx::spin_sector(e.H_hat, 1) : e.H_hat;
    r = idx::edge_conductance(h, e.geometry, delta, {f - eps, f + eps}, {.smooth_window = !sharp, .windows = w});
    if (label == sym::CartanLabel::AII) {
      r.is_z2 = true;
      r.group = "Z2";
      idx::snap(r);
    }
  } else if (formula == "winding") {
    auto s = sym::symmetric_flatten(bulk.H, bulk.gap, bulk.spec);
    auto b = mv_boundary(s, part);
    r = idx::edge_winding(*b.module, b.u_hat, e.geometry, w);
    extra = io::to_json(b);
  } else if (formula == "fredholm") {
    r = idx::edge_fredholm(e.H_hat, e.spec, e.geometry);
  } else if (formula == "majorana") {
    r = idx::edge_majorana(e.H_hat, e.geometry);
  } else if (formula == "chiral3d") {
    auto s = sym::symmetric_flatten(bulk.H, bulk.gap, bulk.spec);
    r = idx::edge_chiral_3d(ops::restrict_to(s, e.module), e.spec, e.geometry, w);
  } else {
    throw UsageError("unknown edge formula '" + formula + "' (auto, conductance, winding, fredholm, majorana, chiral3d)");
  }
  json j = io::to_json(r);
  j["label"] = sym::to_string(label);
  j["in_gap_states"] = e.in_gap_states;
  j["max_away_weight"] = e.max_away_weight;
  if (!extra.empty()) j["boundary_map"] = extra;
  o.write(j);
  std::vector<std::pair<double, double>> xy;
  for (std::size_t k = 0; k < r.windows.size() && k < r.window_values.size(); ++k) xy.emplace_back(r.windows[k], r.window_values[k]);
  o.write_plot(xy, "window value");
  return 0;
}

// ---------------------------------------------------------------------------
// verify-bec

struct BecArgs {
  std::string windows, edge_windows, truncation;
  int seeds = 0;
  std::uint64_t first_seed = 1;
  double fraction = 0.5;
  bool sharp = false;
  int jobs = 0;
};

int cmd_verify_bec(const std::string& file, const CutArgs& cut, const BecArgs& a, const Output& o) {
  BulkSystem bulk = load_bulk(file);
  auto part = cut.partition(*bulk.points());
  BecConfig c;
  c.windows = parse_list(a.windows, "--windows");
  c.edge_windows = parse_list(a.edge_windows, "--edge-windows");
  c.depth = cut.depth;
  c.smooth_window = !a.sharp;
  for (int k = 0; k < a.seeds; ++k) c.disorder_seeds.push_back(a.first_seed + static_cast<std::uint64_t>(k));
  c.disorder_fraction = a.fraction;
  c.truncation_radii = parse_list(a.truncation, "--truncation");
  c.jobs = a.jobs > 0 ? a.jobs : default_jobs();
  BecReport r = verify_bec(bulk, part, c);
  o.write(io::to_json(r));
  std::vector<std::pair<double, double>> xy;
  for (std::size_t k = 0; k < r.sweeps.size(); ++k)
    if (r.sweeps[k].bulk) xy.emplace_back(static_cast<double>(k), r.sweeps[k].bulk->raw);
  o.write_plot(xy, "sweep_entry bulk_raw");
  return r.pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// sweep

/// Config: {"model": {"name", "params", "boundary"}, "size" or "extent", "fermi",
///          "seeds": [...], "parameter": {"name": p, "values": [...]}, "windows": [...]}
int cmd_sweep(const std::string& config_path, int jobs, const std::string& out) {
  json cfg = io::read_json_file(config_path);
  if (!cfg.is_object() || !cfg.contains("model")) throw UsageError("sweep config needs a \"model\" object");
  models::ModelConfig base = io::model_config_from_json(cfg["model"]);
  BuildArgs ba;
  ba.model = base.name;
  if (cfg.contains("size")) ba.size = cfg["size"].get<int>();
  if (cfg.contains("extent")) ba.extent = cfg["extent"].get<std::vector<int>>();
  const int dim = models::model_dimension(base.name);
  auto points = build_points(ba, dim);
  double fermi = cfg.value("fermi", 0.0);
  std::vector<double> windows = cfg.value("windows", std::vector<double>{});
  std::vector<std::uint64_t> seeds = cfg.value("seeds", std::vector<std::uint64_t>{});
  std::string pname;
  std::vector<double> pvalues;
  if (cfg.contains("parameter")) {
    pname = cfg["parameter"].at("name").get<std::string>();
    pvalues = cfg["parameter"].at("values").get<std::vector<double>>();
  }
  if (seeds.empty() && !pvalues.empty()) seeds.push_back(static_cast<std::uint64_t>(base.get("seed", 0.0)));
  if (pvalues.empty() && !seeds.empty()) {
    pname = "W";
    pvalues.push_back(base.get("W", 0.0));
  }
  struct Task {
    std::uint64_t seed;
    double value;
  };
  std::vector<Task> tasks;
  for (double v : pvalues)
    for (auto s : seeds) tasks.push_back({s, v});

  auto run = [&](Task t) -> std::vector<std::string> {
    models::ModelConfig c = base;
    c.params["seed"] = static_cast<double>(t.seed);
    c.params[pname] = t.value;
    try {
      auto model = models::build_model(c, points);
      auto bulk = make_bulk(model, fermi);
      const auto& ps = *bulk.points();
      auto w = windows.empty() ? idx::default_windows(ps) : windows;
      auto label = sym::classify(bulk.spec);
      idx::IndexReport r;
      if (label == sym::CartanLabel::A && dim == 2)
        r = idx::chern_even(idx::negative_projection(sym::symmetric_flatten(bulk.H, bulk.gap, bulk.spec)), w);
      else if (label == sym::CartanLabel::AIII && dim != 2)
        r = idx::chern_odd(sym::symmetric_flatten(bulk.H, bulk.gap, bulk.spec), bulk.spec, w);
      else if (label == sym::CartanLabel::AII && dim == 2)
        r = idx::kane_mele(bulk.H, bulk.spec, w, fermi);
      else if (label == sym::CartanLabel::D && dim == 1)
        r = idx::majorana_number(c, points);
      else
        throw UsageError("no bulk formula for class " + sym::to_string(label));
      return {std::to_string(t.seed), pname, io::format_double(t.value), io::format_double(bulk.gap.epsilon),
              io::format_double(r.raw), r.snapped_text(), io::format_double(r.error), ""};
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      return {std::to_string(t.seed), pname, io::format_double(t.value), "", "", "", "", e.what()};
    }
  };

  std::vector<std::vector<std::string>> rows(tasks.size());
  const std::size_t step = static_cast<std::size_t>(std::max(1, jobs));
  for (std::size_t start = 0; start < tasks.size(); start += step) {
    std::vector<std::future<std::vector<std::string>>> batch;
    for (std::size_t k = start; k < std::min(tasks.size(), start + step); ++k)
      batch.push_back(std::async(step > 1 ? std::launch::async : std::launch::deferred, run, tasks[k]));
    for (std::size_t k = 0; k < batch.size(); ++k) rows[start + k] = batch[k].get();
  }
  std::string text = io::csv_row({"seed", "parameter", "value", "epsilon", "raw", "snapped", "error", "failure"});
  for (const auto& r : rows) text += io::csv_row(r);
  io::write_text(out, text);
  return 0;
}

// ---------------------------------------------------------------------------
// spectrum

int cmd_spectrum(const std::string& file, const Output& o) {
  auto l = load(file);
  auto cert = ops::certify_gap(l.file.H, {.fermi = l.file.fermi});
  Eigen::VectorXd ev = cert.eigensystem ? cert.eigensystem->values : spectral::eigvalsh(l.file.H.dense());
  json j;
  j["dimension"] = ev.size();
  j["eigenvalues"] = std::vector<double>(ev.data(), ev.data() + ev.size());
  j["gap"] = io::to_json(cert);
  j["label"] = sym::to_string(sym::classify(l.spec));
  o.write(j);
  std::vector<std::pair<double, double>> xy;
  for (Eigen::Index k = 0; k < ev.size(); ++k) xy.emplace_back(static_cast<double>(k), ev[k]);
  o.write_plot(xy, "index eigenvalue");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Index computations for gapped tight-binding Hamiltonians on Delone samples"};
  app.require_subcommand(1);
  int jobs = 0;
  app.add_option("--jobs", jobs, "parallel workers (default ROELAB_JOBS or 1)");

  BuildArgs ba;
  Output bo;
  auto* build = app.add_subcommand("build", "build a library model and write its operator file");
  build->add_option("--model", ba.model, "model name")->required();
  build->add_option("--size,--n", ba.size, "points per axis");
  build->add_option("--extent", ba.extent, "points per axis, one value per axis")->delimiter(',');
  build->add_option("--generator", ba.generator, "lattice or perturbed");
  build->add_option("--jitter", ba.jitter, "perturbed lattice jitter");
  build->add_option("--geometry-seed", ba.geometry_seed, "perturbed lattice seed");
  build->add_option("--points", ba.points_file, "point set JSON instead of a generator");
  build->add_option("--boundary", ba.boundary, "open, periodic or antiperiodic");
  build->add_option("--fermi", ba.fermi, "Fermi level stored in the file");
  build->allow_extras();
  bo.add(build);

  int T = 0, C = 0;
  bool P = false, cjson = false;
  auto* classify = app.add_subcommand("classify", "Cartan label of a symmetry combination");
  classify->add_option("--T", T, "T^2 = +1 or -1 (absent: no T)");
  classify->add_option("--C", C, "C^2 = +1 or -1 (absent: no C)");
  classify->add_flag("--P", P, "chiral symmetry only");
  classify->add_flag("--json", cjson, "JSON output");

  std::string label;
  int kd = 0, rotation = 0, cr = 0, tr = 0, pr = 0;
  bool reflection = false, kjson = false;
  std::string table;
  auto* kgroup = app.add_subcommand("kgroup", "K-group of a class in dimension d");
  kgroup->add_option("--label", label, "Cartan label")->required();
  kgroup->add_option("--d", kd, "dimension")->required();
  kgroup->add_option("--rotation", rotation, "C_k rotation symmetry order");
  kgroup->add_flag("--reflection", reflection, "reflection symmetry");
  kgroup->add_option("--CR", cr, "sign of CR = +-RC");
  kgroup->add_option("--TR", tr, "sign of TR = +-RT");
  kgroup->add_option("--PR", pr, "sign of PR = +-RP");
  kgroup->add_option("--group-table", table, "character table JSON of a point group");
  kgroup->add_flag("--json", kjson, "JSON output");

  std::string file, formula = "auto", windows, csv;
  Output io_;
  auto* index = app.add_subcommand("index", "bulk index of an operator file");
  index->add_option("--model-file", file, "operator JSON")->required()->check(CLI::ExistingFile);
  index->add_option("--formula", formula, "auto, chern_even, chern_odd, kane_mele, majorana");
  index->add_option("--windows", windows, "window half-widths, comma separated");
  index->add_option("--csv", csv, "also write a CSV row");
  io_.add(index);

  CutArgs cut;
  std::string eformula = "auto", delta, ewindows;
  bool sharp = false;
  Output eo;
  auto* edge = app.add_subcommand("edge-index", "edge index of the half-space compression");
  edge->add_option("--model-file", file, "operator JSON")->required()->check(CLI::ExistingFile);
  edge->add_option("--formula", eformula, "auto, conductance, winding, fredholm, majorana, chiral3d");
  edge->add_option("--delta", delta, "energy window a,b for the conductance");
  edge->add_option("--windows", ewindows, "edge window half-lengths, comma separated");
  edge->add_flag("--sharp", sharp, "sharp spectral projection instead of the smooth window");
  cut.add(edge);
  eo.add(edge);

  BecArgs bec;
  Output vo;
  auto* verify = app.add_subcommand("verify-bec", "bulk and edge index with optional stability sweeps");
  verify->add_option("--model-file", file, "operator JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--windows", bec.windows, "bulk windows");
  verify->add_option("--edge-windows", bec.edge_windows, "edge windows");
  verify->add_option("--disorder-seeds", bec.seeds, "number of disorder seeds");
  verify->add_option("--first-seed", bec.first_seed, "first disorder seed");
  verify->add_option("--disorder-fraction", bec.fraction, "disorder strength as a fraction of the gap");
  verify->add_option("--truncation", bec.truncation, "truncation radii, comma separated");
  verify->add_flag("--sharp", bec.sharp, "sharp spectral projection in the edge conductance");
  cut.add(verify);
  vo.add(verify);

  std::string sweep_cfg, sweep_out = "-";
  auto* sweep = app.add_subcommand("sweep", "bulk index over seeds and parameter values (CSV)");
  sweep->add_option("--config", sweep_cfg, "sweep config JSON")->required();
  sweep->add_option("--out", sweep_out, "CSV output (default stdout)");

  Output so;
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues and gap certificate");
  spectrum->add_option("--model-file", file, "operator JSON")->required()->check(CLI::ExistingFile);
  so.add(spectrum);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*build) {
      ba.params = build->remaining();
      return cmd_build(ba, bo);
    }
    if (*classify) {
      sym::SymmetrySpec s;
      if (T != 0) {
        if (T != 1 && T != -1) throw UsageError("--T must be +1 or -1");
        s.has_T = true, s.T_sq = T;
      }
      if (C != 0) {
        if (C != 1 && C != -1) throw UsageError("--C must be +1 or -1");
        s.has_C = true, s.C_sq = C;
      }
      if (P && (s.has_T || s.has_C)) throw UsageError("--P alone means a chiral symmetry without T or C");
      s.has_P = P || (s.has_T && s.has_C);
      auto l = sym::to_string(sym::classify(s));
      if (cjson) std::cout << json{{"label", l}}.dump() << "\n";
      else std::cout << l << "\n";
      return 0;
    }
    if (*kgroup) {
      auto l = sym::label_from_string(label);
      sym::KGroup g;
      int modes = (rotation != 0) + reflection + !table.empty();
      if (modes > 1) throw UsageError("choose at most one of --rotation, --reflection, --group-table");
      if (rotation != 0) {
        g = sym::kgroup_rotation(l, kd, rotation);
      } else if (reflection) {
        sym::SymmetrySpec s;
        switch (l) {
          case sym::CartanLabel::A: break;
          case sym::CartanLabel::AIII: s.has_P = true; break;
          case sym::CartanLabel::AI: s.has_T = true, s.T_sq = 1; break;
          case sym::CartanLabel::AII: s.has_T = true, s.T_sq = -1; break;
          case sym::CartanLabel::D: s.has_C = true, s.C_sq = 1; break;
          case sym::CartanLabel::C: s.has_C = true, s.C_sq = -1; break;
          case sym::CartanLabel::BDI: s.has_T = s.has_C = s.has_P = true, s.T_sq = 1, s.C_sq = 1; break;
          case sym::CartanLabel::DIII: s.has_T = s.has_C = s.has_P = true, s.T_sq = -1, s.C_sq = 1; break;
          case sym::CartanLabel::CII: s.has_T = s.has_C = s.has_P = true, s.T_sq = -1, s.C_sq = -1; break;
          case sym::CartanLabel::CI: s.has_T = s.has_C = s.has_P = true, s.T_sq = 1, s.C_sq = -1; break;
        }
        if (cr) s.CR_sign = cr;
        if (tr) s.TR_sign = tr;
        if (pr) s.PR_sign = pr;
        g = sym::kgroup_reflection(s, kd);
      } else if (!table.empty()) {
        g = sym::kgroup_group(l, kd, io::character_table_from_json(io::read_json_file(table)));
      } else {
        g = sym::kgroup_point(l, kd);
      }
      if (kjson) std::cout << io::to_json(g).dump() << "\n";
      else std::cout << g.render() << "\n";
      return 0;
    }
    if (*index) return cmd_index(file, formula, windows, csv, io_);
    if (*edge) return cmd_edge_index(file, cut, eformula, delta, ewindows, sharp, eo);
    if (*verify) {
      bec.jobs = jobs;
      return cmd_verify_bec(file, cut, bec, vo);
    }
    if (*sweep) return cmd_sweep(sweep_cfg, jobs > 0 ? jobs : default_jobs(), sweep_out);
    if (*spectrum) return cmd_spectrum(file, so);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ComputationError& e) {
    std::cerr << "computation failed: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "computation failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
