#pragma once

#include "roelab/operators.hpp"
#include "roelab/symmetry.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace roelab::models {

/// Model name, numeric parameters and boundary condition ("open", "periodic", "antiperiodic").
/// Common parameters: W (on-site disorder strength), seed, decay and cutoff (distance-dependent
/// hopping on perturbed samples).
struct ModelConfig {
  std::string name;
  std::map<std::string, double> params;
  std::string boundary = "open";

  double get(const std::string& key, double fallback) const;
};

struct Model {
  ModelConfig config;
  geometry::PointSetPtr points;
  ops::ModulePtr module;
  ops::ControlledOperator H;
  sym::SymmetrySpec spec;
};

/// ssh, kitaev, qwz, qwz_lr, harper, haldane, kane_mele, ti3d, aiii3d.
std::vector<std::string> model_names();
/// Spatial dimension the model is defined in.
int model_dimension(const std::string& name);
/// Parameter names accepted by a model (besides the common ones), with defaults.
std::map<std::string, double> model_defaults(const std::string& name);

Model build_model(const ModelConfig& config, geometry::PointSetPtr points);

/// Random on-site Hermitian blocks projected onto the commutant of the symmetries in `spec`
/// (T, C, P) and scaled so that every block has operator norm at most `strength`.
ops::ControlledOperator symmetric_disorder(const ops::ModulePtr& module, const sym::SymmetrySpec& spec,
                                           double strength, std::uint64_t seed);

/// Integer lattice coordinates of every site (rounded positions).
std::vector<Eigen::VectorXi> lattice_indices(const geometry::PointSet& ps);

}  // namespace roelab::models
