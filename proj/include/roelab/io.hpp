#pragma once

#include "roelab/bulkedge.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace roelab::io {

using json = nlohmann::json;

/// {"dim": d, "window": [[lo, hi], ...], "points": [[id, x, y, ...], ...]}
json to_json(const geometry::PointSet& ps);
geometry::PointSet pointset_from_json(const json& j);

/// Complex matrix as nested [re, im] pairs.
json matrix_to_json(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd matrix_from_json(const json& j);

/// On-site symmetry data; point-group actions are not serialized.
json to_json(const sym::SymmetrySpec& spec);
sym::SymmetrySpec spec_from_json(const json& j);

json to_json(const models::ModelConfig& c);
models::ModelConfig model_config_from_json(const json& j);

/// Operator file: {"module": {...}, "hermitian": b, "propagation": R, "blocks": [[x, y, block]], ...}
/// with optional "spec", "recipe" and "fermi".
struct OperatorFile {
  ops::ControlledOperator H;
  std::optional<sym::SymmetrySpec> spec;
  std::optional<models::ModelConfig> recipe;
  double fermi = 0.0;
};

json operator_to_json(const ops::ControlledOperator& h, const std::optional<sym::SymmetrySpec>& spec = std::nullopt,
                      const std::optional<models::ModelConfig>& recipe = std::nullopt, double fermi = 0.0);
OperatorFile operator_from_json(const json& j);

/// {"raw", "snapped" (integer, "Z2:k" or null), "group", "error", "formula", "windows", ...}
json to_json(const idx::IndexReport& r);
json to_json(const sym::KGroup& g);
json to_json(const ops::GapCertificate& g);
json to_json(const BoundaryMap& b);
/// {"bulk", "edge", "pass", "sweeps", ...}
json to_json(const BecReport& r);

/// {"order": n, "classes": [{"size": s, "square_class": j}], "chars": [[[re, im], ...], ...]}
json to_json(const sym::CharacterTable& ct);
sym::CharacterTable character_table_from_json(const json& j);

json read_json_file(const std::string& path);
/// Writes to `path`, or to stdout when path is "-".
void write_text(const std::string& path, const std::string& text);

/// RFC 4180 quoting for a single CSV field.
std::string csv_field(const std::string& s);
std::string csv_row(const std::vector<std::string>& fields);
/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace roelab::io
