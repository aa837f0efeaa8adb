#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lgcps/core.hpp"

namespace lgcps {

class GridField;

// Pattern CSV:
//   # window xmin xmax ymin ymax
//   x,y
//   0.25,0.5
// The window may instead come from a sidecar "<stem>.window.json" holding
// {"xmin":..,"xmax":..,"ymin":..,"ymax":..}.
PointPattern read_pattern_csv(const std::filesystem::path& path);
PointPattern parse_pattern_csv(std::istream& in, const std::string& source_name,
                               const std::filesystem::path& sidecar = {});
void write_pattern_csv(const PointPattern& pattern, const std::filesystem::path& path);
void write_pattern_csv(const PointPattern& pattern, std::ostream& out);
std::filesystem::path window_sidecar_path(const std::filesystem::path& csv_path);

/// Row-major field dump, one grid row (fixed y) per line, lowest y first.
void write_field_csv(const GridField& field, const std::filesystem::path& path);

// Posterior sample CSV: header mu,sigma2,s,gamma,R then one draw per row.
void write_params_csv(const std::vector<ModelParams>& draws, const std::filesystem::path& path);
std::vector<ModelParams> read_params_csv(const std::filesystem::path& path);

// Prior JSON: either {"preset": "P1"} or one entry per parameter,
//   {"mu": {"family": "uniform", "params": [3, 6], "truncation": [3, 6]}, ...}
// A missing "truncation" defaults to the support of the family (uniform: [a, b]).
PriorSpec parse_prior_json(const std::string& text);
std::string prior_to_json(const PriorSpec& prior);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace lgcps
