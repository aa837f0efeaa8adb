#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lgcps/core.hpp"

namespace lgcps {

/// A functional summary on an increasing grid of distances. Entries where the
/// estimator is undefined carry defined[k] == false and a NaN value.
struct Curve {
  std::vector<double> r;
  std::vector<double> values;
  std::vector<bool> defined;

  std::size_t size() const noexcept { return r.size(); }
  bool all_defined() const noexcept;
  static Curve undefined(std::vector<double> r);
};

/// r_k = k * r_max / count for k = 1..count.
std::vector<double> regular_r_grid(double r_max, int count);

/// Isotropic edge-correction weight: reciprocal of the fraction of the circle
/// of radius d about xi that lies inside the window. nullopt when no part of
/// the circle lies inside.
std::optional<double> ripley_weight(Point xi, double d, const Window& window);

Curve k_function(const PointPattern& pattern, const std::vector<double>& r_grid);
Curve l_function(const PointPattern& pattern, const std::vector<double>& r_grid);

/// Border-corrected empty space function over a test_grid x test_grid lattice
/// of cell-center locations.
Curve empty_space_F(const PointPattern& pattern, const std::vector<double>& r_grid,
                    int test_grid = 128);
/// Border-corrected nearest-neighbour distance distribution.
Curve nearest_neighbour_G(const PointPattern& pattern, const std::vector<double>& r_grid);
/// (1 - G) / (1 - F) on the common grid. Defined on the longest prefix where
/// F and G are defined and F < 1.
Curve j_function(const Curve& F, const Curve& G);
Curve j_function(const PointPattern& pattern, const std::vector<double>& r_grid);

/// Default upper limit for J: sqrt(1 / (pi * intensity)) capped at 0.2 times
/// the shorter window side.
double default_j_rmax(const PointPattern& pattern);

struct QuadratStats {
  double c_max = 0.0;
  double c_min = 0.0;
  double c_logvar = 0.0;
  std::vector<std::size_t> counts;  // row-major, q x q
};

/// Splits the window into q x q congruent cells and summarizes the fractions
/// n(cell) / n. c_logvar is the log of the sample variance (denominator
/// q^2 - 1); -inf when the fractions are all equal.
QuadratStats quadrat_stats(const PointPattern& pattern, int q);

struct SummaryOptions {
  int n_r = 40;
  double r_fraction = 0.2;
  std::vector<int> quadrat_orders = {2, 3, 4, 5};
  /// When > 0, L_max / L_min / L_argmin use their own grid of extreme_n_r
  /// points on (0, extreme_r_max]; otherwise the L_1..L_m grid.
  double extreme_r_max = 0.0;
  int extreme_n_r = 40;

  void validate() const;
  std::size_t dimension() const noexcept { return 4 + n_r + 3 * quadrat_orders.size(); }
};

struct SummaryVector {
  std::vector<double> values;
  bool finite = false;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

std::vector<std::string> summary_names(const SummaryOptions& options = {});

/// Entries: n_log, L_max, L_min, L_argmin, L_1..L_m, then (C_max, C_min,
/// C_logvar) per quadrat order. L statistics refer to L(r) - r.
SummaryVector summary_vector(const PointPattern& pattern, const SummaryOptions& options = {});

}  // namespace lgcps
