#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lgcps/random.hpp"

namespace lgcps {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Euclidean distance. Every distance comparison in the library goes through
/// this function so that ties at exactly R are classified consistently.
inline double distance(Point a, Point b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

/// Closed axis-aligned rectangle.
class Window {
 public:
  Window(double xmin, double xmax, double ymin, double ymax);

  static Window unit_square() { return Window(0.0, 1.0, 0.0, 1.0); }

  double xmin() const noexcept { return xmin_; }
  double xmax() const noexcept { return xmax_; }
  double ymin() const noexcept { return ymin_; }
  double ymax() const noexcept { return ymax_; }
  double width() const noexcept { return xmax_ - xmin_; }
  double height() const noexcept { return ymax_ - ymin_; }
  double area() const noexcept { return width() * height(); }
  double shorter_side() const noexcept { return std::min(width(), height()); }

  bool contains(Point p) const noexcept {
    return p.x >= xmin_ && p.x <= xmax_ && p.y >= ymin_ && p.y <= ymax_;
  }
  /// Distance from p to the window boundary (p assumed inside).
  double boundary_distance(Point p) const noexcept;

  friend bool operator==(const Window&, const Window&) = default;

 private:
  double xmin_, xmax_, ymin_, ymax_;
};

class PointPattern {
 public:
  explicit PointPattern(Window window, std::vector<Point> points = {});

  const Window& window() const noexcept { return window_; }
  std::span<const Point> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }

 private:
  Window window_;
  std::vector<Point> points_;
};

struct ModelParams {
  double mu = 0.0;
  double sigma2 = 0.0;
  double s = 1.0;
  double gamma = 1.0;
  double R = 0.01;

  void validate() const;
  std::array<double, 5> to_array() const { return {mu, sigma2, s, gamma, R}; }
  static ModelParams from_array(const std::array<double, 5>& a) {
    return {a[0], a[1], a[2], a[3], a[4]};
  }
  double operator[](std::size_t j) const { return to_array()[j]; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

inline constexpr std::array<std::string_view, 5> kParamNames = {"mu", "sigma2", "s", "gamma", "R"};

enum class Model { LgcpStrauss = 0, Lgcp = 1, Strauss = 2 };

std::string_view model_name(Model m);
Model model_from_name(std::string_view name);
/// Indices into ModelParams of the parameters a model actually uses.
std::vector<std::size_t> free_parameters(Model m);

enum class Family { Uniform, Normal, Gamma, Beta };

std::string_view family_name(Family f);
Family family_from_name(std::string_view name);

/// One prior marginal. Normal(a, b) has mean a and variance b; Gamma(a, b) has
/// shape a and rate b. Draws are restricted to [lo, hi] by rejection.
struct Marginal {
  Family family = Family::Uniform;
  double a = 0.0;
  double b = 1.0;
  double lo = 0.0;
  double hi = 1.0;

  void validate() const;
  double draw_untruncated(Rng& rng) const;
  double draw(Rng& rng) const;
  /// Untruncated cumulative distribution function.
  double cdf(double x) const;
  /// Cumulative distribution function of the truncated marginal.
  double truncated_cdf(double x) const;
};

struct PriorSpec {
  std::array<Marginal, 5> marginals;

  void validate() const;
  ModelParams draw(Rng& rng) const;
};

ModelParams sample_prior(const PriorSpec& prior, std::uint64_t seed);

/// Prior draw for a specific model: parameters the model does not use are
/// pinned (gamma = 1 for the LGCP, sigma2 = 0 for the Strauss process).
ModelParams sample_model_params(Model model, const PriorSpec& prior, Rng& rng);

PriorSpec prior_p1();
PriorSpec prior_p2();
PriorSpec prior_p3();
/// Uniform priors for the 125 x 188 m oak window.
PriorSpec oak_prior_preset();
PriorSpec prior_preset(std::string_view name);

Eigen::MatrixXd pairwise_distances(const PointPattern& pattern);
std::size_t close_pair_count(const PointPattern& pattern, double R);
/// #{x_i : |u - x_i| <= R}, not counting one copy of u if u is in the pattern.
std::size_t neighbour_count(Point u, const PointPattern& pattern, double R);

/// Uniform bucket grid over a window with cells no smaller than `min_cell`.
/// Any two points within distance min_cell lie in adjacent cells.
class CellIndex {
 public:
  CellIndex(const Window& window, double min_cell, int max_cells_per_side = 128);

  void insert(std::uint32_t id, Point p);
  void erase(std::uint32_t id);
  /// Renames id `from` to `to` (used after swap-removal in the owner's array).
  void relabel(std::uint32_t from, std::uint32_t to);

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }

  /// Calls f(id) for every id in the 3x3 block of cells around u.
  template <typename F>
  void for_each_near(Point u, F&& f) const {
    const int cx = cell_x(u.x);
    const int cy = cell_y(u.y);
    for (int j = std::max(0, cy - 1); j <= std::min(ny_ - 1, cy + 1); ++j)
      for (int i = std::max(0, cx - 1); i <= std::min(nx_ - 1, cx + 1); ++i)
        for (std::uint32_t id : cells_[static_cast<std::size_t>(j) * nx_ + i]) f(id);
  }

  int cell_x(double x) const noexcept;
  int cell_y(double y) const noexcept;

 private:
  double x0_, y0_, cw_, ch_;
  int nx_, ny_;
  std::vector<std::vector<std::uint32_t>> cells_;
  std::vector<std::uint32_t> cell_of_;
  std::vector<std::uint32_t> slot_of_;
};

}  // namespace lgcps
