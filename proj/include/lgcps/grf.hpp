#pragma once

#include <cstdint>
#include <vector>

#include "lgcps/core.hpp"

namespace lgcps {

/// Piecewise-constant realization of a Gaussian random field on an nx x ny
/// grid of congruent cells covering the window. values are row-major with
/// index iy * nx + ix; cell (ix, iy) has its lower-left corner at
/// (xmin + ix * dx, ymin + iy * dy).
class GridField {
 public:
  GridField(Window window, int nx, int ny, std::vector<double> values);

  static GridField constant(Window window, int nx, int ny, double value);

  const Window& window() const noexcept { return window_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double dx() const noexcept { return window_.width() / nx_; }
  double dy() const noexcept { return window_.height() / ny_; }
  double cell_area() const noexcept { return dx() * dy(); }
  std::size_t cell_count() const noexcept { return values_.size(); }

  const std::vector<double>& values() const noexcept { return values_; }
  double value(int ix, int iy) const { return values_[static_cast<std::size_t>(iy) * nx_ + ix]; }
  Point center(int ix, int iy) const;
  /// Index of the cell containing p (cells are closed on their lower edges;
  /// the window's upper edges belong to the last row / column).
  std::size_t cell_of(Point p) const noexcept;

 private:
  Window window_;
  int nx_, ny_;
  std::vector<double> values_;
};

enum class GrfMethod { Auto, Cholesky, CirculantEmbedding };

struct GrfOptions {
  GrfMethod method = GrfMethod::Auto;
  /// Auto uses dense Cholesky up to this many cells, circulant embedding above.
  std::size_t cholesky_max_cells = 256;
  /// Largest torus padding factor tried before falling back to Cholesky.
  int max_padding = 8;
};

struct GrfDiagnostics {
  GrfMethod method_used = GrfMethod::Cholesky;
  int padding = 0;
  double jitter = 0.0;
  double min_eigenvalue = 0.0;
};

/// Draws cell-center values from N(mu, sigma2 * exp(-d / s)).
GridField simulate_grf(const Window& window, int nx, int ny, double mu, double sigma2, double s,
                       std::uint64_t seed, const GrfOptions& options = {},
                       GrfDiagnostics* diagnostics = nullptr);
GridField simulate_grf(const Window& window, int nx, int ny, double mu, double sigma2, double s,
                       Rng& rng, const GrfOptions& options = {},
                       GrfDiagnostics* diagnostics = nullptr);

/// Value of the cell containing u. Throws if u lies outside the window.
double field_at(const GridField& field, Point u);

/// Integral of exp(z) over the window.
double integrate_exp(const GridField& field);

/// Sampler for the density proportional to exp(z) over the window.
class ExpDensity {
 public:
  explicit ExpDensity(GridField field);

  const GridField& field() const noexcept { return field_; }
  /// log of the integral of exp(z); finite even when the integral overflows.
  double log_integral() const noexcept { return log_integral_; }
  double integral() const noexcept { return std::exp(log_integral_); }
  double cell_probability(std::size_t cell) const;
  Point sample(Rng& rng) const;

 private:
  GridField field_;
  double log_integral_;
  std::vector<double> cumulative_;
};

Point sample_from_exp_density(const GridField& field, std::uint64_t seed);

}  // namespace lgcps
