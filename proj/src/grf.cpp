#include "lgcps/grf.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

#include <fftw3.h>

#include "lgcps/error.hpp"

namespace lgcps {

GridField::GridField(Window window, int nx, int ny, std::vector<double> values)
    : window_(window), nx_(nx), ny_(ny), values_(std::move(values)) {
  if (nx < 2 || ny < 2) throw InvalidArgument("field grid needs nx, ny >= 2");
  if (values_.size() != static_cast<std::size_t>(nx) * ny)
    throw InvalidArgument("field value count does not match grid dimensions");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidArgument("field values must be finite");
}

GridField GridField::constant(Window window, int nx, int ny, double value) {
  return GridField(window, nx, ny, std::vector<double>(static_cast<std::size_t>(nx) * ny, value));
}

Point GridField::center(int ix, int iy) const {
  return {window_.xmin() + (ix + 0.5) * dx(), window_.ymin() + (iy + 0.5) * dy()};
}

std::size_t GridField::cell_of(Point p) const noexcept {
  const int ix = std::clamp(static_cast<int>(std::floor((p.x - window_.xmin()) / dx())), 0, nx_ - 1);
  const int iy = std::clamp(static_cast<int>(std::floor((p.y - window_.ymin()) / dy())), 0, ny_ - 1);
  return static_cast<std::size_t>(iy) * nx_ + ix;
}

namespace {

struct FftwFree {
  void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

FftwBuffer make_buffer(std::size_t n) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (!p) throw std::bad_alloc();
  return FftwBuffer(p);
}

// In-place forward 2-D transforms, one plan per size. FFTW planning is not
// thread-safe; execution with fftw_execute_dft is.
fftw_plan forward_plan(int rows, int cols) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto it = plans.find({rows, cols});
  if (it != plans.end()) return it->second;
  FftwBuffer scratch = make_buffer(static_cast<std::size_t>(rows) * cols);
  fftw_plan plan =
      fftw_plan_dft_2d(rows, cols, scratch.get(), scratch.get(), FFTW_FORWARD, FFTW_ESTIMATE);
  if (!plan) throw NumericalError("FFTW could not create a plan");
  plans.emplace(std::make_pair(rows, cols), plan);
  return plan;
}

double exp_cov(double sigma2, double s, double d) { return sigma2 * std::exp(-d / s); }

// Eigenvalues of the block-circulant embedding on a (pad*ny) x (pad*nx) torus.
std::vector<double> embedding_eigenvalues(int my, int mx, double dx, double dy, double sigma2,
                                          double s) {
  const std::size_t m = static_cast<std::size_t>(my) * mx;
  FftwBuffer buf = make_buffer(m);
  for (int j = 0; j < my; ++j) {
    const double hy = std::min(j, my - j) * dy;
    for (int i = 0; i < mx; ++i) {
      const double hx = std::min(i, mx - i) * dx;
      auto& c = buf[static_cast<std::size_t>(j) * mx + i];
      c[0] = exp_cov(sigma2, s, std::sqrt(hx * hx + hy * hy));
      c[1] = 0.0;
    }
  }
  fftw_execute_dft(forward_plan(my, mx), buf.get(), buf.get());
  std::vector<double> lambda(m);
  for (std::size_t k = 0; k < m; ++k) lambda[k] = buf[k][0];
  return lambda;
}

std::vector<double> sample_circulant(const std::vector<double>& lambda, int my, int mx, int nx,
                                     int ny, double mu, Rng& rng) {
  const std::size_t m = lambda.size();
  FftwBuffer buf = make_buffer(m);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double scale = std::sqrt(std::max(lambda[k], 0.0) * inv_m);
    buf[k][0] = scale * normal(rng);
    buf[k][1] = scale * normal(rng);
  }
  fftw_execute_dft(forward_plan(my, mx), buf.get(), buf.get());
  std::vector<double> values(static_cast<std::size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      values[static_cast<std::size_t>(iy) * nx + ix] =
          mu + buf[static_cast<std::size_t>(iy) * mx + ix][0];
  return values;
}

std::vector<double> sample_cholesky(const Window& window, int nx, int ny, double mu, double sigma2,
                                    double s, Rng& rng, GrfDiagnostics& diag) {
  const GridField geometry = GridField::constant(window, nx, ny, 0.0);
  const Eigen::Index n = static_cast<Eigen::Index>(nx) * ny;
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const Point pa = geometry.center(static_cast<int>(a % nx), static_cast<int>(a / nx));
    cov(a, a) = sigma2;
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const Point pb = geometry.center(static_cast<int>(b % nx), static_cast<int>(b / nx));
      cov(a, b) = cov(b, a) = exp_cov(sigma2, s, distance(pa, pb));
    }
  }
  double jitter = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  while (llt.info() != Eigen::Success) {
    jitter = jitter == 0.0 ? 1e-10 * sigma2 : jitter * 10.0;
    if (jitter > 1e-4 * sigma2)
      throw NumericalError("covariance factorization failed even with jitter 1e-4 * sigma2");
    Eigen::MatrixXd jittered = cov;
    jittered.diagonal().array() += jitter;
    llt.compute(jittered);
  }
  diag.jitter = jitter;
  Eigen::VectorXd z(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
  const Eigen::VectorXd v = llt.matrixL() * z;
  std::vector<double> values(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = mu + v(i);
  return values;
}

}  // namespace

GridField simulate_grf(const Window& window, int nx, int ny, double mu, double sigma2, double s,
                       std::uint64_t seed, const GrfOptions& options, GrfDiagnostics* diagnostics) {
  Rng rng(seed);
  return simulate_grf(window, nx, ny, mu, sigma2, s, rng, options, diagnostics);
}

GridField simulate_grf(const Window& window, int nx, int ny, double mu, double sigma2, double s,
                       Rng& rng, const GrfOptions& options, GrfDiagnostics* diagnostics) {
  if (nx < 2 || ny < 2) throw InvalidArgument("field grid needs nx, ny >= 2");
  if (!(sigma2 >= 0.0)) throw InvalidArgument("sigma2 must be >= 0");
  if (!(s > 0.0)) throw InvalidArgument("s must be > 0");
  GrfDiagnostics diag;
  if (sigma2 == 0.0) {
    if (diagnostics) *diagnostics = diag;
    return GridField::constant(window, nx, ny, mu);
  }
  const std::size_t cells = static_cast<std::size_t>(nx) * ny;
  bool use_cholesky = options.method == GrfMethod::Cholesky ||
                      (options.method == GrfMethod::Auto && cells <= options.cholesky_max_cells);
  std::vector<double> values;
  if (!use_cholesky) {
    const double dx = window.width() / nx;
    const double dy = window.height() / ny;
    bool done = false;
    for (int pad : {2, 3, 4, 6, 8, 12, 16}) {
      if (pad > options.max_padding || done) break;
      const int mx = pad * nx;
      const int my = pad * ny;
      const auto lambda = embedding_eigenvalues(my, mx, dx, dy, sigma2, s);
      const double lmax = *std::max_element(lambda.begin(), lambda.end());
      const double lmin = *std::min_element(lambda.begin(), lambda.end());
      diag.min_eigenvalue = lmin;
      diag.padding = pad;
      // Round-off produces eigenvalues of order -1e-13 * lmax; anything larger
      // means the embedding is genuinely indefinite.
      if (lmin >= -1e-10 * lmax) {
        values = sample_circulant(lambda, my, mx, nx, ny, mu, rng);
        diag.method_used = GrfMethod::CirculantEmbedding;
        done = true;
      }
    }
    use_cholesky = !done;
  }
  if (use_cholesky) {
    values = sample_cholesky(window, nx, ny, mu, sigma2, s, rng, diag);
    diag.method_used = GrfMethod::Cholesky;
  }
  if (diagnostics) *diagnostics = diag;
  return GridField(window, nx, ny, std::move(values));
}

double field_at(const GridField& field, Point u) {
  if (!field.window().contains(u)) throw InvalidArgument("field_at: point outside the window");
  return field.values()[field.cell_of(u)];
}

double integrate_exp(const GridField& field) {
  const auto& v = field.values();
  const double vmax = *std::max_element(v.begin(), v.end());
  if (vmax <= 500.0) {
    double sum = 0.0;
    for (double x : v) sum += std::exp(x);
    return sum * field.cell_area();
  }
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - vmax);
  return std::exp(vmax + std::log(sum * field.cell_area()));
}

ExpDensity::ExpDensity(GridField field) : field_(std::move(field)) {
  const auto& v = field_.values();
  const double vmax = *std::max_element(v.begin(), v.end());
  cumulative_.resize(v.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    acc += std::exp(v[k] - vmax);
    cumulative_[k] = acc;
  }
  log_integral_ = vmax + std::log(acc * field_.cell_area());
  for (double& c : cumulative_) c /= acc;
  cumulative_.back() = 1.0;
}

double ExpDensity::cell_probability(std::size_t cell) const {
  return cell == 0 ? cumulative_[0] : cumulative_[cell] - cumulative_[cell - 1];
}

Point ExpDensity::sample(Rng& rng) const {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t cell = std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1);
  const int ix = static_cast<int>(cell % field_.nx());
  const int iy = static_cast<int>(cell / field_.nx());
  const Window& w = field_.window();
  const double x = w.xmin() + (ix + uniform01(rng)) * field_.dx();
  const double y = w.ymin() + (iy + uniform01(rng)) * field_.dy();
  return {std::min(x, w.xmax()), std::min(y, w.ymax())};
}

Point sample_from_exp_density(const GridField& field, std::uint64_t seed) {
  Rng rng(seed);
  return ExpDensity(field).sample(rng);
}

}  // namespace lgcps
