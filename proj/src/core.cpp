#include "lgcps/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include "lgcps/error.hpp"

namespace lgcps {

Window::Window(double xmin, double xmax, double ymin, double ymax)
    : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax) {
  if (!(std::isfinite(xmin) && std::isfinite(xmax) && std::isfinite(ymin) && std::isfinite(ymax)))
    throw InvalidArgument("window bounds must be finite");
  if (!(xmax > xmin) || !(ymax > ymin))
    throw InvalidArgument("window requires xmax > xmin and ymax > ymin");
}

double Window::boundary_distance(Point p) const noexcept {
  return std::min(std::min(p.x - xmin_, xmax_ - p.x), std::min(p.y - ymin_, ymax_ - p.y));
}

PointPattern::PointPattern(Window window, std::vector<Point> points)
    : window_(window), points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!window_.contains(points_[i])) {
      std::ostringstream os;
      os << "point " << i << " (" << points_[i].x << ", " << points_[i].y
         << ") lies outside the window";
      throw InvalidArgument(os.str());
    }
  }
}

void ModelParams::validate() const {
  if (!std::isfinite(mu)) throw InvalidArgument("mu must be finite");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw InvalidArgument("sigma2 must be >= 0");
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("s must be > 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in [0, 1]");
  if (!(R > 0.0) || !std::isfinite(R)) throw InvalidArgument("R must be > 0");
}

std::string_view model_name(Model m) {
  switch (m) {
    case Model::LgcpStrauss: return "lgcp-strauss";
    case Model::Lgcp: return "lgcp";
    case Model::Strauss: return "strauss";
  }
  return "unknown";
}

Model model_from_name(std::string_view name) {
  if (name == "lgcp-strauss" || name == "lgcp_strauss") return Model::LgcpStrauss;
  if (name == "lgcp") return Model::Lgcp;
  if (name == "strauss") return Model::Strauss;
  throw InvalidArgument("unknown model '" + std::string(name) + "'");
}

std::vector<std::size_t> free_parameters(Model m) {
  switch (m) {
    case Model::LgcpStrauss: return {0, 1, 2, 3, 4};
    case Model::Lgcp: return {0, 1, 2};
    case Model::Strauss: return {0, 3, 4};
  }
  return {};
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Uniform: return "uniform";
    case Family::Normal: return "normal";
    case Family::Gamma: return "gamma";
    case Family::Beta: return "beta";
  }
  return "unknown";
}

Family family_from_name(std::string_view name) {
  if (name == "uniform") return Family::Uniform;
  if (name == "normal") return Family::Normal;
  if (name == "gamma") return Family::Gamma;
  if (name == "beta") return Family::Beta;
  throw InvalidArgument("unknown prior family '" + std::string(name) + "'");
}

void Marginal::validate() const {
  if (!(lo < hi)) throw InvalidArgument("truncation interval requires lo < hi");
  switch (family) {
    case Family::Uniform:
      if (!(a < b)) throw InvalidArgument("uniform prior requires a < b");
      if (!(std::max(a, lo) < std::min(b, hi)))
        throw InvalidArgument("uniform prior has no mass inside its truncation interval");
      break;
    case Family::Normal:
      if (!(b > 0.0)) throw InvalidArgument("normal prior requires positive variance");
      break;
    case Family::Gamma:
      if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("gamma prior requires shape, rate > 0");
      break;
    case Family::Beta:
      if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("beta prior requires a, b > 0");
      break;
  }
  if (family != Family::Uniform && !(cdf(hi) - cdf(lo) > 0.0))
    throw InvalidArgument(std::string(family_name(family)) +
                          " prior has no mass inside its truncation interval");
}

double Marginal::draw_untruncated(Rng& rng) const {
  switch (family) {
    case Family::Uniform:
      return std::uniform_real_distribution<double>(a, b)(rng);
    case Family::Normal:
      return std::normal_distribution<double>(a, std::sqrt(b))(rng);
    case Family::Gamma:
      return std::gamma_distribution<double>(a, 1.0 / b)(rng);
    case Family::Beta: {
      const double x = std::gamma_distribution<double>(a, 1.0)(rng);
      const double y = std::gamma_distribution<double>(b, 1.0)(rng);
      return x / (x + y);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double Marginal::draw(Rng& rng) const {
  constexpr int kMaxRejections = 1'000'000;
  for (int i = 0; i < kMaxRejections; ++i) {
    const double v = draw_untruncated(rng);
    if (v >= lo && v <= hi) return v;
  }
  throw NumericalError("prior truncation interval has numerically zero mass");
}

double Marginal::cdf(double x) const {
  namespace bm = boost::math;
  switch (family) {
    case Family::Uniform:
      return std::clamp((x - a) / (b - a), 0.0, 1.0);
    case Family::Normal:
      return bm::cdf(bm::normal_distribution<double>(a, std::sqrt(b)), x);
    case Family::Gamma:
      return x <= 0.0 ? 0.0 : bm::cdf(bm::gamma_distribution<double>(a, 1.0 / b), x);
    case Family::Beta:
      if (x <= 0.0) return 0.0;
      if (x >= 1.0) return 1.0;
      return bm::cdf(bm::beta_distribution<double>(a, b), x);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double Marginal::truncated_cdf(double x) const {
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  const double flo = std::isfinite(lo) ? cdf(lo) : 0.0;
  const double fhi = std::isfinite(hi) ? cdf(hi) : 1.0;
  return (cdf(x) - flo) / (fhi - flo);
}

void PriorSpec::validate() const {
  for (const auto& m : marginals) m.validate();
  // Parameter domains: sigma2 >= 0, s > 0, gamma in [0,1], R > 0.
  if (marginals[1].hi < 0.0) throw InvalidArgument("sigma2 prior must allow nonnegative values");
  if (marginals[2].hi <= 0.0) throw InvalidArgument("s prior must allow positive values");
  if (marginals[3].hi < 0.0 || marginals[3].lo > 1.0)
    throw InvalidArgument("gamma prior must overlap [0, 1]");
  if (marginals[4].hi <= 0.0) throw InvalidArgument("R prior must allow positive values");
}

ModelParams PriorSpec::draw(Rng& rng) const {
  std::array<double, 5> v{};
  for (std::size_t j = 0; j < 5; ++j) {
    // Redraw the (probability zero) boundary values that violate strict
    // parameter constraints, e.g. R = 0 from Unif(0, 0.05).
    for (int tries = 0;; ++tries) {
      v[j] = marginals[j].draw(rng);
      const bool ok = (j == 2 || j == 4) ? v[j] > 0.0
                      : j == 1           ? v[j] >= 0.0
                      : j == 3           ? (v[j] >= 0.0 && v[j] <= 1.0)
                                         : true;
      if (ok) break;
      if (tries > 1'000'000) throw NumericalError("prior cannot produce valid parameter values");
    }
  }
  return ModelParams::from_array(v);
}

ModelParams sample_prior(const PriorSpec& prior, std::uint64_t seed) {
  Rng rng(seed);
  return prior.draw(rng);
}

ModelParams sample_model_params(Model model, const PriorSpec& prior, Rng& rng) {
  ModelParams p = prior.draw(rng);
  if (model == Model::Lgcp) p.gamma = 1.0;
  if (model == Model::Strauss) p.sigma2 = 0.0;
  return p;
}

namespace {

Marginal uniform(double a, double b) { return {Family::Uniform, a, b, a, b}; }

// P2 and P3 are truncated to the P1 boxes.
PriorSpec truncate_to_p1(std::array<Marginal, 5> m) {
  const PriorSpec p1 = prior_p1();
  for (std::size_t j = 0; j < 5; ++j) {
    m[j].lo = p1.marginals[j].lo;
    m[j].hi = p1.marginals[j].hi;
  }
  return PriorSpec{m};
}

}  // namespace

PriorSpec prior_p1() {
  return PriorSpec{{uniform(3.0, 6.0), uniform(0.0, 4.0), uniform(0.01, 0.5), uniform(0.0, 1.0),
                    uniform(0.0, 0.05)}};
}

PriorSpec prior_p2() {
  return truncate_to_p1({Marginal{Family::Normal, 3.5, 1.0}, Marginal{Family::Gamma, 1.0, 1.0},
                         Marginal{Family::Gamma, 1.0, 6.0}, Marginal{Family::Beta, 1.0, 2.0},
                         Marginal{Family::Gamma, 1.0, 50.0}});
}

PriorSpec prior_p3() {
  return truncate_to_p1({Marginal{Family::Normal, 5.0, 1.0}, Marginal{Family::Gamma, 10.0, 4.0},
                         Marginal{Family::Gamma, 7.0, 20.0}, Marginal{Family::Beta, 2.0, 1.0},
                         Marginal{Family::Gamma, 10.0, 250.0}});
}

PriorSpec oak_prior_preset() {
  return PriorSpec{{uniform(-7.0, -3.0), uniform(0.0, 4.0), uniform(1.25, 62.5), uniform(0.0, 1.0),
                    uniform(0.0, 6.25)}};
}

PriorSpec prior_preset(std::string_view name) {
  if (name == "P1" || name == "p1") return prior_p1();
  if (name == "P2" || name == "p2") return prior_p2();
  if (name == "P3" || name == "p3") return prior_p3();
  if (name == "oak") return oak_prior_preset();
  throw InvalidArgument("unknown prior preset '" + std::string(name) + "'");
}

Eigen::MatrixXd pairwise_distances(const PointPattern& pattern) {
  const auto n = static_cast<Eigen::Index>(pattern.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = distance(pattern[i], pattern[j]);
  return d;
}

std::size_t close_pair_count(const PointPattern& pattern, double R) {
  if (!(R > 0.0)) throw InvalidArgument("R must be > 0");
  const auto pts = pattern.points();
  CellIndex index(pattern.window(), R);
  std::size_t count = 0;
  for (std::uint32_t i = 0; i < pts.size(); ++i) {
    index.for_each_near(pts[i], [&](std::uint32_t j) {
      if (distance(pts[i], pts[j]) <= R) ++count;
    });
    index.insert(i, pts[i]);
  }
  return count;
}

std::size_t neighbour_count(Point u, const PointPattern& pattern, double R) {
  std::size_t count = 0;
  bool self_seen = false;
  for (const Point& p : pattern.points()) {
    if (!self_seen && p == u) {
      self_seen = true;
      continue;
    }
    if (distance(u, p) <= R) ++count;
  }
  return count;
}

CellIndex::CellIndex(const Window& window, double min_cell, int max_cells_per_side)
    : x0_(window.xmin()), y0_(window.ymin()) {
  auto cells_along = [&](double side) {
    if (!(min_cell > 0.0) || !std::isfinite(min_cell)) return 1;
    const double k = std::floor(side / min_cell);
    return static_cast<int>(std::clamp(k, 1.0, static_cast<double>(max_cells_per_side)));
  };
  nx_ = cells_along(window.width());
  ny_ = cells_along(window.height());
  cw_ = window.width() / nx_;
  ch_ = window.height() / ny_;
  cells_.resize(static_cast<std::size_t>(nx_) * ny_);
}

int CellIndex::cell_x(double x) const noexcept {
  const int c = static_cast<int>(std::floor((x - x0_) / cw_));
  return std::clamp(c, 0, nx_ - 1);
}

int CellIndex::cell_y(double y) const noexcept {
  const int c = static_cast<int>(std::floor((y - y0_) / ch_));
  return std::clamp(c, 0, ny_ - 1);
}

void CellIndex::insert(std::uint32_t id, Point p) {
  if (id >= cell_of_.size()) {
    cell_of_.resize(id + 1);
    slot_of_.resize(id + 1);
  }
  const auto c = static_cast<std::uint32_t>(cell_y(p.y) * nx_ + cell_x(p.x));
  cell_of_[id] = c;
  slot_of_[id] = static_cast<std::uint32_t>(cells_[c].size());
  cells_[c].push_back(id);
}

void CellIndex::erase(std::uint32_t id) {
  auto& bucket = cells_[cell_of_[id]];
  const std::uint32_t slot = slot_of_[id];
  const std::uint32_t moved = bucket.back();
  bucket[slot] = moved;
  slot_of_[moved] = slot;
  bucket.pop_back();
}

void CellIndex::relabel(std::uint32_t from, std::uint32_t to) {
  if (to >= cell_of_.size()) {
    cell_of_.resize(to + 1);
    slot_of_.resize(to + 1);
  }
  cell_of_[to] = cell_of_[from];
  slot_of_[to] = slot_of_[from];
  cells_[cell_of_[to]][slot_of_[to]] = to;
}

}  // namespace lgcps
