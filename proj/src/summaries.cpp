#include "lgcps/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lgcps/error.hpp"

namespace lgcps {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_grid(const std::vector<double>& r) {
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!(r[k] >= 0.0) || !std::isfinite(r[k]) || (k > 0 && !(r[k] > r[k - 1])))
      throw InvalidArgument("r grid must be finite, nonnegative and strictly increasing");
  }
}

// Index of the first grid value >= d, i.e. the first r with d <= r.
std::size_t first_bin(const std::vector<double>& r, double d) {
  return static_cast<std::size_t>(std::lower_bound(r.begin(), r.end(), d) - r.begin());
}

// Distance from u to the nearest point of `pts` other than `skip`, or +inf if
// none lies within the index's search radius.
double nearest_within(Point u, const std::span<const Point>& pts, const CellIndex& index,
                      double rmax, std::size_t skip) {
  double best = std::numeric_limits<double>::infinity();
  index.for_each_near(u, [&](std::uint32_t j) {
    if (j == skip) return;
    const double d = distance(u, pts[j]);
    if (d <= rmax && d < best) best = d;
  });
  return best;
}

CellIndex build_index(const PointPattern& pattern, double cell) {
  CellIndex index(pattern.window(), cell);
  const auto pts = pattern.points();
  for (std::uint32_t i = 0; i < pts.size(); ++i) index.insert(i, pts[i]);
  return index;
}

// Border-corrected distribution: for each r, the fraction of locations with
// boundary distance >= r whose nearest-point distance is <= r.
Curve border_corrected(const std::vector<double>& r, const std::vector<double>& boundary,
                       const std::vector<double>& nearest) {
  Curve c;
  c.r = r;
  c.values.assign(r.size(), kNaN);
  c.defined.assign(r.size(), false);
  for (std::size_t k = 0; k < r.size(); ++k) {
    std::size_t at_risk = 0, hit = 0;
    for (std::size_t i = 0; i < boundary.size(); ++i) {
      if (boundary[i] >= r[k]) {
        ++at_risk;
        if (nearest[i] <= r[k]) ++hit;
      }
    }
    if (at_risk > 0) {
      c.values[k] = static_cast<double>(hit) / static_cast<double>(at_risk);
      c.defined[k] = true;
    }
  }
  return c;
}

}  // namespace

bool Curve::all_defined() const noexcept {
  return std::all_of(defined.begin(), defined.end(), [](bool b) { return b; });
}

Curve Curve::undefined(std::vector<double> r) {
  Curve c;
  c.values.assign(r.size(), kNaN);
  c.defined.assign(r.size(), false);
  c.r = std::move(r);
  return c;
}

std::vector<double> regular_r_grid(double r_max, int count) {
  if (!(r_max > 0.0) || count < 1) throw InvalidArgument("r grid needs r_max > 0 and count >= 1");
  std::vector<double> r(static_cast<std::size_t>(count));
  const double step = r_max / count;
  for (int k = 1; k <= count; ++k) r[k - 1] = k * step;
  return r;
}

std::optional<double> ripley_weight(Point xi, double d, const Window& window) {
  if (d <= window.boundary_distance(xi)) return 1.0;
  const double e[4] = {xi.x - window.xmin(), window.ymax() - xi.y, window.xmax() - xi.x,
                       xi.y - window.ymin()};
  double a[4];
  for (int k = 0; k < 4; ++k) a[k] = std::acos(std::min(e[k] / d, 1.0));
  double outside = 2.0 * (a[0] + a[1] + a[2] + a[3]);
  constexpr double half_pi = std::numbers::pi / 2.0;
  for (int k = 0; k < 4; ++k) outside -= std::max(0.0, a[k] + a[(k + 1) % 4] - half_pi);
  const double inside = 2.0 * std::numbers::pi - outside;
  if (!(inside > 1e-12)) return std::nullopt;
  return 2.0 * std::numbers::pi / inside;
}

Curve k_function(const PointPattern& pattern, const std::vector<double>& r_grid) {
  check_grid(r_grid);
  const std::size_t n = pattern.size();
  if (n < 2 || r_grid.empty()) return Curve::undefined(r_grid);
  const double rmax = r_grid.back();
  const auto pts = pattern.points();
  const Window& w = pattern.window();
  std::vector<double> mass(r_grid.size() + 1, 0.0);
  std::size_t first_undefined = r_grid.size();
  CellIndex index(w, rmax);
  for (std::uint32_t i = 0; i < n; ++i) {
    index.for_each_near(pts[i], [&](std::uint32_t j) {
      const double d = distance(pts[i], pts[j]);
      if (d > rmax) return;
      const std::size_t bin = first_bin(r_grid, d);
      const auto wi = ripley_weight(pts[i], d, w);
      const auto wj = ripley_weight(pts[j], d, w);
      if (!wi || !wj) {
        first_undefined = std::min(first_undefined, bin);
        return;
      }
      mass[bin] += *wi + *wj;
    });
    index.insert(i, pts[i]);
  }
  Curve c;
  c.r = r_grid;
  c.values.resize(r_grid.size());
  c.defined.resize(r_grid.size());
  const double scale = w.area() / (static_cast<double>(n) * static_cast<double>(n - 1));
  double acc = 0.0;
  for (std::size_t k = 0; k < r_grid.size(); ++k) {
    acc += mass[k];
    c.defined[k] = k < first_undefined;
    c.values[k] = c.defined[k] ? scale * acc : kNaN;
  }
  return c;
}

Curve l_function(const PointPattern& pattern, const std::vector<double>& r_grid) {
  Curve c = k_function(pattern, r_grid);
  for (std::size_t k = 0; k < c.size(); ++k)
    if (c.defined[k]) c.values[k] = std::sqrt(c.values[k] / std::numbers::pi);
  return c;
}

Curve empty_space_F(const PointPattern& pattern, const std::vector<double>& r_grid,
                    int test_grid) {
  check_grid(r_grid);
  if (test_grid < 1) throw InvalidArgument("test grid size must be >= 1");
  if (r_grid.empty()) return Curve::undefined(r_grid);
  const Window& w = pattern.window();
  const double rmax = r_grid.back();
  const CellIndex index = build_index(pattern, rmax);
  const auto pts = pattern.points();
  const std::size_t m = static_cast<std::size_t>(test_grid) * test_grid;
  std::vector<double> boundary(m), nearest(m);
  const double dx = w.width() / test_grid;
  const double dy = w.height() / test_grid;
  for (int iy = 0; iy < test_grid; ++iy) {
    for (int ix = 0; ix < test_grid; ++ix) {
      const Point u{w.xmin() + (ix + 0.5) * dx, w.ymin() + (iy + 0.5) * dy};
      const std::size_t k = static_cast<std::size_t>(iy) * test_grid + ix;
      boundary[k] = w.boundary_distance(u);
      nearest[k] = nearest_within(u, pts, index, rmax, static_cast<std::size_t>(-1));
    }
  }
  return border_corrected(r_grid, boundary, nearest);
}

Curve nearest_neighbour_G(const PointPattern& pattern, const std::vector<double>& r_grid) {
  check_grid(r_grid);
  if (pattern.size() < 2 || r_grid.empty()) return Curve::undefined(r_grid);
  const double rmax = r_grid.back();
  const CellIndex index = build_index(pattern, rmax);
  const auto pts = pattern.points();
  std::vector<double> boundary(pts.size()), nearest(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    boundary[i] = pattern.window().boundary_distance(pts[i]);
    nearest[i] = nearest_within(pts[i], pts, index, rmax, i);
  }
  return border_corrected(r_grid, boundary, nearest);
}

Curve j_function(const Curve& F, const Curve& G) {
  if (F.r != G.r) throw InvalidArgument("F and G must share the r grid");
  Curve J = Curve::undefined(F.r);
  for (std::size_t k = 0; k < F.size(); ++k) {
    if (!F.defined[k] || !G.defined[k] || !(F.values[k] < 1.0)) break;
    J.values[k] = (1.0 - G.values[k]) / (1.0 - F.values[k]);
    J.defined[k] = true;
  }
  return J;
}

Curve j_function(const PointPattern& pattern, const std::vector<double>& r_grid) {
  return j_function(empty_space_F(pattern, r_grid), nearest_neighbour_G(pattern, r_grid));
}

double default_j_rmax(const PointPattern& pattern) {
  const Window& w = pattern.window();
  const double cap = 0.2 * w.shorter_side();
  if (pattern.empty()) return cap;
  const double intensity = static_cast<double>(pattern.size()) / w.area();
  return std::min(std::sqrt(1.0 / (std::numbers::pi * intensity)), cap);
}

QuadratStats quadrat_stats(const PointPattern& pattern, int q) {
  if (q < 1) throw InvalidArgument("quadrat order must be >= 1");
  const std::size_t n = pattern.size();
  if (n == 0) throw InvalidArgument("quadrat statistics need at least one point");
  const Window& w = pattern.window();
  QuadratStats out;
  out.counts.assign(static_cast<std::size_t>(q) * q, 0);
  for (const Point& p : pattern.points()) {
    const int ix = std::min(static_cast<int>(std::floor((p.x - w.xmin()) / w.width() * q)), q - 1);
    const int iy = std::min(static_cast<int>(std::floor((p.y - w.ymin()) / w.height() * q)), q - 1);
    ++out.counts[static_cast<std::size_t>(iy) * q + ix];
  }
  const double cells = static_cast<double>(out.counts.size());
  double sum = 0.0;
  std::vector<double> frac(out.counts.size());
  for (std::size_t k = 0; k < frac.size(); ++k) {
    frac[k] = static_cast<double>(out.counts[k]) / static_cast<double>(n);
    sum += frac[k];
  }
  const double mean = sum / cells;
  double ss = 0.0;
  for (double f : frac) ss += (f - mean) * (f - mean);
  out.c_max = *std::max_element(frac.begin(), frac.end());
  out.c_min = *std::min_element(frac.begin(), frac.end());
  out.c_logvar = cells > 1.0 ? std::log(ss / (cells - 1.0)) : kNaN;
  return out;
}

void SummaryOptions::validate() const {
  if (n_r < 1) throw InvalidArgument("summary r grid needs at least one point");
  if (!(r_fraction > 0.0)) throw InvalidArgument("summary r fraction must be > 0");
  if (extreme_r_max < 0.0 || extreme_n_r < 1)
    throw InvalidArgument("invalid range for L_max / L_min / L_argmin");
  for (int q : quadrat_orders)
    if (q < 2) throw InvalidArgument("quadrat orders must be >= 2");
}

std::vector<std::string> summary_names(const SummaryOptions& options) {
  std::vector<std::string> names = {"n_log", "L_max", "L_min", "L_argmin"};
  for (int k = 1; k <= options.n_r; ++k) names.push_back("L_" + std::to_string(k));
  for (int q : options.quadrat_orders) {
    names.push_back("C_max_" + std::to_string(q));
    names.push_back("C_min_" + std::to_string(q));
    names.push_back("C_logvar_" + std::to_string(q));
  }
  return names;
}

SummaryVector summary_vector(const PointPattern& pattern, const SummaryOptions& options) {
  options.validate();
  SummaryVector out;
  out.values.reserve(options.dimension());
  const std::size_t n = pattern.size();
  out.values.push_back(n > 0 ? std::log(static_cast<double>(n))
                             : -std::numeric_limits<double>::infinity());

  const auto grid = regular_r_grid(options.r_fraction * pattern.window().shorter_side(), options.n_r);
  const Curve L = l_function(pattern, grid);
  const Curve L_ext = options.extreme_r_max > 0.0
                          ? l_function(pattern, regular_r_grid(options.extreme_r_max, options.extreme_n_r))
                          : L;
  double lmax = kNaN, lmin = kNaN, argmin = kNaN;
  if (L_ext.all_defined() && L_ext.size() > 0) {
    lmax = -std::numeric_limits<double>::infinity();
    lmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < L_ext.size(); ++k) {
      const double v = L_ext.values[k] - L_ext.r[k];
      lmax = std::max(lmax, v);
      if (v < lmin) {
        lmin = v;
        argmin = L_ext.r[k];
      }
    }
  }
  out.values.push_back(lmax);
  out.values.push_back(lmin);
  out.values.push_back(argmin);
  for (std::size_t k = 0; k < L.size(); ++k)
    out.values.push_back(L.defined[k] ? L.values[k] - L.r[k] : kNaN);

  for (int q : options.quadrat_orders) {
    if (n == 0) {
      out.values.insert(out.values.end(), {kNaN, kNaN, kNaN});
      continue;
    }
    const QuadratStats qs = quadrat_stats(pattern, q);
    out.values.insert(out.values.end(), {qs.c_max, qs.c_min, qs.c_logvar});
  }
  out.finite = std::all_of(out.values.begin(), out.values.end(),
                           [](double v) { return std::isfinite(v); });
  return out;
}

}  // namespace lgcps
