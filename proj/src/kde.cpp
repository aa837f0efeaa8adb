#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/tools/roots.hpp>

#include "lgcps/abc.hpp"
#include "lgcps/error.hpp"

namespace lgcps {

namespace {

double sample_sd(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

double iqr(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  return quantile_type7(v, 0.75) - quantile_type7(std::move(v), 0.25);
}

// Pairwise differences binned to a regular grid: cnt[k] counts pairs i < j
// whose bin indices differ by k.
struct BinnedPairs {
  double width = 0.0;
  std::vector<double> cnt;
};

BinnedPairs bin_pairs(std::span<const double> x, int nb) {
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  BinnedPairs out;
  out.width = (*hi_it - lo) * 1.01 / nb;
  out.cnt.assign(static_cast<std::size_t>(nb), 0.0);
  std::vector<int> bins(x.size());
  std::vector<double> occupancy(static_cast<std::size_t>(nb), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    bins[i] = std::min(nb - 1, static_cast<int>((x[i] - lo) / out.width));
    occupancy[static_cast<std::size_t>(bins[i])] += 1.0;
  }
  for (int a = 0; a < nb; ++a) {
    const double ca = occupancy[static_cast<std::size_t>(a)];
    if (ca == 0.0) continue;
    out.cnt[0] += ca * (ca - 1.0) / 2.0;
    for (int b = a + 1; b < nb; ++b) out.cnt[static_cast<std::size_t>(b - a)] += ca * occupancy[static_cast<std::size_t>(b)];
  }
  return out;
}

// Kernel estimates of the integrated squared second and third density
// derivatives (fourth and sixth derivative functionals), diagonal included.
double phi4(const BinnedPairs& p, double n, double h) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.cnt.size(); ++i) {
    double delta = static_cast<double>(i) * p.width / h;
    delta *= delta;
    if (delta >= 1000.0) break;
    sum += std::exp(-delta / 2.0) * (delta * delta - 6.0 * delta + 3.0) * p.cnt[i];
  }
  sum = 2.0 * sum + n * 3.0;
  return sum / (n * (n - 1.0) * std::pow(h, 5.0) * std::sqrt(2.0 * std::numbers::pi));
}

double phi6(const BinnedPairs& p, double n, double h) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.cnt.size(); ++i) {
    double delta = static_cast<double>(i) * p.width / h;
    delta *= delta;
    if (delta >= 1000.0) break;
    sum += std::exp(-delta / 2.0) *
           (delta * delta * delta - 15.0 * delta * delta + 45.0 * delta - 15.0) * p.cnt[i];
  }
  sum = 2.0 * sum - 15.0 * n;
  return sum / (n * (n - 1.0) * std::pow(h, 7.0) * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double bandwidth_silverman(std::span<const double> samples) {
  if (samples.size() < 2) throw InvalidArgument("bandwidth needs at least two samples");
  const double sd = sample_sd(samples);
  const double spread = std::min(sd, iqr(samples) / 1.34);
  const double scale = spread > 0.0 ? spread : sd;
  return 0.9 * scale * std::pow(static_cast<double>(samples.size()), -0.2);
}

std::optional<double> bandwidth_sheather_jones(std::span<const double> samples) {
  if (samples.size() < 2) return std::nullopt;
  const double n = static_cast<double>(samples.size());
  const double scale = std::min(sample_sd(samples), iqr(samples) / 1.349);
  if (!(scale > 0.0)) return std::nullopt;
  const BinnedPairs pairs = bin_pairs(samples, 1000);
  const double a = 1.24 * scale * std::pow(n, -1.0 / 7.0);
  const double b = 1.23 * scale * std::pow(n, -1.0 / 9.0);
  const double c1 = 1.0 / (2.0 * std::sqrt(std::numbers::pi) * n);
  const double td = -phi6(pairs, n, b);
  if (!std::isfinite(td) || td <= 0.0) return std::nullopt;
  const double alph2 = 1.357 * std::pow(phi4(pairs, n, a) / td, 1.0 / 7.0);
  if (!std::isfinite(alph2)) return std::nullopt;
  auto f = [&](double h) {
    return std::pow(c1 / phi4(pairs, n, alph2 * std::pow(h, 5.0 / 7.0)), 0.2) - h;
  };
  const double hmax = 1.144 * scale * std::pow(n, -0.2);
  double lower = 0.1 * hmax, upper = hmax;
  for (int attempt = 1; f(lower) * f(upper) > 0.0; ++attempt) {
    if (attempt > 99) return std::nullopt;
    if (attempt % 2) upper *= 1.2;
    else lower /= 1.2;
  }
  std::uintmax_t max_iter = 200;
  const auto [r0, r1] = boost::math::tools::toms748_solve(
      f, lower, upper, boost::math::tools::eps_tolerance<double>(40), max_iter);
  const double root = 0.5 * (r0 + r1);
  if (!std::isfinite(root) || root <= 0.0) return std::nullopt;
  return root;
}

double Kde::mode() const {
  if (density.empty()) return std::numeric_limits<double>::quiet_NaN();
  return x[static_cast<std::size_t>(std::max_element(density.begin(), density.end()) - density.begin())];
}

Kde kde_1d(std::span<const double> samples, BandwidthRule rule, int n_grid) {
  if (samples.size() < 2) throw InvalidArgument("KDE needs at least two samples");
  if (n_grid < 2) throw InvalidArgument("KDE grid needs at least two points");
  for (double v : samples)
    if (!std::isfinite(v)) throw InvalidArgument("KDE samples must be finite");
  Kde out;
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  if (*lo_it == *hi_it) {
    out.point_mass = true;
    return out;
  }
  std::optional<double> bw;
  if (rule == BandwidthRule::SheatherJones) bw = bandwidth_sheather_jones(samples);
  out.rule_used = bw ? BandwidthRule::SheatherJones : BandwidthRule::Silverman;
  out.bandwidth = bw ? *bw : bandwidth_silverman(samples);
  const double h = out.bandwidth;
  const double from = *lo_it - 3.0 * h;
  const double to = *hi_it + 3.0 * h;
  out.x.resize(static_cast<std::size_t>(n_grid));
  out.density.assign(static_cast<std::size_t>(n_grid), 0.0);
  const double norm = 1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  for (int g = 0; g < n_grid; ++g) {
    const double xg = from + (to - from) * g / (n_grid - 1);
    out.x[static_cast<std::size_t>(g)] = xg;
    double acc = 0.0;
    for (double v : samples) {
      const double u = (xg - v) / h;
      acc += std::exp(-0.5 * u * u);
    }
    out.density[static_cast<std::size_t>(g)] = acc * norm;
  }
  return out;
}

std::array<MarginalSummary, 5> posterior_summary(const std::vector<ModelParams>& draws) {
  if (draws.empty()) throw InvalidArgument("posterior summary of an empty sample");
  std::array<MarginalSummary, 5> out;
  for (std::size_t j = 0; j < 5; ++j) {
    std::vector<double> v;
    v.reserve(draws.size());
    for (const auto& d : draws) v.push_back(d[j]);
    MarginalSummary& s = out[j];
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    s.median = quantile_type7(v, 0.5);
    s.q025 = quantile_type7(v, 0.025);
    s.q25 = quantile_type7(v, 0.25);
    s.q75 = quantile_type7(v, 0.75);
    s.q975 = quantile_type7(v, 0.975);
    if (v.size() >= 2 && *std::min_element(v.begin(), v.end()) < *std::max_element(v.begin(), v.end()))
      s.mode = kde_1d(v).mode();
    else
      s.mode = v.front();
  }
  return out;
}

}  // namespace lgcps
