#include "lgcps/envelopes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lgcps/error.hpp"
#include "lgcps/parallel.hpp"

namespace lgcps {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// For each value: (1 + #strictly smaller, 1 + #strictly larger).
void pointwise_ranks(const std::vector<double>& v, std::vector<double>& below,
                     std::vector<double>& above) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  below.assign(n, 0.0);
  above.assign(n, 0.0);
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start;
    while (end < n && v[order[end]] == v[order[start]]) ++end;
    for (std::size_t t = start; t < end; ++t) {
      below[order[t]] = static_cast<double>(start + 1);
      above[order[t]] = static_cast<double>(n - end + 1);
    }
    start = end;
  }
}

double alpha_count(double level, std::size_t total) {
  // Shaved so that 0.05 * 100 counts as 5 rather than 5.000000000000001.
  return (1.0 - level) * static_cast<double>(total) * (1.0 + 1e-12);
}

EnvelopeResult envelope_from_measures(const CurveSet& set, const std::vector<double>& measures,
                                      double critical, double level) {
  EnvelopeResult out;
  const std::size_t K = set.r.size();
  const std::size_t total = set.s() + 1;
  out.r = set.r;
  out.observed = set.observed;
  out.mask = set.mask;
  out.level = level;
  out.measures = measures;
  out.critical = critical;
  out.lower.assign(K, kNaN);
  out.upper.assign(K, kNaN);
  out.mean.assign(K, kNaN);
  for (std::size_t k = 0; k < K; ++k) {
    if (!set.mask[k]) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < total; ++i) {
      if (measures[i] < critical) continue;
      lo = std::min(lo, set.curve(i)[k]);
      hi = std::max(hi, set.curve(i)[k]);
    }
    out.lower[k] = lo;
    out.upper[k] = hi;
    double sum = 0.0;
    for (const auto& c : set.simulated) sum += c[k];
    out.mean[k] = sum / static_cast<double>(set.s());
  }
  std::size_t at_least = 0;
  for (double e : measures)
    if (e <= measures[0]) ++at_least;
  out.p_value = static_cast<double>(at_least) / static_cast<double>(total);
  out.rejected = measures[0] < critical;
  return out;
}

}  // namespace

void CurveSet::validate() const {
  const std::size_t K = r.size();
  if (simulated.empty()) throw InvalidArgument("a curve set needs at least one simulated curve");
  if (observed.size() != K || mask.size() != K)
    throw InvalidArgument("observed curve and mask must match the r grid");
  for (const auto& c : simulated)
    if (c.size() != K) throw InvalidArgument("simulated curves must match the r grid");
  for (std::size_t k = 0; k < K; ++k) {
    if (!mask[k]) continue;
    for (std::size_t i = 0; i <= s(); ++i)
      if (!std::isfinite(curve(i)[k]))
        throw InvalidArgument("curve value at an unmasked position is not finite");
  }
}

CurveSet CurveSet::from_curves(const Curve& observed, const std::vector<Curve>& simulated) {
  CurveSet set;
  set.r = observed.r;
  set.observed = observed.values;
  set.mask = observed.defined;
  for (const Curve& c : simulated) {
    if (c.r != observed.r) throw InvalidArgument("curves must share the r grid");
    set.simulated.push_back(c.values);
    for (std::size_t k = 0; k < set.mask.size(); ++k) set.mask[k] = set.mask[k] && c.defined[k];
  }
  return set;
}

std::vector<double> lexicographic_measure(std::vector<std::vector<double>> ranks) {
  const std::size_t n = ranks.size();
  for (auto& v : ranks) std::sort(v.begin(), v.end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ranks[a] < ranks[b]; });
  std::vector<double> out(n);
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start;
    while (end < n && ranks[order[end]] == ranks[order[start]]) ++end;
    for (std::size_t t = start; t < end; ++t)
      out[order[t]] = static_cast<double>(start + 1) / static_cast<double>(n);
    start = end;
  }
  return out;
}

std::vector<double> erl_measure(const CurveSet& curves) {
  curves.validate();
  const std::size_t total = curves.s() + 1;
  std::vector<std::vector<double>> ranks(total);
  std::vector<double> column(total), below, above;
  for (std::size_t k = 0; k < curves.r.size(); ++k) {
    if (!curves.mask[k]) continue;
    for (std::size_t i = 0; i < total; ++i) column[i] = curves.curve(i)[k];
    pointwise_ranks(column, below, above);
    for (std::size_t i = 0; i < total; ++i) ranks[i].push_back(std::min(below[i], above[i]));
  }
  return lexicographic_measure(std::move(ranks));
}

double critical_measure(const std::vector<double>& measures, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("envelope level must lie in (0, 1)");
  std::vector<double> sorted = measures;
  std::sort(sorted.begin(), sorted.end());
  const double limit = alpha_count(level, sorted.size());
  double critical = sorted.front();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i] == sorted[i - 1]) continue;
    // i values lie strictly below sorted[i].
    if (static_cast<double>(i) <= limit) critical = sorted[i];
    else break;
  }
  return critical;
}

EnvelopeResult global_envelope(const CurveSet& curves, double level) {
  const auto measures = erl_measure(curves);
  return envelope_from_measures(curves, measures, critical_measure(measures, level), level);
}

CombinedEnvelopeResult combined_envelope(const std::vector<CurveSet>& sets, double level) {
  if (sets.size() < 2) throw InvalidArgument("combined envelopes need at least two curve sets");
  const std::size_t s = sets.front().s();
  for (const auto& set : sets)
    if (set.s() != s) throw InvalidArgument("curve sets differ in the number of simulations");
  const std::size_t total = s + 1;
  std::vector<std::vector<double>> step1;
  for (const auto& set : sets) step1.push_back(erl_measure(set));
  std::vector<std::vector<double>> ranks(total);
  std::vector<double> below, above;
  for (const auto& e : step1) {
    pointwise_ranks(e, below, above);
    for (std::size_t i = 0; i < total; ++i) ranks[i].push_back(below[i]);
  }
  CombinedEnvelopeResult out;
  out.level = level;
  out.measures = lexicographic_measure(std::move(ranks));
  out.critical = critical_measure(out.measures, level);
  for (std::size_t m = 0; m < sets.size(); ++m) {
    EnvelopeResult env = envelope_from_measures(sets[m], out.measures, out.critical, level);
    env.measures = step1[m];
    const EnvelopeResult single =
        envelope_from_measures(sets[m], step1[m], critical_measure(step1[m], level), level);
    env.p_value = single.p_value;
    env.rejected = single.rejected;
    out.per_set.push_back(std::move(env));
  }
  std::size_t at_least = 0;
  for (double e : out.measures)
    if (e <= out.measures[0]) ++at_least;
  out.p_value = static_cast<double>(at_least) / static_cast<double>(total);
  out.rejected = out.measures[0] < out.critical;
  return out;
}

PredictiveCurves posterior_predictive_curves(const std::vector<ModelParams>& draws,
                                             const Simulator& simulator,
                                             const std::vector<CurveStatistic>& statistics,
                                             const PredictiveOptions& options, std::uint64_t seed) {
  if (draws.empty()) throw InvalidArgument("posterior predictive curves need posterior draws");
  if (statistics.empty()) throw InvalidArgument("no curve statistic given");
  const std::size_t n = options.n_sims == 0 ? draws.size() : options.n_sims;
  std::vector<std::vector<Curve>> slots(n);
  parallel_for(n, options.workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, stream::kPredictive, i));
    const ModelParams& theta = draws[i % draws.size()];
    for (std::size_t attempt = 0; attempt < options.max_redraws; ++attempt) {
      const PointPattern x = simulator(theta, rng());
      std::vector<Curve> curves;
      bool usable = true;
      for (const auto& stat : statistics) {
        curves.push_back(stat(x));
        const auto& d = curves.back().defined;
        if (std::none_of(d.begin(), d.end(), [](bool b) { return b; })) usable = false;
      }
      if (usable) {
        slots[i] = std::move(curves);
        return;
      }
    }
  });
  PredictiveCurves out;
  out.curves.resize(statistics.size());
  for (auto& slot : slots) {
    if (slot.empty()) {
      ++out.n_excluded;
      continue;
    }
    for (std::size_t t = 0; t < statistics.size(); ++t) out.curves[t].push_back(std::move(slot[t]));
  }
  return out;
}

PredictiveTest posterior_predictive_test(const PointPattern& observed,
                                         const std::vector<ModelParams>& draws, Model model,
                                         const SimulationOptions& simulation,
                                         const PredictiveOptions& options, double level,
                                         std::uint64_t seed, int n_r) {
  const Window& w = observed.window();
  const auto l_grid = regular_r_grid(0.2 * w.shorter_side(), n_r);
  const auto j_grid = regular_r_grid(default_j_rmax(observed), n_r);
  const std::vector<CurveStatistic> stats = {
      [l_grid](const PointPattern& x) { return l_function(x, l_grid); },
      [j_grid](const PointPattern& x) { return j_function(x, j_grid); },
  };
  const Simulator sim = make_simulator(model, w, simulation);
  PredictiveCurves pc = posterior_predictive_curves(draws, sim, stats, options, seed);
  if (pc.curves[0].empty()) throw NumericalError("every posterior predictive simulation failed");
  PredictiveTest out;
  out.n_excluded = pc.n_excluded;
  out.l_set = CurveSet::from_curves(stats[0](observed), pc.curves[0]);
  out.j_set = CurveSet::from_curves(stats[1](observed), pc.curves[1]);
  out.result = combined_envelope({out.l_set, out.j_set}, level);
  return out;
}

}  // namespace lgcps
