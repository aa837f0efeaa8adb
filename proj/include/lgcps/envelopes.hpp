#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lgcps/abc.hpp"
#include "lgcps/summaries.hpp"

namespace lgcps {

/// Observed curve T_0 plus simulated curves T_1..T_s on a common grid.
/// Positions with mask[k] == false are ignored by every rank computation.
struct CurveSet {
  std::vector<double> r;
  std::vector<double> observed;
  std::vector<std::vector<double>> simulated;
  std::vector<bool> mask;

  std::size_t s() const noexcept { return simulated.size(); }
  /// Value of curve i, where i = 0 is the observed curve.
  const std::vector<double>& curve(std::size_t i) const {
    return i == 0 ? observed : simulated[i - 1];
  }
  void validate() const;

  /// Mask is the intersection of the per-curve definedness masks.
  static CurveSet from_curves(const Curve& observed, const std::vector<Curve>& simulated);
};

/// Extreme rank length measure of each of the s + 1 curves (index 0 is the
/// observed curve). Pointwise two-sided ranks are sorted ascending per curve
/// and curves are ordered lexicographically; the measure is
/// (1 + number of strictly more extreme curves) / (s + 1), so smaller values
/// are more extreme and tied curves share the most extreme position.
std::vector<double> erl_measure(const CurveSet& curves);

/// Lexicographic extremeness ordering of arbitrary rank vectors; returns
/// (1 + number of strictly smaller sorted vectors) / count for each vector.
std::vector<double> lexicographic_measure(std::vector<std::vector<double>> ranks);

struct EnvelopeResult {
  std::vector<double> r;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> observed;
  std::vector<double> mean;  // mean of the simulated curves
  std::vector<bool> mask;
  std::vector<double> measures;
  double critical = 0.0;
  double p_value = 1.0;
  double level = 0.95;
  bool rejected = false;
};

/// Critical measure: the largest measure value e with
/// #{i : e_i < e} <= (1 - level)(s + 1).
double critical_measure(const std::vector<double>& measures, double level);

/// p = #{i : e_i <= e_0} / (s + 1). The envelope spans the curves whose
/// measure is at least the critical value; the observed curve leaves the
/// envelope exactly when p <= 1 - level.
EnvelopeResult global_envelope(const CurveSet& curves, double level = 0.95);

struct CombinedEnvelopeResult {
  std::vector<EnvelopeResult> per_set;
  std::vector<double> measures;
  double critical = 0.0;
  double p_value = 1.0;
  double level = 0.95;
  bool rejected = false;
};

/// Two-step combination: per-set measures, then the extreme rank ordering of
/// the vectors of measures (ranked from below, small measures being extreme).
CombinedEnvelopeResult combined_envelope(const std::vector<CurveSet>& sets, double level = 0.95);

using CurveStatistic = std::function<Curve(const PointPattern&)>;

struct PredictiveOptions {
  /// Number of simulated curves; 0 means one per posterior draw. Draws are
  /// reused cyclically when more curves than draws are requested.
  std::size_t n_sims = 0;
  std::size_t max_redraws = 10;
  int workers = 1;
};

struct PredictiveCurves {
  std::vector<std::vector<Curve>> curves;  // [statistic][simulation]
  std::size_t n_excluded = 0;
};

/// One simulation per posterior draw, every statistic evaluated on it. A
/// simulation whose statistics are entirely undefined is redrawn from the same
/// parameters up to max_redraws times and then excluded.
PredictiveCurves posterior_predictive_curves(const std::vector<ModelParams>& draws,
                                             const Simulator& simulator,
                                             const std::vector<CurveStatistic>& statistics,
                                             const PredictiveOptions& options, std::uint64_t seed);

struct PredictiveTest {
  CurveSet l_set;
  CurveSet j_set;
  CombinedEnvelopeResult result;
  std::size_t n_excluded = 0;
};

/// Combined L and J envelope test of the observed pattern against the
/// posterior predictive distribution of `model`.
PredictiveTest posterior_predictive_test(const PointPattern& observed,
                                         const std::vector<ModelParams>& draws, Model model,
                                         const SimulationOptions& simulation,
                                         const PredictiveOptions& options, double level,
                                         std::uint64_t seed, int n_r = 40);

}  // namespace lgcps
