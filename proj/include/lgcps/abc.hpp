#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lgcps/core.hpp"
#include "lgcps/regression.hpp"
#include "lgcps/samplers.hpp"
#include "lgcps/summaries.hpp"

namespace lgcps {

/// Draws a pattern given parameters and a seed. Must be a pure function of
/// its arguments and safe to call concurrently.
using Simulator = std::function<PointPattern(const ModelParams&, std::uint64_t)>;

Simulator make_simulator(Model model, const Window& window, const SimulationOptions& options);

struct PilotOptions {
  std::size_t k_pilot = 10000;
  std::size_t m = 10;
  /// Simulations allowed per pilot draw before the screen is declared failed.
  std::size_t max_attempts_per_draw = 100;
  /// Abort when more than this fraction of all simulations fail n > m.
  double max_screen_failure_fraction = 0.5;
  SummaryOptions summary;
  int workers = 1;
};

struct PilotSet {
  std::vector<ModelParams> params;
  std::vector<SummaryVector> summaries;
  std::size_t n_excluded = 0;         // non-finite summaries, dropped
  std::size_t n_screen_failures = 0;  // simulations with n <= m, redrawn
  std::size_t n_simulations = 0;

  std::size_t size() const noexcept { return params.size(); }
};

PilotSet run_pilot(Model model, const PriorSpec& prior, const Simulator& simulator,
                   const PilotOptions& options, std::uint64_t seed);

/// One relaxed-Lasso projection per model parameter; parameters the model
/// does not use have none.
struct Projections {
  std::array<std::optional<ProjectionModel>, 5> models;

  /// Parameters entering the distance: fitted, with positive fitted variance.
  std::vector<std::size_t> active() const;
};

/// Regresses each free parameter on T - T_obs over the pilot set.
Projections fit_projections(const PilotSet& pilot, const SummaryVector& t_obs, Model model,
                            const CvOptions& options, std::uint64_t seed);

/// Sum over active parameters of (theta_hat_j(T) - theta_hat_j(T_obs))^2 /
/// fitted variance. NaN when T is not finite.
double chi_distance(const Projections& projections, const SummaryVector& T,
                    const SummaryVector& t_obs);

/// Order statistic at position ceil(fraction * k) (1-based, at least 1).
double choose_epsilon(std::vector<double> distances, double fraction = 0.01);

struct RejectionOptions {
  std::size_t k_abc = 1000;
  std::size_t m = 10;
  /// Total simulation budget is budget_factor * k_abc.
  std::size_t budget_factor = 1000;
  SummaryOptions summary;
  int workers = 1;
};

struct AbcPosterior {
  std::vector<ModelParams> draws;
  std::vector<double> distances;
  double epsilon = 0.0;
  std::size_t attempts = 0;
  std::size_t screen_failures = 0;
  std::size_t nonfinite = 0;
  bool shortfall = false;
};

/// Accepts the first k_abc prior-predictive simulations (in task order) with
/// chi < epsilon. Output does not depend on the worker count.
AbcPosterior abc_rejection(Model model, const PriorSpec& prior, const Simulator& simulator,
                           const Projections& projections, const SummaryVector& t_obs,
                           double epsilon, const RejectionOptions& options, std::uint64_t seed);

struct AbcConfig {
  Model model = Model::LgcpStrauss;
  PriorSpec prior = prior_p1();
  SimulationOptions simulation;
  SummaryOptions summary;
  std::size_t k_pilot = 10000;
  std::size_t k_abc = 1000;
  std::size_t m = 10;
  double quantile = 0.01;
  std::size_t budget_factor = 1000;
  CvOptions cv;
  int workers = 1;
};

struct AbcResult {
  PilotSet pilot;
  Projections projections;
  std::vector<double> pilot_distances;
  SummaryVector t_obs;
  AbcPosterior posterior;
};

/// The full pipeline: pilot run, projections, epsilon, rejection sampling.
AbcResult run_abc(const PointPattern& observed, const AbcConfig& config, std::uint64_t seed);

/// Continues from an existing pilot set.
AbcResult run_abc_from_pilot(const PointPattern& observed, PilotSet pilot, const AbcConfig& config,
                             std::uint64_t seed);

enum class BandwidthRule { SheatherJones, Silverman };

struct Kde {
  std::vector<double> x;
  std::vector<double> density;
  double bandwidth = 0.0;
  BandwidthRule rule_used = BandwidthRule::SheatherJones;
  bool point_mass = false;

  double mode() const;
};

double bandwidth_silverman(std::span<const double> samples);
/// Solve-the-equation plug-in bandwidth; nullopt when no root can be bracketed.
std::optional<double> bandwidth_sheather_jones(std::span<const double> samples);

/// Gaussian kernel density on n_grid points spanning the sample range
/// extended by three bandwidths on each side.
Kde kde_1d(std::span<const double> samples, BandwidthRule rule = BandwidthRule::SheatherJones,
           int n_grid = 512);

/// Sample quantile with linear interpolation between order statistics
/// (the usual "type 7" definition).
double quantile_type7(std::vector<double> values, double p);

struct MarginalSummary {
  double mean = 0.0;
  double median = 0.0;
  double q025 = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double q975 = 0.0;
  double mode = 0.0;  // KDE mode; equals the common value for a point mass
};

std::array<MarginalSummary, 5> posterior_summary(const std::vector<ModelParams>& draws);

}  // namespace lgcps
