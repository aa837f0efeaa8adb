#include "lgcps/abc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lgcps/error.hpp"
#include "lgcps/parallel.hpp"

namespace lgcps {

Simulator make_simulator(Model model, const Window& window, const SimulationOptions& options) {
  return [model, window, options](const ModelParams& theta, std::uint64_t seed) {
    return simulate(model, theta, window, options, seed);
  };
}

namespace {

struct PilotSlot {
  ModelParams theta;
  SummaryVector summary;
  std::size_t failures = 0;
};

Eigen::VectorXd difference(const SummaryVector& T, const SummaryVector& t_obs) {
  if (T.size() != t_obs.size()) throw InvalidArgument("summary vectors differ in dimension");
  Eigen::VectorXd d(static_cast<Eigen::Index>(T.size()));
  for (std::size_t i = 0; i < T.size(); ++i) d(static_cast<Eigen::Index>(i)) = T[i] - t_obs[i];
  return d;
}

}  // namespace

PilotSet run_pilot(Model model, const PriorSpec& prior, const Simulator& simulator,
                   const PilotOptions& options, std::uint64_t seed) {
  if (options.k_pilot < 1) throw InvalidArgument("k_pilot must be >= 1");
  prior.validate();
  options.summary.validate();
  std::vector<PilotSlot> slots(options.k_pilot);
  parallel_for(options.k_pilot, options.workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, stream::kPilot, i));
    PilotSlot& slot = slots[i];
    for (;;) {
      slot.theta = sample_model_params(model, prior, rng);
      const PointPattern x = simulator(slot.theta, rng());
      if (x.size() > options.m) {
        slot.summary = summary_vector(x, options.summary);
        return;
      }
      if (++slot.failures >= options.max_attempts_per_draw) {
        std::ostringstream os;
        os << "pilot draw " << i << ": " << slot.failures << " consecutive simulations had n <= "
           << options.m << "; the prior and model rarely produce enough points";
        throw ScreenFailure(os.str());
      }
    }
  });
  PilotSet out;
  for (auto& slot : slots) {
    out.n_screen_failures += slot.failures;
    if (!slot.summary.finite) {
      ++out.n_excluded;
      continue;
    }
    out.params.push_back(slot.theta);
    out.summaries.push_back(std::move(slot.summary));
  }
  out.n_simulations = out.n_screen_failures + options.k_pilot;
  const double fail_fraction =
      static_cast<double>(out.n_screen_failures) / static_cast<double>(out.n_simulations);
  if (fail_fraction > options.max_screen_failure_fraction) {
    std::ostringstream os;
    os << "pilot screen failed: " << out.n_screen_failures << " of " << out.n_simulations
       << " simulations had n <= " << options.m;
    throw ScreenFailure(os.str());
  }
  if (out.size() == 0) throw NumericalError("every pilot summary vector was non-finite");
  return out;
}

std::vector<std::size_t> Projections::active() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < models.size(); ++j)
    if (models[j] && models[j]->fitted_variance > 0.0) out.push_back(j);
  return out;
}

Projections fit_projections(const PilotSet& pilot, const SummaryVector& t_obs, Model model,
                            const CvOptions& options, std::uint64_t seed) {
  if (pilot.size() < 2) throw InvalidArgument("projection fitting needs at least two pilot rows");
  const auto k = static_cast<Eigen::Index>(pilot.size());
  const auto d = static_cast<Eigen::Index>(t_obs.size());
  Eigen::MatrixXd X(k, d);
  for (Eigen::Index i = 0; i < k; ++i)
    X.row(i) = difference(pilot.summaries[static_cast<std::size_t>(i)], t_obs).transpose();
  Projections out;
  for (std::size_t j : free_parameters(model)) {
    Eigen::VectorXd y(k);
    for (Eigen::Index i = 0; i < k; ++i) y(i) = pilot.params[static_cast<std::size_t>(i)][j];
    out.models[j] = relaxed_lasso_fit(X, y, options, derive_seed(seed, stream::kProjections, j));
  }
  return out;
}

double chi_distance(const Projections& projections, const SummaryVector& T,
                    const SummaryVector& t_obs) {
  if (!T.finite) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::VectorXd diff = difference(T, t_obs);
  double chi = 0.0;
  for (std::size_t j : projections.active()) {
    const ProjectionModel& pm = *projections.models[j];
    const double delta = pm.coef.dot(diff);
    chi += delta * delta / pm.fitted_variance;
  }
  return chi;
}

double choose_epsilon(std::vector<double> distances, double fraction) {
  if (distances.empty()) throw InvalidArgument("choose_epsilon needs at least one distance");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("fraction must lie in (0, 1]");
  const auto k = distances.size();
  // The relative shave keeps products such as 0.07 * 100 = 7.000000000000001
  // from rounding up to the next position.
  const double target = fraction * static_cast<double>(k) * (1.0 - 1e-12);
  const auto pos = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(target)), 1, k);
  std::nth_element(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(pos - 1),
                   distances.end());
  return distances[pos - 1];
}

AbcPosterior abc_rejection(Model model, const PriorSpec& prior, const Simulator& simulator,
                           const Projections& projections, const SummaryVector& t_obs,
                           double epsilon, const RejectionOptions& options, std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
  if (options.k_abc < 1) throw InvalidArgument("k_abc must be >= 1");
  prior.validate();
  AbcPosterior out;
  out.epsilon = epsilon;
  const std::size_t budget = options.budget_factor * options.k_abc;
  const std::size_t batch = std::max<std::size_t>(64, 16 * static_cast<std::size_t>(std::max(1, options.workers)));

  struct Task {
    ModelParams theta;
    double chi = 0.0;
    bool screened = false;
  };
  std::size_t next = 0;
  while (out.draws.size() < options.k_abc && next < budget) {
    const std::size_t count = std::min(batch, budget - next);
    std::vector<Task> tasks(count);
    parallel_for(count, options.workers, [&](std::size_t b) {
      Rng rng(derive_seed(seed, stream::kRejection, next + b));
      Task& task = tasks[b];
      task.theta = sample_model_params(model, prior, rng);
      const PointPattern x = simulator(task.theta, rng());
      if (x.size() <= options.m) {
        task.screened = true;
        return;
      }
      task.chi = chi_distance(projections, summary_vector(x, options.summary), t_obs);
    });
    for (std::size_t b = 0; b < count && out.draws.size() < options.k_abc; ++b) {
      ++out.attempts;
      const Task& task = tasks[b];
      if (task.screened) {
        ++out.screen_failures;
      } else if (!std::isfinite(task.chi)) {
        ++out.nonfinite;
      } else if (task.chi < epsilon) {
        out.draws.push_back(task.theta);
        out.distances.push_back(task.chi);
      }
    }
    next += count;
  }
  out.shortfall = out.draws.size() < options.k_abc;
  return out;
}

AbcResult run_abc_from_pilot(const PointPattern& observed, PilotSet pilot, const AbcConfig& config,
                             std::uint64_t seed) {
  AbcResult result;
  result.t_obs = summary_vector(observed, config.summary);
  if (!result.t_obs.finite)
    throw InvalidArgument("the observed pattern has non-finite summary statistics");
  result.pilot = std::move(pilot);
  CvOptions cv = config.cv;
  cv.workers = config.workers;
  result.projections = fit_projections(result.pilot, result.t_obs, config.model, cv, seed);
  result.pilot_distances.reserve(result.pilot.size());
  for (const auto& T : result.pilot.summaries)
    result.pilot_distances.push_back(chi_distance(result.projections, T, result.t_obs));
  const double epsilon = choose_epsilon(result.pilot_distances, config.quantile);
  if (!(epsilon > 0.0))
    throw NumericalError("the selected tolerance is zero; the pilot contains exact matches");
  RejectionOptions ro;
  ro.k_abc = config.k_abc;
  ro.m = config.m;
  ro.budget_factor = config.budget_factor;
  ro.summary = config.summary;
  ro.workers = config.workers;
  const Simulator sim = make_simulator(config.model, observed.window(), config.simulation);
  result.posterior =
      abc_rejection(config.model, config.prior, sim, result.projections, result.t_obs, epsilon, ro, seed);
  return result;
}

AbcResult run_abc(const PointPattern& observed, const AbcConfig& config, std::uint64_t seed) {
  PilotOptions po;
  po.k_pilot = config.k_pilot;
  po.m = config.m;
  po.summary = config.summary;
  po.workers = config.workers;
  const Simulator sim = make_simulator(config.model, observed.window(), config.simulation);
  PilotSet pilot = run_pilot(config.model, config.prior, sim, po, seed);
  return run_abc_from_pilot(observed, std::move(pilot), config, seed);
}

}  // namespace lgcps
