#include "lgcps/samplers.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "lgcps/error.hpp"

namespace lgcps {

MHState::MHState(const Window& window, double R, std::vector<Point> init)
    : window_(window), R_(R), index_(window, R) {
  if (!(R > 0.0)) throw InvalidArgument("interaction radius R must be > 0");
  for (const Point& p : init) {
    if (!window.contains(p)) throw InvalidArgument("initial point outside the window");
    add(p, neighbours(p));
  }
}

std::size_t MHState::neighbours(Point u, std::size_t skip) const {
  std::size_t count = 0;
  index_.for_each_near(u, [&](std::uint32_t id) {
    if (id != skip && distance(u, points_[id]) <= R_) ++count;
  });
  return count;
}

void MHState::add(Point u, std::size_t close) {
  const auto id = static_cast<std::uint32_t>(points_.size());
  points_.push_back(u);
  index_.insert(id, u);
  sR_ += close;
}

void MHState::remove(std::size_t i, std::size_t close) {
  const auto last = static_cast<std::uint32_t>(points_.size() - 1);
  index_.erase(static_cast<std::uint32_t>(i));
  if (i != last) {
    points_[i] = points_[last];
    index_.relabel(last, static_cast<std::uint32_t>(i));
  }
  points_.pop_back();
  sR_ -= close;
}

bool mh_step(MHState& state, const ExpDensity& density, double gamma, Rng& rng) {
  const double log_gamma = gamma > 0.0 ? std::log(gamma) : -std::numeric_limits<double>::infinity();
  const double log_I = density.log_integral();
  const double n = static_cast<double>(state.n());
  if (uniform01(rng) < 0.5) {
    const Point u = density.sample(rng);
    const std::size_t t = state.neighbours(u);
    const double v = uniform01(rng);
    if (t > 0 && gamma == 0.0) return false;
    const double log_a = (t > 0 ? t * log_gamma : 0.0) + log_I - std::log(n + 1.0);
    if (log_a >= 0.0 || std::log(v) < log_a) {
      state.add(u, t);
      return true;
    }
    return false;
  }
  if (state.n() == 0) return false;
  const auto i = std::uniform_int_distribution<std::size_t>(0, state.n() - 1)(rng);
  const std::size_t t = state.neighbours(state.points()[i], i);
  const double v = uniform01(rng);
  if (!(t > 0 && gamma == 0.0)) {
    const double log_a = std::log(n) - log_I - (t > 0 ? t * log_gamma : 0.0);
    if (log_a < 0.0 && !(std::log(v) < log_a)) return false;
  }
  state.remove(i, t);
  return true;
}

bool mh_step(MHState& state, const GridField& field, double gamma, std::uint64_t seed) {
  Rng rng(seed);
  return mh_step(state, ExpDensity(field), gamma, rng);
}

PointPattern run_chain(const ExpDensity& density, double gamma, double R, std::uint64_t n_iters,
                       const PointPattern& init, Rng& rng, std::vector<TraceRecord>* trace) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in [0, 1]");
  if (!(init.window() == density.field().window()))
    throw InvalidArgument("initial pattern and field use different windows");
  MHState state(init.window(), R, std::vector<Point>(init.points().begin(), init.points().end()));
  if (trace) {
    trace->clear();
    trace->reserve(n_iters + 1);
    trace->push_back({0, state.n(), state.sR()});
  }
  for (std::uint64_t it = 1; it <= n_iters; ++it) {
    mh_step(state, density, gamma, rng);
#ifndef NDEBUG
    if (it % 1000 == 0) assert(state.sR() == close_pair_count(state.pattern(), R));
#endif
    if (trace) trace->push_back({it, state.n(), state.sR()});
  }
  return state.pattern();
}

PointPattern run_chain(const GridField& field, double gamma, double R, std::uint64_t n_iters,
                       const PointPattern& init, std::uint64_t seed,
                       std::vector<TraceRecord>* trace) {
  Rng rng(seed);
  return run_chain(ExpDensity(field), gamma, R, n_iters, init, rng, trace);
}

namespace {

PointPattern poisson_from_density(const ExpDensity& density, Rng& rng) {
  const double I = density.integral();
  if (!std::isfinite(I) || I > 1e8)
    throw NumericalError("Poisson mean " + std::to_string(I) + " is too large to simulate");
  const auto count = std::poisson_distribution<long long>(I)(rng);
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (long long k = 0; k < count; ++k) pts.push_back(density.sample(rng));
  return PointPattern(density.field().window(), std::move(pts));
}

}  // namespace

PointPattern simulate_poisson(const GridField& log_intensity, Rng& rng) {
  return poisson_from_density(ExpDensity(log_intensity), rng);
}

PointPattern simulate_poisson(const GridField& log_intensity, std::uint64_t seed) {
  Rng rng(seed);
  return simulate_poisson(log_intensity, rng);
}

GridField simulation_field(const ModelParams& theta, const Window& window,
                           const SimulationOptions& options, std::uint64_t seed) {
  return simulate_grf(window, options.nx, options.ny, theta.mu, theta.sigma2, theta.s,
                      derive_seed(seed, stream::kGrf, 0), options.grf);
}

PointPattern simulate_lgcp_strauss(const ModelParams& theta, const Window& window,
                                   const SimulationOptions& options, std::uint64_t seed) {
  theta.validate();
  const GridField field = simulation_field(theta, window, options, seed);
  Rng rng(derive_seed(seed, stream::kChain, 0));
  return run_chain(ExpDensity(field), theta.gamma, theta.R, options.burnin, PointPattern(window),
                   rng);
}

PointPattern simulate_lgcp(double mu, double sigma2, double s, const Window& window,
                           const SimulationOptions& options, std::uint64_t seed) {
  ModelParams theta;
  theta.mu = mu;
  theta.sigma2 = sigma2;
  theta.s = s;
  theta.validate();
  const GridField field = simulation_field(theta, window, options, seed);
  Rng rng(derive_seed(seed, stream::kChain, 0));
  return simulate_poisson(field, rng);
}

PointPattern simulate_strauss(double mu, double gamma, double R, const Window& window,
                              std::uint64_t burnin, std::uint64_t seed) {
  ModelParams theta;
  theta.mu = mu;
  theta.gamma = gamma;
  theta.R = R;
  theta.validate();
  Rng rng(derive_seed(seed, stream::kChain, 0));
  return run_chain(ExpDensity(GridField::constant(window, 2, 2, mu)), gamma, R, burnin,
                   PointPattern(window), rng);
}

PointPattern simulate(Model model, const ModelParams& theta, const Window& window,
                      const SimulationOptions& options, std::uint64_t seed) {
  switch (model) {
    case Model::LgcpStrauss: return simulate_lgcp_strauss(theta, window, options, seed);
    case Model::Lgcp: return simulate_lgcp(theta.mu, theta.sigma2, theta.s, window, options, seed);
    case Model::Strauss:
      return simulate_strauss(theta.mu, theta.gamma, theta.R, window, options.burnin, seed);
  }
  throw InvalidArgument("unknown model");
}

TracePair trace_chains(const ModelParams& theta, const Window& window,
                       const SimulationOptions& options, std::uint64_t n_iters,
                       std::uint64_t seed) {
  theta.validate();
  const ExpDensity density(simulation_field(theta, window, options, seed));
  Rng init_rng(derive_seed(seed, stream::kInitialState, 0));
  const PointPattern poisson_start = poisson_from_density(density, init_rng);
  TracePair out;
  Rng rng_a(derive_seed(seed, stream::kChain, 0));
  run_chain(density, theta.gamma, theta.R, n_iters, PointPattern(window), rng_a, &out.from_empty);
  Rng rng_b(derive_seed(seed, stream::kChain, 1));
  run_chain(density, theta.gamma, theta.R, n_iters, poisson_start, rng_b, &out.from_poisson);
  return out;
}

}  // namespace lgcps
