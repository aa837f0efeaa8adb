#pragma once

#include <cstdint>
#include <vector>

#include "lgcps/core.hpp"
#include "lgcps/grf.hpp"

namespace lgcps {

struct TraceRecord {
  std::uint64_t iter = 0;
  std::size_t n = 0;
  std::size_t sR = 0;
};

/// Chain state of the birth-death sampler. Keeps the close-pair count at
/// radius R up to date as points are added and removed.
class MHState {
 public:
  MHState(const Window& window, double R, std::vector<Point> init = {});

  const Window& window() const noexcept { return window_; }
  double R() const noexcept { return R_; }
  std::size_t n() const noexcept { return points_.size(); }
  std::size_t sR() const noexcept { return sR_; }
  const std::vector<Point>& points() const noexcept { return points_; }
  PointPattern pattern() const { return PointPattern(window_, points_); }

  /// Number of current points within R of u, skipping index `skip`.
  std::size_t neighbours(Point u, std::size_t skip = static_cast<std::size_t>(-1)) const;

  void add(Point u, std::size_t close);
  void remove(std::size_t i, std::size_t close);

 private:
  Window window_;
  double R_;
  std::vector<Point> points_;
  CellIndex index_;
  std::size_t sR_ = 0;
};

/// One birth-death Metropolis-Hastings transition targeting the density
/// proportional to prod exp(z(x_i)) * gamma^sR(x). Returns true if accepted.
bool mh_step(MHState& state, const ExpDensity& density, double gamma, Rng& rng);
bool mh_step(MHState& state, const GridField& field, double gamma, std::uint64_t seed);

/// Applies n_iters transitions. With a trace, records the initial state as
/// iteration 0 and the state after every transition.
PointPattern run_chain(const ExpDensity& density, double gamma, double R, std::uint64_t n_iters,
                       const PointPattern& init, Rng& rng,
                       std::vector<TraceRecord>* trace = nullptr);
PointPattern run_chain(const GridField& field, double gamma, double R, std::uint64_t n_iters,
                       const PointPattern& init, std::uint64_t seed,
                       std::vector<TraceRecord>* trace = nullptr);

struct SimulationOptions {
  int nx = 64;
  int ny = 64;
  std::uint64_t burnin = 20000;
  GrfOptions grf;
};

/// Inhomogeneous Poisson process with intensity exp(z).
PointPattern simulate_poisson(const GridField& log_intensity, Rng& rng);
PointPattern simulate_poisson(const GridField& log_intensity, std::uint64_t seed);

PointPattern simulate_lgcp_strauss(const ModelParams& theta, const Window& window,
                                   const SimulationOptions& options, std::uint64_t seed);
PointPattern simulate_lgcp(double mu, double sigma2, double s, const Window& window,
                           const SimulationOptions& options, std::uint64_t seed);
PointPattern simulate_strauss(double mu, double gamma, double R, const Window& window,
                              std::uint64_t burnin, std::uint64_t seed);

/// Dispatches on the model: the LGCP is simulated exactly (field then Poisson),
/// the other two by the birth-death chain started at the empty pattern.
PointPattern simulate(Model model, const ModelParams& theta, const Window& window,
                      const SimulationOptions& options, std::uint64_t seed);

/// The field realization used by simulate_lgcp_strauss / simulate_lgcp for
/// the same (theta, seed).
GridField simulation_field(const ModelParams& theta, const Window& window,
                           const SimulationOptions& options, std::uint64_t seed);

/// Two chains on one field realization, started from the empty pattern and
/// from an inhomogeneous Poisson draw.
struct TracePair {
  std::vector<TraceRecord> from_empty;
  std::vector<TraceRecord> from_poisson;
};
TracePair trace_chains(const ModelParams& theta, const Window& window,
                       const SimulationOptions& options, std::uint64_t n_iters,
                       std::uint64_t seed);

}  // namespace lgcps
