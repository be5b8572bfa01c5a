#pragma once

// MCMC over (path, theta, eta): blockwise Metropolis-Hastings path updates
// on overlapping sub-intervals, Gibbs draws for the rates and the error
// precision, and a particle-filter style initializer.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mjp/likelihood.hpp"
#include "mjp/model.hpp"
#include "mjp/proposal.hpp"
#include "mjp/random.hpp"

namespace mjp {

struct ScheduledInterval {
  double a = 0.0;
  double b = 0.0;
  bool start = false;     // also propose changes of the state at a == t_0
  bool end = false;       // also propose changes of the state at b == t_n
  bool midpoint = false;  // centred on an observation time

  friend bool operator==(const ScheduledInterval&, const ScheduledInterval&) = default;
};

struct Schedule {
  std::vector<ScheduledInterval> intervals;

  /// [t_{k-1}, t_k] interleaved with [(t_{k-1}+t_k)/2, (t_k+t_{k+1})/2].
  static Schedule standard(std::span<const double> times);
  /// Intervals must lie in [t0, tn], be nonempty, and border flags may only
  /// be set on intervals touching t0 / tn.
  void validate(double t0, double tn) const;
};

struct MoveCounter {
  std::uint64_t attempts = 0;
  std::uint64_t accepted = 0;

  double rate() const { return attempts == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(attempts); }
};

struct AcceptanceStats {
  MoveCounter base;
  MoveCounter midpoint;
  MoveCounter start;
  MoveCounter end;

  MoveCounter pooled() const;
};

struct ChainState {
  Path path;
  std::vector<double> theta;
  double eta = 1.0;
  Rng rng;
  AcceptanceStats stats;
};

struct InitOptions {
  double eta0 = 10.0;
  double shrinkage = 0.95;
  std::size_t particles = 150;
  std::size_t steps = 150;
  std::size_t event_cap = 1'000'000;
};

struct RunConfig {
  std::size_t iterations = 1000;
  std::size_t thinning = 1;
  InitOptions init;
  std::optional<double> eta_fixed;
  std::size_t path_snapshot_every = 0;
  std::uint64_t seed = 1;
  std::optional<Schedule> schedule;

  void validate() const;
};

/// Read-only inputs shared by every chain.
struct SamplerContext {
  const ModelSpec& model;
  const PriorSpec& prior;
  const ObservationSeries& obs;
  const TotalsProposalSpec& proposal;
};

class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Path on [a, b] cut from a longer path.
Path subpath(const ModelSpec& model, const Path& path, double a, double b);

/// One pass of path updates over the schedule, in order.
void sweep(ChainState& state, const SamplerContext& ctx, const Schedule& schedule);

/// Draws theta from its full conditional; paired rates go through the
/// (sum, ratio) parameterization. The result is multiplied by `shrinkage`.
void gibbs_theta(ChainState& state, const SamplerContext& ctx, double shrinkage = 1.0);

void gibbs_eta(ChainState& state, const SamplerContext& ctx);

/// Starting path, theta and eta built by extending the best of several
/// forward-simulated particles one observation interval at a time.
ChainState initialize(const SamplerContext& ctx, const RunConfig& config, Rng rng);

struct TraceRow {
  std::size_t iteration = 0;
  std::vector<double> theta;
  double eta = 0.0;
  double log_joint = 0.0;
  Counts totals;
  std::vector<State> latent;  // states at the observation times
};

struct TraceSink {
  std::function<void(const TraceRow&)> on_row;
  std::function<void(std::size_t iteration, const Path&)> on_snapshot;
};

/// Runs config.iterations sweeps followed by Gibbs updates, emitting every
/// `thinning`-th state.
void run_chain(ChainState& state, const SamplerContext& ctx, const RunConfig& config,
               const TraceSink& sink);
std::vector<TraceRow> run_chain(ChainState& state, const SamplerContext& ctx,
                                const RunConfig& config);

}  // namespace mjp
