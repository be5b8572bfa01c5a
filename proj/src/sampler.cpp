#include "mjp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "mjp/gillespie.hpp"

namespace mjp {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Schedule Schedule::standard(std::span<const double> times) {
  if (times.size() < 2) throw std::invalid_argument("schedule: at least two observation times required");
  const std::size_t n = times.size() - 1;
  Schedule s;
  for (std::size_t k = 1; k <= n; ++k) {
    s.intervals.push_back({times[k - 1], times[k], k == 1, k == n, false});
    if (k < n)
      s.intervals.push_back({0.5 * (times[k - 1] + times[k]), 0.5 * (times[k] + times[k + 1]), false,
                             false, true});
  }
  return s;
}

void Schedule::validate(double t0, double tn) const {
  if (intervals.empty()) throw std::invalid_argument("schedule: no intervals");
  for (const auto& iv : intervals) {
    if (!(iv.a < iv.b) || iv.a < t0 || iv.b > tn)
      throw std::invalid_argument("schedule: interval [" + std::to_string(iv.a) + ", " +
                                  std::to_string(iv.b) + "] is empty or outside the observation window");
    if (iv.start && iv.a != t0) throw std::invalid_argument("schedule: start interval must begin at t0");
    if (iv.end && iv.b != tn) throw std::invalid_argument("schedule: end interval must finish at tn");
  }
}

MoveCounter AcceptanceStats::pooled() const {
  MoveCounter m;
  for (const auto* c : {&base, &midpoint, &start, &end}) {
    m.attempts += c->attempts;
    m.accepted += c->accepted;
  }
  return m;
}

void RunConfig::validate() const {
  if (thinning == 0) throw std::invalid_argument("run: thinning must be positive");
  if (!(init.shrinkage > 0.0 && init.shrinkage <= 1.0))
    throw std::invalid_argument("run: shrinkage must lie in (0, 1]");
  if (!(init.eta0 > 0.0)) throw std::invalid_argument("run: eta0 must be positive");
  if (init.particles == 0) throw std::invalid_argument("run: particles must be positive");
  if (eta_fixed && !(*eta_fixed > 0.0)) throw std::invalid_argument("run: eta_fixed must be positive");
}

namespace {

using EventIter = std::vector<Event>::iterator;

std::pair<std::size_t, std::size_t> event_range(const Path& path, double a, double b) {
  const auto cmp = [](const Event& e, double t) { return e.time <= t; };
  const auto lo = std::lower_bound(path.events.begin(), path.events.end(), a, cmp);
  const auto hi = std::lower_bound(lo, path.events.end(), b, cmp);
  return {static_cast<std::size_t>(lo - path.events.begin()),
          static_cast<std::size_t>(hi - path.events.begin())};
}

void splice(Path& path, std::size_t lo, std::size_t hi, const std::vector<Event>& replacement) {
  const auto first = path.events.begin() + static_cast<std::ptrdiff_t>(lo);
  const auto last = path.events.begin() + static_cast<std::ptrdiff_t>(hi);
  path.events.insert(path.events.erase(first, last), replacement.begin(), replacement.end());
}

bool metropolis(Rng& rng, double log_ratio) {
  if (!(log_ratio > kNegInf)) return false;
  if (log_ratio >= 0.0) return true;
  return std::log(uniform_open(rng)) < log_ratio;
}

}  // namespace

Path subpath(const ModelSpec& model, const Path& path, double a, double b) {
  const auto [lo, hi] = event_range(path, a, b);
  Path sub{a, b, path.start, {}};
  for (std::size_t k = 0; k < lo; ++k) apply_reaction_inplace(sub.start, model.jump, path.events[k].reaction);
  sub.events.assign(path.events.begin() + static_cast<std::ptrdiff_t>(lo),
                    path.events.begin() + static_cast<std::ptrdiff_t>(hi));
  return sub;
}

namespace {

void update_interior(ChainState& state, const SamplerContext& ctx, const ScheduledInterval& iv,
                     MoveCounter& counter) {
  const auto [lo, hi] = event_range(state.path, iv.a, iv.b);
  const Path old = subpath(ctx.model, state.path, iv.a, iv.b);
  ++counter.attempts;
  const Counts totals = reaction_totals(old, ctx.model.num_reactions());
  const auto proposed_totals = propose_totals_interior(totals, ctx.proposal, state.rng);
  if (!proposed_totals) return;
  const ProposalOutcome prop =
      propose_path(ctx.model, state.theta, old.start, *proposed_totals, iv.a, iv.b, state.rng);
  if (prop.status != ProposalStatus::proposed) return;
  const double lr = acceptance_log_ratio(ctx.model, state.theta, state.eta, ctx.obs, old, prop,
                                         Boundary::interior);
  if (!metropolis(state.rng, lr)) return;
  splice(state.path, lo, hi, prop.path.events);
  ++counter.accepted;
}

void update_border(ChainState& state, const SamplerContext& ctx, const ScheduledInterval& iv,
                   Boundary boundary, MoveCounter& counter) {
  const auto [lo, hi] = event_range(state.path, iv.a, iv.b);
  const Path old = subpath(ctx.model, state.path, iv.a, iv.b);
  ++counter.attempts;
  const Counts totals = reaction_totals(old, ctx.model.num_reactions());
  const State old_end = end_state(ctx.model, old);
  const auto border = propose_totals_border(ctx.model, totals, old.start, old_end, boundary,
                                            ctx.proposal, state.rng);
  if (!border) return;
  const ProposalOutcome prop =
      propose_path(ctx.model, state.theta, border->start, border->totals, iv.a, iv.b, state.rng);
  if (prop.status != ProposalStatus::proposed) return;
  const double lr = acceptance_log_ratio(ctx.model, state.theta, state.eta, ctx.obs, old, prop, boundary);
  if (!metropolis(state.rng, lr)) return;
  splice(state.path, lo, hi, prop.path.events);
  if (boundary == Boundary::start) state.path.start = border->start;
  ++counter.accepted;
}

}  // namespace

void sweep(ChainState& state, const SamplerContext& ctx, const Schedule& schedule) {
  for (const auto& iv : schedule.intervals) {
    update_interior(state, ctx, iv, iv.midpoint ? state.stats.midpoint : state.stats.base);
    if (iv.start && iv.a == state.path.a) update_border(state, ctx, iv, Boundary::start, state.stats.start);
    if (iv.end && iv.b == state.path.b) update_border(state, ctx, iv, Boundary::end, state.stats.end);
  }
}

void gibbs_theta(ChainState& state, const SamplerContext& ctx, double shrinkage) {
  const std::size_t r = ctx.model.num_reactions();
  const PathStatistics stats = path_statistics(ctx.model, state.path);
  const auto post = theta_posterior(ctx.prior, stats);
  state.theta.resize(r);
  for (std::size_t i : ctx.prior.unpaired(r)) state.theta[i] = gamma(state.rng, post[i].shape, post[i].rate);
  for (const auto& g : ctx.prior.groups) {
    const auto [sum, ratio] = sample_rho_pair(g, stats, state.rng);
    state.theta[g.first] = sum * ratio;
    state.theta[g.second] = sum * (1.0 - ratio);
  }
  if (shrinkage != 1.0)
    for (double& t : state.theta) t *= shrinkage;
}

void gibbs_eta(ChainState& state, const SamplerContext& ctx) {
  const GammaParams post = eta_posterior(ctx.model, ctx.prior, state.path, ctx.obs);
  state.eta = gamma(state.rng, post.shape, post.rate);
}

namespace {

// Draw of y_{t0} from f0(y) g(x_0 | y), which factorizes over species.
State sample_start(const SamplerContext& ctx, double eta, Rng& rng) {
  const auto& ranges = ctx.model.init.ranges;
  State y(ranges.size());
  for (std::size_t j = 0; j < ranges.size(); ++j) {
    const double x = ctx.obs.value(0, j);
    if (!ctx.model.error.observed[j] || ObservationSeries::missing(x) || ranges[j].lo == ranges[j].hi) {
      y[j] = uniform_int(rng, ranges[j].lo, ranges[j].hi);
      continue;
    }
    const std::size_t count = static_cast<std::size_t>(ranges[j].hi - ranges[j].lo + 1);
    std::vector<double> logw(count);
    double top = kNegInf;
    for (std::size_t k = 0; k < count; ++k) {
      const double d = x - static_cast<double>(ranges[j].lo + static_cast<std::int64_t>(k));
      logw[k] = -0.5 * eta * d * d;
      top = std::max(top, logw[k]);
    }
    std::vector<double> w(count);
    double total = 0.0;
    for (std::size_t k = 0; k < count; ++k) total += (w[k] = std::exp(logw[k] - top));
    y[j] = ranges[j].lo + static_cast<std::int64_t>(categorical(rng, w, total));
  }
  return y;
}

}  // namespace

ChainState initialize(const SamplerContext& ctx, const RunConfig& config, Rng rng) {
  const auto& times = ctx.obs.times;
  if (times.size() < 2) throw InitializationError("initialization needs at least two observation times");
  const InitOptions& opt = config.init;
  const double eta0 = opt.eta0;
  const std::size_t n = times.size() - 1;

  ChainState state;
  state.rng = std::move(rng);
  state.eta = eta0;

  // First interval: equal-rate particles, keep the best fit to x_0, x_1.
  {
    Path best;
    double best_score = kNegInf;
    for (std::size_t s = 0; s < opt.particles; ++s) {
      const State y0 = sample_start(ctx, eta0, state.rng);
      Path candidate;
      try {
        candidate = simulate_equal_rate_path(ctx.model, y0, times[0], times[1], state.rng, opt.event_cap);
      } catch (const EventCapExceeded&) {
        continue;
      }
      const double score = log_obs_density(ctx.model, eta0, ctx.obs, candidate, times[0], times[1]);
      if (score > best_score) {
        best_score = score;
        best = std::move(candidate);
      }
    }
    if (best_score == kNegInf)
      throw InitializationError("no particle on the first interval has positive observation density; "
                                "increase the number of particles");
    state.path = std::move(best);
  }
  {
    const ObservationSeries window = ctx.obs.window(0, 1);
    const SamplerContext sub{ctx.model, ctx.prior, window, ctx.proposal};
    gibbs_theta(state, sub, opt.shrinkage);
  }

  for (std::size_t l = 1; l < n; ++l) {
    const ObservationSeries window = ctx.obs.window(0, l);
    const SamplerContext sub{ctx.model, ctx.prior, window, ctx.proposal};
    const Schedule schedule = Schedule::standard(std::span<const double>(times.data(), l + 1));
    for (std::size_t m = 0; m < opt.steps; ++m) {
      sweep(state, sub, schedule);
      gibbs_theta(state, sub, opt.shrinkage);
    }

    // Extend to t_{l+1} with the continuation that best matches x_{l+1}.
    const State y_l = end_state(ctx.model, state.path);
    Path best;
    double best_score = kNegInf;
    for (std::size_t s = 0; s < opt.particles; ++s) {
      Path candidate;
      try {
        candidate = simulate_path(ctx.model, state.theta, y_l, times[l], times[l + 1], state.rng, opt.event_cap);
      } catch (const EventCapExceeded&) {
        continue;
      }
      const State y_next = end_state(ctx.model, candidate);
      const double score = log_obs_density_row(ctx.model, eta0, ctx.obs, l + 1, y_next);
      if (score > best_score) {
        best_score = score;
        best = std::move(candidate);
      }
    }
    if (best_score == kNegInf)
      throw InitializationError("no continuation to t = " + std::to_string(times[l + 1]) +
                                " has positive observation density; increase the number of particles");
    state.path.b = times[l + 1];
    state.path.events.insert(state.path.events.end(), best.events.begin(), best.events.end());
  }

  state.eta = config.eta_fixed ? *config.eta_fixed : eta0;
  state.stats = {};
  return state;
}

void run_chain(ChainState& state, const SamplerContext& ctx, const RunConfig& config,
               const TraceSink& sink) {
  const Schedule schedule = config.schedule ? *config.schedule : Schedule::standard(ctx.obs.times);
  schedule.validate(state.path.a, state.path.b);
  const std::size_t r = ctx.model.num_reactions();
  for (std::size_t m = 1; m <= config.iterations; ++m) {
    sweep(state, ctx, schedule);
    gibbs_theta(state, ctx);
    if (!config.eta_fixed) gibbs_eta(state, ctx);

    if (m % config.thinning == 0 && sink.on_row) {
      TraceRow row;
      row.iteration = m;
      row.theta = state.theta;
      row.eta = state.eta;
      row.log_joint = log_joint(ctx.model, ctx.prior, state.theta, state.eta, state.path, ctx.obs);
      row.totals = reaction_totals(state.path, r);
      row.latent = states_at_times(ctx.model, state.path, ctx.obs.times);
      sink.on_row(row);
    }
    if (config.path_snapshot_every > 0 && m % config.path_snapshot_every == 0 && sink.on_snapshot)
      sink.on_snapshot(m, state.path);
  }
}

std::vector<TraceRow> run_chain(ChainState& state, const SamplerContext& ctx, const RunConfig& config) {
  std::vector<TraceRow> rows;
  run_chain(state, ctx, config, TraceSink{[&](const TraceRow& row) { rows.push_back(row); }, {}});
  return rows;
}

}  // namespace mjp
