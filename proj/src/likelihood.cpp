#include "mjp/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace mjp {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

PriorSpec PriorSpec::uniform(std::size_t r, double alpha, double beta) {
  PriorSpec p;
  p.theta_alpha.assign(r, alpha);
  p.theta_beta.assign(r, beta);
  return p;
}

void PriorSpec::validate(std::size_t num_reactions) const {
  if (theta_alpha.size() != num_reactions || theta_beta.size() != num_reactions)
    throw std::invalid_argument("prior: theta hyperparameters must have one entry per reaction");
  for (std::size_t i = 0; i < num_reactions; ++i)
    if (!(theta_alpha[i] > 0.0) || !(theta_beta[i] > 0.0))
      throw std::invalid_argument("prior: theta hyperparameters must be positive (reaction " +
                                  std::to_string(i + 1) + ")");
  if (eta.shape < 0.0 || eta.rate < 0.0) throw std::invalid_argument("prior: eta hyperparameters must be >= 0");
  std::vector<bool> used(num_reactions, false);
  for (const auto& g : groups) {
    if (g.first >= num_reactions || g.second >= num_reactions || g.first == g.second)
      throw std::invalid_argument("prior: invalid reparameterization pair");
    if (used[g.first] || used[g.second]) throw std::invalid_argument("prior: reparameterization pairs overlap");
    used[g.first] = used[g.second] = true;
    if (!(g.alpha > 0.0) || !(g.beta > 0.0))
      throw std::invalid_argument("prior: pair hyperparameters must be positive");
  }
}

std::vector<std::size_t> PriorSpec::unpaired(std::size_t num_reactions) const {
  std::vector<bool> used(num_reactions, false);
  for (const auto& g : groups) used[g.first] = used[g.second] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < num_reactions; ++i)
    if (!used[i]) out.push_back(i);
  return out;
}

PathStatistics path_statistics(const ModelSpec& model, const Path& path) {
  const std::size_t r = model.num_reactions();
  PathStatistics s{std::vector<std::int64_t>(r, 0), std::vector<double>(r, 0.0)};
  State y = path.start;
  double t = path.a;
  auto accumulate = [&](double until) {
    for (std::size_t i = 0; i < r; ++i) s.integrals[i] += integrated_intensity(model, i, t, until, y);
  };
  for (const auto& e : path.events) {
    accumulate(e.time);
    ++s.totals[e.reaction];
    apply_reaction_inplace(y, model.jump, e.reaction);
    t = e.time;
  }
  accumulate(path.b);
  return s;
}

double log_path_density(const ModelSpec& model, std::span<const double> theta, const Path& path) {
  const std::size_t r = model.num_reactions();
  State y = path.start;
  double t = path.a;
  double lp = 0.0;
  auto survival = [&](double until) {
    for (std::size_t i = 0; i < r; ++i)
      if (theta[i] != 0.0) lp -= theta[i] * integrated_intensity(model, i, t, until, y);
  };
  for (const auto& e : path.events) {
    if (!(e.time > t) || e.time > path.b) return kNegInf;
    survival(e.time);
    const double h = standardized_intensity(model, e.reaction, e.time, y);
    if (!(h > 0.0) || !(theta[e.reaction] > 0.0)) return kNegInf;
    lp += std::log(theta[e.reaction] * h);
    if (!apply_reaction_inplace(y, model.jump, e.reaction)) return kNegInf;
    t = e.time;
  }
  survival(path.b);
  return lp;
}

double log_obs_density_row(const ModelSpec& model, double eta, const ObservationSeries& obs,
                           std::size_t row, std::span<const std::int64_t> y) {
  const double half_log = 0.5 * std::log(eta / (2.0 * std::numbers::pi));
  double lp = 0.0;
  for (std::size_t j = 0; j < obs.width(); ++j) {
    if (!model.error.observed[j]) continue;
    const double x = obs.value(row, j);
    if (ObservationSeries::missing(x)) continue;
    const double d = x - static_cast<double>(y[j]);
    lp += half_log - 0.5 * eta * d * d;
  }
  return lp;
}

std::vector<State> states_at_times(const ModelSpec& model, const Path& path,
                                   std::span<const double> times) {
  std::vector<State> out;
  out.reserve(times.size());
  State y = path.start;
  std::size_t k = 0;
  for (double t : times) {
    while (k < path.events.size() && path.events[k].time <= t) {
      apply_reaction_inplace(y, model.jump, path.events[k].reaction);
      ++k;
    }
    out.push_back(y);
  }
  return out;
}

namespace {

std::pair<std::size_t, std::size_t> rows_in(const ObservationSeries& obs, double a, double b) {
  const auto lo = std::lower_bound(obs.times.begin(), obs.times.end(), a);
  const auto hi = std::upper_bound(obs.times.begin(), obs.times.end(), b);
  return {static_cast<std::size_t>(lo - obs.times.begin()), static_cast<std::size_t>(hi - obs.times.begin())};
}

}  // namespace

double log_obs_density(const ModelSpec& model, double eta, const ObservationSeries& obs,
                       const Path& path, double a, double b) {
  const auto [lo, hi] = rows_in(obs, a, b);
  if (lo >= hi) return 0.0;
  const auto states = states_at_times(
      model, path, std::span<const double>(obs.times.data() + lo, hi - lo));
  double lp = 0.0;
  for (std::size_t l = lo; l < hi; ++l) lp += log_obs_density_row(model, eta, obs, l, states[l - lo]);
  return lp;
}

std::vector<GammaParams> theta_posterior(const PriorSpec& prior, const PathStatistics& stats) {
  std::vector<GammaParams> out(stats.totals.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = {prior.theta_alpha[i] + static_cast<double>(stats.totals[i]),
              prior.theta_beta[i] + stats.integrals[i]};
  return out;
}

std::vector<GammaParams> theta_posterior(const ModelSpec& model, const PriorSpec& prior,
                                         const Path& path) {
  return theta_posterior(prior, path_statistics(model, path));
}

ResidualSummary residuals(const ModelSpec& model, const ObservationSeries& obs, const Path& path) {
  ResidualSummary res;
  const auto [lo, hi] = rows_in(obs, path.a, path.b);
  if (lo >= hi) return res;
  const auto states = states_at_times(
      model, path, std::span<const double>(obs.times.data() + lo, hi - lo));
  for (std::size_t l = lo; l < hi; ++l)
    for (std::size_t j = 0; j < obs.width(); ++j) {
      if (!model.error.observed[j]) continue;
      const double x = obs.value(l, j);
      if (ObservationSeries::missing(x)) continue;
      const double d = x - static_cast<double>(states[l - lo][j]);
      ++res.count;
      res.sum_squares += d * d;
    }
  return res;
}

GammaParams eta_posterior(const PriorSpec& prior, const ResidualSummary& res) {
  const GammaParams post{prior.eta.shape + 0.5 * static_cast<double>(res.count),
                         prior.eta.rate + 0.5 * res.sum_squares};
  if (!(post.shape > 0.0) || !(post.rate > 0.0))
    throw ImproperPosterior("eta posterior is improper (shape " + std::to_string(post.shape) +
                            ", rate " + std::to_string(post.rate) + ")");
  return post;
}

GammaParams eta_posterior(const ModelSpec& model, const PriorSpec& prior, const Path& path,
                          const ObservationSeries& obs) {
  return eta_posterior(prior, residuals(model, obs, path));
}

double log_gamma_density(double x, double shape, double rate) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_prior(const PriorSpec& prior, std::span<const double> theta, double eta) {
  double lp = 0.0;
  for (std::size_t i : prior.unpaired(theta.size()))
    lp += log_gamma_density(theta[i], prior.theta_alpha[i], prior.theta_beta[i]);
  for (const auto& g : prior.groups) {
    const double sum = theta[g.first] + theta[g.second];
    if (!(theta[g.first] > 0.0) || !(theta[g.second] > 0.0)) return kNegInf;
    // Jacobian of (sum, ratio) -> (theta_first, theta_second) is 1 / sum.
    lp += log_gamma_density(sum, g.alpha, g.beta) - std::log(sum);
  }
  if (prior.eta.shape > 0.0 && prior.eta.rate > 0.0) {
    lp += log_gamma_density(eta, prior.eta.shape, prior.eta.rate);
  } else if (eta > 0.0) {
    lp += (prior.eta.shape - 1.0) * std::log(eta) - prior.eta.rate * eta;
  }
  return lp;
}

double log_joint(const ModelSpec& model, const PriorSpec& prior, std::span<const double> theta,
                 double eta, const Path& path, const ObservationSeries& obs) {
  const double lf0 = model.init.log_density(path.start);
  if (lf0 == kNegInf) return kNegInf;
  const double lpsi = log_path_density(model, theta, path);
  if (lpsi == kNegInf) return kNegInf;
  return lf0 + lpsi + log_obs_density(model, eta, obs, path, path.a, path.b) +
         log_prior(prior, theta, eta);
}

std::vector<double> rho_transform(std::span<const double> theta, std::span<const ReparamGroup> groups) {
  std::vector<bool> used(theta.size(), false);
  std::vector<double> rho;
  rho.reserve(theta.size());
  for (const auto& g : groups) {
    const double sum = theta[g.first] + theta[g.second];
    if (!(sum > 0.0)) throw std::invalid_argument("rho_transform: pair sum must be positive");
    rho.push_back(sum);
    rho.push_back(theta[g.first] / sum);
    used[g.first] = used[g.second] = true;
  }
  for (std::size_t i = 0; i < theta.size(); ++i)
    if (!used[i]) rho.push_back(theta[i]);
  return rho;
}

std::vector<double> rho_inverse(std::span<const double> rho, std::span<const ReparamGroup> groups,
                                std::size_t num_reactions) {
  if (rho.size() != num_reactions) throw std::invalid_argument("rho_inverse: size mismatch");
  std::vector<double> theta(num_reactions, 0.0);
  std::vector<bool> used(num_reactions, false);
  std::size_t k = 0;
  for (const auto& g : groups) {
    const double sum = rho[k], ratio = rho[k + 1];
    if (!(sum > 0.0)) throw std::invalid_argument("rho_inverse: pair sum must be positive");
    theta[g.first] = sum * ratio;
    theta[g.second] = sum * (1.0 - ratio);
    used[g.first] = used[g.second] = true;
    k += 2;
  }
  for (std::size_t i = 0; i < num_reactions; ++i)
    if (!used[i]) theta[i] = rho[k++];
  return theta;
}

double RatioDensity::log_unnormalized(double x) const {
  if (x < 0.0 || x > 1.0) return kNegInf;
  double lp = 0.0;
  if (n1 > 0.0) lp += (x > 0.0) ? n1 * std::log(x) : kNegInf;
  if (n2 > 0.0) lp += (x < 1.0) ? n2 * std::log1p(-x) : kNegInf;
  if (lp == kNegInf) return lp;
  const double c = alpha + n1 + n2;
  return lp - c * std::log(beta + x * i1 + (1.0 - x) * i2);
}

namespace {

struct Grid {
  std::vector<double> x;
  std::vector<double> logf;
  double max = kNegInf;
};

Grid evaluate(const RatioDensity& d, double lo, double hi, std::size_t n) {
  Grid g;
  g.x.resize(n + 1);
  g.logf.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    g.x[i] = (i == n) ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    g.logf[i] = d.log_unnormalized(g.x[i]);
    g.max = std::max(g.max, g.logf[i]);
  }
  return g;
}

}  // namespace

double sample_ratio(const RatioDensity& density, Rng& rng, std::size_t grid) {
  // Coarse pass locates the bulk of the mass; the fine pass resolves it.
  constexpr double kWindow = 40.0;
  const Grid coarse = evaluate(density, 0.0, 1.0, grid);
  if (coarse.max == kNegInf) throw std::runtime_error("sample_ratio: density vanishes on [0, 1]");
  std::size_t first = coarse.x.size(), last = 0;
  for (std::size_t i = 0; i < coarse.x.size(); ++i)
    if (coarse.logf[i] > coarse.max - kWindow) {
      first = std::min(first, i);
      last = i;
    }
  const double lo = coarse.x[first > 0 ? first - 1 : 0];
  const double hi = coarse.x[std::min(last + 1, coarse.x.size() - 1)];
  const Grid fine = evaluate(density, lo, hi, grid);

  std::vector<double> f(fine.x.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(fine.logf[i] - fine.max);
  std::vector<double> cum(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i)
    cum[i] = cum[i - 1] + 0.5 * (f[i - 1] + f[i]) * (fine.x[i] - fine.x[i - 1]);

  const double target = uniform01(rng) * cum.back();
  std::size_t k = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin());
  k = std::clamp<std::size_t>(k, 1, cum.size() - 1);
  const double h = fine.x[k] - fine.x[k - 1];
  const double m = target - cum[k - 1];
  const double f0 = f[k - 1];
  const double slope = (f[k] - f0) / h;
  // Solve f0 s + slope s^2 / 2 = m for s in [0, h].
  const double disc = std::max(0.0, f0 * f0 + 2.0 * slope * m);
  const double denom = f0 + std::sqrt(disc);
  const double s = denom > 0.0 ? 2.0 * m / denom : 0.0;
  return std::clamp(fine.x[k - 1] + std::clamp(s, 0.0, h), 0.0, 1.0);
}

std::pair<double, double> sample_rho_pair(const ReparamGroup& group, const PathStatistics& stats,
                                          Rng& rng) {
  RatioDensity d;
  d.alpha = group.alpha;
  d.beta = group.beta;
  d.i1 = stats.integrals[group.first];
  d.i2 = stats.integrals[group.second];
  d.n1 = static_cast<double>(stats.totals[group.first]);
  d.n2 = static_cast<double>(stats.totals[group.second]);
  const double ratio = sample_ratio(d, rng);
  const double sum = gamma(rng, d.alpha + d.n1 + d.n2, d.beta + ratio * d.i1 + (1.0 - ratio) * d.i2);
  return {sum, ratio};
}

}  // namespace mjp
