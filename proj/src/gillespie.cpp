#include "mjp/gillespie.hpp"

#include <string>
#include <utility>
#include <vector>

namespace mjp {

EventCapExceeded::EventCapExceeded(Path partial, std::size_t cap)
    : std::runtime_error("simulation exceeded the event cap of " + std::to_string(cap) +
                         " events at t = " +
                         std::to_string(partial.events.empty() ? partial.a : partial.events.back().time)),
      partial_(std::move(partial)) {}

namespace {

template <class RateFn>
Path direct_method(const ModelSpec& model, const State& y0, double a, double b, Rng& rng,
                   std::size_t cap, RateFn&& rate) {
  const std::size_t r = model.num_reactions();
  Path path{a, b, y0, {}};
  State y = y0;
  std::vector<double> mu(r);
  double t = a;
  for (;;) {
    double mu0 = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      mu[i] = rate(i, t, y);
      mu0 += mu[i];
    }
    if (!(mu0 > 0.0)) break;
    const double next = t + exponential(rng, mu0);
    if (next > b) break;
    if (!(next > t)) continue;  // waiting time below resolution of t
    const std::size_t i = categorical(rng, mu, mu0);
    if (path.events.size() >= cap) throw EventCapExceeded(std::move(path), cap);
    apply_reaction_inplace(y, model.jump, i);
    path.events.push_back({next, i});
    t = next;
  }
  return path;
}

}  // namespace

Path simulate_path(const ModelSpec& model, std::span<const double> theta, const State& y0,
                   double a, double b, Rng& rng, std::size_t cap) {
  return direct_method(model, y0, a, b, rng, cap, [&](std::size_t i, double t, const State& y) {
    return theta[i] > 0.0 ? theta[i] * standardized_intensity(model, i, t, y) : 0.0;
  });
}

Path simulate_equal_rate_path(const ModelSpec& model, const State& y0, double a, double b,
                              Rng& rng, std::size_t cap) {
  const double unit = 1.0 / (b - a);
  return direct_method(model, y0, a, b, rng, cap, [&](std::size_t i, double t, const State& y) {
    return standardized_intensity(model, i, t, y) > 0.0 ? unit : 0.0;
  });
}

}  // namespace mjp
