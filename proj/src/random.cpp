#include "mjp/random.hpp"

#include <cmath>
#include <stdexcept>

namespace mjp {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

double uniform01(Rng& rng) { return std::generate_canonical<double, 64>(rng); }

double uniform_open(Rng& rng) {
  double u;
  do {
    u = uniform01(rng);
  } while (u <= 0.0 || u >= 1.0);
  return u;
}

double exponential(Rng& rng, double rate) { return -std::log(uniform_open(rng)) / rate; }

double gamma(Rng& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw std::invalid_argument("gamma: shape and rate must be positive");
  std::gamma_distribution<double> g(shape, 1.0);
  return g(rng) / rate;
}

double log_gamma_draw(Rng& rng, double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("log_gamma_draw: shape must be positive");
  if (shape >= 1.0) {
    std::gamma_distribution<double> g(shape, 1.0);
    return std::log(g(rng));
  }
  // G(a) = G(a + 1) * U^(1/a)
  std::gamma_distribution<double> g(shape + 1.0, 1.0);
  return std::log(g(rng)) + std::log(uniform_open(rng)) / shape;
}

double normal(Rng& rng, double mean, double sd) {
  std::normal_distribution<double> n(mean, sd);
  return n(rng);
}

std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  std::uniform_int_distribution<std::int64_t> d(lo, hi);
  return d(rng);
}

std::size_t categorical(Rng& rng, std::span<const double> weights, double total) {
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last = weights.size();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (u < acc) return i;
  }
  if (last == weights.size()) throw std::invalid_argument("categorical: all weights are zero");
  return last;
}

}  // namespace mjp
