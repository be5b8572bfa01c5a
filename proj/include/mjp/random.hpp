#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mjp {

using Rng = std::mt19937_64;

/// Independent stream for (seed, stream) pairs.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

double uniform01(Rng& rng);
/// Uniform on the open interval (0, 1).
double uniform_open(Rng& rng);
double exponential(Rng& rng, double rate);
double gamma(Rng& rng, double shape, double rate);
/// log of a Gamma(shape, 1) draw; stays finite for tiny shapes.
double log_gamma_draw(Rng& rng, double shape);
double normal(Rng& rng, double mean, double sd);
std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi);
/// Index drawn proportionally to nonnegative weights with given total.
std::size_t categorical(Rng& rng, std::span<const double> weights, double total);

}  // namespace mjp
