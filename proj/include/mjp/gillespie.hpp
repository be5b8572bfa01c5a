#pragma once

// Forward simulation by the direct (Gillespie) method. Time-dependent
// intensities are frozen at the previous event time.

#include <cstddef>
#include <span>
#include <stdexcept>

#include "mjp/model.hpp"
#include "mjp/random.hpp"

namespace mjp {

inline constexpr std::size_t kDefaultEventCap = 10'000'000;

class EventCapExceeded : public std::runtime_error {
 public:
  EventCapExceeded(Path partial, std::size_t cap);
  const Path& partial_path() const { return partial_; }

 private:
  Path partial_;
};

Path simulate_path(const ModelSpec& model, std::span<const double> theta, const State& y0,
                   double a, double b, Rng& rng, std::size_t cap = kDefaultEventCap);

/// Reaction i fires at rate 1{h_i(t, y) > 0} / (b - a).
Path simulate_equal_rate_path(const ModelSpec& model, const State& y0, double a, double b,
                              Rng& rng, std::size_t cap = kDefaultEventCap);

}  // namespace mjp
