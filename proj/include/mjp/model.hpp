#pragma once

// Markov jump process models: species, reactions with mass-action style
// intensities, initial distribution and Gaussian observation model.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mjp/lattice.hpp"
#include "mjp/random.hpp"

namespace mjp {

using State = std::vector<std::int64_t>;

/// binomial(affine(y), order), with affine(y) = coef . y + constant.
struct AffineFactor {
  std::vector<std::int64_t> coef;
  std::int64_t constant = 0;
  int order = 1;

  std::int64_t affine(std::span<const std::int64_t> y) const;
  double value(std::span<const std::int64_t> y) const;
};

/// Exact binomial coefficient as a double; zero when n < k.
double binomial(std::int64_t n, int k);

enum class TimeFactorKind { none, linear, exponential };

/// Separable, nonnegative time factor with a closed-form integral.
struct TimeFactor {
  TimeFactorKind kind = TimeFactorKind::none;
  double rate = 0.0;  // exponential: phi(t) = exp(rate * t)

  double value(double t) const;
  double integral(double s, double t) const;
};

struct IntensityForm {
  std::vector<AffineFactor> factors;
  TimeFactor time;

  double state_part(std::span<const std::int64_t> y) const;
  double value(double t, std::span<const std::int64_t> y) const {
    return time.value(t) * state_part(y);
  }
  double integral(double s, double t, std::span<const std::int64_t> y) const {
    return time.integral(s, t) * state_part(y);
  }
};

/// Product of per-species uniform ranges; lo == hi is a point mass.
struct InitialDistribution {
  struct Range {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
  };
  std::vector<Range> ranges;

  double log_density(std::span<const std::int64_t> y) const;
  bool is_point_mass(std::size_t species) const { return ranges[species].lo == ranges[species].hi; }
  State sample(Rng& rng) const;
};

/// Independent Gaussian errors with precision eta on the observed species.
struct ErrorModel {
  std::vector<bool> observed;
};

struct ModelSpec {
  std::string name;
  std::vector<std::string> species;
  std::vector<std::string> reactions;
  IntMatrix jump;  // species x reactions
  std::vector<IntensityForm> intensity;
  InitialDistribution init;
  ErrorModel error;
  std::map<std::string, std::int64_t> constants;

  std::size_t num_species() const { return species.size(); }
  std::size_t num_reactions() const { return reactions.size(); }
  bool time_homogeneous() const;
  /// Throws std::invalid_argument describing the first inconsistency.
  void validate() const;
};

struct Event {
  double time;
  std::size_t reaction;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Trajectory on [a, b]: initial state plus ordered reaction events with
/// a < tau_1 < ... < tau_n <= b.
struct Path {
  double a = 0.0;
  double b = 0.0;
  State start;
  std::vector<Event> events;

  std::size_t num_events() const { return events.size(); }
  friend bool operator==(const Path&, const Path&) = default;
};

/// Observation times t_0 < ... < t_n and (n+1) x p values, NaN for `na`.
struct ObservationSeries {
  std::vector<double> times;
  std::vector<std::string> species;
  std::vector<double> values;

  std::size_t size() const { return times.size(); }
  std::size_t width() const { return species.size(); }
  double value(std::size_t l, std::size_t j) const { return values[l * width() + j]; }
  static bool missing(double v) { return v != v; }
  static constexpr double na = std::numeric_limits<double>::quiet_NaN();

  /// Rows l with times in [from, to].
  ObservationSeries window(std::size_t from, std::size_t to) const;
  void validate() const;
};

double standardized_intensity(const ModelSpec& model, std::size_t i, double t,
                              std::span<const std::int64_t> y);
double integrated_intensity(const ModelSpec& model, std::size_t i, double s, double t,
                            std::span<const std::int64_t> y);

/// y + A_i, or nullopt if a component would become negative.
std::optional<State> apply_reaction(std::span<const std::int64_t> y, const IntMatrix& jump,
                                    std::size_t i);
/// In-place variant; returns false (leaving y modified) on negativity.
bool apply_reaction_inplace(State& y, const IntMatrix& jump, std::size_t i);

std::vector<std::int64_t> reaction_totals(const Path& path, std::size_t num_reactions);

/// State after all events with time <= t.
State state_at(const ModelSpec& model, const Path& path, double t);
State end_state(const ModelSpec& model, const Path& path);

/// Strict ordering, events inside (a, b], states nonnegative and every
/// event has positive standardized intensity.
bool is_valid_path(const ModelSpec& model, const Path& path);

}  // namespace mjp
