#include "mjp/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mjp {

double binomial(std::int64_t n, int k) {
  if (k < 0 || n < k) return 0.0;
  switch (k) {
    case 0:
      return 1.0;
    case 1:
      return static_cast<double>(n);
    case 2:
      if (n < (std::int64_t{1} << 31)) return static_cast<double>(n * (n - 1) / 2);
      break;
    default:
      break;
  }
  unsigned __int128 res = 1;
  for (int i = 0; i < k; ++i) {
    res = res * static_cast<unsigned __int128>(n - i) / static_cast<unsigned __int128>(i + 1);
  }
  return static_cast<double>(res);
}

std::int64_t AffineFactor::affine(std::span<const std::int64_t> y) const {
  std::int64_t v = constant;
  for (std::size_t j = 0; j < coef.size(); ++j) v += coef[j] * y[j];
  return v;
}

double AffineFactor::value(std::span<const std::int64_t> y) const { return binomial(affine(y), order); }

double TimeFactor::value(double t) const {
  switch (kind) {
    case TimeFactorKind::none:
      return 1.0;
    case TimeFactorKind::linear:
      return t;
    case TimeFactorKind::exponential:
      return std::exp(rate * t);
  }
  return 1.0;
}

double TimeFactor::integral(double s, double t) const {
  switch (kind) {
    case TimeFactorKind::none:
      return t - s;
    case TimeFactorKind::linear:
      return 0.5 * (t * t - s * s);
    case TimeFactorKind::exponential:
      if (rate == 0.0) return t - s;
      return (std::exp(rate * t) - std::exp(rate * s)) / rate;
  }
  return t - s;
}

double IntensityForm::state_part(std::span<const std::int64_t> y) const {
  double v = 1.0;
  for (const auto& f : factors) {
    v *= f.value(y);
    if (v == 0.0) break;
  }
  return v;
}

double InitialDistribution::log_density(std::span<const std::int64_t> y) const {
  double lp = 0.0;
  for (std::size_t j = 0; j < ranges.size(); ++j) {
    if (y[j] < ranges[j].lo || y[j] > ranges[j].hi) return -std::numeric_limits<double>::infinity();
    lp -= std::log(static_cast<double>(ranges[j].hi - ranges[j].lo + 1));
  }
  return lp;
}

State InitialDistribution::sample(Rng& rng) const {
  State y(ranges.size());
  for (std::size_t j = 0; j < ranges.size(); ++j) y[j] = uniform_int(rng, ranges[j].lo, ranges[j].hi);
  return y;
}

bool ModelSpec::time_homogeneous() const {
  return std::all_of(intensity.begin(), intensity.end(),
                     [](const IntensityForm& f) { return f.time.kind == TimeFactorKind::none; });
}

void ModelSpec::validate() const {
  const std::size_t p = num_species(), r = num_reactions();
  if (p == 0) throw std::invalid_argument("model: no species");
  if (r == 0) throw std::invalid_argument("model: no reactions");
  if (jump.rows() != p || jump.cols() != r)
    throw std::invalid_argument("model: jump matrix must be species x reactions");
  if (intensity.size() != r) throw std::invalid_argument("model: one intensity per reaction required");
  for (std::size_t i = 0; i < r; ++i)
    for (const auto& f : intensity[i].factors) {
      if (f.coef.size() != p)
        throw std::invalid_argument("model: intensity of " + reactions[i] + " has wrong width");
      if (f.order < 1) throw std::invalid_argument("model: intensity order must be >= 1 in " + reactions[i]);
    }
  if (init.ranges.size() != p) throw std::invalid_argument("model: initial distribution width");
  for (std::size_t j = 0; j < p; ++j)
    if (init.ranges[j].lo < 0 || init.ranges[j].hi < init.ranges[j].lo)
      throw std::invalid_argument("model: invalid initial range for " + species[j]);
  if (error.observed.size() != p) throw std::invalid_argument("model: observation mask width");
}

ObservationSeries ObservationSeries::window(std::size_t from, std::size_t to) const {
  ObservationSeries out;
  out.species = species;
  for (std::size_t l = from; l <= to && l < size(); ++l) {
    out.times.push_back(times[l]);
    for (std::size_t j = 0; j < width(); ++j) out.values.push_back(value(l, j));
  }
  return out;
}

void ObservationSeries::validate() const {
  if (times.empty()) throw std::invalid_argument("observations: no rows");
  if (values.size() != times.size() * width()) throw std::invalid_argument("observations: ragged values");
  for (std::size_t l = 1; l < times.size(); ++l)
    if (!(times[l] > times[l - 1]))
      throw std::invalid_argument("observations: times must be strictly increasing (row " +
                                  std::to_string(l + 1) + ")");
  if (std::all_of(values.begin(), values.end(), [](double v) { return missing(v); }))
    throw std::invalid_argument("observations: every entry is na");
}

double standardized_intensity(const ModelSpec& model, std::size_t i, double t,
                              std::span<const std::int64_t> y) {
  return model.intensity[i].value(t, y);
}

double integrated_intensity(const ModelSpec& model, std::size_t i, double s, double t,
                            std::span<const std::int64_t> y) {
  if (s == t) return 0.0;
  return model.intensity[i].integral(s, t, y);
}

std::optional<State> apply_reaction(std::span<const std::int64_t> y, const IntMatrix& jump,
                                    std::size_t i) {
  State out(y.begin(), y.end());
  if (!apply_reaction_inplace(out, jump, i)) return std::nullopt;
  return out;
}

bool apply_reaction_inplace(State& y, const IntMatrix& jump, std::size_t i) {
  bool ok = true;
  for (std::size_t j = 0; j < y.size(); ++j) {
    y[j] += jump(j, i);
    if (y[j] < 0) ok = false;
  }
  return ok;
}

std::vector<std::int64_t> reaction_totals(const Path& path, std::size_t num_reactions) {
  std::vector<std::int64_t> tot(num_reactions, 0);
  for (const auto& e : path.events) ++tot.at(e.reaction);
  return tot;
}

State state_at(const ModelSpec& model, const Path& path, double t) {
  State y = path.start;
  for (const auto& e : path.events) {
    if (e.time > t) break;
    apply_reaction_inplace(y, model.jump, e.reaction);
  }
  return y;
}

State end_state(const ModelSpec& model, const Path& path) {
  State y = path.start;
  for (const auto& e : path.events) apply_reaction_inplace(y, model.jump, e.reaction);
  return y;
}

bool is_valid_path(const ModelSpec& model, const Path& path) {
  if (!(path.a < path.b) && !(path.a == path.b && path.events.empty())) return false;
  if (path.start.size() != model.num_species()) return false;
  if (std::any_of(path.start.begin(), path.start.end(), [](std::int64_t v) { return v < 0; }))
    return false;
  State y = path.start;
  double prev = path.a;
  for (const auto& e : path.events) {
    if (!(e.time > prev) || e.time > path.b) return false;
    if (e.reaction >= model.num_reactions()) return false;
    if (!(standardized_intensity(model, e.reaction, e.time, y) > 0.0)) return false;
    if (!apply_reaction_inplace(y, model.jump, e.reaction)) return false;
    prev = e.time;
  }
  return true;
}

}  // namespace mjp
