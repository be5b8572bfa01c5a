#pragma once

// Shared fixtures and independent oracles for the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "mjp/io.hpp"
#include "mjp/model.hpp"

namespace mjp::testing {

inline std::string config_path(const std::string& name) { return std::string(MJP_SOURCE_DIR) + "/configs/" + name; }
inline std::string fixture_path(const std::string& name) {
  return std::string(MJP_SOURCE_DIR) + "/tests/fixtures/" + name;
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("mjp_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline ModelConfig oregonator(const std::optional<std::string>& scenario = std::nullopt) {
  return load_model_config(config_path("oregonator.json"), scenario);
}
inline ModelConfig prokaryotic(const std::optional<std::string>& scenario = std::nullopt) {
  return load_model_config(config_path("prokaryotic.json"), scenario);
}

inline AffineFactor species_factor(std::size_t p, std::size_t j, int order = 1) {
  AffineFactor f;
  f.coef.assign(p, 0);
  f.coef[j] = 1;
  f.order = order;
  return f;
}

/// One species; birth at rate theta_1 (cap - y), death at rate theta_2 y.
inline ModelSpec birth_death(std::int64_t cap, std::int64_t lo = 0, std::int64_t hi = 0) {
  ModelSpec m;
  m.name = "birth_death";
  m.species = {"Y"};
  m.reactions = {"birth", "death"};
  m.jump = IntMatrix{{1, -1}};
  AffineFactor room;
  room.coef = {-1};
  room.constant = cap;
  m.intensity = {IntensityForm{{room}, {}}, IntensityForm{{species_factor(1, 0)}, {}}};
  m.init.ranges = {{lo, hi}};
  m.error.observed = {true};
  return m;
}

/// Immigration (rate theta_1) and linear death (theta_2 y).
inline ModelSpec immigration_death() {
  ModelSpec m;
  m.name = "immigration_death";
  m.species = {"Y"};
  m.reactions = {"immigration", "death"};
  m.jump = IntMatrix{{1, -1}};
  m.intensity = {IntensityForm{{}, {}}, IntensityForm{{species_factor(1, 0)}, {}}};
  m.init.ranges = {{0, 0}};
  m.error.observed = {true};
  return m;
}

/// Asymptotic Kolmogorov p-value for the one-sample statistic d with n
/// samples (Stephens' small-sample correction).
inline double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

/// sup |F_n - F| for a sample against a continuous CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double f = cdf(sample[k]);
    d = std::max({d, f - static_cast<double>(k) / n, static_cast<double>(k + 1) / n - f});
  }
  return d;
}

/// Standard error of the mean of a correlated series by batch means.
inline double batch_means_se(const std::vector<double>& x, std::size_t batches = 50) {
  const std::size_t size = x.size() / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t k = b * size; k < (b + 1) * size; ++k) s += x[k];
    means.push_back(s / static_cast<double>(size));
  }
  const double m = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(batches);
  double ss = 0.0;
  for (double v : means) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
}

/// Exact law of the number of jumps on [0, T] of a finite CTMC started in
/// `from` and conditioned to be in `to` at T, by uniformization: with
/// P = I + Q / lambda, the jump count N of the Poisson clock and the
/// number of real (non-self) jumps J, P[J = j, X_T = to] =
/// sum_n Pois(n; lambda T) [D^{n} paths with j off-diagonal steps].
/// `rates[x]` lists (target, rate) pairs.
inline std::vector<double> conditioned_jump_count_law(
    const std::vector<std::vector<std::pair<std::size_t, double>>>& rates, std::size_t from, std::size_t to,
    double horizon, std::size_t max_jumps) {
  const std::size_t states = rates.size();
  double lambda = 0.0;
  for (const auto& out : rates) {
    double total = 0.0;
    for (const auto& [_, r] : out) total += r;
    lambda = std::max(lambda, total);
  }
  lambda *= 1.05;
  // f[j][x]: weight of being in x after the current number of clock ticks
  // having made j real jumps.
  std::vector<std::vector<double>> f(max_jumps + 1, std::vector<double>(states, 0.0));
  f[0][from] = 1.0;
  std::vector<double> law(max_jumps + 1, 0.0);
  const double mean = lambda * horizon;
  double log_pois = -mean;  // log Pois(0)
  const auto ticks = static_cast<std::size_t>(mean + 40.0 * std::sqrt(mean) + 100.0);
  for (std::size_t n = 0;; ++n) {
    const double w = std::exp(log_pois);
    for (std::size_t j = 0; j <= max_jumps; ++j) law[j] += w * f[j][to];
    if (n == ticks) break;
    std::vector<std::vector<double>> g(max_jumps + 1, std::vector<double>(states, 0.0));
    for (std::size_t j = 0; j <= max_jumps; ++j)
      for (std::size_t x = 0; x < states; ++x) {
        if (f[j][x] == 0.0) continue;
        double out_rate = 0.0;
        for (const auto& [y, r] : rates[x]) {
          out_rate += r;
          if (j < max_jumps) g[j + 1][y] += f[j][x] * r / lambda;
        }
        g[j][x] += f[j][x] * (1.0 - out_rate / lambda);
      }
    f = std::move(g);
    log_pois += std::log(mean) - std::log(static_cast<double>(n + 1));
  }
  const double total = std::accumulate(law.begin(), law.end(), 0.0);
  for (double& v : law) v /= total;
  return law;
}

}  // namespace mjp::testing
