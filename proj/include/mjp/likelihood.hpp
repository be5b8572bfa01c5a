#pragma once

// Densities and conditional updates: path density, Gaussian observation
// density, joint density, Gamma full conditionals for theta and eta, and
// the (sum, ratio) reparameterization of reversible reaction pairs.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mjp/model.hpp"
#include "mjp/random.hpp"

namespace mjp {

struct GammaParams {
  double shape = 0.0;
  double rate = 0.0;

  double mean() const { return shape / rate; }
  friend bool operator==(const GammaParams&, const GammaParams&) = default;
};

/// Rates first and second are sampled as sum ~ Gamma(alpha, beta) and
/// ratio = first / sum ~ Uniform(0, 1) a priori.
struct ReparamGroup {
  std::size_t first = 0;
  std::size_t second = 0;
  double alpha = 0.1;
  double beta = 1.0;
};

struct PriorSpec {
  std::vector<double> theta_alpha;
  std::vector<double> theta_beta;
  GammaParams eta{0.0, 0.0};  // (0, 0) is the improper 1/eta prior
  std::vector<ReparamGroup> groups;

  static PriorSpec uniform(std::size_t r, double alpha, double beta);
  void validate(std::size_t num_reactions) const;
  /// Reaction indices not covered by any group.
  std::vector<std::size_t> unpaired(std::size_t num_reactions) const;
};

class ImproperPosterior : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reaction totals and integrated standardized intensities of a path.
struct PathStatistics {
  std::vector<std::int64_t> totals;
  std::vector<double> integrals;
};

PathStatistics path_statistics(const ModelSpec& model, const Path& path);

/// log psi_theta(path | start); -inf for impossible paths.
double log_path_density(const ModelSpec& model, std::span<const double> theta, const Path& path);

/// Gaussian log-density of one observation row given the state.
double log_obs_density_row(const ModelSpec& model, double eta, const ObservationSeries& obs,
                           std::size_t row, std::span<const std::int64_t> y);

/// Sum over observation times t in [a, b] of the row log-densities, with
/// states taken from the path. Returns 0 when no time falls in [a, b].
double log_obs_density(const ModelSpec& model, double eta, const ObservationSeries& obs,
                       const Path& path, double a, double b);

/// States at the given (sorted) times.
std::vector<State> states_at_times(const ModelSpec& model, const Path& path,
                                   std::span<const double> times);

std::vector<GammaParams> theta_posterior(const PriorSpec& prior, const PathStatistics& stats);
std::vector<GammaParams> theta_posterior(const ModelSpec& model, const PriorSpec& prior,
                                         const Path& path);

struct ResidualSummary {
  std::size_t count = 0;
  double sum_squares = 0.0;
};

/// Non-missing observed entries and squared residuals at observation
/// times covered by the path.
ResidualSummary residuals(const ModelSpec& model, const ObservationSeries& obs, const Path& path);

GammaParams eta_posterior(const PriorSpec& prior, const ResidualSummary& res);
GammaParams eta_posterior(const ModelSpec& model, const PriorSpec& prior, const Path& path,
                          const ObservationSeries& obs);

double log_gamma_density(double x, double shape, double rate);
/// Log prior of theta (including reparameterized groups) and eta. The
/// improper eta prior contributes (alpha - 1) log eta - beta eta.
double log_prior(const PriorSpec& prior, std::span<const double> theta, double eta);

double log_joint(const ModelSpec& model, const PriorSpec& prior, std::span<const double> theta,
                 double eta, const Path& path, const ObservationSeries& obs);

/// rho = (sum_1, ratio_1, sum_2, ratio_2, ..., unpaired rates in index order).
std::vector<double> rho_transform(std::span<const double> theta, std::span<const ReparamGroup> groups);
std::vector<double> rho_inverse(std::span<const double> rho, std::span<const ReparamGroup> groups,
                                std::size_t num_reactions);

/// Unnormalized log-density of the ratio of a reversible pair:
/// N1 log x + N2 log(1 - x) - (alpha + N1 + N2) log(beta + x I1 + (1 - x) I2).
struct RatioDensity {
  double alpha = 0.1;
  double beta = 1.0;
  double i1 = 0.0;
  double i2 = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;

  double log_unnormalized(double x) const;
};

/// Inverse-CDF draw from a RatioDensity on an adaptive grid.
double sample_ratio(const RatioDensity& density, Rng& rng, std::size_t grid = 4096);

/// (sum, ratio) drawn from the full conditional of a reversible pair.
std::pair<double, double> sample_rho_pair(const ReparamGroup& group, const PathStatistics& stats,
                                          Rng& rng);

}  // namespace mjp
