#pragma once

// Endpoint-conditioned path proposals. A proposal first perturbs the
// per-reaction totals on an interval along the integer kernel of the jump
// matrix (or along border moves that change one endpoint species), then
// generates reaction order and times given the start state and totals.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mjp/lattice.hpp"
#include "mjp/model.hpp"
#include "mjp/random.hpp"

namespace mjp {

using Counts = std::vector<std::int64_t>;

/// Symmetric law on Z^d for the kernel coordinates.
struct ZLaw {
  enum class Kind { signed_binomial, table };
  Kind kind = Kind::signed_binomial;
  /// signed_binomial: each coordinate is B * Bin(trials, iota), P[B = +-1] = 1/2.
  double iota = 0.4;
  int trials = 2;
  /// table: explicit (z, probability) pairs.
  std::vector<std::pair<Counts, double>> table;

  Counts draw(Rng& rng, std::size_t d) const;
  double mass(std::span<const std::int64_t> z) const;
  /// Throws std::invalid_argument unless the law is a symmetric
  /// distribution on Z^d.
  void validate(std::size_t d) const;
};

/// Symmetric law over totals changes that move one endpoint species.
struct MoveTable {
  std::vector<Counts> moves;
  std::vector<double> probs;

  bool empty() const { return moves.empty(); }
  /// Uniform over +-v for each column v.
  static MoveTable symmetric_from_columns(const IntMatrix& columns);
  void validate(std::size_t num_reactions) const;
};

enum class Boundary { interior, start, end };

struct TotalsProposalSpec {
  IntMatrix basis;                    // reactions x d, columns span ker(A)
  ZLaw z_law;
  std::vector<MoveTable> start_moves;  // per species, empty when unused
  std::vector<MoveTable> end_moves;

  /// Kernel basis from the Hermite form, signed-binomial law with `iota`,
  /// border moves for every species at the end and for every species that
  /// is not a point mass of the initial distribution at the start.
  static TotalsProposalSpec defaults(const ModelSpec& model, double iota = 0.4);
  void validate(const ModelSpec& model) const;
};

/// r_tot + V Z, or nullopt ("unchanged") when a component turns negative.
std::optional<Counts> propose_totals_interior(std::span<const std::int64_t> totals,
                                              const TotalsProposalSpec& spec, Rng& rng);

struct BorderTotals {
  Counts totals;
  State start;
  State end;
  std::size_t species = 0;
};

/// Adds a border move for a uniformly chosen species; the endpoint on the
/// other side stays fixed. nullopt when no move applies or the result is
/// negative.
std::optional<BorderTotals> propose_totals_border(const ModelSpec& model,
                                                  std::span<const std::int64_t> totals,
                                                  const State& start, const State& end,
                                                  Boundary boundary,
                                                  const TotalsProposalSpec& spec, Rng& rng);

enum class ProposalStatus { proposed, unchanged, impossible };

struct ProposalOutcome {
  ProposalStatus status = ProposalStatus::impossible;
  Path path;
  double log_q_forward = 0.0;
};

/// Dirichlet parameters proportional to 1 / mu0 with the scale matching
/// the summed conditional variances of independent exponential waits.
std::vector<double> dirichlet_params(std::span<const double> mu0);

double log_dirichlet_density(std::span<const double> alpha, std::span<const double> x);

/// Generates a path on [a, b] from `start` with the given totals.
ProposalOutcome propose_path(const ModelSpec& model, std::span<const double> theta,
                             const State& start, std::span<const std::int64_t> totals, double a,
                             double b, Rng& rng);

/// Density of `path` under propose_path given its own start and totals.
double log_proposal_density(const ModelSpec& model, std::span<const double> theta,
                            const Path& path);

/// log of the Metropolis-Hastings ratio for replacing `old_path` by the
/// proposed path on the same interval. Observation terms use times in
/// [a, b]; start-boundary moves add the initial-density ratio.
double acceptance_log_ratio(const ModelSpec& model, std::span<const double> theta, double eta,
                            const ObservationSeries& obs, const Path& old_path,
                            const ProposalOutcome& proposal, Boundary boundary);

}  // namespace mjp
