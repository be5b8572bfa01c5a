#include "mjp/proposal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mjp/likelihood.hpp"

namespace mjp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kProbTolerance = 1e-9;

double binomial_pmf(int trials, int k, double p) {
  return binomial(trials, k) * std::pow(p, k) * std::pow(1.0 - p, trials - k);
}

}  // namespace

Counts ZLaw::draw(Rng& rng, std::size_t d) const {
  if (kind == Kind::table) {
    std::vector<double> w(table.size());
    for (std::size_t k = 0; k < table.size(); ++k) w[k] = table[k].second;
    return table[categorical(rng, w, std::accumulate(w.begin(), w.end(), 0.0))].first;
  }
  Counts z(d, 0);
  for (std::size_t l = 0; l < d; ++l) {
    const bool negative = uniform01(rng) < 0.5;
    int magnitude = 0;
    for (int t = 0; t < trials; ++t)
      if (uniform01(rng) < iota) ++magnitude;
    z[l] = negative ? -magnitude : magnitude;
  }
  return z;
}

double ZLaw::mass(std::span<const std::int64_t> z) const {
  if (kind == Kind::table) {
    double m = 0.0;
    for (const auto& [v, p] : table)
      if (std::equal(v.begin(), v.end(), z.begin(), z.end())) m += p;
    return m;
  }
  double m = 1.0;
  for (std::int64_t v : z) {
    const std::int64_t k = v < 0 ? -v : v;
    if (k > trials) return 0.0;
    const double pk = binomial_pmf(trials, static_cast<int>(k), iota);
    m *= (k == 0) ? pk : 0.5 * pk;
  }
  return m;
}

void ZLaw::validate(std::size_t d) const {
  if (kind == Kind::signed_binomial) {
    if (!(iota >= 0.0 && iota <= 1.0)) throw std::invalid_argument("z_law: iota must lie in [0, 1]");
    if (trials < 1) throw std::invalid_argument("z_law: trials must be >= 1");
    return;
  }
  double total = 0.0;
  for (const auto& [v, p] : table) {
    if (v.size() != d)
      throw std::invalid_argument("z_law: table entries must have " + std::to_string(d) + " coordinates");
    if (p < 0.0) throw std::invalid_argument("z_law: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > kProbTolerance) throw std::invalid_argument("z_law: probabilities must sum to 1");
  for (const auto& [v, p] : table) {
    Counts neg(v.size());
    std::transform(v.begin(), v.end(), neg.begin(), [](std::int64_t x) { return -x; });
    if (std::abs(mass(v) - mass(neg)) > kProbTolerance) throw std::invalid_argument("z_law: table is not symmetric");
  }
}

MoveTable MoveTable::symmetric_from_columns(const IntMatrix& columns) {
  MoveTable t;
  const std::size_t m = columns.cols();
  for (std::size_t c = 0; c < m; ++c) {
    Counts v = columns.column(c);
    Counts neg(v.size());
    std::transform(v.begin(), v.end(), neg.begin(), [](std::int64_t x) { return -x; });
    t.moves.push_back(std::move(v));
    t.moves.push_back(std::move(neg));
  }
  t.probs.assign(t.moves.size(), m == 0 ? 0.0 : 1.0 / static_cast<double>(2 * m));
  return t;
}

void MoveTable::validate(std::size_t num_reactions) const {
  if (moves.size() != probs.size()) throw std::invalid_argument("border moves: one probability per move required");
  if (moves.empty()) return;
  double total = 0.0;
  for (std::size_t k = 0; k < moves.size(); ++k) {
    if (moves[k].size() != num_reactions)
      throw std::invalid_argument("border moves: vectors must have one entry per reaction");
    if (probs[k] < 0.0) throw std::invalid_argument("border moves: negative probability");
    total += probs[k];
  }
  if (std::abs(total - 1.0) > kProbTolerance) throw std::invalid_argument("border moves: probabilities must sum to 1");
  for (std::size_t k = 0; k < moves.size(); ++k) {
    double fwd = 0.0, rev = 0.0;
    for (std::size_t m = 0; m < moves.size(); ++m) {
      if (moves[m] == moves[k]) fwd += probs[m];
      bool opposite = true;
      for (std::size_t i = 0; i < num_reactions && opposite; ++i) opposite = moves[m][i] == -moves[k][i];
      if (opposite) rev += probs[m];
    }
    if (std::abs(fwd - rev) > kProbTolerance) throw std::invalid_argument("border moves: table is not symmetric");
  }
}

TotalsProposalSpec TotalsProposalSpec::defaults(const ModelSpec& model, double iota) {
  TotalsProposalSpec spec;
  spec.basis = kernel_basis(model.jump);
  spec.z_law.kind = ZLaw::Kind::signed_binomial;
  spec.z_law.iota = iota;
  const std::size_t p = model.num_species();
  spec.start_moves.resize(p);
  spec.end_moves.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    const MoveTable t = MoveTable::symmetric_from_columns(border_moves(model.jump, j));
    spec.end_moves[j] = t;
    if (!model.init.is_point_mass(j)) spec.start_moves[j] = t;
  }
  return spec;
}

void TotalsProposalSpec::validate(const ModelSpec& model) const {
  const std::size_t r = model.num_reactions(), p = model.num_species();
  if (basis.rows() != r) throw std::invalid_argument("proposal: kernel basis must have one row per reaction");
  if (!multiply(model.jump, basis).is_zero())
    throw std::invalid_argument("proposal: kernel basis columns are not in the kernel of the jump matrix");
  if (!same_lattice(basis, kernel_basis(model.jump)))
    throw std::invalid_argument("proposal: kernel basis does not generate the full integer kernel");
  z_law.validate(basis.cols());
  if (start_moves.size() != p || end_moves.size() != p)
    throw std::invalid_argument("proposal: border move tables must have one entry per species");
  for (std::size_t j = 0; j < p; ++j) {
    for (const auto* table : {&start_moves[j], &end_moves[j]}) {
      table->validate(r);
      const IntMatrix reduced = model.jump.without_row(j);
      for (const auto& v : table->moves) {
        const Counts image = multiply(reduced, v);
        if (!std::all_of(image.begin(), image.end(), [](std::int64_t x) { return x == 0; }))
          throw std::invalid_argument("proposal: border move for species " + model.species[j] +
                                      " changes other species");
      }
    }
  }
}

std::optional<Counts> propose_totals_interior(std::span<const std::int64_t> totals,
                                              const TotalsProposalSpec& spec, Rng& rng) {
  const std::size_t d = spec.basis.cols();
  Counts out(totals.begin(), totals.end());
  if (d == 0) return out;
  const Counts z = spec.z_law.draw(rng, d);
  const Counts step = multiply(spec.basis, z);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = checked::add(out[i], step[i]);
    if (out[i] < 0) return std::nullopt;
  }
  return out;
}

std::optional<BorderTotals> propose_totals_border(const ModelSpec& model,
                                                  std::span<const std::int64_t> totals,
                                                  const State& start, const State& end,
                                                  Boundary boundary,
                                                  const TotalsProposalSpec& spec, Rng& rng) {
  if (boundary == Boundary::interior) throw std::invalid_argument("propose_totals_border: interior boundary");
  const auto& tables = boundary == Boundary::start ? spec.start_moves : spec.end_moves;
  std::vector<std::size_t> candidates;
  for (std::size_t j = 0; j < tables.size(); ++j)
    if (!tables[j].empty()) candidates.push_back(j);
  if (candidates.empty()) return std::nullopt;
  const std::size_t j =
      candidates[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(candidates.size()) - 1))];
  const MoveTable& table = tables[j];
  const double total = std::accumulate(table.probs.begin(), table.probs.end(), 0.0);
  const Counts& move = table.moves[categorical(rng, table.probs, total)];

  BorderTotals out{Counts(totals.begin(), totals.end()), start, end, j};
  for (std::size_t i = 0; i < out.totals.size(); ++i) {
    out.totals[i] = checked::add(out.totals[i], move[i]);
    if (out.totals[i] < 0) return std::nullopt;
  }
  const Counts net = multiply(model.jump, out.totals);
  for (std::size_t s = 0; s < net.size(); ++s) {
    if (boundary == Boundary::start) {
      out.start[s] = end[s] - net[s];
      if (out.start[s] < 0) return std::nullopt;
    } else {
      out.end[s] = start[s] + net[s];
      if (out.end[s] < 0) return std::nullopt;
    }
  }
  return out;
}

std::vector<double> dirichlet_params(std::span<const double> mu0) {
  if (mu0.empty()) throw std::invalid_argument("dirichlet_params: empty sequence");
  double largest = 0.0;
  for (double m : mu0) {
    if (!(m > 0.0)) throw std::invalid_argument("dirichlet_params: total intensity must be positive");
    largest = std::max(largest, 1.0 / m);
  }
  // alpha_k = m_k * sum(m) / sum(m^2) with m = 1 / mu0; invariant under scaling m.
  std::vector<double> m(mu0.size());
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t k = 0; k < mu0.size(); ++k) {
    m[k] = (1.0 / mu0[k]) / largest;
    sum += m[k];
    sum_sq += m[k] * m[k];
  }
  std::vector<double> alpha(mu0.size());
  for (std::size_t k = 0; k < mu0.size(); ++k) alpha[k] = m[k] * sum / sum_sq;
  return alpha;
}

double log_dirichlet_density(std::span<const double> alpha, std::span<const double> x) {
  double a0 = 0.0, lp = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (!(x[k] > 0.0)) return kNegInf;
    a0 += alpha[k];
    lp += (alpha[k] - 1.0) * std::log(x[k]) - std::lgamma(alpha[k]);
  }
  return lp + std::lgamma(a0);
}

namespace {

// Sequential reaction-type choice shared by sampling and density evaluation.
class TypeChooser {
 public:
  TypeChooser(const ModelSpec& model, std::span<const double> theta, const State& start,
              std::span<const std::int64_t> totals, double a, double b)
      : model_(model), theta_(theta), y_(start), remaining_(totals.begin(), totals.end()),
        a_(a), b_(b), mu_(model.num_reactions()), w_(model.num_reactions()) {
    n_ = std::accumulate(remaining_.begin(), remaining_.end(), std::int64_t{0});
    mu0_.reserve(static_cast<std::size_t>(n_) + 1);
  }

  std::int64_t size() const { return n_; }

  // Weights for step k (0-based). Returns false when no remaining type can fire.
  bool prepare(std::int64_t k) {
    const double t = guess_time(k);
    double mu0 = 0.0;
    total_ = 0.0;
    for (std::size_t i = 0; i < mu_.size(); ++i) {
      mu_[i] = theta_[i] > 0.0 ? theta_[i] * standardized_intensity(model_, i, t, y_) : 0.0;
      mu0 += mu_[i];
      w_[i] = remaining_[i] > 0 ? std::sqrt(static_cast<double>(remaining_[i]) * mu_[i]) : 0.0;
      total_ += w_[i];
    }
    mu0_.push_back(mu0);
    return total_ > 0.0;
  }

  std::span<const double> weights() const { return w_; }
  double total() const { return total_; }

  bool advance(std::size_t i) {
    --remaining_[i];
    return apply_reaction_inplace(y_, model_.jump, i);
  }

  // Total intensity after the last reaction, evaluated at b.
  void finish() {
    double mu0 = 0.0;
    for (std::size_t i = 0; i < mu_.size(); ++i)
      mu0 += theta_[i] > 0.0 ? theta_[i] * standardized_intensity(model_, i, b_, y_) : 0.0;
    mu0_.push_back(mu0);
  }

  // The final wait has no competing reaction when mu0 vanishes there; use
  // the slowest positive rate of the sequence instead.
  std::vector<double> dirichlet_alpha() const {
    std::vector<double> mu0 = mu0_;
    if (!(mu0.back() > 0.0)) {
      double floor = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k + 1 < mu0.size(); ++k) floor = std::min(floor, mu0[k]);
      mu0.back() = floor;
    }
    return dirichlet_params(mu0);
  }

 private:
  double guess_time(std::int64_t k) const {
    return a_ + (b_ - a_) * static_cast<double>(k) / static_cast<double>(n_);
  }

  const ModelSpec& model_;
  std::span<const double> theta_;
  State y_;
  Counts remaining_;
  double a_, b_;
  std::int64_t n_ = 0;
  std::vector<double> mu_, w_, mu0_;
  double total_ = 0.0;
};

double times_log_density(std::span<const double> alpha, const Path& path) {
  const std::size_t n = path.events.size();
  const double len = path.b - path.a;
  std::vector<double> frac(n + 1);
  double prev = path.a;
  for (std::size_t k = 0; k < n; ++k) {
    frac[k] = (path.events[k].time - prev) / len;
    prev = path.events[k].time;
  }
  frac[n] = (path.b - prev) / len;
  return log_dirichlet_density(alpha, frac) - static_cast<double>(n) * std::log(len);
}

bool draw_times(std::span<const double> alpha, Path& path, Rng& rng) {
  const std::size_t n = path.events.size();
  std::vector<double> lg(n + 1);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= n; ++k) {
    lg[k] = log_gamma_draw(rng, alpha[k]);
    top = std::max(top, lg[k]);
  }
  double norm = 0.0;
  for (double v : lg) norm += std::exp(v - top);
  const double len = path.b - path.a;
  double cum = 0.0, prev = path.a;
  for (std::size_t k = 0; k < n; ++k) {
    cum += std::exp(lg[k] - top) / norm;
    const double t = path.a + len * cum;
    if (!(t > prev) || !(t < path.b)) return false;
    path.events[k].time = t;
    prev = t;
  }
  return true;
}

}  // namespace

ProposalOutcome propose_path(const ModelSpec& model, std::span<const double> theta,
                             const State& start, std::span<const std::int64_t> totals, double a,
                             double b, Rng& rng) {
  ProposalOutcome out;
  out.path = Path{a, b, start, {}};
  TypeChooser chooser(model, theta, start, totals, a, b);
  const std::int64_t n = chooser.size();
  if (n == 0) {
    out.status = ProposalStatus::proposed;
    return out;
  }
  out.path.events.reserve(static_cast<std::size_t>(n));
  double log_types = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    if (!chooser.prepare(k)) return out;  // impossible
    const std::size_t i = categorical(rng, chooser.weights(), chooser.total());
    log_types += std::log(chooser.weights()[i] / chooser.total());
    if (!chooser.advance(i)) return out;
    out.path.events.push_back({0.0, i});
  }
  chooser.finish();
  const std::vector<double> alpha = chooser.dirichlet_alpha();
  // Ties from floating underflow get one redraw.
  if (!draw_times(alpha, out.path, rng) && !draw_times(alpha, out.path, rng)) return out;
  out.log_q_forward = log_types + times_log_density(alpha, out.path);
  out.status = ProposalStatus::proposed;
  return out;
}

double log_proposal_density(const ModelSpec& model, std::span<const double> theta,
                            const Path& path) {
  const Counts totals = reaction_totals(path, model.num_reactions());
  TypeChooser chooser(model, theta, path.start, totals, path.a, path.b);
  const std::int64_t n = chooser.size();
  if (n == 0) return 0.0;
  double lq = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    if (!chooser.prepare(k)) return kNegInf;
    const std::size_t i = path.events[static_cast<std::size_t>(k)].reaction;
    const double w = chooser.weights()[i];
    if (!(w > 0.0)) return kNegInf;
    lq += std::log(w / chooser.total());
    if (!chooser.advance(i)) return kNegInf;
  }
  chooser.finish();
  return lq + times_log_density(chooser.dirichlet_alpha(), path);
}

double acceptance_log_ratio(const ModelSpec& model, std::span<const double> theta, double eta,
                            const ObservationSeries& obs, const Path& old_path,
                            const ProposalOutcome& proposal, Boundary boundary) {
  if (proposal.status != ProposalStatus::proposed) return kNegInf;
  const Path& new_path = proposal.path;
  const double psi_new = log_path_density(model, theta, new_path);
  if (psi_new == kNegInf) return kNegInf;
  double lr = psi_new - log_path_density(model, theta, old_path);
  if (boundary == Boundary::start) {
    const double f_new = model.init.log_density(new_path.start);
    if (f_new == kNegInf) return kNegInf;
    lr += f_new - model.init.log_density(old_path.start);
  }
  const double a = old_path.a, b = old_path.b;
  lr += log_obs_density(model, eta, obs, new_path, a, b) - log_obs_density(model, eta, obs, old_path, a, b);
  const double q_rev = log_proposal_density(model, theta, old_path);
  if (q_rev == kNegInf) return kNegInf;
  return lr + q_rev - proposal.log_q_forward;
}

}  // namespace mjp
