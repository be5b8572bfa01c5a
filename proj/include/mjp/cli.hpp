#pragma once

// Command-line verbs: simulate synthetic data, run inference, summarize
// traces. Each verb is callable directly; run_cli parses arguments and maps
// failures to exit codes.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mjp/sampler.hpp"

namespace mjp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

struct SimulateOptions {
  std::filesystem::path model;
  std::optional<std::string> scenario;
  std::vector<double> theta;
  double t0 = 0.0;
  double tn = 1.0;
  double dt = 1.0;
  std::optional<double> eta;  // no noise when absent
  std::optional<State> y0;    // drawn from the initial distribution when absent
  std::uint64_t seed = 1;
  std::filesystem::path out;
};

/// Writes path.csv and observations.csv into `out`.
void simulate_command(const SimulateOptions& opt);

struct InferOptions {
  std::filesystem::path model;
  std::filesystem::path obs;
  std::optional<std::filesystem::path> run;
  std::optional<std::filesystem::path> manifest;  // replaces model, obs and run
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scenario;
  std::size_t chains = 1;
  std::filesystem::path out;
};

struct ChainReport {
  std::size_t chain = 0;
  AcceptanceStats stats;
};

/// Writes trace_<k>.csv and latent_<k>.csv per chain, optional path
/// snapshots, and manifest.json.
std::vector<ChainReport> infer_command(const InferOptions& opt);

struct SummarizeOptions {
  std::vector<std::filesystem::path> traces;
  std::vector<std::filesystem::path> latents;
  std::optional<std::filesystem::path> model;  // adds (sum, ratio) columns for reaction pairs
  std::optional<std::size_t> burn_in;          // rows dropped per file; half by default
  std::vector<double> probs{0.025, 0.5, 0.975};
  std::size_t grid = 256;
  std::filesystem::path out;
};

struct ParameterSummary {
  std::string name;
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;
  std::vector<double> quantiles;
};

/// Writes summary.csv, density.csv and (with latents) latent_bands.csv.
std::vector<ParameterSummary> summarize_command(const SummarizeOptions& opt);

/// Type-7 sample quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double prob);

struct DensityGrid {
  std::vector<double> x;
  std::vector<double> density;
};

/// Gaussian kernel density estimate with Silverman's bandwidth on an
/// evenly spaced grid spanning the data plus three bandwidths.
DensityGrid kernel_density(std::span<const double> samples, std::size_t points);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mjp
