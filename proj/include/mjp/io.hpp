#pragma once

// JSON model and run configs, CSV observations, paths and traces.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mjp/likelihood.hpp"
#include "mjp/model.hpp"
#include "mjp/proposal.hpp"
#include "mjp/sampler.hpp"

namespace mjp {

/// Malformed or inconsistent input; the message names the file and field
/// or line at fault.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  ModelSpec model;
  PriorSpec prior;
  TotalsProposalSpec proposal;
  std::vector<std::string> scenarios;  // names of observation masks
};

/// Parses a model document. `scenario` selects a named observation mask;
/// without it the document's default mask is used.
ModelConfig parse_model_config(const std::string& text, const std::string& origin = "model",
                               const std::optional<std::string>& scenario = std::nullopt);
ModelConfig load_model_config(const std::filesystem::path& file,
                              const std::optional<std::string>& scenario = std::nullopt);

struct RunSettings {
  RunConfig run;
  std::optional<std::string> scenario;
};

RunSettings parse_run_config(const std::string& text, const std::string& origin = "run");
RunSettings load_run_config(const std::filesystem::path& file);

/// CSV with header `t,<species...>`; `na` marks missing values. Columns
/// are matched to `species` by name; absent species are all missing.
ObservationSeries parse_observations(std::istream& in, const std::vector<std::string>& species,
                                     const std::string& origin = "observations");
ObservationSeries load_observations(const std::filesystem::path& file,
                                    const std::vector<std::string>& species);
void write_observations(std::ostream& out, const ObservationSeries& obs);

/// `# a=<a> b=<b> y0=<y1;...;yp>` followed by `tau,reaction_index` rows
/// with 1-based reaction indices.
void write_path(std::ostream& out, const Path& path);
Path parse_path(std::istream& in, const std::string& origin = "path");
Path load_path(const std::filesystem::path& file);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

std::vector<std::string> trace_header(std::size_t num_reactions);
void write_trace_row(std::ostream& out, const TraceRow& row);

struct Trace {
  std::vector<std::string> columns;  // header, starting with iter
  std::vector<std::size_t> iterations;
  std::vector<std::vector<double>> rows;  // excluding the iteration column
};

Trace parse_trace(std::istream& in, const std::string& origin = "trace");
Trace load_trace(const std::filesystem::path& file);

/// FNV-1a digest of the bytes, as 16 hex digits.
std::string content_hash(const std::string& bytes);
std::string read_file(const std::filesystem::path& file);

}  // namespace mjp
