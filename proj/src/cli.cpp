#include "mjp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mjp/gillespie.hpp"
#include "mjp/io.hpp"

namespace mjp {

namespace {

std::ofstream open_output(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error(file.string() + ": cannot write file");
  return out;
}

std::vector<double> observation_grid(double t0, double tn, double dt) {
  if (!(dt > 0.0) || !(tn > t0)) throw ConfigError("simulate: need t0 < tn and dt > 0");
  const auto steps = static_cast<std::size_t>(std::llround((tn - t0) / dt));
  if (steps == 0) throw ConfigError("simulate: dt exceeds the horizon");
  std::vector<double> times(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) times[k] = t0 + static_cast<double>(k) * dt;
  times.back() = tn;
  return times;
}

}  // namespace

void simulate_command(const SimulateOptions& opt) {
  const ModelConfig cfg = load_model_config(opt.model, opt.scenario);
  const ModelSpec& model = cfg.model;
  if (opt.theta.size() != model.num_reactions())
    throw ConfigError("simulate: --theta needs " + std::to_string(model.num_reactions()) + " values");
  if (std::any_of(opt.theta.begin(), opt.theta.end(), [](double t) { return !(t >= 0.0); }))
    throw ConfigError("simulate: rates must be nonnegative");
  if (opt.eta && !(*opt.eta > 0.0)) throw ConfigError("simulate: --eta must be positive");

  Rng rng = make_rng(opt.seed);
  State y0 = opt.y0 ? *opt.y0 : model.init.sample(rng);
  if (y0.size() != model.num_species() ||
      std::any_of(y0.begin(), y0.end(), [](std::int64_t v) { return v < 0; }))
    throw ConfigError("simulate: --y0 needs " + std::to_string(model.num_species()) + " nonnegative counts");

  const std::vector<double> times = observation_grid(opt.t0, opt.tn, opt.dt);
  const Path path = simulate_path(model, opt.theta, y0, opt.t0, opt.tn, rng);
  const std::vector<State> states = states_at_times(model, path, times);

  ObservationSeries obs;
  obs.times = times;
  obs.species = model.species;
  for (const State& y : states)
    for (std::size_t j = 0; j < model.num_species(); ++j) {
      double v = ObservationSeries::na;
      if (model.error.observed[j])
        v = static_cast<double>(y[j]) + (opt.eta ? normal(rng, 0.0, 1.0 / std::sqrt(*opt.eta)) : 0.0);
      obs.values.push_back(v);
    }

  std::filesystem::create_directories(opt.out);
  auto path_out = open_output(opt.out / "path.csv");
  write_path(path_out, path);
  auto obs_out = open_output(opt.out / "observations.csv");
  write_observations(obs_out, obs);
}

namespace {

nlohmann::json counter_json(const MoveCounter& c) {
  return {{"attempts", c.attempts}, {"accepted", c.accepted}, {"rate", c.rate()}};
}

void write_latent_rows(std::ostream& out, const TraceRow& row, const ObservationSeries& obs,
                       const ModelSpec& model) {
  for (std::size_t l = 0; l < row.latent.size(); ++l)
    for (std::size_t j = 0; j < model.num_species(); ++j)
      out << row.iteration << ',' << format_double(obs.times[l]) << ',' << model.species[j] << ','
          << row.latent[l][j] << '\n';
}

}  // namespace

std::vector<ChainReport> infer_command(const InferOptions& opt) {
  std::string model_text, obs_text, run_text;
  std::string model_origin = opt.model.string(), obs_origin = opt.obs.string(), run_origin = "run";
  std::optional<std::string> scenario = opt.scenario;
  std::optional<std::uint64_t> seed = opt.seed;
  std::size_t chains = opt.chains;

  if (opt.manifest) {
    const std::string text = read_file(*opt.manifest);
    nlohmann::json m;
    try {
      m = nlohmann::json::parse(text);
      model_text = m.at("model_text").get<std::string>();
      obs_text = m.at("obs_text").get<std::string>();
      run_text = m.at("run_text").get<std::string>();
      if (!scenario && !m.at("scenario").is_null()) scenario = m.at("scenario").get<std::string>();
      if (!seed) seed = m.at("seed").get<std::uint64_t>();
      chains = m.at("chains").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(opt.manifest->string() + ": " + e.what());
    }
    model_origin = obs_origin = run_origin = opt.manifest->string();
  } else {
    model_text = read_file(opt.model);
    obs_text = read_file(opt.obs);
    run_text = opt.run ? read_file(*opt.run) : "{}";
    if (opt.run) run_origin = opt.run->string();
  }
  if (chains == 0) throw ConfigError("infer: --chains must be positive");

  RunSettings settings = parse_run_config(run_text, run_origin);
  if (seed) settings.run.seed = *seed;
  if (!scenario) scenario = settings.scenario;
  const ModelConfig cfg = parse_model_config(model_text, model_origin, scenario);
  std::istringstream obs_stream(obs_text);
  const ObservationSeries obs = parse_observations(obs_stream, cfg.model.species, obs_origin);
  if (obs.size() < 2) throw ConfigError(obs_origin + ": at least two observation times required");
  if (settings.run.schedule) {
    try {
      settings.run.schedule->validate(obs.times.front(), obs.times.back());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(run_origin + ": " + e.what());
    }
  }

  const SamplerContext ctx{cfg.model, cfg.prior, obs, cfg.proposal};
  const RunConfig& run = settings.run;
  std::filesystem::create_directories(opt.out);

  std::vector<ChainReport> reports(chains);
  std::vector<std::exception_ptr> errors(chains);
  const auto work = [&](std::size_t k) {
    try {
      ChainState state = initialize(ctx, run, make_rng(run.seed, k));
      auto trace = open_output(opt.out / ("trace_" + std::to_string(k) + ".csv"));
      auto latent = open_output(opt.out / ("latent_" + std::to_string(k) + ".csv"));
      const auto header = trace_header(cfg.model.num_reactions());
      for (std::size_t c = 0; c < header.size(); ++c) trace << (c ? "," : "") << header[c];
      trace << '\n';
      latent << "iter,t,species,value\n";
      TraceSink sink;
      sink.on_row = [&](const TraceRow& row) {
        write_trace_row(trace, row);
        write_latent_rows(latent, row, obs, cfg.model);
      };
      sink.on_snapshot = [&](std::size_t iteration, const Path& path) {
        auto snap = open_output(opt.out / ("path_" + std::to_string(k) + "_" + std::to_string(iteration) + ".csv"));
        write_path(snap, path);
      };
      run_chain(state, ctx, run, sink);
      reports[k] = {k, state.stats};
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (chains == 1) {
    work(0);
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t k = 0; k < chains; ++k) workers.emplace_back(work, k);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  nlohmann::json manifest;
  manifest["seed"] = run.seed;
  manifest["chains"] = chains;
  manifest["scenario"] = scenario ? nlohmann::json(*scenario) : nlohmann::json(nullptr);
  manifest["model_hash"] = content_hash(model_text);
  manifest["obs_hash"] = content_hash(obs_text);
  manifest["run_hash"] = content_hash(run_text);
  manifest["model_text"] = model_text;
  manifest["obs_text"] = obs_text;
  manifest["run_text"] = run_text;
  for (const auto& r : reports)
    manifest["acceptance"].push_back({{"chain", r.chain},
                                      {"base", counter_json(r.stats.base)},
                                      {"midpoint", counter_json(r.stats.midpoint)},
                                      {"start", counter_json(r.stats.start)},
                                      {"end", counter_json(r.stats.end)},
                                      {"pooled", counter_json(r.stats.pooled())}});
  auto out = open_output(opt.out / "manifest.json");
  out << manifest.dump(2) << '\n';
  return reports;
}

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("quantile probability outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

DensityGrid kernel_density(std::span<const double> samples, std::size_t points) {
  DensityGrid grid;
  if (samples.size() < 2 || points < 2) return grid;
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  if (!(spread > 0.0)) return grid;
  const double h = 0.9 * spread * std::pow(n, -0.2);
  const double lo = sorted.front() - 3.0 * h, hi = sorted.back() + 3.0 * h;
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t k = 0; k < points; ++k) {
    const double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    double d = 0.0;
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), x - 8.0 * h);
    const auto last = std::upper_bound(sorted.begin(), sorted.end(), x + 8.0 * h);
    for (auto it = first; it != last; ++it) {
      const double u = (x - *it) / h;
      d += std::exp(-0.5 * u * u);
    }
    grid.x.push_back(x);
    grid.density.push_back(d * norm);
  }
  return grid;
}

namespace {

ParameterSummary summarize_column(const std::string& name, std::vector<double> values,
                                  const std::vector<double>& probs) {
  ParameterSummary s;
  s.name = name;
  s.count = values.size();
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  for (double p : probs) s.quantiles.push_back(quantile_sorted(values, p));
  return s;
}

std::string quantile_header(const std::vector<double>& probs) {
  std::string h;
  for (double p : probs) h += ",q" + format_double(p);
  return h;
}

std::size_t default_burn_in(std::size_t rows, const std::optional<std::size_t>& burn_in) {
  return burn_in ? *burn_in : rows / 2;
}

}  // namespace

std::vector<ParameterSummary> summarize_command(const SummarizeOptions& opt) {
  if (opt.traces.empty()) throw ConfigError("summarize: no trace files given");
  for (double p : opt.probs)
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("summarize: probabilities must lie in [0, 1]");

  std::vector<std::string> columns;
  std::map<std::string, std::vector<double>> pooled;
  std::optional<ModelConfig> cfg;
  if (opt.model) cfg = load_model_config(*opt.model);

  std::vector<std::string> names;
  for (const auto& file : opt.traces) {
    const Trace trace = load_trace(file);
    if (columns.empty()) {
      columns = trace.columns;
    } else if (columns != trace.columns) {
      throw ConfigError(file.string() + ": columns differ from " + opt.traces.front().string());
    }
    const std::size_t burn = default_burn_in(trace.rows.size(), opt.burn_in);
    if (burn >= trace.rows.size())
      throw ConfigError(file.string() + ": burn-in of " + std::to_string(burn) + " leaves no rows");

    std::vector<std::size_t> theta_cols;
    names.clear();
    for (std::size_t c = 1; c < columns.size(); ++c) {
      if (columns[c].rfind("theta_", 0) == 0) theta_cols.push_back(c - 1);
      if (columns[c].rfind("theta_", 0) == 0 || columns[c] == "eta") names.push_back(columns[c]);
    }
    if (cfg && theta_cols.size() != cfg->model.num_reactions())
      throw ConfigError(file.string() + ": trace has " + std::to_string(theta_cols.size()) +
                        " rates but the model has " + std::to_string(cfg->model.num_reactions()));
    const std::size_t rho_count = cfg ? 2 * cfg->prior.groups.size() : 0;
    for (std::size_t k = 0; k < rho_count; ++k) names.push_back("rho_" + std::to_string(k + 1));

    for (std::size_t row = burn; row < trace.rows.size(); ++row) {
      const auto& values = trace.rows[row];
      for (std::size_t c = 1; c < columns.size(); ++c)
        if (columns[c].rfind("theta_", 0) == 0 || columns[c] == "eta") pooled[columns[c]].push_back(values[c - 1]);
      if (rho_count > 0) {
        std::vector<double> theta;
        for (std::size_t c : theta_cols) theta.push_back(values[c]);
        const auto rho = rho_transform(theta, cfg->prior.groups);
        for (std::size_t k = 0; k < rho_count; ++k) pooled["rho_" + std::to_string(k + 1)].push_back(rho[k]);
      }
    }
  }

  std::filesystem::create_directories(opt.out);
  std::vector<ParameterSummary> summaries;
  auto summary_out = open_output(opt.out / "summary.csv");
  summary_out << "parameter,n,mean,sd" << quantile_header(opt.probs) << '\n';
  auto density_out = open_output(opt.out / "density.csv");
  density_out << "parameter,x,density\n";
  for (const auto& name : names) {
    const auto& values = pooled[name];
    ParameterSummary s = summarize_column(name, values, opt.probs);
    summary_out << s.name << ',' << s.count << ',' << format_double(s.mean) << ',' << format_double(s.sd);
    for (double q : s.quantiles) summary_out << ',' << format_double(q);
    summary_out << '\n';
    const DensityGrid grid = kernel_density(values, opt.grid);
    for (std::size_t k = 0; k < grid.x.size(); ++k)
      density_out << name << ',' << format_double(grid.x[k]) << ',' << format_double(grid.density[k]) << '\n';
    summaries.push_back(std::move(s));
  }

  if (!opt.latents.empty()) {
    // (t, species) in first-seen order.
    std::vector<std::pair<std::string, std::string>> keys;
    std::map<std::pair<std::string, std::string>, std::vector<double>> bands;
    for (const auto& file : opt.latents) {
      std::ifstream in(file);
      if (!in) throw ConfigError(file.string() + ": cannot open file");
      std::string line;
      std::getline(in, line);
      if (line.rfind("iter,t,species,value", 0) != 0)
        throw ConfigError(file.string() + ":1: expected header 'iter,t,species,value'");
      struct Entry {
        std::size_t iter;
        std::string t, species;
        double value;
      };
      std::vector<Entry> entries;
      std::vector<std::size_t> iterations;
      std::size_t lineno = 1;
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string iter, t, species, value;
        if (!std::getline(ss, iter, ',') || !std::getline(ss, t, ',') || !std::getline(ss, species, ',') ||
            !std::getline(ss, value))
          throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": expected 4 fields");
        try {
          entries.push_back({std::stoul(iter), t, species, std::stod(value)});
        } catch (const std::exception&) {
          throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": invalid number");
        }
        if (iterations.empty() || iterations.back() != entries.back().iter) iterations.push_back(entries.back().iter);
      }
      const std::size_t burn = default_burn_in(iterations.size(), opt.burn_in);
      if (burn >= iterations.size())
        throw ConfigError(file.string() + ": burn-in of " + std::to_string(burn) + " leaves no rows");
      const std::size_t first_kept = iterations[burn];
      for (const auto& e : entries) {
        if (e.iter < first_kept) continue;
        const auto key = std::pair{e.t, e.species};
        auto& v = bands[key];
        if (v.empty()) keys.push_back(key);
        v.push_back(e.value);
      }
    }
    auto out = open_output(opt.out / "latent_bands.csv");
    out << "t,species,mean" << quantile_header(opt.probs) << '\n';
    for (const auto& key : keys) {
      const ParameterSummary s = summarize_column("", bands[key], opt.probs);
      out << key.first << ',' << key.second << ',' << format_double(s.mean);
      for (double q : s.quantiles) out << ',' << format_double(q);
      out << '\n';
    }
  }
  return summaries;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian inference for Markov jump processes", "mjp"};
  app.require_subcommand(1);

  SimulateOptions sim;
  std::vector<std::int64_t> y0;
  double eta = 0.0;
  auto* simulate = app.add_subcommand("simulate", "Simulate a path and noisy observations");
  simulate->add_option("--model", sim.model, "Model config (JSON)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--scenario", sim.scenario, "Observation mask");
  simulate->add_option("--theta", sim.theta, "Rate constants")->required()->delimiter(',');
  simulate->add_option("--t0", sim.t0, "First observation time");
  simulate->add_option("--tn", sim.tn, "Last observation time");
  simulate->add_option("--dt", sim.dt, "Observation spacing");
  auto* eta_opt = simulate->add_option("--eta", eta, "Noise precision; exact values when omitted");
  auto* y0_opt = simulate->add_option("--y0", y0, "Initial state")->delimiter(',');
  simulate->add_option("--seed", sim.seed, "Random seed");
  simulate->add_option("--out", sim.out, "Output directory")->required();

  InferOptions inf;
  auto* infer = app.add_subcommand("infer", "Sample the posterior of rates, error precision and path");
  auto* model_opt = infer->add_option("--model", inf.model, "Model config (JSON)")->check(CLI::ExistingFile);
  auto* obs_opt = infer->add_option("--obs", inf.obs, "Observation CSV")->check(CLI::ExistingFile);
  infer->add_option("--run", inf.run, "Run config (JSON)")->check(CLI::ExistingFile);
  auto* manifest_opt =
      infer->add_option("--manifest", inf.manifest, "Replay a previous run")->check(CLI::ExistingFile);
  manifest_opt->excludes(model_opt)->excludes(obs_opt);
  infer->add_option("--seed", inf.seed, "Random seed (overrides the run config)");
  infer->add_option("--scenario", inf.scenario, "Observation mask");
  infer->add_option("--chains", inf.chains, "Independent chains");
  infer->add_option("--out", inf.out, "Output directory")->required();

  SummarizeOptions sum;
  std::size_t burn_in = 0;
  auto* summarize = app.add_subcommand("summarize", "Posterior summaries, densities and latent bands");
  summarize->add_option("--trace", sum.traces, "Trace CSV files")->required()->check(CLI::ExistingFile);
  summarize->add_option("--latent", sum.latents, "Latent CSV files")->check(CLI::ExistingFile);
  summarize->add_option("--model", sum.model, "Model config for pair reparameterization")->check(CLI::ExistingFile);
  auto* burn_opt = summarize->add_option("--burn-in", burn_in, "Rows dropped per file (default: half)");
  summarize->add_option("--probs", sum.probs, "Quantile probabilities")->delimiter(',');
  summarize->add_option("--grid", sum.grid, "Density grid points");
  summarize->add_option("--out", sum.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) {
      if (*eta_opt) sim.eta = eta;
      if (*y0_opt) sim.y0 = y0;
      simulate_command(sim);
      out << "wrote " << (sim.out / "path.csv").string() << " and " << (sim.out / "observations.csv").string()
          << '\n';
    } else if (*infer) {
      if (!inf.manifest && (!*model_opt || !*obs_opt)) {
        err << "infer: --model and --obs are required unless --manifest is given\n";
        return kExitConfig;
      }
      for (const auto& r : infer_command(inf))
        out << "chain " << r.chain << ": acceptance " << format_double(r.stats.pooled().rate()) << " (base "
            << format_double(r.stats.base.rate()) << ", midpoint " << format_double(r.stats.midpoint.rate())
            << ", start " << format_double(r.stats.start.rate()) << ", end " << format_double(r.stats.end.rate())
            << ")\n";
    } else if (*summarize) {
      if (*burn_opt) sum.burn_in = burn_in;
      for (const auto& s : summarize_command(sum)) {
        out << s.name << " mean " << format_double(s.mean);
        for (std::size_t k = 0; k < s.quantiles.size(); ++k)
          out << " q" << format_double(sum.probs[k]) << ' ' << format_double(s.quantiles[k]);
        out << '\n';
      }
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace mjp
