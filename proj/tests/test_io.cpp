#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mjp/io.hpp"
#include "support.hpp"

namespace mjp {
namespace {

constexpr const char* kBirthDeath = R"({
  "name": "bd",
  "species": ["Y"],
  "constants": {"K": 20},
  "reactions": [
    {"name": "birth", "jump": [1], "intensity": [{"terms": {"Y": -1}, "constant": "K"}]},
    {"name": "death", "jump": [-1], "intensity": [{"species": "Y"}]}
  ],
  "init": {"Y": [0, "K"]}
})";

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

TEST(ModelConfig, MinimalDocumentGetsDefaults) {
  const ModelConfig cfg = parse_model_config(kBirthDeath);
  EXPECT_EQ(cfg.model.name, "bd");
  EXPECT_EQ(cfg.model.jump, (IntMatrix{{1, -1}}));
  EXPECT_EQ(standardized_intensity(cfg.model, 0, 0.0, State{5}), 15.0);
  EXPECT_EQ(cfg.model.init.ranges.front().hi, 20);
  EXPECT_EQ(cfg.prior.theta_alpha, (std::vector<double>{0.1, 0.1}));
  EXPECT_EQ(cfg.proposal.basis.cols(), 1u);
  EXPECT_TRUE(cfg.scenarios.empty());
}

TEST(ModelConfig, BundledConfigsParse) {
  const ModelConfig o = testing::oregonator("C");
  EXPECT_EQ(o.model.num_species(), 3u);
  EXPECT_EQ(o.model.num_reactions(), 5u);
  EXPECT_EQ(o.scenarios.size(), 5u);
  const ModelConfig p = testing::prokaryotic("C");
  EXPECT_EQ(p.prior.groups.size(), 4u);
  EXPECT_EQ(p.model.error.observed, (std::vector<bool>{true, true, true, false}));
}

TEST(ModelConfig, DiagnosticsNameTheField) {
  EXPECT_NE(error_of([] { parse_model_config("{", "m"); }).find("m:"), std::string::npos);
  EXPECT_NE(error_of([] { parse_model_config(R"({"species": ["Y"]})", "m"); }).find("m: missing field 'reactions'"),
            std::string::npos);
  const std::string bad_jump = R"({"species": ["Y"], "reactions": [{"jump": [1, 2], "intensity": []}]})";
  EXPECT_NE(error_of([&] { parse_model_config(bad_jump, "m"); }).find("m.reactions[0].jump"), std::string::npos);
  const std::string bad_species =
      R"({"species": ["Y"], "reactions": [{"jump": [1], "intensity": [{"species": "Z"}]}]})";
  EXPECT_NE(error_of([&] { parse_model_config(bad_species, "m"); }).find("'Z'"), std::string::npos);
  EXPECT_NE(error_of([] { parse_model_config(kBirthDeath, "m", std::string("nope")); }).find("unknown scenario"),
            std::string::npos);
}

TEST(ModelConfig, RejectsSublatticeBasis) {
  std::string text = kBirthDeath;
  text.insert(text.rfind('}'), R"(, "proposal": {"basis": [[2, 2]]})");
  EXPECT_NE(error_of([&] { parse_model_config(text, "m"); }).find("m.proposal"), std::string::npos);
}

TEST(RunConfig, ParsesAllFields) {
  const RunSettings s = parse_run_config(R"({
    "iterations": 50, "thinning": 5, "seed": 9, "path_snapshot_every": 10, "eta_fixed": 100.0,
    "scenario": "B",
    "init": {"eta0": 2.0, "shrinkage": 0.5, "particles": 3, "steps": 4, "event_cap": 1000},
    "schedule": [{"a": 0, "b": 1, "start": true, "end": true}]
  })");
  EXPECT_EQ(s.run.iterations, 50u);
  EXPECT_EQ(s.run.thinning, 5u);
  EXPECT_EQ(s.run.seed, 9u);
  EXPECT_EQ(s.run.path_snapshot_every, 10u);
  EXPECT_EQ(s.run.eta_fixed, 100.0);
  EXPECT_EQ(s.scenario, "B");
  EXPECT_EQ(s.run.init.particles, 3u);
  EXPECT_EQ(s.run.init.event_cap, 1000u);
  ASSERT_TRUE(s.run.schedule);
  EXPECT_EQ(s.run.schedule->intervals.front(), (ScheduledInterval{0.0, 1.0, true, true, false}));
}

TEST(RunConfig, RejectsInvalidValues) {
  EXPECT_THROW(parse_run_config(R"({"thinning": 0})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"iterations": -1})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"init": {"shrinkage": 1.5}})"), ConfigError);
  EXPECT_NO_THROW(load_run_config(testing::config_path("run_default.json")));
}

TEST(Observations, ColumnsMatchedByNameWithMissingValues) {
  std::istringstream in("t,Y3,Y1\n0,1,2\n0.5,na,4\n");
  const ObservationSeries obs = parse_observations(in, {"Y1", "Y2", "Y3"});
  ASSERT_EQ(obs.times, (std::vector<double>{0.0, 0.5}));
  EXPECT_EQ(obs.value(0, 0), 2.0);
  EXPECT_TRUE(ObservationSeries::missing(obs.value(0, 1)));
  EXPECT_EQ(obs.value(0, 2), 1.0);
  EXPECT_TRUE(ObservationSeries::missing(obs.value(1, 2)));
}

TEST(Observations, RoundTrip) {
  ObservationSeries obs;
  obs.species = {"A", "B"};
  obs.times = {0.0, 0.1, 1.0 / 3.0};
  obs.values = {1.5, ObservationSeries::na, 0.1 + 0.2, 4.0, -2.25, 1e-300};
  std::stringstream io;
  write_observations(io, obs);
  const ObservationSeries back = parse_observations(io, obs.species);
  EXPECT_EQ(back.times, obs.times);
  for (std::size_t k = 0; k < obs.values.size(); ++k) {
    if (ObservationSeries::missing(obs.values[k]))
      EXPECT_TRUE(ObservationSeries::missing(back.values[k]));
    else
      EXPECT_EQ(back.values[k], obs.values[k]);
  }
}

TEST(Observations, Diagnostics) {
  std::istringstream bad_header("time,Y1\n0,1\n");
  EXPECT_NE(error_of([&] { parse_observations(bad_header, {"Y1"}, "obs.csv"); }).find("obs.csv:1"),
            std::string::npos);
  std::istringstream bad_value("t,Y1\n0,1\n1,x\n");
  EXPECT_NE(error_of([&] { parse_observations(bad_value, {"Y1"}, "obs.csv"); }).find("obs.csv:3"),
            std::string::npos);
  std::istringstream unknown("t,Q\n0,1\n");
  EXPECT_THROW(parse_observations(unknown, {"Y1"}), ConfigError);
  EXPECT_THROW(load_observations("/nonexistent/obs.csv", {"Y1"}), ConfigError);
}

TEST(PathFile, RoundTrip) {
  const Path p{0.5, 2.0, State{3, 0, 7}, {{0.6, 0}, {1.0 / 3.0 + 1.0, 4}, {2.0, 2}}};
  std::stringstream io;
  write_path(io, p);
  EXPECT_EQ(parse_path(io), p);
  const Path empty{0.0, 1.0, State{1}, {}};
  std::stringstream io2;
  write_path(io2, empty);
  EXPECT_EQ(parse_path(io2), empty);
}

TEST(PathFile, ReactionIndicesAreOneBased) {
  std::istringstream in("# a=0 b=1 y0=1;2\ntau,reaction_index\n0.5,2\n");
  const Path p = parse_path(in);
  EXPECT_EQ(p.events.front().reaction, 1u);
  std::istringstream zero("# a=0 b=1 y0=1;2\ntau,reaction_index\n0.5,0\n");
  EXPECT_THROW(parse_path(zero), ConfigError);
  std::istringstream no_header("tau,reaction_index\n0.5,1\n");
  EXPECT_THROW(parse_path(no_header), ConfigError);
}

TEST(Trace, RoundTripIsExact) {
  TraceRow row;
  row.iteration = 7;
  row.theta = {0.1, 1.0 / 3.0};
  row.eta = 2.5e-7;
  row.log_joint = -1234.5678901234567;
  row.totals = {12, 0};
  std::stringstream io;
  const auto header = trace_header(2);
  for (std::size_t k = 0; k < header.size(); ++k) io << (k ? "," : "") << header[k];
  io << '\n';
  write_trace_row(io, row);
  const Trace t = parse_trace(io);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"iter", "theta_1", "theta_2", "eta", "logjoint", "rtot_1", "rtot_2"}));
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.iterations.front(), 7u);
  EXPECT_EQ(t.rows[0], (std::vector<double>{0.1, 1.0 / 3.0, 2.5e-7, -1234.5678901234567, 12.0, 0.0}));
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(std::nan("")), "na");
  EXPECT_EQ(std::stod(format_double(0.1 + 0.2)), 0.1 + 0.2);
}

TEST(ContentHash, StableAndSensitive) {
  EXPECT_EQ(content_hash(""), "cbf29ce484222325");
  EXPECT_EQ(content_hash("a"), "af63dc4c8601ec8c");
  EXPECT_NE(content_hash("ab"), content_hash("ba"));
}

}  // namespace
}  // namespace mjp
