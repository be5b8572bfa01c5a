#include "mjp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mjp {

namespace {

using nlohmann::json;

// A JSON node together with its location for diagnostics.
class Node {
 public:
  Node(const json& value, std::string where) : value_(value), where_(std::move(where)) {}

  const json& raw() const { return value_; }
  const std::string& where() const { return where_; }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(where_ + ": " + what); }

  bool has(const std::string& key) const { return value_.is_object() && value_.contains(key); }

  Node operator[](const std::string& key) const {
    if (!value_.is_object()) fail("expected an object");
    if (!value_.contains(key)) fail("missing field '" + key + "'");
    return {value_.at(key), where_ + "." + key};
  }
  Node operator[](std::size_t k) const {
    return {value_.at(k), where_ + "[" + std::to_string(k) + "]"};
  }
  std::optional<Node> get(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return (*this)[key];
  }

  std::size_t size() const {
    if (!value_.is_array()) fail("expected an array");
    return value_.size();
  }
  std::vector<std::pair<std::string, Node>> items() const {
    if (!value_.is_object()) fail("expected an object");
    std::vector<std::pair<std::string, Node>> out;
    for (auto it = value_.begin(); it != value_.end(); ++it)
      out.emplace_back(it.key(), Node(it.value(), where_ + "." + it.key()));
    return out;
  }

  std::string str() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }
  double num() const {
    if (!value_.is_number()) fail("expected a number");
    return value_.get<double>();
  }
  std::int64_t integer() const {
    if (!value_.is_number_integer()) fail("expected an integer");
    return value_.get<std::int64_t>();
  }
  std::uint64_t unsigned_integer() const {
    if (!value_.is_number_unsigned() && !(value_.is_number_integer() && value_.get<std::int64_t>() >= 0))
      fail("expected a nonnegative integer");
    return value_.get<std::uint64_t>();
  }
  bool boolean() const {
    if (!value_.is_boolean()) fail("expected true or false");
    return value_.get<bool>();
  }
  std::vector<std::int64_t> integers() const {
    std::vector<std::int64_t> out;
    for (std::size_t k = 0; k < size(); ++k) out.push_back((*this)[k].integer());
    return out;
  }

 private:
  const json& value_;
  std::string where_;
};

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

std::size_t index_of(const std::vector<std::string>& names, const std::string& name, const Node& at,
                     const char* kind) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) at.fail(std::string("unknown ") + kind + " '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

// Integer literal or the name of a declared constant.
std::int64_t constant_value(const Node& node, const std::map<std::string, std::int64_t>& constants) {
  if (node.raw().is_string()) {
    const auto it = constants.find(node.str());
    if (it == constants.end()) node.fail("unknown constant '" + node.str() + "'");
    return it->second;
  }
  return node.integer();
}

AffineFactor parse_factor(const Node& node, const ModelSpec& model) {
  AffineFactor f;
  const std::size_t p = model.num_species();
  f.coef.assign(p, 0);
  if (auto s = node.get("species")) f.coef[index_of(model.species, s->str(), *s, "species")] = 1;
  if (auto terms = node.get("terms"))
    for (const auto& [name, c] : terms->items()) f.coef[index_of(model.species, name, c, "species")] += c.integer();
  if (auto c = node.get("constant")) f.constant = constant_value(*c, model.constants);
  if (auto o = node.get("order")) f.order = static_cast<int>(o->integer());
  if (f.order < 1) node.fail("order must be >= 1");
  if (!node.has("species") && !node.has("terms") && !node.has("constant"))
    node.fail("factor needs 'species', 'terms' or 'constant'");
  return f;
}

TimeFactor parse_time_factor(const Node& node) {
  const std::string kind = node["kind"].str();
  TimeFactor t;
  if (kind == "none") {
    t.kind = TimeFactorKind::none;
  } else if (kind == "linear") {
    t.kind = TimeFactorKind::linear;
  } else if (kind == "exponential") {
    t.kind = TimeFactorKind::exponential;
    t.rate = node["rate"].num();
  } else {
    node["kind"].fail("expected none, linear or exponential");
  }
  return t;
}

std::vector<bool> parse_mask(const Node& node, const ModelSpec& model) {
  std::vector<bool> mask(model.num_species(), false);
  for (std::size_t k = 0; k < node.size(); ++k)
    mask[index_of(model.species, node[k].str(), node[k], "species")] = true;
  return mask;
}

std::vector<double> per_reaction(const Node& node, std::size_t r) {
  if (node.raw().is_number()) return std::vector<double>(r, node.num());
  if (node.size() != r) node.fail("expected " + std::to_string(r) + " values");
  std::vector<double> out;
  for (std::size_t k = 0; k < r; ++k) out.push_back(node[k].num());
  return out;
}

Counts parse_vector(const Node& node, std::size_t r) {
  Counts v = node.integers();
  if (v.size() != r) node.fail("expected " + std::to_string(r) + " entries");
  return v;
}

MoveTable parse_move_table(const Node& node, std::size_t r) {
  MoveTable t;
  for (std::size_t k = 0; k < node.size(); ++k) {
    t.moves.push_back(parse_vector(node[k]["move"], r));
    t.probs.push_back(node[k]["p"].num());
  }
  try {
    t.validate(r);
  } catch (const std::invalid_argument& e) {
    node.fail(e.what());
  }
  return t;
}

}  // namespace

ModelConfig parse_model_config(const std::string& text, const std::string& origin,
                               const std::optional<std::string>& scenario) {
  const json doc = parse_json(text, origin);
  const Node root(doc, origin);
  ModelConfig cfg;
  ModelSpec& model = cfg.model;

  model.name = root.has("name") ? root["name"].str() : origin;
  const Node species = root["species"];
  for (std::size_t j = 0; j < species.size(); ++j) model.species.push_back(species[j].str());
  if (auto constants = root.get("constants"))
    for (const auto& [name, value] : constants->items()) model.constants[name] = value.integer();
  const std::size_t p = model.num_species();

  const Node reactions = root["reactions"];
  const std::size_t r = reactions.size();
  model.jump = IntMatrix(p, r);
  for (std::size_t i = 0; i < r; ++i) {
    const Node rx = reactions[i];
    model.reactions.push_back(rx.has("name") ? rx["name"].str() : "R" + std::to_string(i + 1));
    const Counts column = parse_vector(rx["jump"], p);
    for (std::size_t j = 0; j < p; ++j) model.jump(j, i) = column[j];
    IntensityForm form;
    const Node factors = rx["intensity"];
    for (std::size_t k = 0; k < factors.size(); ++k) form.factors.push_back(parse_factor(factors[k], model));
    if (auto t = rx.get("time")) form.time = parse_time_factor(*t);
    model.intensity.push_back(std::move(form));
  }

  model.init.ranges.assign(p, {});
  if (auto init = root.get("init")) {
    for (const auto& [name, range] : init->items()) {
      auto& target = model.init.ranges[index_of(model.species, name, range, "species")];
      if (range.raw().is_array()) {
        if (range.size() != 2) range.fail("expected [lo, hi]");
        target = {constant_value(range[0], model.constants), constant_value(range[1], model.constants)};
      } else {
        const std::int64_t v = constant_value(range, model.constants);
        target = {v, v};
      }
    }
  }

  model.error.observed.assign(p, true);
  if (auto err = root.get("error_model")) {
    if (auto obs = err->get("observed")) model.error.observed = parse_mask(*obs, model);
    if (auto scenarios = err->get("scenarios")) {
      for (const auto& [name, mask] : scenarios->items()) {
        cfg.scenarios.push_back(name);
        if (scenario && *scenario == name) model.error.observed = parse_mask(mask, model);
      }
    }
  }
  if (scenario && std::find(cfg.scenarios.begin(), cfg.scenarios.end(), *scenario) == cfg.scenarios.end())
    throw ConfigError(origin + ".error_model.scenarios: unknown scenario '" + *scenario + "'");

  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }

  PriorSpec& prior = cfg.prior;
  prior = PriorSpec::uniform(r, 0.1, 1.0);
  if (auto priors = root.get("priors")) {
    if (auto theta = priors->get("theta")) {
      if (auto a = theta->get("alpha")) prior.theta_alpha = per_reaction(*a, r);
      if (auto b = theta->get("beta")) prior.theta_beta = per_reaction(*b, r);
    }
    if (auto eta = priors->get("eta")) prior.eta = {(*eta)["alpha"].num(), (*eta)["beta"].num()};
    if (auto groups = priors->get("groups")) {
      for (std::size_t k = 0; k < groups->size(); ++k) {
        const Node g = (*groups)[k];
        const Node pair = g["pair"];
        if (pair.size() != 2) pair.fail("expected two reaction names");
        ReparamGroup group;
        group.first = index_of(model.reactions, pair[0].str(), pair[0], "reaction");
        group.second = index_of(model.reactions, pair[1].str(), pair[1], "reaction");
        if (auto a = g.get("alpha")) group.alpha = a->num();
        if (auto b = g.get("beta")) group.beta = b->num();
        prior.groups.push_back(group);
      }
    }
  }
  try {
    prior.validate(r);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ".priors: " + e.what());
  }

  double iota = 0.4;
  std::optional<Node> prop = root.get("proposal");
  if (prop)
    if (auto i = prop->get("iota")) iota = i->num();
  TotalsProposalSpec& spec = cfg.proposal;
  spec = TotalsProposalSpec::defaults(model, iota);
  if (prop) {
    if (auto basis = prop->get("basis")) {
      std::vector<Counts> columns;
      for (std::size_t k = 0; k < basis->size(); ++k) columns.push_back(parse_vector((*basis)[k], r));
      spec.basis = IntMatrix::from_columns(r, columns);
    }
    if (auto table = prop->get("z_table")) {
      spec.z_law.kind = ZLaw::Kind::table;
      spec.z_law.table.clear();
      for (std::size_t k = 0; k < table->size(); ++k)
        spec.z_law.table.emplace_back(parse_vector((*table)[k]["z"], spec.basis.cols()), (*table)[k]["p"].num());
    }
    for (const auto& [key, tables] : {std::pair{"start_moves", &spec.start_moves}, std::pair{"end_moves", &spec.end_moves}}) {
      if (auto moves = prop->get(key))
        for (const auto& [name, table] : moves->items())
          (*tables)[index_of(model.species, name, table, "species")] = parse_move_table(table, r);
    }
  }
  try {
    spec.validate(model);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ".proposal: " + e.what());
  }
  return cfg;
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError(file.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ModelConfig load_model_config(const std::filesystem::path& file, const std::optional<std::string>& scenario) {
  return parse_model_config(read_file(file), file.string(), scenario);
}

RunSettings parse_run_config(const std::string& text, const std::string& origin) {
  const json doc = parse_json(text, origin);
  const Node root(doc, origin);
  RunSettings s;
  RunConfig& run = s.run;
  if (auto v = root.get("iterations")) run.iterations = v->unsigned_integer();
  if (auto v = root.get("thinning")) run.thinning = v->unsigned_integer();
  if (auto v = root.get("seed")) run.seed = v->unsigned_integer();
  if (auto v = root.get("path_snapshot_every")) run.path_snapshot_every = v->unsigned_integer();
  if (auto v = root.get("eta_fixed"); v && !v->raw().is_null()) run.eta_fixed = v->num();
  if (auto v = root.get("scenario"); v && !v->raw().is_null()) s.scenario = v->str();
  if (auto init = root.get("init")) {
    if (auto v = init->get("eta0")) run.init.eta0 = v->num();
    if (auto v = init->get("shrinkage")) run.init.shrinkage = v->num();
    if (auto v = init->get("particles")) run.init.particles = v->unsigned_integer();
    if (auto v = init->get("steps")) run.init.steps = v->unsigned_integer();
    if (auto v = init->get("event_cap")) run.init.event_cap = v->unsigned_integer();
  }
  if (auto sched = root.get("schedule")) {
    Schedule schedule;
    for (std::size_t k = 0; k < sched->size(); ++k) {
      const Node iv = (*sched)[k];
      ScheduledInterval interval{iv["a"].num(), iv["b"].num(), false, false, false};
      if (auto v = iv.get("start")) interval.start = v->boolean();
      if (auto v = iv.get("end")) interval.end = v->boolean();
      if (auto v = iv.get("midpoint")) interval.midpoint = v->boolean();
      schedule.intervals.push_back(interval);
    }
    run.schedule = std::move(schedule);
  }
  try {
    run.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return s;
}

RunSettings load_run_config(const std::filesystem::path& file) {
  return parse_run_config(read_file(file), file.string());
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

std::optional<double> to_double(const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty()) return std::nullopt;
  return v;
}

std::string location(const std::string& origin, std::size_t line) {
  return origin + ":" + std::to_string(line);
}

bool skip_line(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t[0] == '#';
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "na";
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

ObservationSeries parse_observations(std::istream& in, const std::vector<std::string>& species,
                                     const std::string& origin) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    header = split(line, ',');
    break;
  }
  if (header.empty() || trim(header[0]) != "t")
    throw ConfigError(location(origin, lineno) + ": header must start with 't'");

  std::vector<std::optional<std::size_t>> column_species(header.size());
  std::set<std::string> seen;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    if (!seen.insert(name).second) throw ConfigError(location(origin, lineno) + ": duplicate column '" + name + "'");
    const auto it = std::find(species.begin(), species.end(), name);
    if (it == species.end())
      throw ConfigError(location(origin, lineno) + ": column '" + name + "' is not a model species");
    column_species[c] = static_cast<std::size_t>(it - species.begin());
  }

  ObservationSeries obs;
  obs.species = species;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw ConfigError(location(origin, lineno) + ": expected " + std::to_string(header.size()) + " fields");
    const auto t = to_double(cells[0]);
    if (!t) throw ConfigError(location(origin, lineno) + ": invalid time '" + cells[0] + "'");
    obs.times.push_back(*t);
    const std::size_t base = obs.values.size();
    obs.values.resize(base + species.size(), ObservationSeries::na);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (trim(cells[c]) == "na") continue;
      const auto v = to_double(cells[c]);
      if (!v) throw ConfigError(location(origin, lineno) + ": invalid value '" + cells[c] + "'");
      obs.values[base + *column_species[c]] = *v;
    }
  }
  try {
    obs.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return obs;
}

ObservationSeries load_observations(const std::filesystem::path& file, const std::vector<std::string>& species) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string() + ": cannot open file");
  return parse_observations(in, species, file.string());
}

void write_observations(std::ostream& out, const ObservationSeries& obs) {
  out << 't';
  for (const auto& s : obs.species) out << ',' << s;
  out << '\n';
  for (std::size_t l = 0; l < obs.size(); ++l) {
    out << format_double(obs.times[l]);
    for (std::size_t j = 0; j < obs.width(); ++j) out << ',' << format_double(obs.value(l, j));
    out << '\n';
  }
}

void write_path(std::ostream& out, const Path& path) {
  out << "# a=" << format_double(path.a) << " b=" << format_double(path.b) << " y0=";
  for (std::size_t j = 0; j < path.start.size(); ++j) out << (j ? ";" : "") << path.start[j];
  out << "\ntau,reaction_index\n";
  for (const auto& e : path.events) out << format_double(e.time) << ',' << e.reaction + 1 << '\n';
}

Path parse_path(std::istream& in, const std::string& origin) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw ConfigError(location(origin, lineno) + ": expected '# a=... b=... y0=...' header");
  Path path;
  bool has_a = false, has_b = false, has_y0 = false;
  std::istringstream header(line.substr(2));
  std::string token;
  while (header >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
    if (key == "a" || key == "b") {
      const auto v = to_double(value);
      if (!v) throw ConfigError(location(origin, lineno) + ": invalid " + key);
      (key == "a" ? path.a : path.b) = *v;
      (key == "a" ? has_a : has_b) = true;
    } else if (key == "y0") {
      for (const auto& cell : split(value, ';')) {
        const auto v = to_double(cell);
        if (!v || *v < 0 || *v != std::floor(*v)) throw ConfigError(location(origin, lineno) + ": invalid y0");
        path.start.push_back(static_cast<std::int64_t>(*v));
      }
      has_y0 = true;
    }
  }
  if (!has_a || !has_b || !has_y0) throw ConfigError(location(origin, lineno) + ": header needs a, b and y0");
  if (!std::getline(in, line) || trim(line) != "tau,reaction_index")
    throw ConfigError(location(origin, lineno + 1) + ": expected 'tau,reaction_index'");
  ++lineno;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    const auto cells = split(line, ',');
    const auto tau = cells.size() == 2 ? to_double(cells[0]) : std::nullopt;
    const auto idx = cells.size() == 2 ? to_double(cells[1]) : std::nullopt;
    if (!tau || !idx || *idx < 1 || *idx != std::floor(*idx))
      throw ConfigError(location(origin, lineno) + ": expected 'tau,reaction_index'");
    path.events.push_back({*tau, static_cast<std::size_t>(*idx) - 1});
  }
  return path;
}

Path load_path(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string() + ": cannot open file");
  return parse_path(in, file.string());
}

std::vector<std::string> trace_header(std::size_t num_reactions) {
  std::vector<std::string> h{"iter"};
  for (std::size_t i = 1; i <= num_reactions; ++i) h.push_back("theta_" + std::to_string(i));
  h.push_back("eta");
  h.push_back("logjoint");
  for (std::size_t i = 1; i <= num_reactions; ++i) h.push_back("rtot_" + std::to_string(i));
  return h;
}

void write_trace_row(std::ostream& out, const TraceRow& row) {
  out << row.iteration;
  for (double t : row.theta) out << ',' << format_double(t);
  out << ',' << format_double(row.eta) << ',' << format_double(row.log_joint);
  for (auto n : row.totals) out << ',' << n;
  out << '\n';
}

Trace parse_trace(std::istream& in, const std::string& origin) {
  std::string line;
  std::size_t lineno = 0;
  Trace trace;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    for (const auto& c : split(line, ',')) trace.columns.push_back(trim(c));
    break;
  }
  if (trace.columns.empty() || trace.columns[0] != "iter")
    throw ConfigError(location(origin, lineno) + ": header must start with 'iter'");
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    const auto cells = split(line, ',');
    if (cells.size() != trace.columns.size())
      throw ConfigError(location(origin, lineno) + ": expected " + std::to_string(trace.columns.size()) + " fields");
    const auto iter = to_double(cells[0]);
    if (!iter || *iter < 0) throw ConfigError(location(origin, lineno) + ": invalid iteration");
    std::vector<double> values;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto v = to_double(cells[c]);
      if (!v) throw ConfigError(location(origin, lineno) + ": invalid value in column '" + trace.columns[c] + "'");
      values.push_back(*v);
    }
    trace.iterations.push_back(static_cast<std::size_t>(*iter));
    trace.rows.push_back(std::move(values));
  }
  return trace;
}

Trace load_trace(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string() + ": cannot open file");
  return parse_trace(in, file.string());
}

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mjp
