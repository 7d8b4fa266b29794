#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "nstraj/experiment.hpp"
#include "nstraj/field_io.hpp"

namespace nstraj {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& field, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(field, "expected a number, got '" + text + "'");
  }
  return v;
}

long long to_integer(const std::string& field, const std::string& text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(field, "expected an integer, got '" + text + "'");
  }
  return v;
}

std::vector<double> to_doubles(const std::string& field, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(to_double(field, item));
  if (out.empty()) throw ConfigError(field, "expected a nonempty list");
  return out;
}

// name(arg, arg, ...) -> {name, args}
std::pair<std::string, std::vector<std::string>> call_syntax(const std::string& field, const std::string& text) {
  const auto open = text.find('(');
  if (open == std::string::npos) return {trim(text), {}};
  if (text.back() != ')') throw ConfigError(field, "unbalanced parentheses in '" + text + "'");
  return {trim(text.substr(0, open)), split(text.substr(open + 1, text.size() - open - 2), ',')};
}

std::string join(const std::vector<double>& v) { return fmt::format("{}", fmt::join(v, ", ")); }
std::string join(const std::vector<int>& v) { return fmt::format("{}", fmt::join(v, ", ")); }

const std::map<ExperimentKind, std::vector<std::string>>& required_fields() {
  static const std::map<ExperimentKind, std::vector<std::string>> m{
      {ExperimentKind::TaylorGreenOracle, {"N", "nu", "T", "dt"}},
      {ExperimentKind::RoughRun, {"N", "nu", "T", "dt", "initial"}},
      {ExperimentKind::BoundsAudit, {"N", "nu", "T", "dt", "initial"}},
      {ExperimentKind::TrajectoryUniqueness, {"N", "nu", "T", "dt", "initial"}},
      {ExperimentKind::HeatH2Minus, {"N", "T", "initial"}},
      {ExperimentKind::LoglipAudit, {"N", "initial"}},
      {ExperimentKind::Counterexamples, {}},
  };
  return m;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::TaylorGreenOracle:
      return "taylor-green-oracle";
    case ExperimentKind::RoughRun:
      return "rough-run";
    case ExperimentKind::HeatH2Minus:
      return "heat-h2minus";
    case ExperimentKind::LoglipAudit:
      return "loglip-audit";
    case ExperimentKind::BoundsAudit:
      return "bounds-audit";
    case ExperimentKind::TrajectoryUniqueness:
      return "trajectory-uniqueness";
    case ExperimentKind::Counterexamples:
      return "counterexamples";
  }
  return "counterexamples";
}

ExperimentKind parse_experiment_kind(const std::string& text) {
  for (auto k : {ExperimentKind::TaylorGreenOracle, ExperimentKind::RoughRun, ExperimentKind::HeatH2Minus,
                 ExperimentKind::LoglipAudit, ExperimentKind::BoundsAudit, ExperimentKind::TrajectoryUniqueness,
                 ExperimentKind::Counterexamples}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("kind", "unknown experiment kind '" + text + "'");
}

std::string InitialData::describe() const {
  switch (kind) {
    case Kind::TaylorGreen:
      return fmt::format("taylor-green({})", amplitude);
    case Kind::Rough:
      return fmt::format("rough({}, {})", decay, seed);
    case Kind::File:
      return fmt::format("file({})", path);
  }
  return "taylor-green(1)";
}

SpectralVelocity InitialData::build(const WavenumberGrid& grid) const {
  switch (kind) {
    case Kind::TaylorGreen:
      return taylor_green(grid, amplitude);
    case Kind::Rough:
      return synthesize_rough_field(grid, decay, seed);
    case Kind::File: {
      const SpectralVector v = read_field(std::filesystem::path(path));
      if (v.grid() != grid) {
        throw ConfigError("initial", fmt::format("field file has N={}, config has N={}", v.grid().resolution(),
                                                 grid.resolution()));
      }
      return leray_project(v);
    }
  }
  return taylor_green(grid, amplitude);
}

InitialData InitialData::with_seed(std::uint64_t s) const {
  InitialData d = *this;
  d.seed = s;
  return d;
}

InitialData parse_initial_data(const std::string& text) {
  const auto [name, args] = call_syntax("initial", text);
  InitialData d;
  if (name == "taylor-green") {
    d.kind = InitialData::Kind::TaylorGreen;
    if (args.size() > 1) throw ConfigError("initial", "taylor-green takes at most one amplitude");
    if (!args.empty()) d.amplitude = to_double("initial", args[0]);
  } else if (name == "rough") {
    d.kind = InitialData::Kind::Rough;
    if (args.size() != 2) throw ConfigError("initial", "expected rough(decay, seed)");
    d.decay = to_double("initial", args[0]);
    const auto seed = to_integer("initial", args[1]);
    if (seed < 0) throw ConfigError("initial", "seed must be nonnegative");
    d.seed = static_cast<std::uint64_t>(seed);
    if (!(d.decay > 0.0 && d.decay <= 1.0)) throw ConfigError("initial", "rough decay must lie in (0, 1]");
  } else if (name == "file") {
    d.kind = InitialData::Kind::File;
    if (args.size() != 1 || args[0].empty()) throw ConfigError("initial", "expected file(path)");
    d.path = args[0];
  } else {
    throw ConfigError("initial", "expected taylor-green | rough(decay, seed) | file(path), got '" + text + "'");
  }
  return d;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("line {}", lineno), "expected key = value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(key, "given more than once");
    if (val.empty()) throw ConfigError(key, "missing value");

    auto positive_int = [&](const std::string& k, const std::string& v) {
      const auto n = to_integer(k, v);
      if (n < 1 || n > 1'000'000'000) throw ConfigError(k, "must be a positive integer");
      return static_cast<int>(n);
    };
    auto positive = [&](const std::string& k, const std::string& v) {
      const double x = to_double(k, v);
      if (!(x > 0.0)) throw ConfigError(k, "must be positive");
      return x;
    };
    auto seed = [&](const std::string& k, const std::string& v) {
      const auto n = to_integer(k, v);
      if (n < 0) throw ConfigError(k, "must be nonnegative");
      return static_cast<std::uint64_t>(n);
    };

    if (key == "kind") {
      c.kind = parse_experiment_kind(val);
    } else if (key == "N") {
      c.resolution = positive_int(key, val);
      try {
        make_grid(c.resolution);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(key, e.what());
      }
    } else if (key == "nu") {
      c.viscosity = positive(key, val);
    } else if (key == "T") {
      c.final_time = positive(key, val);
    } else if (key == "dt") {
      c.dt = positive(key, val);
    } else if (key == "initial") {
      c.initial = parse_initial_data(val);
    } else if (key == "dealias") {
      if (val != "two-thirds" && val != "none") throw ConfigError(key, "expected two-thirds or none");
      c.dealias = val;
    } else if (key == "forcing") {
      const auto [name, args] = call_syntax(key, val);
      if (name == "zero" && args.empty()) {
      } else if (name == "single-mode" && args.size() == 4) {
        for (const auto& a : args) to_double(key, a);
      } else {
        throw ConfigError(key, "expected zero or single-mode(k1, k2, amplitude, frequency)");
      }
      c.forcing = val;
    } else if (key == "snapshots_per_decade") {
      c.per_decade = positive_int(key, val);
    } else if (key == "t_min_fraction") {
      c.t_min_fraction = positive(key, val);
      if (c.t_min_fraction >= 1.0) throw ConfigError(key, "must be below 1");
    } else if (key == "snapshot_interval") {
      c.snapshot_interval = to_double(key, val);
      if (c.snapshot_interval < 0.0) throw ConfigError(key, "must be nonnegative");
    } else if (key == "exponents") {
      c.exponents = to_doubles(key, val);
      for (double s : c.exponents) {
        if (!(s >= 0.5 && s <= kMaxDerivativeOrder)) throw ConfigError(key, "exponents must lie in [0.5, 4]");
      }
    } else if (key == "r") {
      c.r_list = to_doubles(key, val);
    } else if (key == "s_lo") {
      c.s_lo = to_doubles(key, val);
    } else if (key == "epsilons") {
      c.epsilons = to_doubles(key, val);
    } else if (key == "substeps") {
      c.substeps.clear();
      for (const auto& item : split(val, ',')) c.substeps.push_back(positive_int(key, item));
    } else if (key == "perturbation_substeps") {
      c.perturbation_substeps = positive_int(key, val);
    } else if (key == "start") {
      const auto xs = to_doubles(key, val);
      if (xs.size() != 2) throw ConfigError(key, "expected two coordinates");
      c.start = {xs[0], xs[1]};
    } else if (key == "validation_seed") {
      c.validation_seed = seed(key, val);
    } else if (key == "envelope_c") {
      if (val == "auto") {
        c.envelope_c.reset();
      } else {
        c.envelope_c = positive(key, val);
      }
    } else if (key == "refined_N") {
      c.refined_resolution = static_cast<int>(to_integer(key, val));
      if (c.refined_resolution < 0) throw ConfigError(key, "must be nonnegative (0 doubles N)");
    } else if (key == "fields") {
      c.fields = positive_int(key, val);
    } else if (key == "pairs") {
      c.pairs = positive_int(key, val);
    } else if (key == "pair_seed") {
      c.pair_seed = seed(key, val);
    } else if (key == "gt_times") {
      c.gt_times = to_doubles(key, val);
    } else if (key == "gt_spread_times") {
      c.gt_spread_times = to_doubles(key, val);
    } else if (key == "delta") {
      c.delta = to_double(key, val);
      if (c.delta < 0.0) throw ConfigError(key, "must be nonnegative");
    } else if (key == "branch_t0") {
      c.branch_t0 = positive(key, val);
    } else if (key == "branch_t1") {
      c.branch_t1 = positive(key, val);
    } else if (key == "output") {
      c.output = val;
    } else if (key == "threads") {
      c.threads = positive_int(key, val);
    } else {
      throw ConfigError(key, "unknown field");
    }
  }
  if (!seen.contains("kind")) throw ConfigError("kind", "required field missing");
  for (const auto& field : required_fields().at(c.kind)) {
    if (!seen.contains(field)) {
      throw ConfigError(field, fmt::format("required field missing for kind {}", to_string(c.kind)));
    }
  }
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  return parse_config(in);
}

std::string echo_config(const ExperimentConfig& c) {
  std::string out;
  auto put = [&out](const std::string& key, const std::string& value) { out += key + " = " + value + "\n"; };
  put("kind", to_string(c.kind));
  put("N", fmt::format("{}", c.resolution));
  put("nu", fmt::format("{}", c.viscosity));
  put("T", fmt::format("{}", c.final_time));
  put("dt", fmt::format("{}", c.dt));
  put("initial", c.initial.describe());
  put("dealias", c.dealias);
  put("forcing", c.forcing);
  put("snapshots_per_decade", fmt::format("{}", c.per_decade));
  put("t_min_fraction", fmt::format("{}", c.t_min_fraction));
  put("snapshot_interval", fmt::format("{}", c.snapshot_interval));
  put("exponents", join(c.exponents));
  put("r", join(c.r_list));
  put("s_lo", join(c.s_lo));
  put("epsilons", join(c.epsilons));
  put("substeps", join(c.substeps));
  put("perturbation_substeps", fmt::format("{}", c.perturbation_substeps));
  put("start", fmt::format("{}, {}", c.start.x1, c.start.x2));
  put("validation_seed", fmt::format("{}", c.validation_seed));
  put("envelope_c", c.envelope_c ? fmt::format("{}", *c.envelope_c) : "auto");
  put("refined_N", fmt::format("{}", c.refined_resolution));
  put("fields", fmt::format("{}", c.fields));
  put("pairs", fmt::format("{}", c.pairs));
  put("pair_seed", fmt::format("{}", c.pair_seed));
  put("gt_times", join(c.gt_times));
  put("gt_spread_times", join(c.gt_spread_times));
  put("delta", fmt::format("{}", c.delta));
  put("branch_t0", fmt::format("{}", c.branch_t0));
  put("branch_t1", fmt::format("{}", c.branch_t1));
  put("output", c.output);
  put("threads", fmt::format("{}", c.threads));
  return out;
}

}  // namespace nstraj
