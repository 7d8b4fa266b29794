#include "nstraj/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <thread>

#include <fmt/format.h>
#include "json.hpp"

#include "artifacts.hpp"
#include "nstraj/counterexample_lab.hpp"
#include "nstraj/diagnostics.hpp"
#include "nstraj/field_io.hpp"
#include "nstraj/nse_solver.hpp"
#include "nstraj/tracer.hpp"

namespace nstraj {

using nlohmann::json;
using detail::CsvWriter;

namespace {

namespace fs = std::filesystem;

json number(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

double from_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  return std::strtod(j.get<std::string>().c_str(), nullptr);
}

// Collects assertions and kind-specific results while a study runs.
struct Study {
  const ExperimentConfig& cfg;
  fs::path dir;
  std::vector<Assertion> assertions;
  json results = json::object();

  Assertion& check(const std::string& name, double value, const std::string& op, double threshold) {
    Assertion a;
    a.name = name;
    a.value = value;
    a.op = op;
    a.threshold = threshold;
    a.passed = evaluate_op(value, op, threshold);
    assertions.push_back(a);
    return assertions.back();
  }

  // value recomputed from a CSV column, recorded with its source
  Assertion& check_csv(const std::string& name, const std::string& file, const std::string& column,
                       const std::string& how, const std::string& op, double threshold,
                       const std::string& where_column = "", const std::string& where_value = "") {
    const auto table = detail::read_csv(dir / file);
    const auto values = table.numbers(column, where_column, where_value);
    Assertion& a = check(name, detail::reduce(values, how), op, threshold);
    a.file = file;
    a.column = column;
    a.reduce = how;
    a.where_column = where_column;
    a.where_value = where_value;
    return a;
  }
};

SolverConfig solver_config(const ExperimentConfig& c, double dt) {
  SolverConfig s;
  s.viscosity = c.viscosity;
  s.dt = dt;
  s.final_time = c.final_time;
  s.dealias = parse_dealias_rule(c.dealias);
  s.snapshots.t_min_fraction = c.t_min_fraction;
  s.snapshots.per_decade = c.per_decade;
  s.snapshots.interval = c.snapshot_interval;
  s.threads = c.threads;
  if (c.forcing != "zero") {
    const auto open = c.forcing.find('(');
    std::vector<double> a;
    std::string rest = c.forcing.substr(open + 1, c.forcing.size() - open - 2);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const auto comma = rest.find(',', pos);
      a.push_back(std::strtod(rest.substr(pos, comma - pos).c_str(), nullptr));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    s.forcing = Forcing::single_mode(static_cast<int>(a[0]), static_cast<int>(a[1]), a[2], a[3]);
  }
  return s;
}

RunRecord checked_run(const SolverConfig& s, const SpectralVelocity& u0, const fs::path& log_path) {
  RunRecord rec;
  try {
    rec = run(s, u0);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("dt", e.what());
  }
  CsvWriter log(log_path, {"t", "l2", "h1"});
  for (const auto& e : rec.log) log.row(e.t, e.l2, e.h1);
  if (!rec.ok()) throw BlowUpError(rec.failure_time, *rec.failure);
  return rec;
}

std::vector<NormSeries> write_norms(const fs::path& path, const RunRecord& rec, std::span<const double> exps) {
  auto series = record_norms(rec, exps);
  std::vector<std::string> header{"t"};
  for (const auto& s : series) header.push_back(s.name);
  CsvWriter w(path, header);
  for (std::size_t i = 0; i < series.front().size(); ++i) {
    std::string line = fmt::format("{}", series.front().t[i]);
    for (const auto& s : series) line += fmt::format(",{}", s.value[i]);
    w.row(line);
  }
  return series;
}

// weight making t^w ||D^s u|| the scale-invariant small-time quantity
double weight_for(double s) { return s - 0.5; }

SpectralVelocity initial_state(const ExperimentConfig& c, const WavenumberGrid& grid) {
  try {
    return c.initial.build(grid);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("initial", e.what());
  }
}

// -- taylor-green-oracle ------------------------------------------------------

void taylor_green_oracle(Study& st) {
  const auto& c = st.cfg;
  if (c.initial.kind != InitialData::Kind::TaylorGreen) {
    throw ConfigError("initial", "taylor-green-oracle needs taylor-green initial data");
  }
  if (c.forcing != "zero") throw ConfigError("forcing", "taylor-green-oracle needs zero forcing");
  const auto grid = make_grid(c.resolution);
  const double amp = c.initial.amplitude;
  const auto rec = checked_run(solver_config(c, c.dt), taylor_green(grid, amp), st.dir / "step_log.csv");
  write_norms(st.dir / "norms.csv", rec, c.exponents);

  CsvWriter w(st.dir / "oracle.csv", {"t", "max_error", "energy", "energy_exact", "energy_rel_error"});
  double worst = 0.0;
  double worst_energy = 0.0;
  for (const auto& snap : rec.snapshots) {
    const auto phys = transform_to_physical(snap.state);
    const double decay = amp * std::exp(-2.0 * c.viscosity * snap.time);
    double err = 0.0;
    for (int i1 = 0; i1 < c.resolution; ++i1) {
      for (int i2 = 0; i2 < c.resolution; ++i2) {
        const Vec2 x = phys.position(i1, i2);
        const Vec2 exact{decay * std::sin(x.x1) * std::cos(x.x2), -decay * std::cos(x.x1) * std::sin(x.x2)};
        err = std::max(err, (phys.value(i1, i2) - exact).norm());
      }
    }
    const double energy = std::pow(sobolev_norm(snap.state, 0.0), 2);
    const double exact_energy = 2.0 * std::numbers::pi * std::numbers::pi * amp * amp *
                                std::exp(-4.0 * c.viscosity * snap.time);
    const double rel = std::abs(energy - exact_energy) / exact_energy;
    w.row(snap.time, err, energy, exact_energy, rel);
    worst = std::max(worst, err);
    worst_energy = std::max(worst_energy, rel);
  }
  st.results["max_error"] = number(worst);
  st.results["max_energy_rel_error"] = number(worst_energy);
  st.results["snapshots"] = rec.snapshots.size();
}

void taylor_green_assertions(Study& st) {
  st.check_csv("max_pointwise_error", "oracle.csv", "max_error", "max", "<", 1e-6);
  st.check_csv("energy_rel_error", "oracle.csv", "energy_rel_error", "max", "<", 1e-6);
}

// -- rough-run ----------------------------------------------------------------

void rough_run(Study& st) {
  const auto& c = st.cfg;
  const auto grid = make_grid(c.resolution);
  const auto rec = checked_run(solver_config(c, c.dt), initial_state(c, grid), st.dir / "step_log.csv");
  const auto series = write_norms(st.dir / "norms.csv", rec, c.exponents);
  {
    CsvWriter w(st.dir / "bounds.csv", {"name", "exponent", "weight", "constant", "attained_at", "verdict"});
    json bounds = json::array();
    for (std::size_t i = 0; i < series.size(); ++i) {
      const auto b = sup_weighted(series[i], weight_for(c.exponents[i]));
      w.row(b.name, c.exponents[i], weight_for(c.exponents[i]), b.constant, b.attained_at, to_string(b.verdict));
      bounds.push_back({{"name", b.name}, {"constant", number(b.constant)}, {"attained_at", b.attained_at},
                        {"verdict", to_string(b.verdict)}});
    }
    st.results["bounds"] = bounds;
  }
  write_field(st.dir / "final_field.txt", rec.final_state());
  const auto& u = rec.final_state();
  const double div = max_divergence(u) / std::max(u.coefficients().max_abs_coefficient(), 1e-300);
  st.results["final_relative_divergence"] = number(div);
  st.check("final_relative_divergence", div, "<", 1e-10);
  if (c.forcing == "zero") {
    st.check_csv("energy_nonincreasing", "step_log.csv", "l2", "max_step_ratio", "<=", 1.0 + 1e-12);
  }
}

// -- bounds-audit -------------------------------------------------------------

void bounds_audit(Study& st) {
  const auto& c = st.cfg;
  struct Variant {
    std::string label;
    int n;
    double dt;
  };
  const std::vector<Variant> variants{{"base", c.resolution, c.dt},
                                      {"refined-N", c.refined(), c.dt},
                                      {"half-dt", c.resolution, 0.5 * c.dt}};
  std::vector<std::vector<BoundReport>> reports;  // [variant][exponent]
  CsvWriter bw(st.dir / "bounds.csv", {"name", "exponent", "weight", "run", "N", "dt", "constant", "attained_at",
                                       "t_min", "attained_ratio", "verdict"});
  CsvWriter iw(st.dir / "integrals.csv", {"series", "run", "exponent", "p", "s_lo", "value"});
  json au = json::array();
  for (const auto& v : variants) {
    const auto grid = make_grid(v.n);
    const auto rec = checked_run(solver_config(c, v.dt), initial_state(c, grid),
                                 st.dir / fmt::format("step_log_{}.csv", v.label));
    const auto series = write_norms(st.dir / fmt::format("norms_{}.csv", v.label), rec, c.exponents);
    std::vector<BoundReport> row;
    for (std::size_t i = 0; i < series.size(); ++i) {
      auto b = sup_weighted(series[i], weight_for(c.exponents[i]));
      b.resolution = v.n;
      b.dt = v.dt;
      const double t_min = series[i].t.front();
      bw.row(b.name, c.exponents[i], weight_for(c.exponents[i]), v.label, v.n, v.dt, b.constant, b.attained_at,
             t_min, b.attained_at / t_min, to_string(b.verdict));
      row.push_back(b);
      const double s = c.exponents[i];
      std::vector<double> ps{1.0};
      if (s - 1.0 >= 0.5 && s - 1.0 < 1.0) ps.push_back(1.0 + beta_max(s - 1.0));
      if (s <= 1.0) continue;
      for (double p : ps) {
        for (double lo : c.s_lo) {
          iw.row(fmt::format("{}:{}:p={}", v.label, series[i].name, p), v.label, s, p, lo,
                 time_integral(series[i], p, lo));
        }
      }
    }
    const auto au_report = au_l1_check(rec, c.s_lo);
    au.push_back({{"run", v.label}, {"integral", number(au_report.constant)},
                  {"verdict", to_string(au_report.verdict)}, {"note", au_report.note}});
    reports.push_back(std::move(row));
  }
  st.results["au_l1"] = au;
  st.results["lebesgue_exponent_gamma_half"] = 1.0 + beta_max(0.5);

  CsvWriter rw(st.dir / "refinement.csv", {"name", "exponent", "weight", "base_constant", "max_change", "verdict"});
  json verdicts = json::array();
  for (std::size_t i = 0; i < c.exponents.size(); ++i) {
    const std::vector<BoundReport> refined{reports[1][i], reports[2][i]};
    const auto v = refinement_verdict(reports[0][i].name, reports[0][i], refined);
    const double change = v.sup_residual + 0.25;
    rw.row(v.name, c.exponents[i], weight_for(c.exponents[i]), v.constant, change, to_string(v.verdict));
    verdicts.push_back({{"name", v.name}, {"constant", number(v.constant)}, {"attained_at", v.attained_at},
                        {"max_change", number(change)}, {"verdict", to_string(v.verdict)}, {"note", v.note}});
  }
  st.results["bounds"] = verdicts;
}

void bounds_assertions(Study& st) {
  const auto& c = st.cfg;
  for (double s : c.exponents) {
    const std::string name = fmt::format("t^{} {}", weight_for(s), norm_name(s));
    st.check_csv(name + " refinement change", "refinement.csv", "max_change", "max", "<", 0.25, "name", name);
    st.check_csv(name + " attained after t_min", "bounds.csv", "attained_ratio", "min", ">", 1.0, "name", name);
    if (s <= 1.0) continue;
    std::vector<double> ps{1.0};
    if (s - 1.0 >= 0.5 && s - 1.0 < 1.0) ps.push_back(1.0 + beta_max(s - 1.0));
    for (double p : ps) {
      const std::string series = fmt::format("base:{}:p={}", norm_name(s), p);
      st.check_csv("Cauchy " + series, "integrals.csv", "value", "max_step_change", "<", 0.10, "series", series);
    }
  }
}

// -- heat-h2minus -------------------------------------------------------------

void heat_h2minus(Study& st) {
  const auto& c = st.cfg;
  const auto grid = make_grid(c.resolution);
  const auto study = heat_h2minus_study(initial_state(c, grid), c.r_list, c.final_time, c.s_lo);
  {
    CsvWriter w(st.dir / "h2minus.csv", {"r", "s_lo", "integral"});
    for (const auto& row : study.rows) w.row(row.r, row.s_lo, row.integral);
  }
  json rs = json::array();
  for (double r : c.r_list) {
    rs.push_back({{"r", r}, {"growth", number(study.growth(r))}, {"max_step_change", number(study.max_step_change(r))},
                  {"behaviour", r > 2.0 ? "cauchy" : (r < 2.0 ? "divergent" : "borderline")}});
  }
  st.results["h2minus"] = rs;

  CsvWriter w(st.dir / "gt.csv",
              {"r", "t", "x_star", "value", "cell_width", "x_star_t", "reference", "excess"});
  for (double t : c.gt_times) {
    const auto m = gt_profile(0.0, t);
    const double ref = std::max(0.0, 1.0 / t - 1.0);
    w.row(0, t, m.x_star, m.value, m.cell_width, m.x_star * t, ref, std::abs(m.x_star - ref) - m.cell_width);
  }
  for (double t : c.gt_spread_times) {
    const auto m = gt_profile(2.0, t);
    w.row(2, t, m.x_star, m.value, m.cell_width, m.x_star * t, "nan", "nan");
  }
}

void heat_assertions(Study& st) {
  for (double r : st.cfg.r_list) {
    const std::string key = fmt::format("{}", r);
    if (r > 2.0) {
      st.check_csv(fmt::format("r={} Cauchy", r), "h2minus.csv", "integral", "max_step_change", "<", 0.05, "r", key);
    } else if (r < 2.0) {
      st.check_csv(fmt::format("r={} growth", r), "h2minus.csv", "integral", "growth", ">=", 0.20, "r", key);
    }
  }
  st.check_csv("gt r=0 maximizer within one cell", "gt.csv", "excess", "max", "<=", 0.0, "r", "0");
  st.check_csv("gt r=2 x*t spread", "gt.csv", "x_star_t", "spread", "<", 0.10, "r", "2");
}

// -- loglip-audit -------------------------------------------------------------

void loglip_audit(Study& st) {
  const auto& c = st.cfg;
  if (c.initial.kind != InitialData::Kind::Rough) throw ConfigError("initial", "loglip-audit needs rough data");
  CsvWriter w(st.dir / "loglip.csv", {"field", "seed", "N", "constant", "attained_at", "weight"});
  CsvWriter sw(st.dir / "loglip_summary.csv", {"N", "max_constant", "min_constant", "field_spread"});
  json per_n = json::array();
  for (int n : {c.resolution, c.refined()}) {
    const auto grid = make_grid(n);
    std::vector<BoundReport> reports(static_cast<std::size_t>(c.fields));
    std::vector<double> weights(reports.size());
    auto work = [&](int worker) {
      for (int f = worker; f < c.fields; f += c.threads) {
        const auto u = synthesize_rough_field(grid, c.initial.decay, c.initial.seed + static_cast<std::uint64_t>(f));
        reports[static_cast<std::size_t>(f)] = loglip_modulus(u, c.pairs, c.pair_seed + static_cast<std::uint64_t>(f));
        weights[static_cast<std::size_t>(f)] = loglip_weight(u);
      }
    };
    std::vector<std::thread> pool;
    for (int k = 1; k < c.threads; ++k) pool.emplace_back(work, k);
    work(0);
    for (auto& t : pool) t.join();
    double hi = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    for (int f = 0; f < c.fields; ++f) {
      const auto& r = reports[static_cast<std::size_t>(f)];
      w.row(f, c.initial.seed + static_cast<std::uint64_t>(f), n, r.constant, r.attained_at,
            weights[static_cast<std::size_t>(f)]);
      hi = std::max(hi, r.constant);
      lo = std::min(lo, r.constant);
    }
    sw.row(n, hi, lo, hi / lo - 1.0);
    per_n.push_back({{"N", n}, {"max_constant", number(hi)}, {"min_constant", number(lo)}});
  }
  st.results["loglip"] = per_n;
}

void loglip_assertions(Study& st) {
  st.check_csv("field spread below 2x", "loglip_summary.csv", "field_spread", "max", "<", 1.0);
  st.check_csv("resolution spread below 2x", "loglip_summary.csv", "max_constant", "spread", "<", 1.0);
}

// -- trajectory-uniqueness ----------------------------------------------------

void write_separations(CsvWriter& w, const std::string& run_label, const UniquenessReport& rep,
                       std::span<const double> epsilons, double c) {
  const auto cum = cumulative_integral(rep.au);
  for (std::size_t p = 0; p < rep.separations.size(); ++p) {
    const auto& sep = rep.separations[p];
    std::optional<std::size_t> anchor;
    for (auto i : rep.audit_indices) {
      const double eta = sep.eta[i];
      if (!anchor) {
        if (eta > 0.0 && eta < std::exp(-0.5)) {
          anchor = i;
          w.row(run_label, epsilons[p], sep.t[i], eta, eta, 0);
        }
        continue;
      }
      const double env = envelope_bound(sep.eta[*anchor], sep.t[*anchor], sep.t[i], cum[i] - cum[*anchor], c);
      const bool vacuous = std::isinf(env);
      w.row(run_label, epsilons[p], sep.t[i], eta, vacuous ? std::string("inf") : fmt::format("{}", env),
            vacuous ? 1 : 0);
    }
  }
}

void trajectory_uniqueness(Study& st) {
  const auto& c = st.cfg;
  if (c.initial.kind != InitialData::Kind::Rough) {
    throw ConfigError("initial", "trajectory-uniqueness needs rough data (a validation seed is drawn)");
  }
  const auto grid = make_grid(c.resolution);
  const auto solver = solver_config(c, c.dt);
  UniquenessConfig study;
  study.start = c.start;
  study.epsilons = c.epsilons;
  study.substeps = c.substeps;
  study.perturbation_substeps = c.perturbation_substeps;
  study.envelope_c = c.envelope_c;

  auto guarded = [&](const UniquenessConfig& s, const SpectralVelocity& u0) {
    try {
      return uniqueness_experiment(solver, u0, s);
    } catch (const BlowUpError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError("epsilons/substeps/dt", e.what());
    }
  };
  const auto cal = guarded(study, initial_state(c, grid));
  const double env_c = c.envelope_c.value_or(cal.calibrated_c);
  UniquenessConfig vstudy = study;
  vstudy.envelope_c = env_c;
  vstudy.substeps = {c.perturbation_substeps};
  const auto val = guarded(vstudy, c.initial.with_seed(c.validation_seed).build(grid));

  {
    CsvWriter w(st.dir / "step_log.csv", {"t", "l2", "h1"});
    for (const auto& e : cal.run.log) w.row(e.t, e.l2, e.h1);
  }
  {
    CsvWriter w(st.dir / "trajectories.csv", {"t", "particle_id", "x1", "x2", "wind1", "wind2"});
    const auto& tr = cal.trajectories;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      for (std::size_t p = 0; p < tr.particles(); ++p) {
        w.row(tr.times[i], tr.tags[p], tr.positions[p][i].x1, tr.positions[p][i].x2, tr.winding[p][i][0],
              tr.winding[p][i][1]);
      }
    }
  }
  {
    CsvWriter w(st.dir / "separations.csv", {"run", "epsilon", "t", "eta", "envelope", "vacuous_flag"});
    write_separations(w, "calibration", cal, c.epsilons, env_c);
    write_separations(w, "validation", val, c.epsilons, env_c);
  }
  {
    CsvWriter w(st.dir / "perturbation.csv", {"epsilon", "eta_final", "ratio"});
    for (const auto& r : cal.perturbation) w.row(r.epsilon, r.eta_final, r.ratio);
  }
  {
    CsvWriter w(st.dir / "integrator.csv", {"substeps", "dt", "x1", "x2", "difference_to_next", "order", "measurable"});
    for (const auto& r : cal.integrator) {
      w.row(r.substeps, r.dt, r.final_position.x1, r.final_position.x2, r.difference_to_next, r.order,
            r.order != 0.0 ? 1 : 0);
    }
  }
  {
    CsvWriter w(st.dir / "envelope.csv", {"run", "c", "pairs", "invalid", "vacuous", "nonvacuous", "held", "fraction"});
    for (const auto* rep : {&cal, &val}) {
      const auto& e = rep->envelope;
      w.row(rep == &cal ? "calibration" : "validation", e.c, e.pairs, e.invalid, e.vacuous, e.nonvacuous, e.held,
            e.fraction_held());
    }
  }
  st.results["calibrated_c"] = number(cal.calibrated_c);
  st.results["envelope_c"] = number(env_c);
  st.results["implied_K_limit"] = number(env_c > 0.0 ? 1.0 / env_c : INFINITY);
  st.results["validation_seed"] = c.validation_seed;
  st.results["statement"] =
      "uniqueness is tested as stability under perturbation plus envelope consistency; floating-point "
      "integration of a fixed field cannot exhibit non-uniqueness";
}

void trajectory_assertions(Study& st) {
  const auto table = detail::read_csv(st.dir / "integrator.csv");
  if (table.numbers("order", "measurable", "1").empty()) {
    st.check("rk4 order under dt halving", NAN, ">=", 3.5);
  } else {
    st.check_csv("rk4 order under dt halving", "integrator.csv", "order", "min", ">=", 3.5, "measurable", "1");
  }
  st.check_csv("eta(T) decreases with epsilon", "perturbation.csv", "eta_final", "max_step_ratio", "<", 1.0);
  st.check_csv("eta(T)/epsilon bounded", "perturbation.csv", "ratio", "spread", "<", 1.0);
  st.check_csv("out-of-sample nonvacuous samples", "envelope.csv", "nonvacuous", "last", ">", 0.0, "run",
               "validation");
  st.check_csv("out-of-sample envelope fraction", "envelope.csv", "fraction", "last", ">=", 0.95, "run",
               "validation");
}

// -- counterexamples ----------------------------------------------------------

void counterexamples(Study& st) {
  const auto& c = st.cfg;
  if (!(c.branch_t0 < c.branch_t1 && c.branch_t1 < 1.0)) {
    throw ConfigError("branch_t0/branch_t1", "need 0 < branch_t0 < branch_t1 < 1");
  }
  std::vector<double> samples;
  const int n = static_cast<int>(std::floor(std::log10(c.branch_t1 / c.branch_t0) * 10.0 + 1e-9));
  for (int j = 1; j <= n; ++j) samples.push_back(c.branch_t0 * std::pow(10.0, j / 10.0));
  samples.push_back(c.branch_t1);
  const double probe = std::exp(-2.0);
  if (probe > c.branch_t0 && probe < c.branch_t1) samples.push_back(probe);
  const auto branches = nonunique_branches(c.branch_t0, c.branch_t1, c.delta, samples);

  CsvWriter w(st.dir / "counterexamples.csv",
              {"branch", "t", "x", "closed_form", "residual", "rel_error", "identity_residual"});
  json info = json::array();
  for (const auto& b : branches) {
    for (std::size_t i = 0; i < b.t.size(); ++i) {
      const double cf = b.closed_form[i];
      const double rel = cf == 0.0 ? std::abs(b.x[i]) : std::abs(b.x[i] - cf) / std::abs(cf);
      const double ident = b.label == "log-branch" ? log_branch_ode_residual(b.t[i]) : 0.0;
      w.row(b.label, b.t[i], b.x[i], cf, b.residual[i], rel, ident);
      if (b.label == "log-branch" && b.t[i] == probe) st.results["log_branch_at_e^-2"] = b.x[i];
    }
    json j{{"branch", b.label}, {"max_residual", number(b.max_residual())},
           {"max_relative_error", number(b.max_relative_error())}};
    if (b.blowup_time) j["blowup_time"] = *b.blowup_time;
    if (b.label.starts_with("perturbed")) j["singularity_time"] = c.branch_t0 * std::exp(1.0 / c.delta);
    info.push_back(j);
  }
  st.results["branches"] = info;

  const double area = 4.0 * std::numbers::pi * std::numbers::pi;
  {
    CsvWriter lw(st.dir / "lorentz.csv", {"area", "constant"});
    for (double a : {1.0, area}) lw.row(a, lorentz_norm_constant(a));
  }
  const double lor = lorentz_norm_constant(area);
  st.results["lorentz_constant_torus"] = lor;

  const std::vector<double> lambdas{0.1, 0.5, 1.0, 10.0, 100.0, 1e4};
  const std::vector<double> s_list{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  const auto demo = weak_l1_demo(1.0, lambdas, s_list);
  CsvWriter ww(st.dir / "weak_l1.csv", {"quantity", "parameter", "value", "reference", "excess"});
  for (const auto& r : demo.weak) ww.row("measure", r.lambda, r.measure, r.certificate, r.measure - r.certificate);
  for (const auto& r : demo.strong) ww.row("integral", r.s, r.integral, std::log(1.0 / r.s), 0);

  st.check("lorentz constant of the torus", std::abs(lor - 4.0 * std::numbers::pi) / (4.0 * std::numbers::pi),
           "<=", 1e-12);
}

void counterexample_assertions(Study& st) {
  st.check_csv("branch residual", "counterexamples.csv", "residual", "max", "<=", 1e-10);
  st.check_csv("log-branch identity residual", "counterexamples.csv", "identity_residual", "max", "<=", 1e-10);
  st.check_csv("log-branch closed form", "counterexamples.csv", "rel_error", "max", "<", 0.01, "branch",
               "log-branch");
  st.check_csv("zero branch stays zero", "counterexamples.csv", "x", "max", "<=", 0.0, "branch", "zero");
  st.check_csv("weak-L1 certificate", "weak_l1.csv", "excess", "max", "<=", 0.0, "quantity", "measure");
}

json assertion_json(const Assertion& a) {
  json j{{"name", a.name}, {"value", number(a.value)}, {"op", a.op}, {"threshold", number(a.threshold)},
         {"passed", a.passed}};
  if (!a.file.empty()) {
    j["source"] = {{"file", a.file}, {"column", a.column}, {"reduce", a.reduce}};
    if (!a.where_column.empty()) j["source"]["where"] = {{"column", a.where_column}, {"value", a.where_value}};
  }
  return j;
}

}  // namespace

bool evaluate_op(double value, const std::string& op, double threshold) {
  if (op == "<") return value < threshold;
  if (op == "<=") return value <= threshold;
  if (op == ">") return value > threshold;
  if (op == ">=") return value >= threshold;
  throw std::invalid_argument("unknown comparison '" + op + "'");
}

bool ExperimentResult::passed(const std::string& name) const { return assertion(name).passed; }

const Assertion& ExperimentResult::assertion(const std::string& name) const {
  for (const auto& a : assertions) {
    if (a.name == name) return a;
  }
  throw std::out_of_range("no assertion named '" + name + "'");
}

fs::path resolve_output_directory(const ExperimentConfig& config) {
  fs::path out(config.output);
  if (out.is_absolute()) return out;
  if (const char* root = std::getenv("NSTRAJ_OUTPUT_ROOT"); root != nullptr && *root != '\0') {
    return fs::path(root) / out;
  }
  return fs::absolute(out);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult res;
  res.directory = resolve_output_directory(config);
  std::error_code ec;
  fs::create_directories(res.directory, ec);
  if (ec) {
    res.status = kExitConfig;
    res.message = "output: cannot create " + res.directory.string() + ": " + ec.message();
    return res;
  }
  {
    std::ofstream echo(res.directory / "config.echo");
    echo << echo_config(config);
  }

  Study st{config, res.directory, {}, json::object()};
  try {
    switch (config.kind) {
      case ExperimentKind::TaylorGreenOracle:
        taylor_green_oracle(st);
        taylor_green_assertions(st);
        break;
      case ExperimentKind::RoughRun:
        rough_run(st);
        break;
      case ExperimentKind::BoundsAudit:
        bounds_audit(st);
        bounds_assertions(st);
        break;
      case ExperimentKind::HeatH2Minus:
        heat_h2minus(st);
        heat_assertions(st);
        break;
      case ExperimentKind::LoglipAudit:
        loglip_audit(st);
        loglip_assertions(st);
        break;
      case ExperimentKind::TrajectoryUniqueness:
        trajectory_uniqueness(st);
        trajectory_assertions(st);
        break;
      case ExperimentKind::Counterexamples:
        counterexamples(st);
        counterexample_assertions(st);
        break;
    }
    const bool all = std::all_of(st.assertions.begin(), st.assertions.end(), [](const auto& a) { return a.passed; });
    res.status = all ? kExitPass : kExitAssertion;
    res.message = all ? "all assertions passed" : "assertion failure";
  } catch (const ConfigError& e) {
    res.status = kExitConfig;
    res.message = e.what();
  } catch (const BlowUpError& e) {
    res.status = kExitBlowUp;
    res.message = fmt::format("numerical blow-up at t={}: {}", e.time(), e.what());
  } catch (const std::invalid_argument& e) {
    res.status = kExitConfig;
    res.message = e.what();
  } catch (const std::exception& e) {
    res.status = kExitAssertion;
    res.message = e.what();
  }
  res.assertions = st.assertions;

  json summary{{"kind", to_string(config.kind)},
               {"status", res.status},
               {"message", res.message},
               {"config_echo", "config.echo"},
               {"results", st.results},
               {"assertions", json::array()}};
  for (const auto& a : res.assertions) summary["assertions"].push_back(assertion_json(a));
  std::ofstream(res.directory / "summary.json") << summary.dump(2) << '\n';
  return res;
}

int verify_artifacts(const fs::path& directory, std::ostream& report) {
  std::ifstream in(directory / "summary.json");
  if (!in) {
    report << "missing " << (directory / "summary.json").string() << '\n';
    return 2;
  }
  json summary;
  try {
    summary = json::parse(in);
  } catch (const json::exception& e) {
    report << "unreadable summary.json: " << e.what() << '\n';
    return 2;
  }
  int status = 0;
  for (const auto& a : summary.at("assertions")) {
    const std::string name = a.at("name");
    double value = from_number(a.at("value"));
    const double threshold = from_number(a.at("threshold"));
    std::string origin = "recorded";
    if (a.contains("source")) {
      const auto& s = a.at("source");
      try {
        const auto table = detail::read_csv(directory / s.at("file").get<std::string>());
        std::string wc;
        std::string wv;
        if (s.contains("where")) {
          wc = s.at("where").at("column");
          wv = s.at("where").at("value");
        }
        const double again = detail::reduce(table.numbers(s.at("column"), wc, wv), s.at("reduce"));
        const bool same = again == value || (std::isnan(again) && std::isnan(value)) ||
                          std::abs(again - value) <= 1e-12 * std::max(1.0, std::abs(value));
        if (!same) {
          report << fmt::format("MISMATCH {}: summary {} recomputed {}\n", name, value, again);
          status = std::max(status, 1);
        }
        value = again;
        origin = "recomputed";
      } catch (const std::runtime_error& e) {
        report << fmt::format("MISSING {}: {}\n", name, e.what());
        status = 2;
        continue;
      }
    }
    const bool ok = evaluate_op(value, a.at("op"), threshold);
    report << fmt::format("{} {}: {} {} {} ({})\n", ok ? "PASS" : "FAIL", name, value, a.at("op").get<std::string>(),
                          threshold, origin);
    if (!ok) status = std::max(status, 1);
  }
  return status;
}

}  // namespace nstraj
