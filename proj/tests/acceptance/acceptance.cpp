// Acceptance suite: one PASS/FAIL line per criterion.
//
//   nstraj_acceptance [--only 1,4,12] [--out DIR] [--configs DIR]

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nstraj/diagnostics.hpp"
#include "nstraj/experiment.hpp"
#include "nstraj/nse_solver.hpp"
#include "nstraj/random.hpp"
#include "nstraj/spectral_field.hpp"

using namespace nstraj;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& note) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "[x] ") + note);
  }
};

struct Context {
  fs::path out;
  fs::path configs;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig load(const Context& ctx, const std::string& name, const std::string& output) {
  auto c = parse_config_file(ctx.configs / (name + ".cfg"));
  c.output = (ctx.out / output).string();
  return c;
}

struct Timed {
  ExperimentResult result;
  double seconds;
};

Timed run_timed(const ExperimentConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  auto r = run_experiment(c);
  return {std::move(r), seconds_since(t0)};
}

void require_assertion(Outcome& o, const ExperimentResult& r, const std::string& name) {
  for (const auto& a : r.assertions) {
    if (a.name == name) {
      o.require(a.passed, fmt::format("{} = {:.6g} ({} {:g})", a.name, a.value, a.op, a.threshold));
      return;
    }
  }
  o.require(false, "missing assertion " + name);
}

void require_matching(Outcome& o, const ExperimentResult& r, const std::function<bool(const std::string&)>& pick) {
  bool any = false;
  for (const auto& a : r.assertions) {
    if (!pick(a.name)) continue;
    any = true;
    o.require(a.passed, fmt::format("{} = {:.6g} ({} {:g})", a.name, a.value, a.op, a.threshold));
  }
  if (!any) o.require(false, "no matching assertions");
}

SpectralVector random_vector(const WavenumberGrid& g, std::mt19937_64& gen) {
  SpectralVector v(g);
  for (int k1 = g.min_wavenumber() + 1; k1 <= g.max_wavenumber(); ++k1) {
    for (int k2 = 0; k2 <= g.max_wavenumber(); ++k2) {
      if ((k2 == 0 && k1 <= 0)) continue;
      auto c = [&] { return Complex(2.0 * uniform01(gen) - 1.0, 2.0 * uniform01(gen) - 1.0); };
      const Complex a = c();
      const Complex b = c();
      v.set_mode(k1, k2, a, b);
    }
  }
  return v;
}

double max_diff(const SpectralVector& a, const SpectralVector& b) {
  double d = 0.0;
  for (int c = 0; c < 2; ++c) {
    const auto x = a.component(c);
    const auto y = b.component(c);
    for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  }
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// 1
Outcome taylor_green_oracle(const Context& ctx) {
  Outcome o;
  const auto [r, secs] = run_timed(load(ctx, "taylor_green", "taylor-green"));
  o.require(r.status == kExitPass, fmt::format("status {}", r.status));
  require_assertion(o, r, "max_pointwise_error");
  require_assertion(o, r, "energy_rel_error");
  o.require(secs < 30.0, fmt::format("runtime {:.1f} s (< 30)", secs));
  return o;
}

// 2
Outcome heat_kernel(const Context&) {
  Outcome o;
  const auto g = make_grid(64);
  std::mt19937_64 gen(2024);
  const auto v = random_vector(g, gen);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int k1 = static_cast<int>(std::floor(uniform01(gen) * 63)) - 31;
    const int k2 = static_cast<int>(std::floor(uniform01(gen) * 32));
    if (k1 == 0 && k2 == 0) {
      --i;
      continue;
    }
    const double t = 0.02 * uniform01(gen);
    const auto h = heat_evolve(leray_project(v), t);
    const auto before = leray_project(v).coefficients().mode(k1, k2);
    const auto after = h.coefficients().mode(k1, k2);
    const double factor = std::exp(-static_cast<double>(k1 * k1 + k2 * k2) * t);
    for (int c = 0; c < 2; ++c) {
      if (before[c] == Complex(0.0)) continue;
      worst = std::max(worst, std::abs(after[c] / before[c] - factor) / factor);
    }
  }
  o.require(worst <= 1e-13, fmt::format("per-mode decay relative error {:.3g} (<= 1e-13)", worst));

  double semi = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto u = leray_project(random_vector(g, gen));
    const double a = 0.01 * uniform01(gen), b = 0.01 * uniform01(gen);
    semi = std::max(semi, max_diff(heat_evolve(heat_evolve(u, a), b), heat_evolve(u, a + b)) /
                              u.coefficients().max_abs_coefficient());
  }
  o.require(semi <= 1e-14, fmt::format("semigroup composition {:.3g} (<= 1e-14)", semi));
  return o;
}

// 3
Outcome spectral_algebra(const Context&) {
  Outcome o;
  const auto g = make_grid(32);
  std::mt19937_64 gen(7);
  double idem = 0.0, grad = 0.0, div = 0.0, parseval = 0.0, interp = -INFINITY;
  for (int f = 0; f < 50; ++f) {
    const SpectralVector v = random_vector(g, gen);
    const auto p = leray_project(v);
    const double scale = p.coefficients().max_abs_coefficient();
    idem = std::max(idem, max_diff(leray_project(p.coefficients()), p) / scale);

    // i k phi_hat
    SpectralVector gv(g);
    for (int k1 = g.min_wavenumber() + 1; k1 <= g.max_wavenumber(); ++k1) {
      for (int k2 = 0; k2 <= g.max_wavenumber(); ++k2) {
        if (k2 == 0 && k1 <= 0) continue;
        const Complex phi(2.0 * uniform01(gen) - 1.0, 2.0 * uniform01(gen) - 1.0);
        gv.set_mode(k1, k2, Complex(0.0, k1) * phi, Complex(0.0, k2) * phi);
      }
    }
    grad = std::max(grad, leray_project(gv).coefficients().max_abs_coefficient() / gv.max_abs_coefficient());

    div = std::max(div, max_divergence(p) / (scale * g.max_wavenumber()));

    const double lattice = 2.0 * kPi * transform_to_physical(p).lattice_rms();
    const double spectral = sobolev_norm(p, 0.0);
    parseval = std::max(parseval, std::abs(lattice - spectral) / spectral);

    const double lhs = std::pow(sobolev_norm(p, 1.25), 2);
    const double rhs = sobolev_norm(p, 1.5) * sobolev_norm(p, 1.0);
    interp = std::max(interp, (lhs - rhs) / rhs);
  }
  o.require(idem <= 1e-10, fmt::format("Leray idempotence {:.3g}", idem));
  o.require(grad <= 1e-10, fmt::format("gradient annihilation {:.3g}", grad));
  o.require(div <= 1e-10, fmt::format("divergence {:.3g}", div));
  o.require(parseval <= 1e-10, fmt::format("Parseval {:.3g}", parseval));
  o.require(interp <= 1e-10, fmt::format("interpolation excess {:.3g}", interp));
  return o;
}

// 4
Outcome loglip(const Context& ctx) {
  Outcome o;
  const auto [r, secs] = run_timed(load(ctx, "loglip_audit", "loglip-audit"));
  require_assertion(o, r, "field spread below 2x");
  require_assertion(o, r, "resolution spread below 2x");
  o.require(secs < 300.0, fmt::format("runtime {:.1f} s (< 300)", secs));
  return o;
}

ExperimentResult bounds_result(const Context& ctx) {
  static std::optional<ExperimentResult> cached;
  if (!cached) cached = run_experiment(load(ctx, "bounds_audit", "bounds-audit"));
  return *cached;
}

// 5
Outcome bounds(const Context& ctx) {
  Outcome o;
  const auto r = bounds_result(ctx);
  require_matching(o, r, [](const std::string& n) {
    return n.ends_with("refinement change") || n.ends_with("attained after t_min");
  });
  return o;
}

// 6
Outcome integrability(const Context& ctx) {
  Outcome o;
  const auto r = bounds_result(ctx);
  const std::string p = fmt::format("{}", 1.0 + beta_max(0.5));
  require_assertion(o, r, "Cauchy base:D^1.5:p=1");
  require_assertion(o, r, "Cauchy base:D^1.5:p=" + p);
  const double e = 1.0 + beta_max(0.5);
  const double exact = std::sqrt(5.0) - 1.0;
  o.require(std::abs(e - exact) <= 2.0 * std::numeric_limits<double>::epsilon() * exact,
            fmt::format("1 + beta_max(1/2) = {:.17g} vs sqrt5 - 1 = {:.17g}", e, exact));
  return o;
}

// 7
Outcome quadrature(const Context&) {
  Outcome o;
  NormSeries s{"f", {}, {}};
  const int per_decade = 20;
  for (int i = 0; i <= 4 * per_decade; ++i) {
    const double t = std::pow(10.0, -4.0 + static_cast<double>(i) / per_decade);
    s.t.push_back(t);
    s.value.push_back(1.0 / std::sqrt(t));
  }
  const double exact = 2.0 * (1.0 - 1e-2);
  const double got = time_integral(s, 1.0, 1e-4);
  o.require(std::abs(got - exact) <= 0.02 * exact, fmt::format("int 1/sqrt(t) = {:.6g} vs {:.6g}", got, exact));

  // p = 2 turns the series into 1/t
  double prev = time_integral(s, 2.0, 1e-1);
  double min_growth = INFINITY;
  for (double lo : {1e-2, 1e-3, 1e-4}) {
    const double v = time_integral(s, 2.0, lo);
    min_growth = std::min(min_growth, v - prev);
    prev = v;
  }
  o.require(min_growth >= std::log(10.0),
            fmt::format("int 1/t growth per decade {:.6g} (>= ln 10 = {:.6g})", min_growth, std::log(10.0)));
  return o;
}

ExperimentResult heat_result(const Context& ctx) {
  static std::optional<ExperimentResult> cached;
  if (!cached) cached = run_experiment(load(ctx, "heat_h2minus", "heat-h2minus"));
  return *cached;
}

// 8
Outcome gt_maximizer(const Context& ctx) {
  Outcome o;
  const auto r = heat_result(ctx);
  require_assertion(o, r, "gt r=0 maximizer within one cell");
  require_assertion(o, r, "gt r=2 x*t spread");
  return o;
}

// 9
Outcome heat_h2minus(const Context& ctx) {
  Outcome o;
  const auto r = heat_result(ctx);
  require_assertion(o, r, "r=3 Cauchy");
  require_assertion(o, r, "r=1 growth");
  return o;
}

// 10
Outcome counterexamples(const Context& ctx) {
  Outcome o;
  const auto r = run_experiment(load(ctx, "counterexamples", "counterexamples"));
  o.require(r.status == kExitPass, fmt::format("status {}", r.status));
  for (const auto& a : r.assertions) {
    o.require(a.passed, fmt::format("{} = {:.3g} ({} {:g})", a.name, a.value, a.op, a.threshold));
  }
  return o;
}

// 11
Outcome trajectories(const Context& ctx) {
  Outcome o;
  const auto [r, secs] = run_timed(load(ctx, "trajectory_uniqueness", "trajectory-uniqueness"));
  for (const auto& a : r.assertions) {
    o.require(a.passed, fmt::format("{} = {:.6g} ({} {:g})", a.name, a.value, a.op, a.threshold));
  }
  o.require(!r.assertions.empty(), fmt::format("status {}", r.status));
  o.require(secs < 600.0, fmt::format("runtime {:.1f} s (< 600)", secs));
  return o;
}

// 12
Outcome determinism(const Context& ctx) {
  Outcome o;
  auto rough = parse_config_text(
      "kind = rough-run\nN = 64\nnu = 0.05\nT = 0.1\ndt = 1e-3\ninitial = rough(0.05, 3)\nthreads = 2\n");
  auto lip = parse_config_text(
      "kind = loglip-audit\nN = 32\ninitial = rough(0.05, 1)\nfields = 4\npairs = 500\nthreads = 2\n");
  auto traj = parse_config_text(
      "kind = trajectory-uniqueness\nN = 32\nnu = 0.05\nT = 0.1\ndt = 1e-3\ninitial = rough(0.3, 1)\n"
      "snapshot_interval = 0.01\nepsilons = 1e-3, 1e-5\nsubsteps = 1, 2, 4\n");
  for (auto* c : {&rough, &lip, &traj}) {
    const std::string stem = to_string(c->kind);
    std::vector<fs::path> dirs;
    for (const char* rep : {"a", "b"}) {
      c->output = (ctx.out / "determinism" / (stem + "-" + rep)).string();
      fs::remove_all(c->output);
      run_experiment(*c);
      dirs.emplace_back(c->output);
    }
    int files = 0, identical = 0;
    for (const auto& e : fs::directory_iterator(dirs[0])) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      identical += slurp(e.path()) == slurp(dirs[1] / e.path().filename()) ? 1 : 0;
    }
    o.require(files > 0 && identical == files, fmt::format("{}: {}/{} CSVs byte-identical", stem, identical, files));
  }
  return o;
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*fn)(const Context&);
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nstraj acceptance suite"};
  std::string only;
  std::string out = (fs::temp_directory_path() / "nstraj-acceptance").string();
  std::string configs = NSTRAJ_CONFIG_DIR;
  app.add_option("--only", only, "comma-separated criterion numbers");
  app.add_option("--out", out, "artifact directory");
  app.add_option("--configs", configs, "directory holding the experiment configs");
  CLI11_PARSE(app, argc, argv);

  std::set<int> pick;
  for (const auto& tok : CLI::detail::split(only, ',')) {
    if (!tok.empty()) pick.insert(std::stoi(tok));
  }

  const std::vector<Criterion> all{
      {1, "Taylor-Green oracle", taylor_green_oracle},
      {2, "heat-kernel exactness", heat_kernel},
      {3, "spectral algebra", spectral_algebra},
      {4, "log-Lipschitz audit", loglip},
      {5, "weighted sup bounds", bounds},
      {6, "time integrability", integrability},
      {7, "quadrature control", quadrature},
      {8, "g_t maximizer", gt_maximizer},
      {9, "heat H^{2-}_r study", heat_h2minus},
      {10, "counterexamples", counterexamples},
      {11, "trajectory uniqueness", trajectories},
      {12, "determinism", determinism},
  };

  const Context ctx{out, configs};
  fs::create_directories(ctx.out);
  int failed = 0;
  for (const auto& c : all) {
    if (!pick.empty() && !pick.contains(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn(ctx);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << fmt::format("{} {:>2} {} ({:.1f} s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds_since(t0));
    for (const auto& n : o.notes) std::cout << "        " << n << '\n';
    std::cout.flush();
    failed += o.pass ? 0 : 1;
  }
  std::cout << fmt::format("{} criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
