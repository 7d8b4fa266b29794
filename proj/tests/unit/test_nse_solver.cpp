#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <doctest.h>

#include "nstraj/nse_solver.hpp"
#include "support.hpp"

using namespace nstraj;
using namespace nstraj::testing;

namespace {

double max_error_vs_taylor_green(const SpectralVelocity& u, double decay) {
  const auto p = transform_to_physical(u);
  double err = 0.0;
  for (int i1 = 0; i1 < p.grid.resolution(); ++i1) {
    for (int i2 = 0; i2 < p.grid.resolution(); ++i2) {
      const Vec2 x = p.position(i1, i2);
      const Vec2 e{decay * std::sin(x.x1) * std::cos(x.x2), -decay * std::cos(x.x1) * std::sin(x.x2)};
      err = std::max(err, (p.value(i1, i2) - e).norm());
    }
  }
  return err;
}

double trapezoid_h1_squared(const RunRecord& r) {
  double s = 0.0;
  for (std::size_t i = 1; i < r.log.size(); ++i) {
    const auto& a = r.log[i - 1];
    const auto& b = r.log[i];
    s += 0.5 * (b.t - a.t) * (a.h1 * a.h1 + b.h1 * b.h1);
  }
  return s;
}

}  // namespace

TEST_CASE("nonlinear term") {
  const auto g = make_grid(32);
  CHECK(nonlinear_term(taylor_green(g), DealiasRule::TwoThirds).coefficients().max_abs_coefficient() < 1e-10);
  CHECK(nonlinear_term(SpectralVelocity::zero(g), DealiasRule::TwoThirds).coefficients().max_abs_coefficient() ==
        0.0);
  SpectralVector v(g);
  v.set_mode(1, 0, 0.0, 0.5);
  CHECK(nonlinear_term(leray_project(v), DealiasRule::TwoThirds).coefficients().max_abs_coefficient() < 1e-12);

  const auto u = random_velocity(g, 4, 6);
  for (auto rule : {DealiasRule::TwoThirds, DealiasRule::None}) {
    const auto b = nonlinear_term(u, rule);
    CHECK(max_divergence(b) <= 1e-12 * b.coefficients().max_abs_coefficient());
    CHECK(b.coefficients().mode(0, 0)[0] == Complex(0.0));
  }
  // b(u,u,u) = 0
  const auto b = nonlinear_term(u, DealiasRule::TwoThirds);
  double dot = 0.0;
  for (int c = 0; c < 2; ++c) {
    for (int row = 0; row < g.rows(); ++row) {
      for (int col = 0; col < g.columns(); ++col) {
        dot += g.multiplicity(row, col) * (b.coefficients().at(c, row, col) * std::conj(u.coefficients().at(c, row, col))).real();
      }
    }
  }
  dot *= 4.0 * kPi * kPi;
  CHECK(std::abs(dot) < 1e-10 * sobolev_norm(b, 0.0) * sobolev_norm(u, 0.0));
}

TEST_CASE("single steps") {
  const auto g = make_grid(32);
  SolverConfig cfg;
  cfg.viscosity = 0.1;

  CHECK(step(SpectralVelocity::zero(g), 0.0, 1e-3, cfg).coefficients().max_abs_coefficient() == 0.0);

  const auto tg = taylor_green(g);
  const auto one = step(tg, 0.0, 1e-3, cfg);
  CHECK(max_coefficient_difference(one, tg.combine(std::exp(-2.0 * 0.1 * 1e-3), 0.0, tg)) < 1e-10);

  SolverConfig heat = cfg;
  heat.nonlinear = false;
  const auto s3 = shear(g, 3);
  const auto h = step(s3, 0.0, 0.01, heat);
  const auto a = s3.coefficients().mode(0, 3)[0];
  CHECK(std::abs(h.coefficients().mode(0, 3)[0] - a * std::exp(-0.1 * 9 * 0.01)) < 1e-16);

  const auto u = random_velocity(g, 7);
  CHECK(max_coefficient_difference(step(u, 0.0, 0.02, heat), heat_evolve(u, 0.1 * 0.02)) <= 1e-15);
}

TEST_CASE("steps keep the field solenoidal") {
  const auto g = make_grid(32);
  SolverConfig cfg;
  cfg.viscosity = 0.05;
  auto u = random_velocity(g, 12, 8);
  NavierStokesSolver solver(g, DealiasRule::TwoThirds);
  for (int i = 0; i < 20; ++i) {
    u = solver.step(u, i * 1e-3, 1e-3, cfg);
    CHECK(max_divergence(u) <= 1e-12 * u.coefficients().max_abs_coefficient());
    CHECK(u.coefficients().mode(0, 0)[0] == Complex(0.0));
    CHECK(u.coefficients().mode(0, 0)[1] == Complex(0.0));
  }
}

TEST_CASE("blow-up is detected") {
  const auto g = make_grid(16);
  SpectralVector v(g);
  v.set_mode(1, 2, Complex(std::numeric_limits<double>::quiet_NaN(), 0.0), 0.0);
  SolverConfig cfg;
  CHECK_THROWS_AS(step(SpectralVelocity::assume_solenoidal(v), 0.25, 1e-3, cfg), BlowUpError);
  try {
    step(SpectralVelocity::assume_solenoidal(v), 0.25, 1e-3, cfg);
  } catch (const BlowUpError& e) {
    CHECK(e.time() == doctest::Approx(0.251));
  }
}

TEST_CASE("taylor-green oracle") {
  SolverConfig cfg;
  cfg.viscosity = 0.1;
  cfg.final_time = 1.0;
  cfg.dt = 1e-3;
  const auto rec = run(cfg, taylor_green(make_grid(64)));
  REQUIRE(rec.ok());
  CHECK(rec.snapshots.front().time == 0.0);
  CHECK(rec.snapshots.back().time == 1.0);
  for (std::size_t i = 1; i < rec.snapshots.size(); ++i) CHECK(rec.snapshots[i].time > rec.snapshots[i - 1].time);
  CHECK(max_error_vs_taylor_green(rec.final_state(), std::exp(-0.2)) < 1e-6);
  for (const auto& s : rec.snapshots) CHECK(max_error_vs_taylor_green(s.state, std::exp(-0.2 * s.time)) < 1e-6);
}

TEST_CASE("temporal order") {
  // Taylor-Green has B = 0; a random low-mode field exercises the RK4 part
  const auto r = random_velocity(make_grid(32), 21, 4);
  const auto u0 = r.combine(0.25, 0.0, r);
  SolverConfig cfg;
  cfg.viscosity = 0.05;
  cfg.final_time = 0.5;
  cfg.snapshots.per_decade = 1;
  cfg.snapshots.t_min_fraction = 0.5;
  auto final_at = [&](double dt) {
    SolverConfig c = cfg;
    c.dt = dt;
    return run(c, u0).final_state();
  };
  const auto ref = final_at(0.5 / 800);
  std::vector<double> errs;
  for (int n : {25, 50, 100}) errs.push_back(max_coefficient_difference(final_at(0.5 / n), ref));
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const double order = std::log2(errs[i - 1] / errs[i]);
    INFO("order " << order);
    CHECK(order >= 3.5);
  }
}

TEST_CASE("energy identity") {
  const auto r0 = random_velocity(make_grid(32), 3, 5);
  const auto u0 = r0.combine(0.25, 0.0, r0);
  auto residual = [&](double dt) {
    SolverConfig cfg;
    cfg.viscosity = 0.1;
    cfg.final_time = 0.4;
    cfg.dt = dt;
    const auto r = run(cfg, u0);
    const double e0 = r.log.front().l2, e1 = r.log.back().l2;
    return e1 * e1 - e0 * e0 + 2.0 * cfg.viscosity * trapezoid_h1_squared(r);
  };
  const double r1 = residual(0.01), r2 = residual(0.005), r3 = residual(0.0025);
  CHECK(std::abs(r3) < std::abs(r2));
  CHECK(std::abs(r2) < std::abs(r1));
  // the trapezoid quadrature of the step log limits the trend to second order
  CHECK(std::log2(std::abs(r2 / r3)) >= 1.8);
}

TEST_CASE("rough data: energy decays and dissipation is resolution stable") {
  SolverConfig cfg;
  cfg.viscosity = 0.05;
  cfg.final_time = 0.2;
  cfg.dt = 1e-3;
  auto dissipation = [&](int n) {
    const auto r = run(cfg, synthesize_rough_field(make_grid(n), 0.5, 1));
    REQUIRE(r.ok());
    for (std::size_t i = 1; i < r.log.size(); ++i) CHECK(r.log[i].l2 <= r.log[i - 1].l2 * (1.0 + 1e-12));
    return trapezoid_h1_squared(r);
  };
  const double d64 = dissipation(64), d128 = dissipation(128);
  CHECK(std::isfinite(d128));
  CHECK(std::abs(d128 - d64) / d128 < 0.10);
}

TEST_CASE("run lands on snapshots and calls observers") {
  SolverConfig cfg;
  cfg.final_time = 0.1;
  cfg.dt = 0.003;
  cfg.snapshots.per_decade = 4;
  cfg.snapshots.t_min_fraction = 0.1;
  int calls = 0;
  double last = 0.0;
  bool contiguous = true;
  std::vector<StepObserver> obs{[&](const StepEvent& e) {
    ++calls;
    contiguous = contiguous && e.t0 == last && e.t1 > e.t0;
    last = e.t1;
  }};
  const auto r = run(cfg, taylor_green(make_grid(16)), obs);
  CHECK(contiguous);
  CHECK(last == 0.1);
  CHECK(static_cast<std::size_t>(calls) + 1 == r.log.size());
  const auto times = cfg.snapshots.times(cfg.final_time);
  REQUIRE(r.snapshots.size() == times.size() + 1);
  for (std::size_t i = 0; i < times.size(); ++i) CHECK(r.snapshots[i + 1].time == times[i]);
}

TEST_CASE("snapshot schedule") {
  SnapshotSchedule s;
  s.per_decade = 2;
  s.t_min_fraction = 1e-2;
  const auto t = s.times(1.0);
  REQUIRE(t.size() == 5);
  CHECK(t.front() == doctest::Approx(1e-2));
  CHECK(t[2] == doctest::Approx(0.1));
  CHECK(t.back() == 1.0);
  s.interval = 0.25;
  const auto u = s.times(1.0);
  CHECK(std::find(u.begin(), u.end(), 0.5) != u.end());
  CHECK(std::is_sorted(u.begin(), u.end()));
}

TEST_CASE("stability pre-flight") {
  const auto g = make_grid(32);
  CHECK(stability_bound(SpectralVelocity::zero(g)) == std::numeric_limits<double>::infinity());
  const double bound = stability_bound(taylor_green(g));
  CHECK(bound == doctest::Approx(0.5 * 2.0 * kPi / 32.0));
  SolverConfig cfg;
  cfg.dt = 2.0 * bound;
  CHECK_THROWS_AS(run(cfg, taylor_green(g)), std::invalid_argument);
  cfg.dt = 1e-3;
  cfg.viscosity = 0.0;
  CHECK_THROWS_AS(run(cfg, taylor_green(g)), std::invalid_argument);
}

TEST_CASE("heat semigroup") {
  const auto g = make_grid(32);
  const auto s = shear(g);
  CHECK(max_coefficient_difference(heat_evolve(s, 1.0), s.combine(std::exp(-1.0), 0.0, s)) < 1e-16);
  const auto u = random_velocity(g, 1);
  CHECK(max_coefficient_difference(heat_evolve(u, 0.0), u) == 0.0);
  const auto ab = heat_evolve(heat_evolve(u, 0.013), 0.021);
  CHECK(max_coefficient_difference(ab, heat_evolve(u, 0.034)) <= 1e-14);
  CHECK_THROWS_AS(heat_evolve(u, -1e-9), std::invalid_argument);
}

TEST_CASE("dealias rule parsing") {
  CHECK(parse_dealias_rule("two-thirds") == DealiasRule::TwoThirds);
  CHECK(parse_dealias_rule(to_string(DealiasRule::None)) == DealiasRule::None);
  CHECK_THROWS(parse_dealias_rule("half"));
}
