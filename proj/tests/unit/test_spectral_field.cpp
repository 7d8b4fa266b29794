#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "nstraj/field_io.hpp"
#include "nstraj/spectral_field.hpp"
#include "support.hpp"

using namespace nstraj;
using namespace nstraj::testing;

TEST_CASE("grid construction") {
  const auto g = make_grid(8);
  CHECK(g.min_wavenumber() == -4);
  CHECK(g.max_wavenumber() == 3);
  std::vector<int> ks;
  for (int r = 0; r < g.rows(); ++r) ks.push_back(g.wavenumber_of_row(r));
  CHECK(ks == std::vector<int>{0, 1, 2, 3, -4, -3, -2, -1});
  CHECK(make_grid(256).mode_count() == 65536u);
  CHECK_THROWS_WITH_AS(make_grid(7), "resolution must be even", std::invalid_argument);
  CHECK_THROWS_AS(make_grid(6), std::invalid_argument);
}

TEST_CASE("single mode inverse transform") {
  const auto g = make_grid(16);
  const double a = 0.7;
  SpectralVector v(g);
  v.set_mode(1, 0, 0.0, a);
  const auto p = transform_to_physical(v);
  for (int i1 = 0; i1 < 16; ++i1) {
    for (int i2 = 0; i2 < 16; ++i2) {
      const Vec2 x = p.position(i1, i2);
      CHECK(std::abs(p.value(i1, i2).x1) < 1e-14);
      CHECK(std::abs(p.value(i1, i2).x2 - 2.0 * a * std::cos(x.x1)) < 1e-14);
    }
  }
}

TEST_CASE("round trip and zero field") {
  const auto g = make_grid(32);
  const auto u = random_velocity(g, 3);
  const auto back = transform_to_spectral(transform_to_physical(u));
  CHECK(max_coefficient_difference(back, u) < 1e-12 * u.coefficients().max_abs_coefficient());

  const auto z = SpectralVelocity::zero(g);
  CHECK(transform_to_physical(z).max_abs() == 0.0);
  CHECK(transform_to_spectral(transform_to_physical(z)).max_abs_coefficient() == 0.0);
}

TEST_CASE("hermitian symmetry makes the field real off the lattice") {
  const auto g = make_grid(16);
  const auto u = random_velocity(g, 5);
  for (int k1 = -7; k1 <= 7; ++k1) {
    for (int k2 = -7; k2 <= 7; ++k2) {
      const auto a = u.coefficients().mode(k1, k2);
      const auto b = u.coefficients().mode(-k1, -k2);
      CHECK(a[0] == std::conj(b[0]));
      CHECK(a[1] == std::conj(b[1]));
    }
  }
  CHECK(u.coefficients().mode(-8, 3)[0] == Complex(0.0));
  CHECK_THROWS_AS(SpectralVector(g).set_mode(8, 0, 1.0, 0.0), std::out_of_range);
}

TEST_CASE("leray projection") {
  const auto g = make_grid(32);
  SUBCASE("gradient of sin x1 sin x2 is annihilated") {
    const auto grad = from_function(g, [](double x1, double x2) {
      return Vec2{std::cos(x1) * std::sin(x2), std::sin(x1) * std::cos(x2)};
    });
    CHECK(leray_project(grad).coefficients().max_abs_coefficient() < 1e-15);
  }
  SUBCASE("(sin x1, 0) is a gradient") {
    const auto v = from_function(g, [](double x1, double) { return Vec2{std::sin(x1), 0.0}; });
    CHECK(leray_project(v).coefficients().max_abs_coefficient() < 1e-15);
  }
  SUBCASE("(sin x2, 0) is a fixed point") {
    const auto u = shear(g);
    CHECK(max_coefficient_difference(leray_project(u.coefficients()), u) == 0.0);
  }
  SUBCASE("idempotent, divergence-free, zero mean") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      SpectralVector v = random_vector(g, seed);
      v.set_mode(0, 0, 0.3, -0.2);
      const auto p = leray_project(v);
      CHECK(max_coefficient_difference(leray_project(p.coefficients()), p) <= 1e-15);
      CHECK(max_divergence(p) < 1e-13);
      CHECK(p.coefficients().mode(0, 0)[0] == Complex(0.0));
    }
  }
}

TEST_CASE("fractional derivative") {
  const auto g = make_grid(32);
  const auto tg = taylor_green(g);
  CHECK(max_coefficient_difference(fractional_derivative(tg, 0.0), tg) == 0.0);

  const auto d = fractional_derivative(tg, 1.5);
  const auto a = tg.coefficients().mode(1, 1);
  const auto b = d.coefficients().mode(1, 1);
  CHECK(std::abs(b[0] - std::pow(2.0, 0.75) * a[0]) < 1e-15);

  const auto s2 = shear(g, 2);
  const auto p = transform_to_physical(fractional_derivative(s2, 2.0));
  const auto q = transform_to_physical(s2);
  for (std::size_t i = 0; i < p.x1.size(); ++i) CHECK(std::abs(p.x1[i] - 4.0 * q.x1[i]) < 1e-13);

  CHECK_THROWS_AS(fractional_derivative(tg, 4.5), std::invalid_argument);
  CHECK_THROWS_AS(fractional_derivative(tg, -0.1), std::invalid_argument);
}

TEST_CASE("leray projection commutes with fractional derivatives") {
  const auto g = make_grid(32);
  const SpectralVector v = random_vector(g, 11);
  for (double s : {0.5, 1.25, 2.0, 3.5}) {
    const auto a = fractional_derivative(leray_project(v), s);
    SpectralVector w = v;
    for (int c = 0; c < 2; ++c) {
      for (int row = 0; row < g.rows(); ++row) {
        for (int col = 0; col < g.columns(); ++col) {
          const int k1 = g.wavenumber_of_row(row);
          w.at(c, row, col) *= std::pow(double(k1 * k1 + col * col), 0.5 * s);
        }
      }
    }
    const auto b = leray_project(w);
    CHECK(max_coefficient_difference(a, b) <= 1e-14 * std::max(1.0, b.coefficients().max_abs_coefficient()));
  }
}

TEST_CASE("sobolev norms") {
  const auto g = make_grid(16);
  const auto tg = taylor_green(g);
  CHECK(sobolev_norm(tg, 0.0) == doctest::Approx(kPi * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(sobolev_norm(tg, 1.5) == doctest::Approx(std::pow(2.0, 0.75) * kPi * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(sobolev_norm(SpectralVelocity::zero(g), 1.0) == 0.0);
  const auto s2 = shear(g, 2);
  CHECK(sobolev_norm(s2, 0.0) == doctest::Approx(kPi * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(sobolev_norm(s2, 1.0) == doctest::Approx(2.0 * kPi * std::sqrt(2.0)).epsilon(1e-14));

  const auto u = random_velocity(make_grid(32), 8);
  double prev = 0.0;
  for (double s : {0.0, 0.5, 1.0, 1.25, 1.5, 2.0, 3.0}) {
    const double n = sobolev_norm(u, s);
    CHECK(n >= prev);
    prev = n;
  }
}

TEST_CASE("parseval on random fields") {
  for (int n : {16, 32, 64}) {
    const auto u = random_velocity(make_grid(n), static_cast<std::uint64_t>(n));
    const double lattice = 2.0 * kPi * transform_to_physical(u).lattice_rms();
    const double spectral = sobolev_norm(u, 0.0);
    CHECK(std::abs(lattice - spectral) <= 1e-10 * spectral);
  }
}

TEST_CASE("interpolation inequality") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto u = random_velocity(make_grid(32), seed);
    const double lhs = std::pow(sobolev_norm(u, 1.25), 2);
    const double rhs = sobolev_norm(u, 1.5) * sobolev_norm(u, 1.0);
    CHECK(lhs <= rhs * (1.0 + 1e-12));
  }
}

TEST_CASE("h2minus norm") {
  const auto g = make_grid(16);
  const double a = 0.4;
  SpectralVector v(g);
  v.set_mode(1, 0, 0.0, a);
  for (double r : {0.5, 1.0, 3.0}) {
    const double expected = 2.0 * std::sqrt(2.0) * a / std::pow(std::log(std::numbers::e + 1.0), r / 2.0);
    CHECK(h2minus_norm(v, r) == doctest::Approx(expected).epsilon(1e-14));
  }
  CHECK(h2minus_norm(SpectralVector(g), 2.0) == 0.0);
  CHECK_THROWS_AS(h2minus_norm(v, 0.0), std::invalid_argument);

  const auto u = random_velocity(make_grid(32), 2);
  double prev = std::numeric_limits<double>::infinity();
  for (double r : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double n = h2minus_norm(u, r);
    CHECK(n < prev);
    prev = n;
    // sequence scaling on the left, integral scaling (factor 2pi) on the right
    const double c_r = std::sqrt(2.0) / std::pow(std::log(std::numbers::e + 1.0), r / 2.0);
    CHECK(n <= c_r * (sobolev_norm(u, 2.0) + sobolev_norm(u, 0.0)) / (2.0 * kPi));
  }
}

TEST_CASE("rough field synthesis") {
  const auto a = synthesize_rough_field(make_grid(64), 0.05, 1);
  const auto b = synthesize_rough_field(make_grid(64), 0.05, 1);
  CHECK(max_coefficient_difference(a, b) == 0.0);
  CHECK(max_divergence(a) < 1e-15);

  const auto c = synthesize_rough_field(make_grid(128), 0.05, 1);
  CHECK(std::isfinite(sobolev_norm(c, 0.0)));
  CHECK(sobolev_norm(c, 1.0) > 1.5 * sobolev_norm(a, 1.0));
  // the finer field extends the coarser one
  CHECK(c.coefficients().mode(5, -7) == a.coefficients().mode(5, -7));

  // decay 1: L^2 converges with N
  const double l64 = sobolev_norm(synthesize_rough_field(make_grid(64), 1.0, 4), 0.0);
  const double l128 = sobolev_norm(synthesize_rough_field(make_grid(128), 1.0, 4), 0.0);
  const double l256 = sobolev_norm(synthesize_rough_field(make_grid(256), 1.0, 4), 0.0);
  CHECK(std::abs(l256 - l128) < 0.5 * std::abs(l128 - l64));
  CHECK(std::abs(l256 - l128) < 1e-3 * l256);

  CHECK_THROWS_AS(synthesize_rough_field(make_grid(16), 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(synthesize_rough_field(make_grid(16), 1.5, 1), std::invalid_argument);
}

TEST_CASE("pointwise evaluation") {
  const auto g = make_grid(16);
  const Vec2 v = evaluate_velocity(shear(g), Vec2{0.0, kPi / 2});
  CHECK(std::abs(v.x1 - 1.0) < 1e-15);
  CHECK(std::abs(v.x2) < 1e-15);
  CHECK(evaluate_velocity(SpectralVelocity::zero(g), Vec2{1.3, 2.2}) == Vec2{0.0, 0.0});

  const auto u = random_velocity(make_grid(32), 9);
  const auto p = transform_to_physical(u);
  double worst = 0.0;
  for (int i1 = 0; i1 < 32; i1 += 3) {
    for (int i2 = 0; i2 < 32; i2 += 5) {
      worst = std::max(worst, (evaluate_velocity(u, p.position(i1, i2)) - p.value(i1, i2)).norm());
    }
  }
  CHECK(worst < 1e-12);

  // single mode: exact at arbitrary points
  const auto tg = taylor_green(g, 1.0);
  for (const Vec2 x : {Vec2{0.1, 0.2}, Vec2{5.9, 3.3}, Vec2{-1.0, 20.0}}) {
    const Vec2 e = evaluate_velocity(tg, x);
    CHECK(std::abs(e.x1 - std::sin(x.x1) * std::cos(x.x2)) < 1e-15);
    CHECK(std::abs(e.x2 + std::cos(x.x1) * std::sin(x.x2)) < 1e-15);
  }

  // difference form
  const PointEvaluator ev(u);
  const Vec2 x{1.0, 2.0};
  for (double d : {1e-1, 1e-4, 1e-9}) {
    const Vec2 y{1.0 + d, 2.0 - 0.5 * d};
    const Vec2 direct = ev.velocity(x) - ev.velocity(y);
    const Vec2 diff = ev.difference(x, y);
    CHECK((diff - direct).norm() < 1e-12);
  }
  std::vector<Vec2> xs, ys;
  for (int i = 0; i < 7; ++i) {
    xs.push_back({0.3 * i, 1.0 + 0.7 * i});
    ys.push_back({0.3 * i + std::pow(10.0, -i), 1.0 + 0.7 * i - 0.5 * std::pow(10.0, -i)});
  }
  const auto batch = ev.differences(xs, ys);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK((batch[i] - ev.difference(xs[i], ys[i])).norm() < 1e-12);
  const PointEvaluator odd(random_velocity(make_grid(10), 2));
  CHECK((odd.differences(xs, ys)[3] - odd.difference(xs[3], ys[3])).norm() < 1e-13);
  const std::vector<Vec2> pts{{0.1, 0.2}, {3.0, 4.0}};
  const auto many = evaluate_velocity(u, pts);
  CHECK(many[1] == ev.velocity(pts[1]));
}

TEST_CASE("field file round trip") {
  const auto u = synthesize_rough_field(make_grid(16), 0.3, 7);
  std::stringstream ss;
  write_field(ss, u);
  const auto back = read_field(ss);
  CHECK(back.grid() == u.grid());
  CHECK(max_coefficient_difference(back, u) == 0.0);

  std::stringstream bad("# something else\n");
  CHECK_THROWS_AS(read_field(bad), std::runtime_error);
  std::stringstream wrong_version("# nstraj-spectral-field version=9 N=16\nk1,k2,re_u1,im_u1,re_u2,im_u2\n");
  CHECK_THROWS_AS(read_field(wrong_version), std::runtime_error);
}
