#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nstraj/counterexample_lab.hpp"

using namespace nstraj;

namespace {

const ScalarOdeBranch& find(const std::vector<ScalarOdeBranch>& b, const std::string& prefix) {
  for (const auto& x : b) {
    if (x.label.starts_with(prefix)) return x;
  }
  throw std::runtime_error("missing branch " + prefix);
}

}  // namespace

TEST_CASE("log branch against the closed form") {
  const double te = std::exp(-2.0);
  const std::vector<double> samples{1e-5, 1e-3, te, 0.3};
  const auto branches = nonunique_branches(1e-6, 0.3, 0.0, samples);
  CHECK(branches.size() == 2);
  const auto& log_branch = find(branches, "log-branch");
  // the start is the first sample
  REQUIRE(log_branch.t.size() == samples.size() + 1);
  CHECK(log_branch.t[0] == 1e-6);
  CHECK(log_branch.t[3] == te);
  CHECK(std::abs(log_branch.x[3] - 0.5) < 0.005);
  CHECK(log_branch.closed_form[3] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(log_branch.max_relative_error() < 1e-8);
  CHECK(log_branch.max_residual() <= 1e-10);
  CHECK_FALSE(log_branch.blowup_time.has_value());
}

TEST_CASE("zero branch stays at zero") {
  const auto branches = nonunique_branches(1e-6, 0.3, 0.0);
  const auto& zero = find(branches, "zero");
  CHECK(!zero.t.empty());
  for (double x : zero.x) CHECK(x == 0.0);
  CHECK(zero.t.back() == 0.3);
  for (std::size_t i = 1; i < zero.t.size(); ++i) CHECK(zero.t[i] > zero.t[i - 1]);
}

TEST_CASE("branches separate") {
  const auto branches = nonunique_branches(1e-6, 0.3, 0.0);
  const auto& zero = find(branches, "zero");
  const auto& log_branch = find(branches, "log-branch");
  double prev = 0.0;
  for (std::size_t i = 0; i < zero.t.size(); ++i) {
    const double gap = std::abs(log_branch.x[i] - zero.x[i]);
    CHECK(gap > prev);
    prev = gap;
  }
}

TEST_CASE("perturbed branch") {
  SUBCASE("blow-up inside the window is reported") {
    const double delta = 0.05, t0 = 1e-10;
    const double tb = t0 * std::exp(1.0 / delta);
    REQUIRE(tb < 0.3);
    const auto branches = nonunique_branches(t0, 0.3, delta);
    const auto& p = find(branches, "perturbed");
    REQUIRE(p.blowup_time.has_value());
    CHECK(*p.blowup_time == doctest::Approx(tb).epsilon(1e-12));
    CHECK(p.t.back() < tb);
  }
  SUBCASE("no blow-up: follows 1/(1/delta + log(t0/t))") {
    const auto branches = nonunique_branches(1e-6, 0.3, 0.05);
    const auto& p = find(branches, "perturbed");
    CHECK_FALSE(p.blowup_time.has_value());
    CHECK(p.max_relative_error() < 1e-8);
    CHECK(p.max_residual() <= 1e-10);
    CHECK(p.t.back() == 0.3);
    CHECK(p.label.find(',') == std::string::npos);
  }
}

TEST_CASE("branch preconditions") {
  CHECK_THROWS_AS(nonunique_branches(0.0, 0.3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(nonunique_branches(0.5, 0.3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(nonunique_branches(1e-6, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(nonunique_branches(1e-6, 0.3, -0.1), std::invalid_argument);
}

TEST_CASE("log branch ODE identity") {
  for (double t = 1e-6; t <= 0.3; t *= 1.7) CHECK(log_branch_ode_residual(t) <= 1e-10);
  CHECK_THROWS_AS(log_branch_ode_residual(1.0), std::invalid_argument);
}

TEST_CASE("lorentz norm constant") {
  const double pi = std::numbers::pi;
  CHECK(std::abs(lorentz_norm_constant(4.0 * pi * pi) - 4.0 * pi) <= 1e-12 * 4.0 * pi);
  CHECK(lorentz_norm_constant(1.0) == 2.0);
  CHECK(lorentz_norm_constant(1e-300) < 1e-149);
  for (double a : {0.5, 3.0, 40.0}) {
    CHECK(lorentz_norm_constant(4.0 * a) == doctest::Approx(2.0 * lorentz_norm_constant(a)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(lorentz_norm_constant(0.0), std::invalid_argument);
}

TEST_CASE("weak L1 demo") {
  const std::vector<double> lambdas{0.5, 1.0, 10.0, 1e3};
  const std::vector<double> s{1e-2, 1e-4, 1e-6};
  const auto d = weak_l1_demo(1.0, lambdas, s);
  REQUIRE(d.weak.size() == 4);
  CHECK(d.weak[0].measure == 1.0);
  CHECK(d.weak[1].measure == 1.0);
  CHECK(d.weak[2].measure == doctest::Approx(0.1));
  CHECK(d.weak[2].certificate == doctest::Approx(0.1));
  for (const auto& row : d.weak) CHECK(row.measure <= row.certificate * (1.0 + 1e-15));
  REQUIRE(d.strong.size() == 3);
  CHECK(d.strong[2].integral == doctest::Approx(6.0 * std::log(10.0)));
  CHECK(d.strong[2].integral == doctest::Approx(13.82).epsilon(1e-3));
  CHECK(d.strong[1].integral > d.strong[0].integral);
  CHECK_THROWS_AS(weak_l1_demo(1.0, lambdas, std::vector<double>{2.0}), std::invalid_argument);
  CHECK_THROWS_AS(weak_l1_demo(-1.0, lambdas, s), std::invalid_argument);
}
