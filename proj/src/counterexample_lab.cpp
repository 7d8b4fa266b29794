#include "nstraj/counterexample_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace nstraj {

namespace {

double rhs(double t, double x) { return x * x / t; }

double rk4_step(double t, double x, double h) {
  const double k1 = rhs(t, x);
  const double k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1);
  const double k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2);
  const double k4 = rhs(t + h, x + h * k3);
  return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::vector<double> default_samples(double t0, double t1) {
  std::vector<double> out;
  const double decades = std::log10(t1 / t0);
  const int n = static_cast<int>(std::floor(decades * 10.0 + 1e-9));
  for (int j = 1; j <= n; ++j) out.push_back(t0 * std::pow(10.0, j / 10.0));
  if (out.empty() || out.back() < t1) out.push_back(t1);
  return out;
}

ScalarOdeBranch integrate_branch(std::string label, double t0, double x0, std::span<const double> samples,
                                 auto closed) {
  ScalarOdeBranch b;
  b.label = std::move(label);
  b.t.push_back(t0);
  b.x.push_back(x0);
  b.closed_form.push_back(closed(t0));
  b.residual.push_back(0.0);
  double t = t0;
  double x = x0;
  for (double target : samples) {
    double local = 0.0;
    while (t < target) {
      const double h = std::min(kBranchStepFraction * t, target - t);
      const double full = rk4_step(t, x, h);
      const double halves = rk4_step(t + 0.5 * h, rk4_step(t, x, 0.5 * h), 0.5 * h);
      if (!std::isfinite(full) || !std::isfinite(halves)) return b;
      if (halves != 0.0) local = std::max(local, std::abs(full - halves) / std::abs(halves));
      x = full;
      t = (target - t == h) ? target : t + h;
    }
    b.t.push_back(t);
    b.x.push_back(x);
    b.closed_form.push_back(closed(t));
    b.residual.push_back(local);
  }
  return b;
}

}  // namespace

double ScalarOdeBranch::max_residual() const {
  return residual.empty() ? 0.0 : *std::max_element(residual.begin(), residual.end());
}

double ScalarOdeBranch::max_relative_error() const {
  double e = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    e = std::max(e, std::abs(x[i] - closed_form[i]) / std::max(std::abs(closed_form[i]), 1e-300));
  }
  return e;
}

std::vector<ScalarOdeBranch> nonunique_branches(double t0, double t1, double delta,
                                                std::span<const double> sample_times) {
  if (!(t0 > 0.0 && t0 < t1 && t1 < 1.0)) {
    throw std::invalid_argument(fmt::format("nonunique_branches: need 0 < t0 < t1 < 1 (t0={}, t1={})", t0, t1));
  }
  if (!(delta >= 0.0)) throw std::invalid_argument("nonunique_branches: delta must be >= 0");
  std::vector<double> samples;
  for (double s : sample_times) {
    if (s > t0 && s <= t1) samples.push_back(s);
  }
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());
  if (sample_times.empty()) samples = default_samples(t0, t1);

  std::vector<ScalarOdeBranch> out;
  out.push_back(integrate_branch("zero", t0, 0.0, samples, [](double) { return 0.0; }));
  out.push_back(
      integrate_branch("log-branch", t0, -1.0 / std::log(t0), samples, [](double t) { return -1.0 / std::log(t); }));
  if (delta > 0.0) {
    const double c = 1.0 / delta + std::log(t0);
    const double blowup = t0 * std::exp(1.0 / delta);
    std::vector<double> reach;
    for (double s : samples) {
      if (s < blowup) reach.push_back(s);
    }
    auto b = integrate_branch(fmt::format("perturbed({};{})", delta, t0), t0, delta, reach,
                              [c](double t) { return 1.0 / (c - std::log(t)); });
    if (blowup <= t1) b.blowup_time = blowup;
    out.push_back(std::move(b));
  }
  return out;
}

double log_branch_ode_residual(double t) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("log_branch_ode_residual: need 0 < t < 1");
  const double l = std::log(t);
  const double x = -1.0 / l;
  const double derivative = 1.0 / (t * l * l);
  const double field = x * x / t;
  return std::abs(derivative - field) / std::abs(field);
}

double lorentz_norm_constant(double area) {
  if (!(area > 0.0)) throw std::invalid_argument("lorentz_norm_constant: area must be positive");
  return 2.0 * std::sqrt(area);
}

WeakL1Demo weak_l1_demo(double final_time, std::span<const double> lambdas, std::span<const double> s_list) {
  if (!(final_time > 0.0)) throw std::invalid_argument("weak_l1_demo: T must be positive");
  WeakL1Demo d{final_time, {}, {}};
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw std::invalid_argument("weak_l1_demo: lambda must be positive");
    d.weak.push_back({lambda, std::min(final_time, 1.0 / lambda), 1.0 / lambda});
  }
  for (double s : s_list) {
    if (!(s > 0.0 && s < final_time)) throw std::invalid_argument("weak_l1_demo: need 0 < s < T");
    d.strong.push_back({s, std::log(final_time / s)});
  }
  return d;
}

}  // namespace nstraj
