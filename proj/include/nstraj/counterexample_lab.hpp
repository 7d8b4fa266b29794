// Explicit scalar examples where an integrable-in-time Lipschitz bound is
// missing and the particle ODE loses uniqueness or the L^1 norm diverges.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nstraj {

/// One branch of Xdot = X^2 / t integrated from t0.
struct ScalarOdeBranch {
  std::string label;  // "zero", "log-branch" or "perturbed(delta;t0)"
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> closed_form;
  // relative step-doubling local error estimate, max over the steps ending
  // in each sample interval
  std::vector<double> residual;
  std::optional<double> blowup_time;  // perturbed branch only, when <= t1

  double max_residual() const;
  /// max |x - closed_form| / max(|closed_form|, tiny) over the samples
  double max_relative_error() const;
};

/// Fixed fraction of the current time used as the step size.
inline constexpr double kBranchStepFraction = 0.01;

/// Integrates the zero branch, the branch started at -1/log t0 (closed form
/// -1/log t) and, when delta > 0, the branch started at delta (closed form
/// 1/(1/delta + log(t0/t)), which blows up at t0 e^{1/delta}). Samples are
/// taken at `sample_times` (sorted into (t0, t1]) or at ten per decade plus
/// t1 when none are given. Requires 0 < t0 < t1 < 1 and delta >= 0; a
/// perturbed branch that reaches its singularity stops there and reports it.
std::vector<ScalarOdeBranch> nonunique_branches(double t0, double t1, double delta,
                                                std::span<const double> sample_times = {});

/// Relative residual |d/dt X - X^2/t| / |X^2/t| of X(t) = -1/log t evaluated
/// in floating point. Requires 0 < t < 1.
double log_branch_ode_residual(double t);

/// int_0^area t^{-1/2} dt = 2 sqrt(area). Requires area > 0.
double lorentz_norm_constant(double area);

struct WeakL1Row {
  double lambda;
  double measure;      // |{t in (0,T] : 1/t > lambda}| = min(T, 1/lambda)
  double certificate;  // C / lambda with C = 1
};

struct L1Row {
  double s;
  double integral;  // int_s^T dt/t = log(T/s)
};

struct WeakL1Demo {
  double final_time;
  std::vector<WeakL1Row> weak;
  std::vector<L1Row> strong;
};

/// a(t) = 1/t on (0, T]: weak-L^1 certificate next to the diverging L^1
/// integral. Requires T > 0, lambdas > 0 and 0 < s < T.
WeakL1Demo weak_l1_demo(double final_time, std::span<const double> lambdas, std::span<const double> s_list);

}  // namespace nstraj
