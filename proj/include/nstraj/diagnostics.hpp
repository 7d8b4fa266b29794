// Time-series norm functionals of solver runs and empirical audits of the
// a-priori bounds they are expected to satisfy.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nstraj/nse_solver.hpp"
#include "nstraj/spectral_field.hpp"

namespace nstraj {

/// Time-stamped samples of one norm functional, e.g. ||D^{3/2} u(t)||.
struct NormSeries {
  std::string name;
  std::vector<double> t;
  std::vector<double> value;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  /// Throws std::invalid_argument unless times strictly increase and values
  /// are finite and nonnegative.
  void validate() const;
};

enum class Verdict { Holds, Violated, Inconclusive };
std::string to_string(Verdict v);

/// Outcome of one empirical bound audit. `constant` is the fitted constant
/// (for a sup fit, the sup itself); `sup_residual` is the largest excess of
/// the audited quantity over what the bound allows, so a holding bound has
/// sup_residual <= 0.
struct BoundReport {
  std::string name;
  double constant = 0.0;
  double attained_at = 0.0;
  double sup_residual = 0.0;
  int resolution = 0;
  double dt = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::string note;
};

std::string norm_name(double s);

/// ||D^s u(t)|| for each requested s at every post-initial snapshot time.
/// Throws std::invalid_argument if the run has fewer than two snapshots.
std::vector<NormSeries> record_norms(const RunRecord& run, std::span<const double> exponents);
NormSeries record_norm(const RunRecord& run, double exponent);

/// Trapezoid approximation of int_{s_lo}^{T} value(t)^p dt over the samples,
/// with the integrand interpolated linearly when s_lo falls between samples.
/// Throws std::out_of_range if s_lo lies outside the sampled window and
/// std::invalid_argument if p < 1.
double time_integral(const NormSeries& series, double p, double s_lo);

/// sup_t t^w value(t). Holds when the sup is attained after the smallest
/// sampled time (a turnover has been resolved); inconclusive otherwise.
BoundReport sup_weighted(const NormSeries& series, double w);

/// Desk-scale boundedness: the base sup must not sit at the smallest sampled
/// time and each refined run (N doubled, dt halved) must reproduce it within
/// `tolerance` relative change.
BoundReport refinement_verdict(const std::string& name, const BoundReport& base,
                               std::span<const BoundReport> refined, double tolerance = 0.25);

/// Admissible beta = (sqrt5 - 2)^(ln(1/(1-gamma)) / ln 2) for gamma in [1/2, 1);
/// the Lebesgue exponent of ||D^{1+gamma} u|| in time is 1 + beta.
double beta_max(double gamma);

/// Empirical log-Lipschitz constant: sup over random pairs with separation
/// log-uniform in [min_separation, e^{-1/2}) of
///   |u(X) - u(Y)| / (|X-Y| (-log|X-Y|)^{1/2} W(u)).
BoundReport loglip_modulus(const SpectralVector& u, int pairs, std::uint64_t seed,
                           double min_separation = 1e-8);

struct GtMaximum {
  double x_star;
  double value;
  double cell_width;  // local spacing of the coarse scan around x_star
};

/// g_t(x) = (1+x)^2 exp(-2xt) / log(e+x)^r
double gt_value(double r, double t, double x);

/// Maximizes g_t over x in [0, 1e3/t]: a scan uniform in log(1+x) followed by
/// Brent refinement inside the best bracket.
GtMaximum gt_profile(double r, double t);

struct H2MinusRow {
  double r;
  double s_lo;
  double integral;
};

struct H2MinusStudy {
  std::vector<H2MinusRow> rows;

  double integral(double r, double s_lo) const;
  /// I(r, smallest s_lo) / I(r, largest s_lo) - 1
  double growth(double r) const;
  /// Largest relative change between consecutive s_lo entries.
  double max_step_change(double r) const;
};

/// Evolves v0 under the heat semigroup on a geometric time grid and tabulates
/// int_{s_lo}^{T} ||v(t)||_{H^{2-}_r} dt for every (r, s_lo).
H2MinusStudy heat_h2minus_study(const SpectralVelocity& v0, std::span<const double> r_list, double final_time,
                                std::span<const double> s_lo_list, int per_decade = 40);

/// int_{s_lo}^{T} ||Au|| dt for each s_lo in the (decreasing) list; holds when
/// the last refinement changes the integral by less than `tolerance`.
BoundReport au_l1_check(const RunRecord& run, std::span<const double> s_lo_list, double tolerance = 0.10);

}  // namespace nstraj
