#include "nstraj/diagnostics.hpp"

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nstraj/random.hpp"

namespace nstraj {

void NormSeries::validate() const {
  if (t.size() != value.size()) throw std::invalid_argument(name + ": time/value length mismatch");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0 && !(t[i] > t[i - 1])) throw std::invalid_argument(name + ": times must strictly increase");
    if (!std::isfinite(value[i]) || value[i] < 0.0) {
      throw std::invalid_argument(name + ": values must be finite and nonnegative");
    }
  }
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds:
      return "holds-at-desk-scale";
    case Verdict::Violated:
      return "violated";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

std::string norm_name(double s) { return fmt::format("D^{}", s); }

NormSeries record_norm(const RunRecord& run, double exponent) {
  if (run.snapshots.size() < 2) throw std::invalid_argument("run needs at least two snapshots");
  NormSeries out{norm_name(exponent), {}, {}};
  for (std::size_t i = 1; i < run.snapshots.size(); ++i) {
    out.t.push_back(run.snapshots[i].time);
    out.value.push_back(sobolev_norm(run.snapshots[i].state, exponent));
  }
  return out;
}

std::vector<NormSeries> record_norms(const RunRecord& run, std::span<const double> exponents) {
  std::vector<NormSeries> out;
  for (double s : exponents) out.push_back(record_norm(run, s));
  return out;
}

double time_integral(const NormSeries& series, double p, double s_lo) {
  if (!(p >= 1.0)) throw std::invalid_argument("integrability exponent must be >= 1");
  if (series.empty()) throw std::out_of_range("empty series");
  const auto& t = series.t;
  const auto& v = series.value;
  const double eps = 1e-12 * std::max(std::abs(t.front()), std::abs(t.back()));
  if (s_lo < t.front() - eps || s_lo > t.back() + eps) {
    throw std::out_of_range(fmt::format("s_lo={} outside sampled window [{}, {}]", s_lo, t.front(), t.back()));
  }
  auto f = [p](double x) { return p == 1.0 ? x : std::pow(x, p); };
  // First sample at or after s_lo (within rounding).
  std::size_t i = 0;
  while (i < t.size() && t[i] < s_lo - eps) ++i;
  double sum = 0.0;
  if (i > 0 && t[i] - s_lo > eps) {
    const double theta = (s_lo - t[i - 1]) / (t[i] - t[i - 1]);
    const double v_lo = (1.0 - theta) * v[i - 1] + theta * v[i];
    sum += 0.5 * (t[i] - s_lo) * (f(v_lo) + f(v[i]));
  }
  for (std::size_t j = i + 1; j < t.size(); ++j) sum += 0.5 * (t[j] - t[j - 1]) * (f(v[j - 1]) + f(v[j]));
  return sum;
}

BoundReport sup_weighted(const NormSeries& series, double w) {
  if (series.empty()) throw std::invalid_argument("sup_weighted needs a nonempty series");
  BoundReport out;
  out.name = fmt::format("t^{} {}", w, series.name);
  std::size_t best = 0;
  double sup = -1.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double x = (w == 0.0 ? 1.0 : std::pow(series.t[i], w)) * series.value[i];
    if (x > sup) {
      sup = x;
      best = i;
    }
  }
  out.constant = sup;
  out.attained_at = series.t[best];
  out.sup_residual = 0.0;
  out.verdict = best > 0 ? Verdict::Holds : Verdict::Inconclusive;
  if (best == 0) out.note = "sup attained at the smallest sampled time";
  return out;
}

BoundReport refinement_verdict(const std::string& name, const BoundReport& base,
                               std::span<const BoundReport> refined, double tolerance) {
  BoundReport out = base;
  out.name = name;
  double worst = 0.0;
  bool at_floor = base.verdict != Verdict::Holds;
  for (const auto& r : refined) {
    worst = std::max(worst, std::abs(r.constant - base.constant) / base.constant);
    at_floor = at_floor || r.verdict != Verdict::Holds;
  }
  out.sup_residual = worst - tolerance;
  if (at_floor) {
    out.verdict = Verdict::Inconclusive;
    out.note = "sup attained at the smallest sampled time in at least one run";
  } else if (worst < tolerance) {
    out.verdict = Verdict::Holds;
    out.note = fmt::format("max relative change under refinement {:.4f}", worst);
  } else {
    out.verdict = Verdict::Violated;
    out.note = fmt::format("relative change under refinement {:.4f} exceeds {}", worst, tolerance);
  }
  return out;
}

double beta_max(double gamma) {
  if (!(gamma >= 0.5 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [1/2, 1)");
  return std::pow(std::sqrt(5.0) - 2.0, std::log(1.0 / (1.0 - gamma)) / std::numbers::ln2);
}

BoundReport loglip_modulus(const SpectralVector& u, int pairs, std::uint64_t seed, double min_separation) {
  if (pairs < 1) throw std::invalid_argument("pair count must be at least 1");
  const double max_separation = std::exp(-0.5);
  if (!(min_separation > 0.0 && min_separation < max_separation)) {
    throw std::invalid_argument("min separation must lie in (0, e^{-1/2})");
  }
  BoundReport out;
  out.name = "loglip";
  out.resolution = u.grid().resolution();
  const double weight = loglip_weight(u);
  if (weight == 0.0) {
    out.verdict = Verdict::Holds;
    out.note = "zero field";
    return out;
  }
  const PointEvaluator eval(u);
  std::mt19937_64 gen(seed);
  const double log_lo = std::log(min_separation);
  const double log_hi = std::log(max_separation);
  std::vector<Vec2> xs;
  std::vector<Vec2> ys;
  std::vector<double> seps;
  xs.reserve(static_cast<std::size_t>(pairs));
  ys.reserve(static_cast<std::size_t>(pairs));
  for (int i = 0; i < pairs; ++i) {
    Vec2 x;
    Vec2 d;
    do {
      x = {kTwoPi * uniform01(gen), kTwoPi * uniform01(gen)};
      const double angle = kTwoPi * uniform01(gen);
      const double sep = std::exp(log_lo + (log_hi - log_lo) * uniform01(gen));
      d = {sep * std::cos(angle), sep * std::sin(angle)};
    } while (!(d.norm() > 0.0));
    xs.push_back(x + d);
    ys.push_back(x);
    seps.push_back(d.norm());
  }
  const auto diffs = eval.differences(xs, ys);
  double best = 0.0;
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    const double sep = seps[i];
    const double ratio = diffs[i].norm() / (sep * std::sqrt(-std::log(sep)) * weight);
    if (ratio > best) {
      best = ratio;
      out.attained_at = sep;
    }
  }
  out.constant = best;
  out.verdict = std::isfinite(best) ? Verdict::Holds : Verdict::Violated;
  return out;
}

double gt_value(double r, double t, double x) {
  return std::exp(2.0 * std::log1p(x) - 2.0 * x * t - r * std::log(std::log(std::numbers::e + x)));
}

GtMaximum gt_profile(double r, double t) {
  if (!(r >= 0.0)) throw std::invalid_argument("r must be nonnegative");
  if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
  auto log_g = [r, t](double x) { return 2.0 * std::log1p(x) - 2.0 * x * t - r * std::log(std::log(std::numbers::e + x)); };
  constexpr int kPoints = 4001;
  const double y_max = std::log1p(1e3 / t);
  std::vector<double> xs(kPoints);
  for (int i = 0; i < kPoints; ++i) xs[static_cast<std::size_t>(i)] = std::expm1(y_max * i / (kPoints - 1));
  std::size_t best = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (log_g(xs[i]) > log_g(xs[best])) best = i;
  }
  const double lo = xs[best == 0 ? 0 : best - 1];
  const double hi = xs[std::min(best + 1, xs.size() - 1)];
  const auto found = boost::math::tools::brent_find_minima([&](double x) { return -log_g(x); }, lo, hi,
                                                          std::numeric_limits<double>::digits / 2);
  double x_star = found.first;
  if (log_g(xs[best]) > log_g(x_star)) x_star = xs[best];
  return {x_star, std::exp(log_g(x_star)), 0.5 * (hi - lo)};
}

double H2MinusStudy::integral(double r, double s_lo) const {
  for (const auto& row : rows) {
    if (row.r == r && row.s_lo == s_lo) return row.integral;
  }
  throw std::out_of_range(fmt::format("no h2minus entry for r={} s_lo={}", r, s_lo));
}

double H2MinusStudy::growth(double r) const {
  double largest_s = -1.0;
  double smallest_s = std::numeric_limits<double>::infinity();
  for (const auto& row : rows) {
    if (row.r != r) continue;
    largest_s = std::max(largest_s, row.s_lo);
    smallest_s = std::min(smallest_s, row.s_lo);
  }
  return integral(r, smallest_s) / integral(r, largest_s) - 1.0;
}

double H2MinusStudy::max_step_change(double r) const {
  std::vector<H2MinusRow> sel;
  for (const auto& row : rows) {
    if (row.r == r) sel.push_back(row);
  }
  std::sort(sel.begin(), sel.end(), [](const auto& a, const auto& b) { return a.s_lo > b.s_lo; });
  double worst = 0.0;
  for (std::size_t i = 1; i < sel.size(); ++i) {
    worst = std::max(worst, std::abs(sel[i].integral - sel[i - 1].integral) / sel[i - 1].integral);
  }
  return worst;
}

H2MinusStudy heat_h2minus_study(const SpectralVelocity& v0, std::span<const double> r_list, double final_time,
                                std::span<const double> s_lo_list, int per_decade) {
  if (s_lo_list.empty() || r_list.empty()) throw std::invalid_argument("empty r or s_lo list");
  const double s_min = *std::min_element(s_lo_list.begin(), s_lo_list.end());
  if (!(s_min > 0.0 && s_min < final_time)) throw std::invalid_argument("s_lo must lie in (0, T)");
  std::vector<double> times;
  const int decades_steps = static_cast<int>(std::ceil(std::log10(final_time / s_min) * per_decade));
  for (int j = 0; j <= decades_steps; ++j) {
    times.push_back(std::min(final_time, s_min * std::pow(10.0, static_cast<double>(j) / per_decade)));
  }
  for (double s : s_lo_list) times.push_back(s);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [&](double a, double b) { return std::abs(a - b) <= 1e-12 * final_time; }),
              times.end());

  std::vector<NormSeries> series;
  for (double r : r_list) series.push_back({fmt::format("H2-_{}", r), {}, {}});
  for (double t : times) {
    const auto v = heat_evolve(v0, t);
    for (std::size_t i = 0; i < r_list.size(); ++i) {
      series[i].t.push_back(t);
      series[i].value.push_back(h2minus_norm(v, r_list[i]));
    }
  }
  H2MinusStudy out;
  for (std::size_t i = 0; i < r_list.size(); ++i) {
    for (double s : s_lo_list) out.rows.push_back({r_list[i], s, time_integral(series[i], 1.0, s)});
  }
  return out;
}

BoundReport au_l1_check(const RunRecord& run, std::span<const double> s_lo_list, double tolerance) {
  if (s_lo_list.size() < 2) throw std::invalid_argument("need at least two s_lo values");
  const auto series = record_norm(run, 2.0);
  std::vector<double> integrals;
  for (double s : s_lo_list) integrals.push_back(time_integral(series, 1.0, s));
  BoundReport out;
  out.name = "int ||Au|| dt";
  out.resolution = run.grid().resolution();
  out.dt = run.config.dt;
  out.constant = integrals.back();
  out.attained_at = s_lo_list.back();
  const double change = std::abs(integrals.back() - integrals[integrals.size() - 2]) / integrals[integrals.size() - 2];
  out.sup_residual = change - tolerance;
  out.verdict = change < tolerance ? Verdict::Holds : Verdict::Inconclusive;
  out.note = fmt::format("relative change over last s_lo refinement {:.4f}", change);
  return out;
}

}  // namespace nstraj
