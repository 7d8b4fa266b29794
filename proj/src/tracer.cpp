#include "nstraj/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace nstraj {

namespace {

const double kEtaCeiling = std::exp(-0.5);

std::array<int, 2> winding_of(Vec2 p) {
  return {static_cast<int>(std::floor(p.x1 / kTwoPi)), static_cast<int>(std::floor(p.x2 / kTwoPi))};
}

// Field at fraction theta of the way from u0 to u1.
SpectralVector mix(const SpectralVector& u0, const SpectralVector& u1, double theta) {
  SpectralVector m = u0;
  if (theta != 0.0) {
    m *= 1.0 - theta;
    m.axpy(theta, u1);
  }
  return m;
}

}  // namespace

std::string to_string(Scheme s) { return s == Scheme::Rk4 ? "rk4" : "euler"; }

Scheme parse_scheme(const std::string& text) {
  if (text == "rk4") return Scheme::Rk4;
  if (text == "euler") return Scheme::Euler;
  throw std::invalid_argument("unknown scheme '" + text + "' (expected rk4 or euler)");
}

Vec2 TrajectorySet::unwrapped(std::size_t particle, std::size_t sample) const {
  const Vec2 p = positions.at(particle).at(sample);
  const auto w = winding.at(particle).at(sample);
  return {p.x1 + kTwoPi * w[0], p.x2 + kTwoPi * w[1]};
}

double torus_distance(Vec2 a, Vec2 b) {
  auto axis = [](double d) {
    d = std::fmod(std::abs(d), kTwoPi);
    return std::min(d, kTwoPi - d);
  };
  return std::hypot(axis(a.x1 - b.x1), axis(a.x2 - b.x2));
}

void integrate_interval(std::vector<Vec2>& positions, const SpectralVector& u0, const SpectralVector& u1, double t0,
                        double t1, int substeps, Scheme scheme) {
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  if (positions.empty() || t1 == t0) return;
  const bool frozen = &u0 == &u1;
  const double h = (t1 - t0) / substeps;
  auto stage = [&](int j2) {  // field at half-substep index j2 in [0, 2*substeps]
    return PointEvaluator(mix(u0, u1, static_cast<double>(j2) / (2.0 * substeps)));
  };
  auto rk4 = [&](const PointEvaluator& ea, const PointEvaluator& em, const PointEvaluator& eb) {
    for (auto& x : positions) {
      const Vec2 k1 = ea.velocity(x);
      const Vec2 k2 = em.velocity(x + (0.5 * h) * k1);
      const Vec2 k3 = em.velocity(x + (0.5 * h) * k2);
      const Vec2 k4 = eb.velocity(x + h * k3);
      x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  };

  if (frozen) {
    const PointEvaluator ev(u0);
    for (int j = 0; j < substeps; ++j) {
      if (scheme == Scheme::Euler) {
        for (auto& x : positions) x = x + h * ev.velocity(x);
      } else {
        rk4(ev, ev, ev);
      }
    }
    return;
  }
  if (scheme == Scheme::Euler) {
    for (int j = 0; j < substeps; ++j) {
      const PointEvaluator ev = stage(2 * j);
      for (auto& x : positions) x = x + h * ev.velocity(x);
    }
    return;
  }
  PointEvaluator ea = stage(0);
  for (int j = 0; j < substeps; ++j) {
    const PointEvaluator em = stage(2 * j + 1);
    PointEvaluator eb = stage(2 * j + 2);
    rk4(ea, em, eb);
    ea = std::move(eb);
  }
}

ParticleTracer::ParticleTracer(std::vector<Vec2> starts, int substeps, Scheme scheme, std::vector<int> tags)
    : substeps_(substeps), current_(std::move(starts)) {
  if (current_.empty()) throw std::invalid_argument("tracer needs at least one start position");
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  if (tags.empty()) {
    for (std::size_t p = 0; p < current_.size(); ++p) tags.push_back(static_cast<int>(p));
  }
  if (tags.size() != current_.size()) throw std::invalid_argument("tag count does not match start count");
  set_.tags = std::move(tags);
  set_.scheme = scheme;
  set_.positions.resize(current_.size());
  set_.winding.resize(current_.size());
  record(0.0);
}

void ParticleTracer::record(double t) {
  set_.times.push_back(t);
  for (std::size_t p = 0; p < current_.size(); ++p) {
    set_.positions[p].push_back(wrap_to_torus(current_[p]));
    set_.winding[p].push_back(winding_of(current_[p]));
  }
}

void ParticleTracer::advance(const StepEvent& e) {
  if (e.t0 != set_.times.back()) {
    throw std::logic_error(fmt::format("tracer at t={} received step starting at t={}", set_.times.back(), e.t0));
  }
  integrate_interval(current_, e.u0, e.u1, e.t0, e.t1, substeps_, set_.scheme);
  set_.dt = std::max(set_.dt, (e.t1 - e.t0) / substeps_);
  record(e.t1);
}

StepObserver ParticleTracer::observer() {
  return [this](const StepEvent& e) { advance(e); };
}

TrajectorySet advect(const RunRecord& run, std::span<const Vec2> starts, double dt, Scheme scheme) {
  if (starts.empty()) throw std::invalid_argument("advect: no start positions");
  if (!(dt > 0.0)) throw std::invalid_argument("advect: dt must be positive");
  if (run.snapshots.empty() || run.snapshots.front().time != 0.0) {
    throw std::invalid_argument("advect: run has no initial snapshot");
  }
  if (!run.ok()) throw std::invalid_argument("advect: run failed at t=" + fmt::format("{}", run.failure_time));

  ParticleTracer tracer(std::vector<Vec2>(starts.begin(), starts.end()), 1, scheme);
  std::vector<Vec2> pos(starts.begin(), starts.end());
  TrajectorySet set = tracer.trajectories();
  set.dt = dt;
  for (std::size_t i = 0; i + 1 < run.snapshots.size(); ++i) {
    const auto& a = run.snapshots[i];
    const auto& b = run.snapshots[i + 1];
    const int m = std::max(1, static_cast<int>(std::ceil((b.time - a.time) / dt - 1e-9)));
    integrate_interval(pos, a.state, b.state, a.time, b.time, m, scheme);
    set.times.push_back(b.time);
    for (std::size_t p = 0; p < pos.size(); ++p) {
      set.positions[p].push_back(wrap_to_torus(pos[p]));
      set.winding[p].push_back(winding_of(pos[p]));
    }
  }
  return set;
}

TrajectorySet advect_frozen(const SpectralVelocity& u, std::span<const Vec2> starts, double dt, double duration,
                            Scheme scheme) {
  if (starts.empty()) throw std::invalid_argument("advect: no start positions");
  if (!(dt > 0.0)) throw std::invalid_argument("advect: dt must be positive");
  ParticleTracer tracer(std::vector<Vec2>(starts.begin(), starts.end()), 1, scheme);
  TrajectorySet set = tracer.trajectories();
  set.dt = dt;
  std::vector<Vec2> pos(starts.begin(), starts.end());
  const int m = std::max(1, static_cast<int>(std::ceil(std::abs(duration) / dt - 1e-9)));
  const SpectralVector& c = u.coefficients();
  integrate_interval(pos, c, c, 0.0, duration, m, scheme);
  set.times.push_back(duration);
  for (std::size_t p = 0; p < pos.size(); ++p) {
    set.positions[p].push_back(wrap_to_torus(pos[p]));
    set.winding[p].push_back(winding_of(pos[p]));
  }
  return set;
}

SeparationSeries separation_series(const TrajectorySet& a, const TrajectorySet& b, std::size_t ia, std::size_t ib) {
  if (a.times != b.times) throw std::invalid_argument("separation_series: sample times differ");
  if (ia >= a.particles() || ib >= b.particles()) throw std::out_of_range("separation_series: particle index");
  SeparationSeries s;
  s.t = a.times;
  s.eta.reserve(a.times.size());
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    s.eta.push_back(torus_distance(a.positions[ia][i], b.positions[ib][i]));
  }
  return s;
}

double envelope_bound(double eta_s, double s, double t, double au_integral, double c) {
  if (!(eta_s > 0.0 && eta_s < kEtaCeiling)) {
    throw std::invalid_argument(fmt::format("envelope_bound: eta_s={} outside (0, e^-1/2)", eta_s));
  }
  if (!(s < t)) throw std::invalid_argument("envelope_bound: requires s < t");
  const double paren = std::sqrt(std::log(1.0 / eta_s)) - c * au_integral;
  if (paren < 0.0) return std::numeric_limits<double>::infinity();
  if (c * au_integral == 0.0) return eta_s;
  return std::exp(-paren * paren);
}

double au_integral_bound(double du_s, double du_t, double big_k, double c) {
  const double arg = std::max(1.0, (1.0 + du_s * du_s) / (1.0 + du_t * du_t));
  return c * big_k * std::sqrt(std::log(arg)) + c * big_k;
}

std::vector<double> cumulative_integral(const NormSeries& series) {
  std::vector<double> f(series.size(), 0.0);
  for (std::size_t i = 1; i < series.size(); ++i) {
    f[i] = f[i - 1] + 0.5 * (series.t[i] - series.t[i - 1]) * (series.value[i] + series.value[i - 1]);
  }
  return f;
}

namespace {

bool valid_start(double eta_s) { return eta_s > 0.0 && eta_s < kEtaCeiling; }

void check_alignment(const SeparationSeries& eta, const std::vector<double>& cum,
                     std::span<const std::size_t> indices) {
  if (eta.t.size() != cum.size()) throw std::invalid_argument("separation and ||Au|| series lengths differ");
  for (auto i : indices) {
    if (i >= cum.size()) throw std::out_of_range("audit index beyond series");
  }
}

}  // namespace

double calibrate_envelope_constant(const SeparationSeries& eta, const std::vector<double>& au_cumulative,
                                   std::span<const std::size_t> indices) {
  check_alignment(eta, au_cumulative, indices);
  double c = 0.0;
  for (std::size_t a = 0; a < indices.size(); ++a) {
    const std::size_t i = indices[a];
    if (!valid_start(eta.eta[i])) continue;
    const double ls = std::sqrt(std::log(1.0 / eta.eta[i]));
    for (std::size_t b = a + 1; b < indices.size(); ++b) {
      const std::size_t j = indices[b];
      const double et = eta.eta[j];
      if (!(et < 1.0) || et <= eta.eta[i]) continue;
      const double integral = au_cumulative[j] - au_cumulative[i];
      if (integral <= 0.0) continue;
      const double lt = et > 0.0 ? std::sqrt(std::log(1.0 / et)) : ls;
      c = std::max(c, (ls - lt) / integral);
    }
  }
  return c;
}

EnvelopeAudit envelope_audit(const SeparationSeries& eta, const std::vector<double>& au_cumulative,
                             std::span<const std::size_t> indices, double c) {
  check_alignment(eta, au_cumulative, indices);
  EnvelopeAudit r;
  r.c = c;
  for (std::size_t a = 0; a < indices.size(); ++a) {
    const std::size_t i = indices[a];
    for (std::size_t b = a + 1; b < indices.size(); ++b) {
      const std::size_t j = indices[b];
      if (!(eta.t[i] < eta.t[j])) continue;
      ++r.pairs;
      if (!valid_start(eta.eta[i]) || !(eta.eta[j] < 1.0)) {
        ++r.invalid;
        continue;
      }
      const double bound = envelope_bound(eta.eta[i], eta.t[i], eta.t[j], au_cumulative[j] - au_cumulative[i], c);
      if (std::isinf(bound)) {
        ++r.vacuous;
        continue;
      }
      ++r.nonvacuous;
      if (eta.eta[j] <= bound * (1.0 + 1e-9)) ++r.held;
    }
  }
  return r;
}

EtaAudit eta_initial_audit(const RunRecord& run, Vec2 a, std::span<const double> dts) {
  if (dts.size() != 2) throw std::invalid_argument("eta_initial_audit needs exactly two integrator time steps");
  const double exps[] = {1.0, 1.25, 1.5};
  const auto norms = record_norms(run, exps);
  const NormSeries& d1 = norms[0];
  const NormSeries& d54 = norms[1];
  const NormSeries& d32 = norms[2];

  EtaAudit out;
  for (std::size_t i = 0; i < d1.size(); ++i) {
    const double rhs = d32.value[i] * d1.value[i];
    if (rhs > 0.0) {
      out.max_interpolation_excess =
          std::max(out.max_interpolation_excess, (d54.value[i] * d54.value[i] - rhs) / rhs);
    }
  }
  out.d54_weighted = sup_weighted(d54, 0.75);
  out.d54_weighted.resolution = run.grid().resolution();
  out.d54_weighted.dt = run.config.dt;

  const Vec2 start[] = {a};
  const TrajectorySet ta = advect(run, start, dts[0], Scheme::Rk4);
  const TrajectorySet tb = advect(run, start, dts[1], Scheme::Rk4);
  out.eta = separation_series(ta, tb);
  for (std::size_t i = 1; i < out.eta.t.size(); ++i) {
    const double q = std::pow(out.eta.t[i], 0.25);
    out.eta_k = std::max(out.eta_k, out.eta.eta[i] / q);
    out.displacement_k = std::max(out.displacement_k, torus_distance(ta.positions[0][i], a) / q);
  }
  return out;
}

UniquenessReport uniqueness_experiment(const SolverConfig& config, const SpectralVelocity& u0,
                                       const UniquenessConfig& study) {
  if (study.epsilons.empty() || study.substeps.empty()) {
    throw std::invalid_argument("uniqueness_experiment: empty epsilon or substep list");
  }
  for (std::size_t i = 0; i < study.epsilons.size(); ++i) {
    const double e = study.epsilons[i];
    if (!(e > 0.0 && e < kEtaCeiling)) {
      throw std::invalid_argument(fmt::format("epsilon {} outside (0, e^-1/2)", e));
    }
    if (i > 0 && !(e < study.epsilons[i - 1])) throw std::invalid_argument("epsilons must decrease");
  }
  for (std::size_t i = 1; i < study.substeps.size(); ++i) {
    if (study.substeps[i] <= study.substeps[i - 1]) throw std::invalid_argument("substeps must increase");
  }
  if (study.substeps.front() < 1 || study.perturbation_substeps < 1) {
    throw std::invalid_argument("substeps must be >= 1");
  }

  const Vec2 dir{std::cos(study.direction_angle), std::sin(study.direction_angle)};
  std::vector<Vec2> perturbed{study.start};
  for (double e : study.epsilons) perturbed.push_back(study.start + e * dir);
  ParticleTracer population(perturbed, study.perturbation_substeps);

  std::vector<ParticleTracer> refinement;
  refinement.reserve(study.substeps.size());
  for (int m : study.substeps) refinement.emplace_back(std::vector<Vec2>{study.start}, m);

  UniquenessReport rep;
  rep.au.name = norm_name(2.0);
  rep.au.t.push_back(0.0);
  rep.au.value.push_back(sobolev_norm(u0, 2.0));

  std::vector<StepObserver> observers{population.observer()};
  for (auto& tr : refinement) observers.push_back(tr.observer());
  observers.push_back([&rep](const StepEvent& e) {
    rep.au.t.push_back(e.t1);
    rep.au.value.push_back(sobolev_norm(e.u1, 2.0));
  });

  rep.run = run(config, u0, observers);
  if (!rep.run.ok()) throw BlowUpError(rep.run.failure_time, *rep.run.failure);

  rep.trajectories = population.trajectories();
  const std::size_t last = rep.trajectories.times.size() - 1;
  for (std::size_t i = 0; i < study.epsilons.size(); ++i) {
    rep.separations.push_back(separation_series(rep.trajectories, rep.trajectories, 0, i + 1));
    const double eta = rep.separations.back().eta[last];
    rep.perturbation.push_back({study.epsilons[i], eta, eta / study.epsilons[i]});
  }

  for (std::size_t i = 0; i < refinement.size(); ++i) {
    const auto& tr = refinement[i].trajectories();
    rep.integrator.push_back({study.substeps[i], tr.dt, tr.positions[0].back()});
  }
  for (std::size_t i = 0; i + 1 < rep.integrator.size(); ++i) {
    rep.integrator[i].difference_to_next =
        torus_distance(rep.integrator[i].final_position, rep.integrator[i + 1].final_position);
  }
  for (std::size_t i = 0; i + 2 < rep.integrator.size(); ++i) {
    const double d0 = rep.integrator[i].difference_to_next;
    const double d1 = rep.integrator[i + 1].difference_to_next;
    const double ratio = static_cast<double>(study.substeps[i + 1]) / study.substeps[i];
    if (d1 > study.order_floor && d0 > 0.0) rep.integrator[i].order = std::log(d0 / d1) / std::log(ratio);
  }

  // audit on the scheduled snapshot times, which the stepper lands on exactly
  const auto& times = rep.trajectories.times;
  std::size_t k = 0;
  for (const auto& snap : rep.run.snapshots) {
    while (k < times.size() && times[k] < snap.time) ++k;
    if (k < times.size() && times[k] == snap.time) rep.audit_indices.push_back(k);
  }

  const auto cum = cumulative_integral(rep.au);
  for (const auto& sep : rep.separations) {
    rep.calibrated_c = std::max(rep.calibrated_c, calibrate_envelope_constant(sep, cum, rep.audit_indices));
  }
  const double c = study.envelope_c.value_or(rep.calibrated_c);
  rep.envelope.c = c;
  for (const auto& sep : rep.separations) {
    const auto part = envelope_audit(sep, cum, rep.audit_indices, c);
    rep.envelope.pairs += part.pairs;
    rep.envelope.invalid += part.invalid;
    rep.envelope.vacuous += part.vacuous;
    rep.envelope.nonvacuous += part.nonvacuous;
    rep.envelope.held += part.held;
  }
  rep.implied_big_k_limit = c > 0.0 ? 1.0 / c : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace nstraj
