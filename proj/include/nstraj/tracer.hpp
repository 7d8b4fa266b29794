// Lagrangian particle tracking dX/dt = u(X(t), t) through spectral velocity
// fields, and the separation audits built on it.
//
// Velocities are evaluated by exact trigonometric sums (no spatial
// interpolation). Between two stored states the spectral coefficients are
// interpolated linearly in time; tracer substeps always align with those
// states, so the interpolated field is smooth inside every substep.
#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nstraj/diagnostics.hpp"
#include "nstraj/nse_solver.hpp"
#include "nstraj/spectral_field.hpp"

namespace nstraj {

enum class Scheme { Rk4, Euler };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& text);

struct TrajectorySet {
  std::vector<int> tags;
  std::vector<double> times;
  // positions[p][i]: particle p at times[i], wrapped into [0, 2pi)^2
  std::vector<std::vector<Vec2>> positions;
  std::vector<std::vector<std::array<int, 2>>> winding;
  Scheme scheme = Scheme::Rk4;
  double dt = 0.0;

  std::size_t particles() const { return positions.size(); }
  /// Continuous position, wrapped position plus 2pi times the winding numbers.
  Vec2 unwrapped(std::size_t particle, std::size_t sample) const;
};

struct SeparationSeries {
  std::vector<double> t;
  std::vector<double> eta;
};

/// Minimal-image distance on the 2pi torus; at most pi*sqrt(2).
double torus_distance(Vec2 a, Vec2 b);

/// Integrates a particle population alongside a solver run. Each solver step
/// [t0, t1] is split into a fixed number of substeps.
class ParticleTracer {
 public:
  ParticleTracer(std::vector<Vec2> starts, int substeps, Scheme scheme = Scheme::Rk4, std::vector<int> tags = {});

  void advance(const StepEvent& event);
  /// Observer bound to this tracer; the tracer must outlive the run.
  StepObserver observer();
  const TrajectorySet& trajectories() const { return set_; }
  std::span<const Vec2> positions() const { return current_; }

 private:
  void record(double t);

  int substeps_;
  std::vector<Vec2> current_;  // unwrapped
  TrajectorySet set_;
};

/// Moves `positions` (unwrapped) from t0 to t1 through the field that is
/// linear in time between u0 at t0 and u1 at t1, using `substeps` equal steps
/// (t1 < t0 integrates backward).
void integrate_interval(std::vector<Vec2>& positions, const SpectralVector& u0, const SpectralVector& u1, double t0,
                        double t1, int substeps, Scheme scheme);

/// Advects particles through a recorded run; samples land on snapshot times.
/// Each snapshot interval uses ceil(interval/dt) substeps. Throws
/// std::invalid_argument for an empty start list, a failed run, or dt <= 0.
TrajectorySet advect(const RunRecord& run, std::span<const Vec2> starts, double dt, Scheme scheme);

/// Advects through a time-independent field from time 0 to `duration`;
/// samples at both ends in integration order (a negative duration runs
/// backward).
TrajectorySet advect_frozen(const SpectralVelocity& u, std::span<const Vec2> starts, double dt, double duration,
                            Scheme scheme);

/// Torus distance between particle ia of `a` and particle ib of `b` at every
/// shared sample time. Throws std::invalid_argument if the time grids differ.
SeparationSeries separation_series(const TrajectorySet& a, const TrajectorySet& b, std::size_t ia = 0,
                                   std::size_t ib = 0);

/// exp(-((log 1/eta_s)^{1/2} - c * au_integral)^2), or +inf when the
/// parenthesis is negative (bound vacuous). Requires 0 < eta_s < e^{-1/2} and
/// s < t.
double envelope_bound(double eta_s, double s, double t, double au_integral, double c);

/// c K (log((1 + Du_s^2)/(1 + Du_t^2)))^{1/2} + c K with the log argument
/// clamped to at least 1.
double au_integral_bound(double du_s, double du_t, double big_k, double c);

/// Envelope audit over all sample pairs (s, t), s < t, drawn from `indices`
/// into a separation series and a matching ||Au|| series.
struct EnvelopeAudit {
  double c = 0.0;
  long pairs = 0;
  long invalid = 0;  // eta_s outside (0, e^{-1/2}) or eta_t >= 1
  long vacuous = 0;
  long nonvacuous = 0;
  long held = 0;

  double fraction_held() const { return nonvacuous == 0 ? 1.0 : static_cast<double>(held) / nonvacuous; }
};

/// Running integral F(t_i) = int_{t_0}^{t_i} ||Au|| by the trapezoid rule.
std::vector<double> cumulative_integral(const NormSeries& series);

/// Smallest c for which the envelope holds on every valid (s, t) sample.
double calibrate_envelope_constant(const SeparationSeries& eta, const std::vector<double>& au_cumulative,
                                   std::span<const std::size_t> indices);
EnvelopeAudit envelope_audit(const SeparationSeries& eta, const std::vector<double>& au_cumulative,
                             std::span<const std::size_t> indices, double c);

struct EtaAudit {
  double max_interpolation_excess = 0.0;  // max (||D^{5/4}u||^2 - ||D^{3/2}u|| ||Du||) / (||D^{3/2}u|| ||Du||)
  BoundReport d54_weighted;               // sup_s s^{3/4} ||D^{5/4} u(s)||
  double eta_k = 0.0;                     // sup_s eta(s) / s^{1/4}
  double displacement_k = 0.0;            // sup_s |X(s) - a| / s^{1/4}
  SeparationSeries eta;
};

/// Checks the small-time chain for trajectories started at `a`:
/// interpolation inequality at every snapshot, boundedness of
/// s^{3/4}||D^{5/4}u(s)||, and the s^{1/4} growth of the separation between
/// two integrators (time steps dts[0] and dts[1]).
EtaAudit eta_initial_audit(const RunRecord& run, Vec2 a, std::span<const double> dts);

struct PerturbationRow {
  double epsilon;
  double eta_final;
  double ratio;  // eta_final / epsilon
};

struct IntegratorRow {
  int substeps;
  double dt;
  Vec2 final_position;
  double difference_to_next = 0.0;  // torus distance to the next finer run
  double order = 0.0;               // log2 of successive difference ratio (0 when not measurable)
};

struct UniquenessConfig {
  Vec2 start{1.0, 2.0};
  std::vector<double> epsilons{1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
  std::vector<int> substeps{1, 2, 4, 8, 16};
  int perturbation_substeps = 2;
  double direction_angle = 0.3;
  double order_floor = 1e-12;
  std::optional<double> envelope_c;  // calibrate on this run when absent
};

struct UniquenessReport {
  std::vector<PerturbationRow> perturbation;
  std::vector<IntegratorRow> integrator;
  EnvelopeAudit envelope;
  double calibrated_c = 0.0;  // smallest c that makes this run's envelope hold
  double implied_big_k_limit = 0.0;  // 1/c: T* must satisfy K(T*) < 1/c
  TrajectorySet trajectories;        // perturbation population (particle 0 is the base start)
  std::vector<SeparationSeries> separations;
  NormSeries au;                     // ||Au|| at every solver step
  std::vector<std::size_t> audit_indices;
  RunRecord run;
};

/// Runs the solver from u0 with tracer populations attached and performs the
/// perturbation, integrator-refinement and envelope studies. Epsilons must
/// decrease and stay below e^{-1/2}, substeps must increase; violations throw
/// std::invalid_argument.
UniquenessReport uniqueness_experiment(const SolverConfig& config, const SpectralVelocity& u0,
                                       const UniquenessConfig& study);

}  // namespace nstraj
