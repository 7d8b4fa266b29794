// Pseudo-spectral time stepping for du/dt + nu A u + B(u,u) = f on the
// 2pi-periodic square.
//
// The viscous term is integrated exactly through the factor exp(-nu |k|^2 h);
// -B(u,u) + f is advanced with classical RK4 in the integrating-factor frame
// (Lawson RK4). B(u,u) = Pi (u.grad)u is evaluated in convective form on a
// 3N/2 padded lattice, which removes aliasing of the quadratic product.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nstraj/spectral_field.hpp"

namespace nstraj {

enum class DealiasRule { TwoThirds, None };

std::string to_string(DealiasRule rule);
DealiasRule parse_dealias_rule(const std::string& text);

/// External forcing recipe. The label records which regularity hypothesis on
/// f a run exercises.
struct Forcing {
  enum class Kind { Zero, Fixed, SingleMode };

  Kind kind = Kind::Zero;
  std::optional<SpectralVelocity> field;  // Kind::Fixed
  int k1 = 1;                             // Kind::SingleMode wavevector
  int k2 = 0;
  double amplitude = 0.0;
  double frequency = 0.0;

  static Forcing zero() { return {}; }
  static Forcing fixed(SpectralVelocity f);
  /// amplitude * cos(frequency t) * (k_perp/|k|) sin(k.x)
  static Forcing single_mode(int k1, int k2, double amplitude, double frequency);

  bool is_zero() const { return kind == Kind::Zero; }
  SpectralVelocity at(const WavenumberGrid& grid, double t) const;
  std::string label() const;
};

/// Snapshot times: geometric T*q^j (q = 10^(-1/per_decade)) down to
/// t_min_fraction*T, plus an optional uniform time interval, plus every
/// `every_steps` solver steps. The initial state is always recorded.
struct SnapshotSchedule {
  double t_min_fraction = 1e-4;
  int per_decade = 20;
  double interval = 0.0;
  int every_steps = 0;

  /// Scheduled times in (0, T], ascending, always including T.
  std::vector<double> times(double final_time) const;
};

struct SolverConfig {
  double viscosity = 0.1;
  double dt = 1e-3;
  double final_time = 1.0;
  DealiasRule dealias = DealiasRule::TwoThirds;
  Forcing forcing;
  SnapshotSchedule snapshots;
  bool nonlinear = true;  // false turns the solver into a forced heat equation
  int threads = 1;
};

struct Snapshot {
  double time;
  SpectralVelocity state;
};

struct StepLogEntry {
  double t;
  double l2;
  double h1;
};

struct RunRecord {
  SolverConfig config;
  std::vector<Snapshot> snapshots;
  std::vector<StepLogEntry> log;
  int threads = 1;
  std::optional<std::string> failure;
  double failure_time = 0.0;

  bool ok() const { return !failure.has_value(); }
  const WavenumberGrid& grid() const { return snapshots.front().state.grid(); }
  const SpectralVelocity& final_state() const { return snapshots.back().state; }
};

struct StepEvent {
  double t0;
  const SpectralVelocity& u0;
  double t1;
  const SpectralVelocity& u1;
};

using StepObserver = std::function<void(const StepEvent&)>;

class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double time, const std::string& what) : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// 0.5 * dx / max|u0| on the collocation lattice; +inf for a zero field.
double stability_bound(const SpectralVelocity& u0);

/// Owns the padded-lattice work buffers; one instance per run.
class NavierStokesSolver {
 public:
  NavierStokesSolver(WavenumberGrid grid, DealiasRule rule);
  ~NavierStokesSolver();
  NavierStokesSolver(const NavierStokesSolver&) = delete;
  NavierStokesSolver& operator=(const NavierStokesSolver&) = delete;

  SpectralVelocity nonlinear_term(const SpectralVelocity& u);

  /// One integrating-factor RK4 step. Throws BlowUpError if the new state is
  /// not finite.
  SpectralVelocity step(const SpectralVelocity& u, double t, double dt, const SolverConfig& config);

 private:
  struct Workspace;
  WavenumberGrid grid_;
  DealiasRule rule_;
  std::unique_ptr<Workspace> ws_;
};

SpectralVelocity nonlinear_term(const SpectralVelocity& u, DealiasRule rule);
SpectralVelocity step(const SpectralVelocity& u, double t, double dt, const SolverConfig& config);

/// Advances u0 from 0 to config.final_time, landing exactly on every
/// scheduled snapshot time. Observers see every step. Throws
/// std::invalid_argument if dt exceeds stability_bound(u0) or the config is
/// invalid; a blow-up is reported through RunRecord::failure with the states
/// recorded so far.
RunRecord run(const SolverConfig& config, const SpectralVelocity& u0,
              std::span<const StepObserver> observers = {});

/// Exact heat semigroup: u_hat(k) * exp(-|k|^2 t). Requires t >= 0.
SpectralVelocity heat_evolve(const SpectralVelocity& v0, double t);

}  // namespace nstraj
