#include "nstraj/nse_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nstraj/fft.hpp"

namespace nstraj {

std::string to_string(DealiasRule rule) { return rule == DealiasRule::TwoThirds ? "two-thirds" : "none"; }

DealiasRule parse_dealias_rule(const std::string& text) {
  if (text == "two-thirds") return DealiasRule::TwoThirds;
  if (text == "none") return DealiasRule::None;
  throw std::invalid_argument("unknown dealias rule '" + text + "' (expected two-thirds or none)");
}

Forcing Forcing::fixed(SpectralVelocity f) {
  Forcing out;
  out.kind = Kind::Fixed;
  out.field = std::move(f);
  return out;
}

Forcing Forcing::single_mode(int k1, int k2, double amplitude, double frequency) {
  if (k1 == 0 && k2 == 0) throw std::invalid_argument("forcing wavevector must be nonzero");
  Forcing out;
  out.kind = Kind::SingleMode;
  out.k1 = k1;
  out.k2 = k2;
  out.amplitude = amplitude;
  out.frequency = frequency;
  return out;
}

SpectralVelocity Forcing::at(const WavenumberGrid& grid, double t) const {
  switch (kind) {
    case Kind::Zero:
      return SpectralVelocity::zero(grid);
    case Kind::Fixed:
      if (!(field->grid() == grid)) throw std::invalid_argument("forcing grid mismatch");
      return *field;
    case Kind::SingleMode: {
      SpectralVector v(grid);
      const double norm = std::hypot(static_cast<double>(k1), static_cast<double>(k2));
      // sin(k.x) has coefficient 1/(2i) at k.
      const Complex c = Complex{0.0, -0.5} * amplitude * std::cos(frequency * t) / norm;
      v.set_mode(k1, k2, -static_cast<double>(k2) * c, static_cast<double>(k1) * c);
      return SpectralVelocity::assume_solenoidal(std::move(v));
    }
  }
  return SpectralVelocity::zero(grid);
}

std::string Forcing::label() const {
  switch (kind) {
    case Kind::Zero:
      return "zero";
    case Kind::Fixed:
      return "fixed (time independent f in H)";
    case Kind::SingleMode:
      return "single-mode (smooth f in L^inf(0,T;H^{1/2}))";
  }
  return "unknown";
}

std::vector<double> SnapshotSchedule::times(double final_time) const {
  std::vector<double> out{final_time};
  if (per_decade > 0) {
    const double t_min = t_min_fraction * final_time;
    for (int j = 1;; ++j) {
      const double t = final_time * std::pow(10.0, -static_cast<double>(j) / per_decade);
      if (t < t_min * (1.0 - 1e-12)) break;
      out.push_back(t);
    }
  }
  if (interval > 0.0) {
    for (int j = 1;; ++j) {
      const double t = j * interval;
      if (t >= final_time * (1.0 - 1e-12)) break;
      out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  // Merge times closer than a relative 1e-9 so the stepper never takes slivers.
  std::vector<double> merged;
  for (double t : out) {
    if (merged.empty() || t - merged.back() > 1e-9 * final_time) merged.push_back(t);
  }
  merged.back() = final_time;
  return merged;
}

double stability_bound(const SpectralVelocity& u0) {
  const double umax = transform_to_physical(u0).max_abs();
  if (umax == 0.0) return std::numeric_limits<double>::infinity();
  return 0.5 * u0.grid().spacing() / umax;
}

// Index maps between the N half plane and the padded M half plane, and the
// buffers for the five physical-space factors of (u.grad)u.
struct NavierStokesSolver::Workspace {
  int padded;
  std::vector<std::size_t> src;  // stored N-slot
  std::vector<std::size_t> dst;  // matching padded slot
  std::vector<double> k1;        // wavevector of each mapped slot
  std::vector<double> k2;
  std::vector<Complex> spec;
  std::vector<std::vector<double>> phys;
  std::vector<double> prod;
  std::vector<Complex> out;

  // Lazily refreshed viscous factors for the last step size.
  double cached_nu_h = -1.0;
  std::vector<double> full;
  std::vector<double> half;
};

NavierStokesSolver::NavierStokesSolver(WavenumberGrid grid, DealiasRule rule)
    : grid_(grid), rule_(rule), ws_(std::make_unique<Workspace>()) {
  const int n = grid.resolution();
  const int m = rule == DealiasRule::TwoThirds ? 3 * n / 2 : n;
  ws_->padded = m;
  const int pc = m / 2 + 1;
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.columns(); ++c) {
      if (grid.is_nyquist(r, c)) continue;
      const int k1 = grid.wavenumber_of_row(r);
      const int pr = k1 >= 0 ? k1 : k1 + m;
      ws_->src.push_back(grid.index(r, c));
      ws_->dst.push_back(static_cast<std::size_t>(pr) * static_cast<std::size_t>(pc) + static_cast<std::size_t>(c));
      ws_->k1.push_back(k1);
      ws_->k2.push_back(c);
    }
  }
  const auto real_size = static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
  ws_->spec.assign(static_cast<std::size_t>(m) * static_cast<std::size_t>(pc), Complex{});
  ws_->phys.assign(5, std::vector<double>(real_size));
  ws_->prod.assign(real_size, 0.0);
  ws_->out.assign(ws_->spec.size(), Complex{});
}

NavierStokesSolver::~NavierStokesSolver() = default;

SpectralVelocity NavierStokesSolver::nonlinear_term(const SpectralVelocity& u) {
  if (!(u.grid() == grid_)) throw std::invalid_argument("grid mismatch");
  auto& ws = *ws_;
  auto& fft = fft_for(ws.padded);
  const auto a = u.coefficients().component(0);
  const auto b = u.coefficients().component(1);
  const Complex i_unit{0.0, 1.0};

  // u1, u2, d1 u1, d2 u1, d1 u2; d2 u2 = -d1 u1 by incompressibility.
  for (int f = 0; f < 5; ++f) {
    std::fill(ws.spec.begin(), ws.spec.end(), Complex{});
    for (std::size_t j = 0; j < ws.src.size(); ++j) {
      const auto s = ws.src[j];
      Complex v;
      switch (f) {
        case 0: v = a[s]; break;
        case 1: v = b[s]; break;
        case 2: v = i_unit * ws.k1[j] * a[s]; break;
        case 3: v = i_unit * ws.k2[j] * a[s]; break;
        default: v = i_unit * ws.k1[j] * b[s]; break;
      }
      ws.spec[ws.dst[j]] = v;
    }
    fft.inverse(ws.spec, ws.phys[static_cast<std::size_t>(f)]);
  }

  SpectralVector result(grid_);
  const auto& u1 = ws.phys[0];
  const auto& u2 = ws.phys[1];
  const auto& d1u1 = ws.phys[2];
  const auto& d2u1 = ws.phys[3];
  const auto& d1u2 = ws.phys[4];
  for (int comp = 0; comp < 2; ++comp) {
    for (std::size_t x = 0; x < ws.prod.size(); ++x) {
      ws.prod[x] = comp == 0 ? u1[x] * d1u1[x] + u2[x] * d2u1[x] : u1[x] * d1u2[x] - u2[x] * d1u1[x];
    }
    fft.forward(ws.prod, ws.out);
    auto dst = result.component(comp);
    for (std::size_t j = 0; j < ws.src.size(); ++j) dst[ws.src[j]] = ws.out[ws.dst[j]];
  }
  return leray_project(std::move(result));
}

SpectralVelocity NavierStokesSolver::step(const SpectralVelocity& u, double t, double dt,
                                          const SolverConfig& config) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  auto& ws = *ws_;
  const double nu_h = config.viscosity * dt;
  if (nu_h != ws.cached_nu_h) {
    ws.full.assign(grid_.stored_modes(), 0.0);
    ws.half.assign(grid_.stored_modes(), 0.0);
    for (int r = 0; r < grid_.rows(); ++r) {
      const double k1 = grid_.wavenumber_of_row(r);
      for (int c = 0; c < grid_.columns(); ++c) {
        const double kk = k1 * k1 + static_cast<double>(c) * c;
        ws.full[grid_.index(r, c)] = std::exp(-nu_h * kk);
        ws.half[grid_.index(r, c)] = std::exp(-0.5 * nu_h * kk);
      }
    }
    ws.cached_nu_h = nu_h;
  }

  auto rhs = [&](const SpectralVector& v, double time) {
    SpectralVector out(grid_);
    if (config.nonlinear) {
      out = nonlinear_term(SpectralVelocity::assume_solenoidal(v)).coefficients();
      out *= -1.0;
    }
    if (!config.forcing.is_zero()) out += config.forcing.at(grid_, time).coefficients();
    return out;
  };
  auto decay = [&](SpectralVector v, const std::vector<double>& factor) {
    for (int c = 0; c < 2; ++c) {
      auto z = v.component(c);
      for (std::size_t i = 0; i < z.size(); ++i) z[i] *= factor[i];
    }
    return v;
  };

  const SpectralVector& un = u.coefficients();
  const SpectralVector un_half = decay(un, ws.half);
  const SpectralVector un_full = decay(un, ws.full);

  const SpectralVector k1 = rhs(un, t);

  SpectralVector stage = un;
  stage.axpy(0.5 * dt, k1);
  const SpectralVector k2 = rhs(decay(stage, ws.half), t + 0.5 * dt);

  stage = un_half;
  stage.axpy(0.5 * dt, k2);
  const SpectralVector k3 = rhs(stage, t + 0.5 * dt);

  stage = un_full;
  stage.axpy(dt, decay(k3, ws.half));
  const SpectralVector k4 = rhs(stage, t + dt);

  SpectralVector next = un_full;
  next.axpy(dt / 6.0, decay(k1, ws.full));
  SpectralVector mid = k2;
  mid += k3;
  next.axpy(dt / 3.0, decay(mid, ws.half));
  next.axpy(dt / 6.0, k4);

  if (!next.all_finite()) {
    throw BlowUpError(t + dt, "non-finite velocity at t=" + std::to_string(t + dt));
  }
  return SpectralVelocity::assume_solenoidal(std::move(next));
}

SpectralVelocity nonlinear_term(const SpectralVelocity& u, DealiasRule rule) {
  NavierStokesSolver solver(u.grid(), rule);
  return solver.nonlinear_term(u);
}

SpectralVelocity step(const SpectralVelocity& u, double t, double dt, const SolverConfig& config) {
  NavierStokesSolver solver(u.grid(), config.dealias);
  return solver.step(u, t, dt, config);
}

RunRecord run(const SolverConfig& config, const SpectralVelocity& u0, std::span<const StepObserver> observers) {
  if (!(config.viscosity > 0.0)) throw std::invalid_argument("viscosity must be positive");
  if (!(config.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(config.final_time > 0.0)) throw std::invalid_argument("final time must be positive");
  const double bound = stability_bound(u0);
  if (config.dt > bound) {
    throw std::invalid_argument("dt=" + std::to_string(config.dt) + " exceeds the advective stability bound " +
                                std::to_string(bound) + " (0.5*dx/max|u0|); reduce dt to at most that value");
  }

  RunRecord record;
  record.config = config;
  record.threads = config.threads;
  record.snapshots.push_back({0.0, u0});
  record.log.push_back({0.0, sobolev_norm(u0, 0.0), sobolev_norm(u0, 1.0)});

  NavierStokesSolver solver(u0.grid(), config.dealias);
  const auto targets = config.snapshots.times(config.final_time);
  std::size_t next = 0;
  double t = 0.0;
  long steps = 0;
  SpectralVelocity u = u0;
  while (next < targets.size()) {
    const double target = targets[next];
    double h = config.dt;
    bool land = false;
    if (target - t <= config.dt * (1.0 + 1e-9)) {
      h = target - t;
      land = true;
    }
    SpectralVelocity un = SpectralVelocity::zero(u0.grid());
    try {
      un = solver.step(u, t, h, config);
    } catch (const BlowUpError& e) {
      record.failure = e.what();
      record.failure_time = e.time();
      return record;
    }
    const double tn = land ? target : t + h;
    for (const auto& obs : observers) obs(StepEvent{t, u, tn, un});
    u = std::move(un);
    t = tn;
    ++steps;
    record.log.push_back({t, sobolev_norm(u, 0.0), sobolev_norm(u, 1.0)});
    if (land) {
      record.snapshots.push_back({t, u});
      ++next;
    } else if (config.snapshots.every_steps > 0 && steps % config.snapshots.every_steps == 0) {
      record.snapshots.push_back({t, u});
    }
  }
  return record;
}

SpectralVelocity heat_evolve(const SpectralVelocity& v0, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("heat evolution time must be nonnegative");
  SpectralVector out = v0.coefficients();
  const auto& g = out.grid();
  for (int r = 0; r < g.rows(); ++r) {
    const double k1 = g.wavenumber_of_row(r);
    for (int c = 0; c < g.columns(); ++c) {
      const double f = std::exp(-(k1 * k1 + static_cast<double>(c) * c) * t);
      out.at(0, r, c) *= f;
      out.at(1, r, c) *= f;
    }
  }
  return SpectralVelocity::assume_solenoidal(std::move(out));
}

}  // namespace nstraj
