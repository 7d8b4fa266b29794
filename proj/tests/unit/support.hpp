#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "nstraj/random.hpp"
#include "nstraj/spectral_field.hpp"

namespace nstraj::testing {

inline constexpr double kPi = std::numbers::pi;

// Samples f on the collocation lattice and transforms.
inline SpectralVector from_function(const WavenumberGrid& g, const std::function<Vec2(double, double)>& f) {
  PhysicalField p(g);
  for (int i1 = 0; i1 < g.resolution(); ++i1) {
    for (int i2 = 0; i2 < g.resolution(); ++i2) {
      const Vec2 x = p.position(i1, i2);
      const Vec2 v = f(x.x1, x.x2);
      const auto idx = static_cast<std::size_t>(i1 * g.resolution() + i2);
      p.x1[idx] = v.x1;
      p.x2[idx] = v.x2;
    }
  }
  return transform_to_spectral(p);
}

// (sin(m x2), 0)
inline SpectralVelocity shear(const WavenumberGrid& g, int m = 1, double amp = 1.0) {
  SpectralVector v(g);
  v.set_mode(0, m, Complex(0.0, -0.5 * amp), 0.0);
  return SpectralVelocity::assume_solenoidal(v);
}

// Random coefficients with |k| <= kmax, no solenoidal constraint.
inline SpectralVector random_vector(const WavenumberGrid& g, std::uint64_t seed, int kmax = 1000) {
  std::mt19937_64 gen(seed);
  SpectralVector v(g);
  for (int k1 = g.min_wavenumber() + 1; k1 <= g.max_wavenumber(); ++k1) {
    for (int k2 = 0; k2 <= g.max_wavenumber(); ++k2) {
      if (k2 == 0 && k1 < 0) continue;
      if (k1 == 0 && k2 == 0) continue;
      if (k1 * k1 + k2 * k2 > kmax * kmax) continue;
      auto c = [&] { return Complex(2.0 * uniform01(gen) - 1.0, 2.0 * uniform01(gen) - 1.0); };
      const Complex a = c();
      const Complex b = c();
      v.set_mode(k1, k2, a, b);
    }
  }
  return v;
}

inline SpectralVelocity random_velocity(const WavenumberGrid& g, std::uint64_t seed, int kmax = 1000) {
  return leray_project(random_vector(g, seed, kmax));
}

inline double max_coefficient_difference(const SpectralVector& a, const SpectralVector& b) {
  double d = 0.0;
  for (int c = 0; c < 2; ++c) {
    const auto x = a.component(c);
    const auto y = b.component(c);
    for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  }
  return d;
}

}  // namespace nstraj::testing
