// Spectral representation of periodic 2D vector fields on [0, 2pi)^2.
//
// Coefficients follow u(x) = sum_k u_hat(k) exp(i k.x) over integer
// wavevectors k. Storage is the real-to-complex half plane: rows hold k1 in
// FFT order (0, 1, ..., N/2-1, -N/2, ..., -1), columns hold k2 = 0..N/2.
// Coefficients with k2 < 0 are implied by Hermitian symmetry. Nyquist modes
// (|k1| = N/2 or |k2| = N/2) are kept at zero in every field this library
// produces, so the trigonometric sum is a real function off the lattice too.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace nstraj {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x1, s * a.x2}; }
  friend bool operator==(Vec2, Vec2) = default;
  double norm() const { return std::hypot(x1, x2); }
};

/// Wraps a position onto the fundamental cell [0, 2pi)^2.
Vec2 wrap_to_torus(Vec2 p);

/// Integer wavevector set of an N x N collocation grid with period 2pi.
class WavenumberGrid {
 public:
  /// Throws std::invalid_argument unless N is even and 8 <= N <= 4096.
  explicit WavenumberGrid(int resolution);

  int resolution() const noexcept { return n_; }
  double period() const noexcept { return kTwoPi; }
  double spacing() const noexcept { return kTwoPi / n_; }

  int rows() const noexcept { return n_; }
  int columns() const noexcept { return n_ / 2 + 1; }
  std::size_t stored_modes() const noexcept {
    return static_cast<std::size_t>(rows()) * static_cast<std::size_t>(columns());
  }
  /// Number of wavevectors k with -N/2 <= k_i < N/2.
  std::size_t mode_count() const noexcept {
    return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
  }
  int min_wavenumber() const noexcept { return -n_ / 2; }
  int max_wavenumber() const noexcept { return n_ / 2 - 1; }

  int wavenumber_of_row(int row) const noexcept { return row < n_ / 2 ? row : row - n_; }
  int row_of(int k1) const noexcept { return k1 >= 0 ? k1 : k1 + n_; }
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(columns()) +
           static_cast<std::size_t>(col);
  }
  bool is_nyquist(int row, int col) const noexcept { return row == n_ / 2 || col == n_ / 2; }

  /// Number of full-plane wavevectors a stored slot stands for: 1 on the k2 = 0
  /// column (both k and -k are stored there), 2 elsewhere, 0 for Nyquist slots.
  double multiplicity(int row, int col) const noexcept {
    if (is_nyquist(row, col)) return 0.0;
    return col == 0 ? 1.0 : 2.0;
  }

  friend bool operator==(const WavenumberGrid&, const WavenumberGrid&) = default;

 private:
  int n_;
};

WavenumberGrid make_grid(int resolution);

/// Two-component spectral coefficients with no solenoidal guarantee.
class SpectralVector {
 public:
  explicit SpectralVector(WavenumberGrid grid);

  const WavenumberGrid& grid() const noexcept { return grid_; }

  std::span<Complex> component(int c) { return c == 0 ? std::span(c1_) : std::span(c2_); }
  std::span<const Complex> component(int c) const {
    return c == 0 ? std::span<const Complex>(c1_) : std::span<const Complex>(c2_);
  }

  Complex& at(int c, int row, int col) { return component(c)[grid_.index(row, col)]; }
  Complex at(int c, int row, int col) const { return component(c)[grid_.index(row, col)]; }

  /// Coefficient pair at any wavevector in the symmetric set; entries with
  /// k2 < 0 come from conjugation, Nyquist entries read as zero.
  std::array<Complex, 2> mode(int k1, int k2) const;

  /// Writes the coefficient at k together with its Hermitian partner at -k.
  /// Throws std::out_of_range for wavevectors outside the retained set
  /// (including Nyquist) and std::invalid_argument for a nonreal k = 0 entry.
  void set_mode(int k1, int k2, Complex a, Complex b);

  SpectralVector& operator+=(const SpectralVector& other);
  SpectralVector& operator-=(const SpectralVector& other);
  SpectralVector& operator*=(double s);
  /// this += s * other
  void axpy(double s, const SpectralVector& other);

  double max_abs_coefficient() const;
  bool all_finite() const;

 private:
  WavenumberGrid grid_;
  std::vector<Complex> c1_;
  std::vector<Complex> c2_;
};

/// Divergence-free, zero-mean spectral velocity.
///
/// Only produced by leray_project, by operators that commute with it, or by
/// assume_solenoidal when the caller already guarantees k.u_hat(k) = 0.
class SpectralVelocity {
 public:
  static SpectralVelocity zero(const WavenumberGrid& grid);
  static SpectralVelocity assume_solenoidal(SpectralVector v) { return SpectralVelocity(std::move(v)); }

  const SpectralVector& coefficients() const noexcept { return v_; }
  const WavenumberGrid& grid() const noexcept { return v_.grid(); }
  operator const SpectralVector&() const noexcept { return v_; }  // NOLINT

  /// Coefficient-wise linear combination a*this + b*other (stays solenoidal).
  SpectralVelocity combine(double a, double b, const SpectralVelocity& other) const;

 private:
  explicit SpectralVelocity(SpectralVector v) : v_(std::move(v)) {}
  SpectralVector v_;
};

/// Collocation samples: value at x = (i1, i2) * 2pi/N is stored at i1*N + i2.
struct PhysicalField {
  WavenumberGrid grid;
  std::vector<double> x1;
  std::vector<double> x2;

  explicit PhysicalField(WavenumberGrid g);
  std::span<double> component(int c) { return c == 0 ? std::span(x1) : std::span(x2); }
  std::span<const double> component(int c) const {
    return c == 0 ? std::span<const double>(x1) : std::span<const double>(x2);
  }
  Vec2 value(int i1, int i2) const;
  Vec2 position(int i1, int i2) const;
  double max_abs() const;
  /// (N^-2 sum_x |u(x)|^2)^(1/2)
  double lattice_rms() const;
};

PhysicalField transform_to_physical(const SpectralVector& u);
/// Forward transform normalized so that the coefficients reproduce the
/// samples. Nyquist content of the input is discarded.
SpectralVector transform_to_spectral(const PhysicalField& v);

/// u_hat -> u_hat - (k.u_hat / |k|^2) k per mode; the k = 0 mode is zeroed.
SpectralVelocity leray_project(SpectralVector v);

inline constexpr double kMaxDerivativeOrder = 4.0;

/// Multiplier |k|^s (D^s = A^(s/2)). Requires 0 <= s <= 4.
SpectralVelocity fractional_derivative(const SpectralVelocity& u, double s);

/// ||D^s u|| in the L^2(Omega) integral scaling:
/// 2pi * (sum_k |k|^(2s) |u_hat(k)|^2)^(1/2). Requires 0 <= s <= 4.
double sobolev_norm(const SpectralVector& u, double s);

/// (sum_k |u_hat|^2 (1+|k|^2)^2 / log(e+|k|^2)^r)^(1/2) over retained modes.
double h2minus_norm(const SpectralVector& u, double r);

/// Log-Lipschitz weight W(u) = (sum_k (1+|k|^4) |u_hat(k)|^2)^(1/2), the
/// H^{1+d/2} weight (1+|k|^{2+d}) for d = 2.
double loglip_weight(const SpectralVector& u);

/// max_k |k.u_hat(k)|
double max_divergence(const SpectralVector& u);

/// Random rough velocity with |u_hat(k)| = |k|^(-1-decay) before projection.
/// Each wavevector draws its phase and direction from its own seeded stream,
/// so a field at resolution 2N extends the field at N with the same seed.
/// Requires 0 < decay <= 1.
SpectralVelocity synthesize_rough_field(const WavenumberGrid& grid, double decay, std::uint64_t seed);

/// amplitude * (sin x1 cos x2, -cos x1 sin x2)
SpectralVelocity taylor_green(const WavenumberGrid& grid, double amplitude = 1.0);

/// Exact trigonometric-sum evaluator for many points against one field.
///
/// Holds the coefficients transposed into column-major split real/imaginary
/// arrays so the per-point accumulation over k1 vectorizes without
/// reassociating any floating-point sum.
class PointEvaluator {
 public:
  explicit PointEvaluator(const SpectralVector& u);

  const WavenumberGrid& grid() const noexcept { return grid_; }
  Vec2 velocity(Vec2 x) const;
  /// u(x) - u(y) summed as u_hat(k) e^{ik.m} 2i sin(k.d/2) with m the
  /// midpoint and d = x - y, which stays accurate for tiny separations.
  Vec2 difference(Vec2 x, Vec2 y) const;
  /// difference(x[i], y[i]) for every i; pairs share passes over the
  /// coefficients, which is much faster than repeated single calls.
  std::vector<Vec2> differences(std::span<const Vec2> x, std::span<const Vec2> y) const;

 private:
  WavenumberGrid grid_;
  int rows_;
  int cols_;
  int stride_;  // rows_ rounded up to a multiple of 4, zero padded
  // [component][col * stride + row]
  std::array<std::vector<double>, 2> re_;
  std::array<std::vector<double>, 2> im_;
};

/// Exact trigonometric-sum evaluation at arbitrary points.
std::vector<Vec2> evaluate_velocity(const SpectralVector& u, std::span<const Vec2> points);
Vec2 evaluate_velocity(const SpectralVector& u, Vec2 point);

/// Single-shot PointEvaluator::difference.
Vec2 velocity_difference(const SpectralVector& u, Vec2 x, Vec2 y);

}  // namespace nstraj
