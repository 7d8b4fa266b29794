#include "nstraj/spectral_field.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>

#include "nstraj/fft.hpp"

namespace nstraj {

namespace {

void require_same_grid(const WavenumberGrid& a, const WavenumberGrid& b) {
  if (!(a == b)) throw std::invalid_argument("grid mismatch");
}

void require_derivative_order(double s) {
  if (!(s >= 0.0 && s <= kMaxDerivativeOrder)) {
    throw std::invalid_argument("derivative order must lie in [0, 4], got " + std::to_string(s));
  }
}

// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
double unit_interval(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace

Vec2 wrap_to_torus(Vec2 p) {
  auto wrap = [](double v) {
    double w = std::fmod(v, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
  };
  return {wrap(p.x1), wrap(p.x2)};
}

WavenumberGrid::WavenumberGrid(int resolution) : n_(resolution) {
  if (resolution % 2 != 0) throw std::invalid_argument("resolution must be even");
  if (resolution < 8 || resolution > 4096) {
    throw std::invalid_argument("resolution must lie in [8, 4096], got " + std::to_string(resolution));
  }
}

WavenumberGrid make_grid(int resolution) { return WavenumberGrid(resolution); }

SpectralVector::SpectralVector(WavenumberGrid grid)
    : grid_(grid), c1_(grid.stored_modes()), c2_(grid.stored_modes()) {}

std::array<Complex, 2> SpectralVector::mode(int k1, int k2) const {
  const int half = grid_.resolution() / 2;
  bool conj = false;
  if (k2 < 0) {
    k1 = -k1;
    k2 = -k2;
    conj = true;
  }
  if (k1 <= -half || k1 >= half || k2 >= half) return {Complex{}, Complex{}};
  const auto i = grid_.index(grid_.row_of(k1), k2);
  if (conj) return {std::conj(c1_[i]), std::conj(c2_[i])};
  return {c1_[i], c2_[i]};
}

void SpectralVector::set_mode(int k1, int k2, Complex a, Complex b) {
  const int half = grid_.resolution() / 2;
  if (std::abs(k1) >= half || std::abs(k2) >= half) {
    throw std::out_of_range("wavevector outside the retained set");
  }
  if (k2 < 0 || (k2 == 0 && k1 < 0)) {
    k1 = -k1;
    k2 = -k2;
    a = std::conj(a);
    b = std::conj(b);
  }
  if (k1 == 0 && k2 == 0 && (a.imag() != 0.0 || b.imag() != 0.0)) {
    throw std::invalid_argument("mean mode of a real field must be real");
  }
  const auto i = grid_.index(grid_.row_of(k1), k2);
  c1_[i] = a;
  c2_[i] = b;
  if (k2 == 0) {
    const auto j = grid_.index(grid_.row_of(-k1), 0);
    c1_[j] = std::conj(a);
    c2_[j] = std::conj(b);
  }
}

SpectralVector& SpectralVector::operator+=(const SpectralVector& other) {
  axpy(1.0, other);
  return *this;
}

SpectralVector& SpectralVector::operator-=(const SpectralVector& other) {
  axpy(-1.0, other);
  return *this;
}

SpectralVector& SpectralVector::operator*=(double s) {
  for (auto& z : c1_) z *= s;
  for (auto& z : c2_) z *= s;
  return *this;
}

void SpectralVector::axpy(double s, const SpectralVector& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < c1_.size(); ++i) {
    c1_[i] += s * other.c1_[i];
    c2_[i] += s * other.c2_[i];
  }
}

double SpectralVector::max_abs_coefficient() const {
  double m = 0.0;
  for (std::size_t i = 0; i < c1_.size(); ++i) m = std::max({m, std::abs(c1_[i]), std::abs(c2_[i])});
  return m;
}

bool SpectralVector::all_finite() const {
  auto finite = [](Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
  return std::all_of(c1_.begin(), c1_.end(), finite) && std::all_of(c2_.begin(), c2_.end(), finite);
}

SpectralVelocity SpectralVelocity::zero(const WavenumberGrid& grid) {
  return SpectralVelocity(SpectralVector(grid));
}

SpectralVelocity SpectralVelocity::combine(double a, double b, const SpectralVelocity& other) const {
  SpectralVector out = v_;
  out *= a;
  out.axpy(b, other.v_);
  return SpectralVelocity(std::move(out));
}

PhysicalField::PhysicalField(WavenumberGrid g)
    : grid(g), x1(g.mode_count()), x2(g.mode_count()) {}

Vec2 PhysicalField::value(int i1, int i2) const {
  const auto i = static_cast<std::size_t>(i1) * static_cast<std::size_t>(grid.resolution()) +
                 static_cast<std::size_t>(i2);
  return {x1[i], x2[i]};
}

Vec2 PhysicalField::position(int i1, int i2) const {
  return {i1 * grid.spacing(), i2 * grid.spacing()};
}

double PhysicalField::max_abs() const {
  double m = 0.0;
  for (std::size_t i = 0; i < x1.size(); ++i) m = std::max(m, std::hypot(x1[i], x2[i]));
  return m;
}

double PhysicalField::lattice_rms() const {
  double s = 0.0;
  for (std::size_t i = 0; i < x1.size(); ++i) s += x1[i] * x1[i] + x2[i] * x2[i];
  return std::sqrt(s / static_cast<double>(x1.size()));
}

PhysicalField transform_to_physical(const SpectralVector& u) {
  PhysicalField out(u.grid());
  auto& fft = fft_for(u.grid().resolution());
  for (int c = 0; c < 2; ++c) fft.inverse(u.component(c), out.component(c));
  return out;
}

SpectralVector transform_to_spectral(const PhysicalField& v) {
  SpectralVector out(v.grid);
  auto& fft = fft_for(v.grid.resolution());
  const auto& g = v.grid;
  for (int c = 0; c < 2; ++c) {
    auto dst = out.component(c);
    fft.forward(v.component(c), dst);
    for (int r = 0; r < g.rows(); ++r) {
      for (int col = 0; col < g.columns(); ++col) {
        if (g.is_nyquist(r, col)) dst[g.index(r, col)] = Complex{};
      }
    }
  }
  return out;
}

SpectralVelocity leray_project(SpectralVector v) {
  const auto& g = v.grid();
  auto a = v.component(0);
  auto b = v.component(1);
  for (int r = 0; r < g.rows(); ++r) {
    const double k1 = g.wavenumber_of_row(r);
    for (int c = 0; c < g.columns(); ++c) {
      const auto i = g.index(r, c);
      const double k2 = c;
      const double kk = k1 * k1 + k2 * k2;
      if (kk == 0.0 || g.is_nyquist(r, c)) {
        a[i] = Complex{};
        b[i] = Complex{};
        continue;
      }
      const Complex along = (k1 * a[i] + k2 * b[i]) / kk;
      a[i] -= along * k1;
      b[i] -= along * k2;
    }
  }
  return SpectralVelocity::assume_solenoidal(std::move(v));
}

SpectralVelocity fractional_derivative(const SpectralVelocity& u, double s) {
  require_derivative_order(s);
  SpectralVector out = u.coefficients();
  const auto& g = out.grid();
  auto a = out.component(0);
  auto b = out.component(1);
  for (int r = 0; r < g.rows(); ++r) {
    const double k1 = g.wavenumber_of_row(r);
    for (int c = 0; c < g.columns(); ++c) {
      const auto i = g.index(r, c);
      const double kk = k1 * k1 + static_cast<double>(c) * c;
      const double m = kk == 0.0 ? 0.0 : std::pow(kk, 0.5 * s);
      a[i] *= m;
      b[i] *= m;
    }
  }
  return SpectralVelocity::assume_solenoidal(std::move(out));
}

double sobolev_norm(const SpectralVector& u, double s) {
  require_derivative_order(s);
  const auto& g = u.grid();
  const auto a = u.component(0);
  const auto b = u.component(1);
  double sum = 0.0;
  for (int r = 0; r < g.rows(); ++r) {
    const double k1 = g.wavenumber_of_row(r);
    for (int c = 0; c < g.columns(); ++c) {
      const auto i = g.index(r, c);
      const double kk = k1 * k1 + static_cast<double>(c) * c;
      const double w = g.multiplicity(r, c) * std::pow(kk, s);
      sum += w * (std::norm(a[i]) + std::norm(b[i]));
    }
  }
  return kTwoPi * std::sqrt(sum);
}

double h2minus_norm(const SpectralVector& u, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("h2minus exponent r must be positive");
  const auto& g = u.grid();
  const auto a = u.component(0);
  const auto b = u.component(1);
  double sum = 0.0;
  for (int row = 0; row < g.rows(); ++row) {
    const double k1 = g.wavenumber_of_row(row);
    for (int c = 0; c < g.columns(); ++c) {
      const auto i = g.index(row, c);
      const double kk = k1 * k1 + static_cast<double>(c) * c;
      const double w = g.multiplicity(row, c) * (1.0 + kk) * (1.0 + kk) /
                       std::pow(std::log(std::numbers::e + kk), r);
      sum += w * (std::norm(a[i]) + std::norm(b[i]));
    }
  }
  return std::sqrt(sum);
}

double loglip_weight(const SpectralVector& u) {
  const auto& g = u.grid();
  const auto a = u.component(0);
  const auto b = u.component(1);
  double sum = 0.0;
  for (int r = 0; r < g.rows(); ++r) {
    const double k1 = g.wavenumber_of_row(r);
    for (int c = 0; c < g.columns(); ++c) {
      const auto i = g.index(r, c);
      const double kk = k1 * k1 + static_cast<double>(c) * c;
      sum += g.multiplicity(r, c) * (1.0 + kk * kk) * (std::norm(a[i]) + std::norm(b[i]));
    }
  }
  return std::sqrt(sum);
}

double max_divergence(const SpectralVector& u) {
  const auto& g = u.grid();
  double m = 0.0;
  for (int r = 0; r < g.rows(); ++r) {
    const double k1 = g.wavenumber_of_row(r);
    for (int c = 0; c < g.columns(); ++c) {
      const auto i = g.index(r, c);
      m = std::max(m, std::abs(k1 * u.component(0)[i] + static_cast<double>(c) * u.component(1)[i]));
    }
  }
  return m;
}

SpectralVelocity synthesize_rough_field(const WavenumberGrid& grid, double decay, std::uint64_t seed) {
  if (!(decay > 0.0 && decay <= 1.0)) throw std::invalid_argument("decay must lie in (0, 1]");
  SpectralVector v(grid);
  const int half = grid.resolution() / 2;
  const auto lo = static_cast<std::uint32_t>(seed & 0xffffffffu);
  const auto hi = static_cast<std::uint32_t>(seed >> 32);
  for (int k1 = -half + 1; k1 < half; ++k1) {
    for (int k2 = 0; k2 < half; ++k2) {
      if (k2 == 0 && k1 <= 0) continue;  // canonical half plane
      std::seed_seq seq{lo, hi, static_cast<std::uint32_t>(k1 + 65536), static_cast<std::uint32_t>(k2)};
      std::mt19937_64 gen(seq);
      const double phase = kTwoPi * unit_interval(gen());
      const double angle = kTwoPi * unit_interval(gen());
      const double amp = std::pow(static_cast<double>(k1 * k1 + k2 * k2), -0.5 * (1.0 + decay));
      const Complex z = std::polar(amp, phase);
      v.set_mode(k1, k2, z * std::cos(angle), z * std::sin(angle));
    }
  }
  return leray_project(std::move(v));
}

SpectralVelocity taylor_green(const WavenumberGrid& grid, double amplitude) {
  SpectralVector v(grid);
  const Complex q{0.0, 0.25 * amplitude};
  v.set_mode(1, 1, -q, q);
  v.set_mode(-1, 1, q, q);
  return SpectralVelocity::assume_solenoidal(std::move(v));
}

PointEvaluator::PointEvaluator(const SpectralVector& u)
    : grid_(u.grid()), rows_(u.grid().rows()), cols_(u.grid().columns()), stride_((rows_ + 3) / 4 * 4) {
  const auto size = static_cast<std::size_t>(stride_) * static_cast<std::size_t>(cols_);
  for (int comp = 0; comp < 2; ++comp) {
    re_[comp].assign(size, 0.0);
    im_[comp].assign(size, 0.0);
    const auto src = u.component(comp);
    for (int r = 0; r < rows_; ++r) {
      for (int c = 0; c < cols_; ++c) {
        const double w = grid_.multiplicity(r, c);
        const auto dst = static_cast<std::size_t>(c) * static_cast<std::size_t>(stride_) + static_cast<std::size_t>(r);
        re_[comp][dst] = w * src[grid_.index(r, c)].real();
        im_[comp][dst] = w * src[grid_.index(r, c)].imag();
      }
    }
  }
}

namespace {

// acc[r] += u[col][r] * p for every row; independent accumulators per row
// keep the loop free of reductions.
inline void accumulate(const double* ur, const double* ui, double pr, double pi, double* ar, double* ai, int rows) {
  for (int r = 0; r < rows; ++r) {
    ar[r] += ur[r] * pr - ui[r] * pi;
    ai[r] += ur[r] * pi + ui[r] * pr;
  }
}

}  // namespace

Vec2 PointEvaluator::velocity(Vec2 x) const {
  const auto nr = static_cast<std::size_t>(rows_);
  std::vector<double> acc(4 * nr, 0.0);
  double* a1r = acc.data();
  double* a1i = a1r + nr;
  double* a2r = a1i + nr;
  double* a2i = a2r + nr;
  for (int c = 0; c < cols_; ++c) {
    const double pr = std::cos(c * x.x2);
    const double pi = std::sin(c * x.x2);
    const auto off = static_cast<std::size_t>(c) * static_cast<std::size_t>(stride_);
    accumulate(&re_[0][off], &im_[0][off], pr, pi, a1r, a1i, rows_);
    accumulate(&re_[1][off], &im_[1][off], pr, pi, a2r, a2i, rows_);
  }
  double v1 = 0.0;
  double v2 = 0.0;
  for (int r = 0; r < rows_; ++r) {
    const double phase = grid_.wavenumber_of_row(r) * x.x1;
    const double er = std::cos(phase);
    const double ei = std::sin(phase);
    v1 += er * a1r[r] - ei * a1i[r];
    v2 += er * a2r[r] - ei * a2i[r];
  }
  return {v1, v2};
}

Vec2 PointEvaluator::difference(Vec2 x, Vec2 y) const {
  const Vec2 mid = 0.5 * (x + y);
  const Vec2 half_d = 0.5 * (x - y);
  const auto nr = static_cast<std::size_t>(rows_);
  // Per component: A = sum_col u e^{i k2 m2} cos(k2 h2), B = ... sin(k2 h2).
  std::vector<double> acc(8 * nr, 0.0);
  double* p[8];
  for (std::size_t j = 0; j < 8; ++j) p[j] = acc.data() + j * nr;
  for (int c = 0; c < cols_; ++c) {
    const double er = std::cos(c * mid.x2);
    const double ei = std::sin(c * mid.x2);
    const double cs = std::cos(c * half_d.x2);
    const double sn = std::sin(c * half_d.x2);
    const auto off = static_cast<std::size_t>(c) * static_cast<std::size_t>(stride_);
    for (int comp = 0; comp < 2; ++comp) {
      const double* ur = &re_[comp][off];
      const double* ui = &im_[comp][off];
      accumulate(ur, ui, er * cs, ei * cs, p[4 * comp], p[4 * comp + 1], rows_);
      accumulate(ur, ui, er * sn, ei * sn, p[4 * comp + 2], p[4 * comp + 3], rows_);
    }
  }
  double out[2] = {0.0, 0.0};
  for (int r = 0; r < rows_; ++r) {
    const int k1 = grid_.wavenumber_of_row(r);
    const double er = std::cos(k1 * mid.x1);
    const double ei = std::sin(k1 * mid.x1);
    const double sa = std::sin(k1 * half_d.x1);
    const double ca = std::cos(k1 * half_d.x1);
    for (int comp = 0; comp < 2; ++comp) {
      // sin(k.d/2) = sin(a1) cos(a2) + cos(a1) sin(a2)
      const double zr = sa * p[4 * comp][r] + ca * p[4 * comp + 2][r];
      const double zi = sa * p[4 * comp + 1][r] + ca * p[4 * comp + 3][r];
      // Re(2i * e * z) = -2 Im(e * z)
      out[comp] += -2.0 * (er * zi + ei * zr);
    }
  }
  return {out[0], out[1]};
}

std::vector<Vec2> PointEvaluator::differences(std::span<const Vec2> xs, std::span<const Vec2> ys) const {
  if (xs.size() != ys.size()) throw std::invalid_argument("point lists differ in length");
  constexpr int P = 3;  // pairs per pass
  constexpr int R = 4;  // rows per register block
  const auto ns = static_cast<std::size_t>(stride_);
  std::vector<Vec2> out(xs.size(), Vec2{0.0, 0.0});
  // w[(c * P + j) * 4 + {0,1,2,3}] = re/im of e^{i c m2} cos(c h2), e^{i c m2} sin(c h2)
  std::vector<double> w(static_cast<std::size_t>(cols_) * P * 4);
  std::vector<double> rowf(static_cast<std::size_t>(stride_) * P * 4);
  for (std::size_t base = 0; base < xs.size(); base += P) {
    const int np = static_cast<int>(std::min<std::size_t>(P, xs.size() - base));
    std::fill(w.begin(), w.end(), 0.0);
    for (int j = 0; j < np; ++j) {
      const Vec2 mid = 0.5 * (xs[base + j] + ys[base + j]);
      const Vec2 half_d = 0.5 * (xs[base + j] - ys[base + j]);
      for (int c = 0; c < cols_; ++c) {
        const double er = std::cos(c * mid.x2);
        const double ei = std::sin(c * mid.x2);
        const double cs = std::cos(c * half_d.x2);
        const double sn = std::sin(c * half_d.x2);
        double* q = &w[(static_cast<std::size_t>(c) * P + j) * 4];
        q[0] = er * cs;
        q[1] = ei * cs;
        q[2] = er * sn;
        q[3] = ei * sn;
      }
      for (int r = 0; r < rows_; ++r) {
        const int k1 = grid_.wavenumber_of_row(r);
        double* f = &rowf[(static_cast<std::size_t>(r) * P + j) * 4];
        f[0] = std::cos(k1 * mid.x1);
        f[1] = std::sin(k1 * mid.x1);
        f[2] = std::sin(k1 * half_d.x1);
        f[3] = std::cos(k1 * half_d.x1);
      }
    }
    for (int comp = 0; comp < 2; ++comp) {
      const double* ure = re_[comp].data();
      const double* uim = im_[comp].data();
      for (int r0 = 0; r0 < rows_; r0 += R) {
        // acc[j][0..3][rr]: re A, im A, re B, im B
        double acc[P][4][R] = {};
        for (int c = 0; c < cols_; ++c) {
          const double* ur = ure + static_cast<std::size_t>(c) * ns + static_cast<std::size_t>(r0);
          const double* ui = uim + static_cast<std::size_t>(c) * ns + static_cast<std::size_t>(r0);
          const double* q = &w[static_cast<std::size_t>(c) * P * 4];
          for (int j = 0; j < P; ++j) {
            const double ar = q[4 * j], ai = q[4 * j + 1], br = q[4 * j + 2], bi = q[4 * j + 3];
            for (int rr = 0; rr < R; ++rr) {
              acc[j][0][rr] += ur[rr] * ar - ui[rr] * ai;
              acc[j][1][rr] += ur[rr] * ai + ui[rr] * ar;
              acc[j][2][rr] += ur[rr] * br - ui[rr] * bi;
              acc[j][3][rr] += ur[rr] * bi + ui[rr] * br;
            }
          }
        }
        for (int j = 0; j < np; ++j) {
          double sum = 0.0;
          for (int rr = 0; rr < R && r0 + rr < rows_; ++rr) {
            const double* f = &rowf[(static_cast<std::size_t>(r0 + rr) * P + j) * 4];
            const double zr = f[2] * acc[j][0][rr] + f[3] * acc[j][2][rr];
            const double zi = f[2] * acc[j][1][rr] + f[3] * acc[j][3][rr];
            sum += -2.0 * (f[0] * zi + f[1] * zr);
          }
          (comp == 0 ? out[base + j].x1 : out[base + j].x2) += sum;
        }
      }
    }
  }
  return out;
}

Vec2 evaluate_velocity(const SpectralVector& u, Vec2 point) { return PointEvaluator(u).velocity(point); }

std::vector<Vec2> evaluate_velocity(const SpectralVector& u, std::span<const Vec2> points) {
  const PointEvaluator eval(u);
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(eval.velocity(p));
  return out;
}

Vec2 velocity_difference(const SpectralVector& u, Vec2 x, Vec2 y) { return PointEvaluator(u).difference(x, y); }

}  // namespace nstraj
