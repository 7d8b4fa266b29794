#include "nstraj/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace nstraj {

namespace {

// The FFTW planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Fft2d::Impl {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

Fft2d::Fft2d(int n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n <= 0) throw std::invalid_argument("fft size must be positive");
  std::lock_guard lock(planner_mutex());
  impl_->real = fftw_alloc_real(real_size());
  impl_->spec = fftw_alloc_complex(complex_size());
  if (impl_->real == nullptr || impl_->spec == nullptr) throw std::bad_alloc();
  // FFTW_ESTIMATE keeps plan choice, and hence rounding, identical run to run.
  impl_->forward = fftw_plan_dft_r2c_2d(n, n, impl_->real, impl_->spec, FFTW_ESTIMATE);
  impl_->backward = fftw_plan_dft_c2r_2d(n, n, impl_->spec, impl_->real, FFTW_ESTIMATE);
  if (impl_->forward == nullptr || impl_->backward == nullptr) {
    throw std::runtime_error("fftw planning failed");
  }
}

Fft2d::~Fft2d() {
  std::lock_guard lock(planner_mutex());
  if (impl_->forward) fftw_destroy_plan(impl_->forward);
  if (impl_->backward) fftw_destroy_plan(impl_->backward);
  fftw_free(impl_->real);
  fftw_free(impl_->spec);
}

std::size_t Fft2d::real_size() const noexcept {
  return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
}

std::size_t Fft2d::complex_size() const noexcept {
  return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_ / 2 + 1);
}

void Fft2d::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  if (in.size() != complex_size() || out.size() != real_size()) {
    throw std::invalid_argument("fft buffer size mismatch");
  }
  // c2r destroys its input, so always work on the owned buffer.
  std::memcpy(impl_->spec, in.data(), in.size_bytes());
  fftw_execute(impl_->backward);
  std::copy_n(impl_->real, real_size(), out.data());
}

void Fft2d::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  if (in.size() != real_size() || out.size() != complex_size()) {
    throw std::invalid_argument("fft buffer size mismatch");
  }
  std::copy_n(in.data(), real_size(), impl_->real);
  fftw_execute(impl_->forward);
  const double scale = 1.0 / static_cast<double>(real_size());
  const auto* src = reinterpret_cast<const std::complex<double>*>(impl_->spec);
  for (std::size_t i = 0; i < complex_size(); ++i) out[i] = src[i] * scale;
}

Fft2d& fft_for(int n) {
  thread_local std::map<int, std::unique_ptr<Fft2d>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fft2d>(n);
  return *slot;
}

}  // namespace nstraj
