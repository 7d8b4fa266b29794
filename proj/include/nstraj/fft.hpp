// Thin RAII wrapper over FFTW real-to-complex transforms on square grids.
#pragma once

#include <complex>
#include <memory>
#include <span>

namespace nstraj {

class Fft2d {
 public:
  explicit Fft2d(int n);
  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  int size() const noexcept { return n_; }
  std::size_t real_size() const noexcept;
  std::size_t complex_size() const noexcept;

  /// Unnormalized backward transform: out(x) = sum_k in(k) e^{+ik.x}.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);
  /// Forward transform scaled by 1/n^2.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);

 private:
  struct Impl;
  int n_;
  std::unique_ptr<Impl> impl_;
};

/// Per-thread cached transform of size n. Planning is serialized internally.
Fft2d& fft_for(int n);

}  // namespace nstraj
