#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace stagetv {

/// Unnormalized forward / normalized inverse 2-D complex DFT of a fixed M x N size,
/// backed by FFTW with estimate-mode plans (deterministic for a fixed size).
///
/// Not thread-safe per instance; distinct instances may run concurrently.
class Fft2D {
public:
  Fft2D(std::size_t rows, std::size_t cols);
  ~Fft2D();
  Fft2D(Fft2D&&) noexcept;
  Fft2D& operator=(Fft2D&&) noexcept;
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  /// out[k] = sum_x in[x] exp(-2 pi i <k, x>), row-major bins.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  /// Real part of the inverse transform, scaled by 1/(M N).
  void inverse_real(std::span<const std::complex<double>> in, std::span<double> out);

  std::vector<std::complex<double>> forward(std::span<const double> in);

private:
  struct Impl;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::unique_ptr<Impl> impl_;
};

} // namespace stagetv
