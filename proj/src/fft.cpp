#include "stagetv/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

#include "stagetv/errors.hpp"

namespace stagetv {

namespace {
// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
} // namespace

struct Fft2D::Impl {
  fftw_complex* buffer = nullptr;
  fftw_plan forward_plan = nullptr;
  fftw_plan inverse_plan = nullptr;

  Impl(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) throw DomainError("Fft2D: empty transform size");
    const std::size_t n = rows * cols;
    std::lock_guard lock(planner_mutex());
    buffer = fftw_alloc_complex(n);
    if (buffer == nullptr) throw std::bad_alloc();
    const int m = static_cast<int>(rows);
    const int k = static_cast<int>(cols);
    forward_plan = fftw_plan_dft_2d(m, k, buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE);
    inverse_plan = fftw_plan_dft_2d(m, k, buffer, buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_plan);
    fftw_destroy_plan(inverse_plan);
    fftw_free(buffer);
  }
};

Fft2D::Fft2D(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), impl_(std::make_unique<Impl>(rows, cols)) {}

Fft2D::~Fft2D() = default;
Fft2D::Fft2D(Fft2D&&) noexcept = default;
Fft2D& Fft2D::operator=(Fft2D&&) noexcept = default;

void Fft2D::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  const std::size_t n = rows_ * cols_;
  if (in.size() != n || out.size() != n) throw ShapeError("Fft2D::forward: size mismatch");
  for (std::size_t k = 0; k < n; ++k) {
    impl_->buffer[k][0] = in[k];
    impl_->buffer[k][1] = 0.0;
  }
  fftw_execute(impl_->forward_plan);
  for (std::size_t k = 0; k < n; ++k) out[k] = {impl_->buffer[k][0], impl_->buffer[k][1]};
}

void Fft2D::inverse_real(std::span<const std::complex<double>> in, std::span<double> out) {
  const std::size_t n = rows_ * cols_;
  if (in.size() != n || out.size() != n) throw ShapeError("Fft2D::inverse_real: size mismatch");
  for (std::size_t k = 0; k < n; ++k) {
    impl_->buffer[k][0] = in[k].real();
    impl_->buffer[k][1] = in[k].imag();
  }
  fftw_execute(impl_->inverse_plan);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = impl_->buffer[k][0] * scale;
}

std::vector<std::complex<double>> Fft2D::forward(std::span<const double> in) {
  std::vector<std::complex<double>> out(rows_ * cols_);
  forward(in, out);
  return out;
}

} // namespace stagetv
