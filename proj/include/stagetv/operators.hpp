#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "stagetv/grid.hpp"

namespace stagetv {

// Periodic first-order differences. x acts along columns (j), y along rows (i).

/// u(i, j+1) - u(i, j)
ImageGrid forward_diff_x(const ImageGrid& u);
/// u(i+1, j) - u(i, j)
ImageGrid forward_diff_y(const ImageGrid& u);
/// u(i, j) - u(i, j-1)
ImageGrid backward_diff_x(const ImageGrid& u);
/// u(i, j) - u(i-1, j)
ImageGrid backward_diff_y(const ImageGrid& u);

// Exact matrix transposes of the four stencils above.
ImageGrid forward_diff_x_transpose(const ImageGrid& p);
ImageGrid forward_diff_y_transpose(const ImageGrid& p);
ImageGrid backward_diff_x_transpose(const ImageGrid& p);
ImageGrid backward_diff_y_transpose(const ImageGrid& p);

/// First-order gradient (D_x^+ u, D_y^+ u).
GradientField grad(const ImageGrid& u);
/// Transpose of grad under row-major vectorization.
ImageGrid grad_adjoint(const GradientField& p);

/// Second-order gradient with channels
/// (D_x^- D_x^+ u, D_y^+ D_x^+ u, D_x^+ D_y^+ u, D_y^- D_y^+ u).
HessianField hessian(const ImageGrid& u);
/// Transpose of hessian under row-major vectorization.
ImageGrid hessian_adjoint(const HessianField& q);

/// Odd-sized square convolution kernel, taps row-major over offsets
/// [-(s-1)/2, (s-1)/2] in both directions.
class BlurKernel {
public:
  BlurKernel(std::size_t size, std::vector<double> taps);

  static BlurKernel identity() { return BlurKernel(1, {1.0}); }

  std::size_t size() const noexcept { return size_; }
  std::ptrdiff_t radius() const noexcept { return static_cast<std::ptrdiff_t>(size_ / 2); }
  /// Tap at offset (a, b), each in [-radius, radius].
  double tap(std::ptrdiff_t a, std::ptrdiff_t b) const noexcept {
    return taps_[static_cast<std::size_t>((a + radius()) * static_cast<std::ptrdiff_t>(size_) +
                                          (b + radius()))];
  }
  std::span<const double> taps() const noexcept { return taps_; }
  double sum() const noexcept;

private:
  std::size_t size_;
  std::vector<double> taps_;
};

/// Normalized sampled Gaussian, taps proportional to exp(-(a^2 + b^2) / (2 sigma^2)).
BlurKernel gaussian_kernel(std::size_t size, double sigma);

/// Periodic 2-D convolution: out(i,j) = sum_{a,b} k(a,b) u(i-a, j-b).
ImageGrid circular_convolve(const ImageGrid& u, const BlurKernel& k);

/// Per-bin complex multiplier of a circulant operator on an M x N lattice.
class FourierSymbol {
public:
  FourierSymbol(std::size_t rows, std::size_t cols, std::vector<std::complex<double>> bins);

  /// All-ones symbol of the identity operator.
  static FourierSymbol identity(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const std::complex<double>> bins() const noexcept { return bins_; }
  std::complex<double> operator()(std::size_t k, std::size_t l) const noexcept {
    return bins_[k * cols_ + l];
  }
  bool conformable(const ImageGrid& u) const noexcept {
    return u.rows() == rows_ && u.cols() == cols_;
  }
  /// True when every bin equals exactly 1 (lets callers skip transforms).
  bool is_identity() const noexcept;

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::complex<double>> bins_;
};

using LinearOperator = std::function<ImageGrid(const ImageGrid&)>;

/// Spectrum of the operator's response to the unit impulse at (0, 0). Only meaningful
/// for linear shift-invariant (circulant) operators; anything else yields a wrong
/// symbol without warning.
FourierSymbol operator_symbol(const LinearOperator& apply, std::size_t rows, std::size_t cols);

/// Symbol of circular_convolve(., k) with the kernel centre at the origin.
FourierSymbol kernel_symbol(const BlurKernel& k, std::size_t rows, std::size_t cols);

/// Apply a circulant operator via its symbol: Re F^{-1}(S . F(u)).
ImageGrid apply_symbol(const FourierSymbol& symbol, const ImageGrid& u);
/// Apply the transpose: Re F^{-1}(conj(S) . F(u)).
ImageGrid apply_symbol_adjoint(const FourierSymbol& symbol, const ImageGrid& u);

/// Per-channel symbols of grad.
std::array<FourierSymbol, 2> gradient_symbols(std::size_t rows, std::size_t cols);
/// Per-channel symbols of hessian.
std::array<FourierSymbol, 4> hessian_symbols(std::size_t rows, std::size_t cols);

} // namespace stagetv
