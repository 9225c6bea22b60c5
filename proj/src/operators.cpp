#include "stagetv/operators.hpp"

#include <cmath>
#include <string>

#include "stagetv/errors.hpp"
#include "stagetv/fft.hpp"

namespace stagetv {

namespace {

// Calls fn(i, j, i+1, i-1, j+1, j-1) with periodically wrapped neighbour indices.
template <typename Fn>
ImageGrid map_pixels(const ImageGrid& u, Fn&& fn) {
  ImageGrid out(u.rows(), u.cols());
  const std::size_t m = u.rows();
  const std::size_t n = u.cols();
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t ip = (i + 1) % m;
    const std::size_t im = (i + m - 1) % m;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t jp = (j + 1) % n;
      const std::size_t jm = (j + n - 1) % n;
      out(i, j) = fn(i, j, ip, im, jp, jm);
    }
  }
  return out;
}

} // namespace

ImageGrid forward_diff_x(const ImageGrid& u) {
  return map_pixels(u, [&](auto i, auto j, auto, auto, auto jp, auto) { return u(i, jp) - u(i, j); });
}

ImageGrid forward_diff_y(const ImageGrid& u) {
  return map_pixels(u, [&](auto i, auto j, auto ip, auto, auto, auto) { return u(ip, j) - u(i, j); });
}

ImageGrid backward_diff_x(const ImageGrid& u) {
  return map_pixels(u, [&](auto i, auto j, auto, auto, auto, auto jm) { return u(i, j) - u(i, jm); });
}

ImageGrid backward_diff_y(const ImageGrid& u) {
  return map_pixels(u, [&](auto i, auto j, auto, auto im, auto, auto) { return u(i, j) - u(im, j); });
}

ImageGrid forward_diff_x_transpose(const ImageGrid& p) {
  return map_pixels(p, [&](auto i, auto j, auto, auto, auto, auto jm) { return p(i, jm) - p(i, j); });
}

ImageGrid forward_diff_y_transpose(const ImageGrid& p) {
  return map_pixels(p, [&](auto i, auto j, auto, auto im, auto, auto) { return p(im, j) - p(i, j); });
}

ImageGrid backward_diff_x_transpose(const ImageGrid& p) {
  return map_pixels(p, [&](auto i, auto j, auto, auto, auto jp, auto) { return p(i, j) - p(i, jp); });
}

ImageGrid backward_diff_y_transpose(const ImageGrid& p) {
  return map_pixels(p, [&](auto i, auto j, auto ip, auto, auto, auto) { return p(i, j) - p(ip, j); });
}

GradientField grad(const ImageGrid& u) {
  return GradientField({forward_diff_x(u), forward_diff_y(u)});
}

ImageGrid grad_adjoint(const GradientField& p) {
  ImageGrid out = forward_diff_x_transpose(p.channel(0));
  out += forward_diff_y_transpose(p.channel(1));
  return out;
}

HessianField hessian(const ImageGrid& u) {
  const ImageGrid ux = forward_diff_x(u);
  const ImageGrid uy = forward_diff_y(u);
  return HessianField({backward_diff_x(ux), forward_diff_y(ux), forward_diff_x(uy),
                       backward_diff_y(uy)});
}

ImageGrid hessian_adjoint(const HessianField& q) {
  // (AB)^T = B^T A^T for each channel's composed stencil.
  ImageGrid out = forward_diff_x_transpose(backward_diff_x_transpose(q.channel(0)));
  out += forward_diff_x_transpose(forward_diff_y_transpose(q.channel(1)));
  out += forward_diff_y_transpose(forward_diff_x_transpose(q.channel(2)));
  out += forward_diff_y_transpose(backward_diff_y_transpose(q.channel(3)));
  return out;
}

BlurKernel::BlurKernel(std::size_t size, std::vector<double> taps)
    : size_(size), taps_(std::move(taps)) {
  if (size % 2 == 0) throw DomainError("BlurKernel: size must be odd, got " + std::to_string(size));
  if (taps_.size() != size * size) throw ShapeError("BlurKernel: expected size*size taps");
  for (double t : taps_) {
    if (!std::isfinite(t) || t < 0.0) throw DomainError("BlurKernel: taps must be finite and >= 0");
  }
  if (std::abs(sum() - 1.0) > 1e-12) throw DomainError("BlurKernel: taps must sum to 1");
}

double BlurKernel::sum() const noexcept {
  double s = 0.0;
  for (double t : taps_) s += t;
  return s;
}

BlurKernel gaussian_kernel(std::size_t size, double sigma) {
  if (size % 2 == 0) throw DomainError("gaussian_kernel: size must be odd, got " + std::to_string(size));
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("gaussian_kernel: sigma must be > 0");
  const auto r = static_cast<std::ptrdiff_t>(size / 2);
  std::vector<double> taps;
  taps.reserve(size * size);
  double total = 0.0;
  for (std::ptrdiff_t a = -r; a <= r; ++a) {
    for (std::ptrdiff_t b = -r; b <= r; ++b) {
      const double w = std::exp(-static_cast<double>(a * a + b * b) / (2.0 * sigma * sigma));
      taps.push_back(w);
      total += w;
    }
  }
  for (double& t : taps) t /= total;
  return BlurKernel(size, std::move(taps));
}

ImageGrid circular_convolve(const ImageGrid& u, const BlurKernel& k) {
  if (k.size() > u.rows() || k.size() > u.cols()) {
    throw DomainError("circular_convolve: " + std::to_string(k.size()) + "x" +
                      std::to_string(k.size()) + " kernel exceeds " + std::to_string(u.rows()) +
                      "x" + std::to_string(u.cols()) + " grid");
  }
  const auto r = k.radius();
  const auto m = static_cast<std::ptrdiff_t>(u.rows());
  const auto n = static_cast<std::ptrdiff_t>(u.cols());
  ImageGrid out(u.rows(), u.cols());
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::ptrdiff_t a = -r; a <= r; ++a) {
        const std::size_t row = periodic_index(i - a, u.rows());
        for (std::ptrdiff_t b = -r; b <= r; ++b) {
          acc += k.tap(a, b) * u(row, periodic_index(j - b, u.cols()));
        }
      }
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = acc;
    }
  }
  return out;
}

FourierSymbol::FourierSymbol(std::size_t rows, std::size_t cols,
                             std::vector<std::complex<double>> bins)
    : rows_(rows), cols_(cols), bins_(std::move(bins)) {
  if (bins_.size() != rows * cols) throw ShapeError("FourierSymbol: bin count mismatch");
}

FourierSymbol FourierSymbol::identity(std::size_t rows, std::size_t cols) {
  return FourierSymbol(rows, cols, std::vector<std::complex<double>>(rows * cols, 1.0));
}

bool FourierSymbol::is_identity() const noexcept {
  for (const auto& b : bins_) {
    if (b != std::complex<double>(1.0, 0.0)) return false;
  }
  return true;
}

FourierSymbol operator_symbol(const LinearOperator& apply, std::size_t rows, std::size_t cols) {
  ImageGrid delta(rows, cols);
  delta(0, 0) = 1.0;
  const ImageGrid response = apply(delta);
  require_conformable(delta, response, "operator_symbol");
  Fft2D fft(rows, cols);
  return FourierSymbol(rows, cols, fft.forward(response.values()));
}

FourierSymbol kernel_symbol(const BlurKernel& k, std::size_t rows, std::size_t cols) {
  if (k.size() > rows || k.size() > cols) throw DomainError("kernel_symbol: kernel exceeds grid");
  ImageGrid embedded(rows, cols);
  const auto r = k.radius();
  for (std::ptrdiff_t a = -r; a <= r; ++a) {
    for (std::ptrdiff_t b = -r; b <= r; ++b) {
      embedded(periodic_index(a, rows), periodic_index(b, cols)) += k.tap(a, b);
    }
  }
  Fft2D fft(rows, cols);
  return FourierSymbol(rows, cols, fft.forward(embedded.values()));
}

namespace {
ImageGrid apply_bins(const FourierSymbol& symbol, const ImageGrid& u, bool conjugate) {
  if (!symbol.conformable(u)) throw ShapeError("apply_symbol: symbol/grid shape mismatch");
  Fft2D fft(u.rows(), u.cols());
  auto spectrum = fft.forward(u.values());
  const auto bins = symbol.bins();
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    spectrum[k] *= conjugate ? std::conj(bins[k]) : bins[k];
  }
  ImageGrid out(u.rows(), u.cols());
  fft.inverse_real(spectrum, out.values());
  return out;
}
} // namespace

ImageGrid apply_symbol(const FourierSymbol& symbol, const ImageGrid& u) {
  return apply_bins(symbol, u, false);
}

ImageGrid apply_symbol_adjoint(const FourierSymbol& symbol, const ImageGrid& u) {
  return apply_bins(symbol, u, true);
}

std::array<FourierSymbol, 2> gradient_symbols(std::size_t rows, std::size_t cols) {
  return {operator_symbol(forward_diff_x, rows, cols), operator_symbol(forward_diff_y, rows, cols)};
}

std::array<FourierSymbol, 4> hessian_symbols(std::size_t rows, std::size_t cols) {
  auto channel = [](std::size_t c) {
    return [c](const ImageGrid& u) { return hessian(u).channel(c); };
  };
  return {operator_symbol(channel(0), rows, cols), operator_symbol(channel(1), rows, cols),
          operator_symbol(channel(2), rows, cols), operator_symbol(channel(3), rows, cols)};
}

} // namespace stagetv
