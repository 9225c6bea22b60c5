#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace stagetv {

/// Wrap a signed index onto [0, len). Throws DomainError when len == 0.
std::size_t periodic_index(std::ptrdiff_t i, std::size_t len);

/// Dense row-major M x N lattice of 64-bit intensities; (i, j) = (row, col).
class ImageGrid {
public:
  ImageGrid() = default;
  ImageGrid(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of row-major `values`; rejects non-finite entries.
  ImageGrid(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  double& operator[](std::size_t k) noexcept { return data_[k]; }
  double operator[](std::size_t k) const noexcept { return data_[k]; }

  /// Periodic access.
  double wrapped(std::ptrdiff_t i, std::ptrdiff_t j) const;

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool conformable(const ImageGrid& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const noexcept;
  double norm() const noexcept;

  ImageGrid& operator+=(const ImageGrid& rhs);
  ImageGrid& operator-=(const ImageGrid& rhs);
  ImageGrid& operator*=(double s) noexcept;

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

ImageGrid operator+(ImageGrid lhs, const ImageGrid& rhs);
ImageGrid operator-(ImageGrid lhs, const ImageGrid& rhs);
ImageGrid operator*(double s, ImageGrid rhs);

/// Throws ShapeError unless a and b have identical (rows, cols).
void require_conformable(const ImageGrid& a, const ImageGrid& b, const char* what);

double inner_product(const ImageGrid& a, const ImageGrid& b);

/// max |a - b| over all pixels.
double linf_distance(const ImageGrid& a, const ImageGrid& b);

/// Per-pixel vector field with C channels, stored as C conformable planes.
template <std::size_t C>
class PixelField {
public:
  static constexpr std::size_t channel_count = C;

  PixelField() = default;
  PixelField(std::size_t rows, std::size_t cols) {
    for (auto& plane : planes_) plane = ImageGrid(rows, cols);
  }
  explicit PixelField(std::array<ImageGrid, C> planes);

  std::size_t rows() const noexcept { return planes_[0].rows(); }
  std::size_t cols() const noexcept { return planes_[0].cols(); }
  std::size_t pixels() const noexcept { return planes_[0].size(); }

  ImageGrid& channel(std::size_t c) noexcept { return planes_[c]; }
  const ImageGrid& channel(std::size_t c) const noexcept { return planes_[c]; }

  bool conformable(const ImageGrid& g) const noexcept { return planes_[0].conformable(g); }
  bool conformable(const PixelField& other) const noexcept {
    return planes_[0].conformable(other.planes_[0]);
  }

  /// Euclidean norm of the channel vector at flat pixel index k.
  double pixel_magnitude(std::size_t k) const noexcept;
  /// Sum over pixels of pixel_magnitude (the isotropic L1-of-L2 norm).
  double magnitude_sum() const noexcept;
  /// Frobenius norm over all channels.
  double norm() const noexcept;
  bool all_finite() const noexcept;

  PixelField& operator+=(const PixelField& rhs);
  PixelField& operator-=(const PixelField& rhs);
  PixelField& operator*=(double s) noexcept;

  friend bool operator==(const PixelField&, const PixelField&) = default;

private:
  std::array<ImageGrid, C> planes_;
};

/// (x-difference, y-difference) per pixel.
using GradientField = PixelField<2>;
/// (xx, yx, xy, yy) second differences per pixel.
using HessianField = PixelField<4>;

template <std::size_t C>
double inner_product(const PixelField<C>& a, const PixelField<C>& b);

extern template class PixelField<2>;
extern template class PixelField<4>;
extern template double inner_product<2>(const PixelField<2>&, const PixelField<2>&);
extern template double inner_product<4>(const PixelField<4>&, const PixelField<4>&);

} // namespace stagetv
