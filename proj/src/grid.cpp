#include "stagetv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stagetv/errors.hpp"

namespace stagetv {

std::size_t periodic_index(std::ptrdiff_t i, std::size_t len) {
  if (len == 0) throw DomainError("periodic_index: length must be positive");
  const auto n = static_cast<std::ptrdiff_t>(len);
  return static_cast<std::size_t>(((i % n) + n) % n);
}

ImageGrid::ImageGrid(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) throw DomainError("ImageGrid: rows and cols must be positive");
  if (!std::isfinite(fill)) throw DomainError("ImageGrid: non-finite fill value");
}

ImageGrid::ImageGrid(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (rows == 0 || cols == 0) throw DomainError("ImageGrid: rows and cols must be positive");
  if (data_.size() != rows * cols) {
    throw ShapeError("ImageGrid: " + std::to_string(data_.size()) + " values for a " +
                     std::to_string(rows) + "x" + std::to_string(cols) + " grid");
  }
  if (!all_finite()) throw DomainError("ImageGrid: non-finite pixel value");
}

double ImageGrid::wrapped(std::ptrdiff_t i, std::ptrdiff_t j) const {
  return (*this)(periodic_index(i, rows_), periodic_index(j, cols_));
}

bool ImageGrid::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double ImageGrid::norm() const noexcept {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

ImageGrid& ImageGrid::operator+=(const ImageGrid& rhs) {
  require_conformable(*this, rhs, "ImageGrid::operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
  return *this;
}

ImageGrid& ImageGrid::operator-=(const ImageGrid& rhs) {
  require_conformable(*this, rhs, "ImageGrid::operator-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
  return *this;
}

ImageGrid& ImageGrid::operator*=(double s) noexcept {
  for (double& v : data_) v *= s;
  return *this;
}

ImageGrid operator+(ImageGrid lhs, const ImageGrid& rhs) { return lhs += rhs; }
ImageGrid operator-(ImageGrid lhs, const ImageGrid& rhs) { return lhs -= rhs; }
ImageGrid operator*(double s, ImageGrid rhs) { return rhs *= s; }

void require_conformable(const ImageGrid& a, const ImageGrid& b, const char* what) {
  if (!a.conformable(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

double inner_product(const ImageGrid& a, const ImageGrid& b) {
  require_conformable(a, b, "inner_product");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double linf_distance(const ImageGrid& a, const ImageGrid& b) {
  require_conformable(a, b, "linf_distance");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

template <std::size_t C>
PixelField<C>::PixelField(std::array<ImageGrid, C> planes) : planes_(std::move(planes)) {
  for (std::size_t c = 1; c < C; ++c) require_conformable(planes_[0], planes_[c], "PixelField");
}

template <std::size_t C>
double PixelField<C>::pixel_magnitude(std::size_t k) const noexcept {
  double s = 0.0;
  for (const auto& plane : planes_) s += plane[k] * plane[k];
  return std::sqrt(s);
}

template <std::size_t C>
double PixelField<C>::magnitude_sum() const noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < pixels(); ++k) s += pixel_magnitude(k);
  return s;
}

template <std::size_t C>
double PixelField<C>::norm() const noexcept {
  double s = 0.0;
  for (const auto& plane : planes_) {
    for (double v : plane.values()) s += v * v;
  }
  return std::sqrt(s);
}

template <std::size_t C>
bool PixelField<C>::all_finite() const noexcept {
  return std::all_of(planes_.begin(), planes_.end(),
                     [](const ImageGrid& p) { return p.all_finite(); });
}

template <std::size_t C>
PixelField<C>& PixelField<C>::operator+=(const PixelField& rhs) {
  for (std::size_t c = 0; c < C; ++c) planes_[c] += rhs.planes_[c];
  return *this;
}

template <std::size_t C>
PixelField<C>& PixelField<C>::operator-=(const PixelField& rhs) {
  for (std::size_t c = 0; c < C; ++c) planes_[c] -= rhs.planes_[c];
  return *this;
}

template <std::size_t C>
PixelField<C>& PixelField<C>::operator*=(double s) noexcept {
  for (auto& plane : planes_) plane *= s;
  return *this;
}

template <std::size_t C>
double inner_product(const PixelField<C>& a, const PixelField<C>& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < C; ++c) s += inner_product(a.channel(c), b.channel(c));
  return s;
}

template class PixelField<2>;
template class PixelField<4>;
template double inner_product<2>(const PixelField<2>&, const PixelField<2>&);
template double inner_product<4>(const PixelField<4>&, const PixelField<4>&);

} // namespace stagetv
