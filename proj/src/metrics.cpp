#include "stagetv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "stagetv/errors.hpp"

namespace stagetv {

void DegradeSpec::validate() const {
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw DomainError("DegradeSpec: noise sigma must be >= 0");
  }
  if (blur_sigma) {
    if (kernel_size % 2 == 0) throw DomainError("DegradeSpec: kernel size must be odd");
    if (!(*blur_sigma > 0.0) || !std::isfinite(*blur_sigma)) {
      throw DomainError("DegradeSpec: blur sigma must be > 0");
    }
  }
}

BlurKernel DegradeSpec::kernel() const {
  validate();
  return blur_sigma ? gaussian_kernel(kernel_size, *blur_sigma) : BlurKernel::identity();
}

namespace {

std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t position) {
  std::uint64_t z = seed + (position + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;

} // namespace

double standard_normal(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t pair = index / 2;
  const double u1 = 1.0 - static_cast<double>(splitmix64_at(seed, 2 * pair) >> 11) * kTwoPow53Inv;
  const double u2 = static_cast<double>(splitmix64_at(seed, 2 * pair + 1) >> 11) * kTwoPow53Inv;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return (index % 2 == 0) ? r * std::cos(theta) : r * std::sin(theta);
}

ImageGrid gaussian_noise(std::size_t rows, std::size_t cols, double sigma, std::uint64_t seed) {
  ImageGrid eta(rows, cols);
  for (std::size_t k = 0; k < eta.size(); ++k) eta[k] = sigma * standard_normal(seed, k);
  return eta;
}

ImageGrid degrade(const ImageGrid& u, const DegradeSpec& spec) {
  spec.validate();
  ImageGrid f = spec.blur_sigma ? circular_convolve(u, spec.kernel()) : u;
  if (spec.noise_sigma > 0.0) f += gaussian_noise(u.rows(), u.cols(), spec.noise_sigma, spec.seed);
  return f;
}

double mse(const ImageGrid& a, const ImageGrid& b) {
  require_conformable(a, b, "mse");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double psnr(const ImageGrid& u, const ImageGrid& ref) {
  const double e = mse(u, ref);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / e);
}

namespace {

std::vector<double> ssim_window_1d() {
  constexpr double sigma = 1.5;
  const auto r = static_cast<int>(kSsimWindow / 2);
  std::vector<double> w;
  double total = 0.0;
  for (int a = -r; a <= r; ++a) {
    w.push_back(std::exp(-(a * a) / (2.0 * sigma * sigma)));
    total += w.back();
  }
  for (double& x : w) x /= total;
  return w;
}

// Separable "valid" filtering: output is (M - 10) x (N - 10).
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t m, std::size_t n,
                                 const std::vector<double>& w) {
  const std::size_t len = w.size();
  const std::size_t out_cols = n - len + 1;
  const std::size_t out_rows = m - len + 1;
  std::vector<double> tmp(m * out_cols);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < out_cols; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < len; ++t) acc += w[t] * img[i * n + j + t];
      tmp[i * out_cols + j] = acc;
    }
  }
  std::vector<double> out(out_rows * out_cols);
  for (std::size_t i = 0; i < out_rows; ++i) {
    for (std::size_t j = 0; j < out_cols; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < len; ++t) acc += w[t] * tmp[(i + t) * out_cols + j];
      out[i * out_cols + j] = acc;
    }
  }
  return out;
}

} // namespace

double ssim(const ImageGrid& u, const ImageGrid& ref) {
  require_conformable(u, ref, "ssim");
  if (u.rows() < kSsimWindow || u.cols() < kSsimWindow) {
    throw DomainError("ssim: image smaller than the 11x11 window");
  }
  constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  const std::size_t m = u.rows();
  const std::size_t n = u.cols();
  const auto w = ssim_window_1d();

  std::vector<double> x(u.values().begin(), u.values().end());
  std::vector<double> y(ref.values().begin(), ref.values().end());
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    xx[k] = x[k] * x[k];
    yy[k] = y[k] * y[k];
    xy[k] = x[k] * y[k];
  }
  const auto mu_x = filter_valid(x, m, n, w);
  const auto mu_y = filter_valid(y, m, n, w);
  const auto e_xx = filter_valid(xx, m, n, w);
  const auto e_yy = filter_valid(yy, m, n, w);
  const auto e_xy = filter_valid(xy, m, n, w);

  double total = 0.0;
  for (std::size_t k = 0; k < mu_x.size(); ++k) {
    const double var_x = e_xx[k] - mu_x[k] * mu_x[k];
    const double var_y = e_yy[k] - mu_y[k] * mu_y[k];
    const double cov = e_xy[k] - mu_x[k] * mu_y[k];
    const double num = (2.0 * mu_x[k] * mu_y[k] + c1) * (2.0 * cov + c2);
    const double den = (mu_x[k] * mu_x[k] + mu_y[k] * mu_y[k] + c1) * (var_x + var_y + c2);
    total += num / den;
  }
  return total / static_cast<double>(mu_x.size());
}

std::size_t EdgeMap::count() const noexcept {
  return static_cast<std::size_t>(std::count(edges.begin(), edges.end(), true));
}

EdgeMap detect_edges(const ImageGrid& u) {
  const GradientField g = grad(u);
  const std::size_t n = u.size();
  std::vector<double> mag(n);
  double mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mag[k] = g.pixel_magnitude(k);
    mean += mag[k];
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : mag) var += (v - mean) * (v - mean);
  const double threshold = mean + 2.0 * std::sqrt(var / static_cast<double>(n));

  EdgeMap map{u.rows(), u.cols(), std::vector<bool>(n, false)};
  for (std::size_t k = 0; k < n; ++k) map.edges[k] = mag[k] > threshold;
  return map;
}

namespace {

// Squared-distance transform of a sampled function along one line
// (lower envelope of parabolas).
void distance_transform_1d(const std::vector<double>& f, std::vector<double>& d) {
  const std::size_t n = f.size();
  std::vector<std::size_t> v(n);
  std::vector<double> z(n + 1);
  auto intersect = [&](std::size_t q, std::size_t p) {
    const double qd = static_cast<double>(q);
    const double pd = static_cast<double>(p);
    return ((f[q] + qd * qd) - (f[p] + pd * pd)) / (2.0 * qd - 2.0 * pd);
  };
  std::size_t k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (std::size_t q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const double diff = static_cast<double>(q) - static_cast<double>(v[k]);
    d[q] = diff * diff + f[v[k]];
  }
}

} // namespace

std::vector<double> edge_distance(const EdgeMap& map) {
  const std::size_t m = map.rows;
  const std::size_t n = map.cols;
  if (map.count() == 0) return std::vector<double>(m * n, std::numeric_limits<double>::infinity());

  // Finite stand-in for "no edge"; larger than any squared in-image distance.
  const double far = 4.0 * static_cast<double>(m * m + n * n) + 1.0;
  std::vector<double> sq(m * n);
  for (std::size_t k = 0; k < m * n; ++k) sq[k] = map.edges[k] ? 0.0 : far;

  std::vector<double> line, out;
  line.resize(m);
  out.resize(m);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) line[i] = sq[i * n + j];
    distance_transform_1d(line, out);
    for (std::size_t i = 0; i < m; ++i) sq[i * n + j] = out[i];
  }
  line.resize(n);
  out.resize(n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) line[j] = sq[i * n + j];
    distance_transform_1d(line, out);
    for (std::size_t j = 0; j < n; ++j) sq[i * n + j] = out[j];
  }
  for (double& v : sq) v = std::sqrt(v);
  return sq;
}

double fom_edges(const EdgeMap& detected, const EdgeMap& reference) {
  if (detected.rows != reference.rows || detected.cols != reference.cols) {
    throw ShapeError("fom: edge map shape mismatch");
  }
  const std::size_t n_ref = reference.count();
  if (n_ref == 0) throw DomainError("fom: reference image has no edge pixels");
  const std::size_t n_det = detected.count();
  if (n_det == 0) return 0.0;

  constexpr double a = 1.0 / 9.0;
  const auto dist = edge_distance(reference);
  double total = 0.0;
  for (std::size_t k = 0; k < detected.edges.size(); ++k) {
    if (detected.edges[k]) total += 1.0 / (1.0 + a * dist[k] * dist[k]);
  }
  return total / static_cast<double>(std::max(n_ref, n_det));
}

double fom(const ImageGrid& u, const ImageGrid& ref) {
  require_conformable(u, ref, "fom");
  return fom_edges(detect_edges(u), detect_edges(ref));
}

double rel_error(const ImageGrid& u_next, const ImageGrid& u_prev) {
  require_conformable(u_next, u_prev, "rel_error");
  const double base = u_prev.norm();
  if (base == 0.0) throw DomainError("rel_error: previous iterate has zero norm");
  return (u_next - u_prev).norm() / base;
}

ImageGrid quantize_8bit(const ImageGrid& u) {
  ImageGrid q = u;
  for (double& v : q.values()) v = std::round(std::clamp(v, 0.0, 255.0));
  return q;
}

} // namespace stagetv
