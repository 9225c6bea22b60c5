#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "stagetv/grid.hpp"
#include "stagetv/operators.hpp"

namespace stagetv {

/// Forward model f = K u + eta. No blur when blur_sigma is empty.
struct DegradeSpec {
  std::size_t kernel_size = 3;
  std::optional<double> blur_sigma;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  /// Gaussian blur kernel, or the 1x1 identity when blur_sigma is empty.
  BlurKernel kernel() const;
};

/// Name of the noise generation scheme, recorded in degrade sidecars.
inline constexpr const char* kNoiseScheme = "splitmix64-boxmuller-v1";

/// Standard normal deviate number `index` of the stream identified by `seed`.
///
/// Deviates come in Box-Muller pairs: pair p draws two 64-bit words from the
/// SplitMix64 sequence of `seed` at positions 2p and 2p+1, maps each to
/// (h >> 11) * 2^-53 (the first as 1 - that value so it lies in (0, 1]),
/// and returns r cos(theta) for even index, r sin(theta) for odd index, with
/// r = sqrt(-2 ln u1), theta = 2 pi u2. Any index can be evaluated on its own.
double standard_normal(std::uint64_t seed, std::uint64_t index);

/// sigma * standard_normal(seed, k) at row-major pixel k.
ImageGrid gaussian_noise(std::size_t rows, std::size_t cols, double sigma, std::uint64_t seed);

/// circular_convolve(u, kernel) + noise, unclamped. With no blur and sigma = 0, returns u.
ImageGrid degrade(const ImageGrid& u, const DegradeSpec& spec);

double mse(const ImageGrid& a, const ImageGrid& b);

/// 10 log10(255^2 / MSE) in dB; +infinity when the images are identical.
double psnr(const ImageGrid& u, const ImageGrid& ref);

/// Mean SSIM over all fully-contained 11x11 Gaussian windows (sigma 1.5),
/// C1 = (0.01 * 255)^2, C2 = (0.03 * 255)^2. Requires min(M, N) >= 11.
double ssim(const ImageGrid& u, const ImageGrid& ref);

inline constexpr std::size_t kSsimWindow = 11;

/// Binary edge map, row-major.
struct EdgeMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<bool> edges;

  std::size_t count() const noexcept;
  bool operator()(std::size_t i, std::size_t j) const { return edges[i * cols + j]; }
};

/// Pixels whose forward-difference gradient magnitude exceeds mean + 2 std of the
/// magnitude map.
EdgeMap detect_edges(const ImageGrid& u);

/// Exact Euclidean distance (in pixels, non-periodic) from each pixel to the nearest
/// edge pixel of `map`; +infinity everywhere when the map is empty.
std::vector<double> edge_distance(const EdgeMap& map);

/// Pratt's figure of merit with a = 1/9:
/// (1 / max(N_ref, N_det)) * sum_{detected} 1 / (1 + a d^2).
/// Throws DomainError when the reference map has no edge pixel.
double fom_edges(const EdgeMap& detected, const EdgeMap& reference);

/// fom_edges(detect_edges(u), detect_edges(ref)).
double fom(const ImageGrid& u, const ImageGrid& ref);

/// ||u_next - u_prev|| / ||u_prev||. Throws DomainError when ||u_prev|| = 0.
double rel_error(const ImageGrid& u_next, const ImageGrid& u_prev);

/// Clamp to [0, 255] and round half away from zero, as done when saving 8-bit images.
ImageGrid quantize_8bit(const ImageGrid& u);

} // namespace stagetv
