// Synthetic test images on [0, 255].
#pragma once

#include <cstddef>
#include <random>

#include "stagetv/grid.hpp"

namespace phantoms {

// Bright disc (radius n/4) on a dark background, plus a brighter stripe on the left quarter.
inline stagetv::ImageGrid piecewise_constant(std::size_t n) {
  stagetv::ImageGrid u(n, n);
  const double c = static_cast<double>(n) / 2.0;
  const double r = static_cast<double>(n) / 4.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double di = static_cast<double>(i) - c, dj = static_cast<double>(j) - c;
      u(i, j) = di * di + dj * dj < r * r ? 200.0 : 60.0;
      if (j < n / 4) u(i, j) += 40.0;
    }
  }
  return u;
}

// Smooth quadratic bowl, 40 at the centre rising to ~167 in the corners.
inline stagetv::ImageGrid quadratic(std::size_t n) {
  stagetv::ImageGrid u(n, n);
  const double c = static_cast<double>(n) / 2.0;
  const double s = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = (static_cast<double>(i) - c) / s, b = (static_cast<double>(j) - c) / s;
      u(i, j) = 255.0 * 2.0 * (a * a + b * b) + 40.0;
    }
  }
  return u;
}

// Left half piecewise-constant, right half quadratic.
inline stagetv::ImageGrid mixed(std::size_t n) {
  const auto pc = piecewise_constant(n);
  auto u = quadratic(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n / 2; ++j) u(i, j) = pc(i, j);
  }
  return u;
}

// Left half 60, right half 200.
inline stagetv::ImageGrid two_region(std::size_t n) {
  stagetv::ImageGrid u(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) u(i, j) = j < n / 2 ? 60.0 : 200.0;
  }
  return u;
}

inline stagetv::ImageGrid random_grid(std::size_t m, std::size_t n, std::mt19937_64& rng,
                                      double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  stagetv::ImageGrid u(m, n);
  for (double& v : u.values()) v = dist(rng);
  return u;
}

template <std::size_t C>
stagetv::PixelField<C> random_field(std::size_t m, std::size_t n, std::mt19937_64& rng) {
  stagetv::PixelField<C> p(m, n);
  for (std::size_t c = 0; c < C; ++c) p.channel(c) = random_grid(m, n, rng);
  return p;
}

} // namespace phantoms
