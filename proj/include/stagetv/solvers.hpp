#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "stagetv/fft.hpp"
#include "stagetv/grid.hpp"
#include "stagetv/operators.hpp"

namespace stagetv {

/// Parameters of one ADMM run. `penalty` is rho for the first-order solver and beta
/// for the higher-order one.
struct AdmmConfig {
  double lambda = 2.0;
  double penalty = 2.0;
  /// Stop once ||u^{k+1} - u^k|| / ||u^k|| < tol.
  double tol = 1e-8;
  std::size_t max_inner_iters = 200;

  /// Throws ConfigError on a non-positive or non-finite field.
  void validate() const;
};

struct InnerIterate {
  std::size_t k = 0;
  double rel_change = 0.0;
  /// ||K u^k - f||_2 against the data the solver was given.
  double data_residual = 0.0;
  /// ||v^k - L u^k||_2
  double primal_residual = 0.0;
  double objective = 0.0;
};

using InnerTrace = std::vector<InnerIterate>;

enum class StopReason { Tolerance, MaxIterations };

/// Read-only view of iterate k, handed to observers while the solver runs.
struct IterateView {
  const InnerIterate& stats;
  const ImageGrid& u;
  /// K u (aliases u when K is the identity).
  const ImageGrid& blurred;
};

struct AdmmOptions {
  /// Retain every iterate in AdmmResult::iterates.
  bool keep_iterates = false;
  /// Without keep_iterates: retain only the highest-scoring iterate (earliest on ties).
  std::function<double(const ImageGrid&)> score;
  /// Called once per iteration after the multiplier update.
  std::function<void(const IterateView&)> on_iterate;
  /// Starting split variable and multiplier as channel planes (C each); empty means zero.
  std::vector<ImageGrid> initial_split;
  std::vector<ImageGrid> initial_multiplier;
};

struct AdmmResult {
  ImageGrid u;
  InnerTrace trace;
  /// Every iterate (keep_iterates), the best-scoring one (score), or nothing.
  std::vector<ImageGrid> iterates;
  /// 1-based iteration of the retained best iterate when `score` was set.
  std::optional<std::size_t> best_iteration;
  StopReason stop = StopReason::MaxIterations;
  /// Split variable and multiplier after the last iteration, as channel planes.
  std::vector<ImageGrid> split;
  std::vector<ImageGrid> multiplier;

  std::size_t iterations() const noexcept { return trace.size(); }
};

/// Per-pixel radial shrinkage: x * max(0, |x| - t) / |x|, zero where |x| = 0.
template <std::size_t C>
PixelField<C> isotropic_shrink(const PixelField<C>& x, double t);

extern template PixelField<2> isotropic_shrink<2>(const PixelField<2>&, double);
extern template PixelField<4> isotropic_shrink<4>(const PixelField<4>&, double);

/// Solves (K^T K + penalty L^T L) u = rhs by pointwise division in the Fourier domain,
/// where L^T L has symbol sum_c |L_c|^2 over the channel symbols of L.
class QuadraticSolver {
public:
  QuadraticSolver(const FourierSymbol& kernel, std::span<const FourierSymbol> reg_channels,
                  double penalty);

  ImageGrid solve(const ImageGrid& rhs);
  /// Same as solve(); also writes K u into `blurred`.
  ImageGrid solve(const ImageGrid& rhs, ImageGrid& blurred);

  /// Real, strictly positive denominator |K|^2 + penalty * sum_c |L_c|^2 per bin.
  std::span<const double> denominator() const noexcept { return denominator_; }

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::complex<double>> kernel_;
  bool kernel_is_identity_;
  std::vector<double> denominator_;
  std::vector<std::complex<double>> spectrum_;
  std::vector<std::complex<double>> scratch_;
  Fft2D fft_;
};

ImageGrid fft_quadratic_solve(const ImageGrid& rhs, const FourierSymbol& kernel,
                              std::span<const FourierSymbol> reg_channels, double penalty);

/// 1/2 ||K u - f||^2 + lambda * sum_ij |(D u)_ij|
double objective_rof(const ImageGrid& u, const ImageGrid& f, const FourierSymbol& kernel,
                     double lambda);
/// 1/2 ||K u - f||^2 + lambda * sum_ij |(DD u)_ij|
double objective_llt(const ImageGrid& u, const ImageGrid& f, const FourierSymbol& kernel,
                     double lambda);

/// ADMM for the first-order (ROF) model with splitting v = D u.
///
/// Each iteration:
///   (K^T K + rho D^T D) u = K^T f + D^T (rho v - mu)
///   v  = shrink(D u + mu / rho, lambda / rho)
///   mu = mu - rho (v - D u)
/// starting from v = 0, mu = 0 unless the options provide them. `u0` only enters the
/// first relative-change test.
///
/// Throws DivergenceError when an iterate turns non-finite or ||u|| > 1e6 ||f||.
AdmmResult admm_rof(const ImageGrid& f, const FourierSymbol& kernel, const AdmmConfig& cfg,
                    const ImageGrid& u0, const AdmmOptions& options = {});

/// ADMM for the higher-order (LLT) model with splitting v = DD u; same update
/// pattern as admm_rof with beta = cfg.penalty and 4-channel shrinkage.
AdmmResult admm_llt(const ImageGrid& f, const FourierSymbol& kernel, const AdmmConfig& cfg,
                    const ImageGrid& u0, const AdmmOptions& options = {});

} // namespace stagetv
