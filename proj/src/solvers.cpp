#include "stagetv/solvers.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "stagetv/errors.hpp"

namespace stagetv {

void AdmmConfig::validate() const {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(lambda)) throw ConfigError("AdmmConfig: lambda must be > 0");
  if (!positive(penalty)) throw ConfigError("AdmmConfig: penalty must be > 0");
  if (!positive(tol)) throw ConfigError("AdmmConfig: tol must be > 0");
  if (max_inner_iters < 1) throw ConfigError("AdmmConfig: max_inner_iters must be >= 1");
}

template <std::size_t C>
PixelField<C> isotropic_shrink(const PixelField<C>& x, double t) {
  if (!(t >= 0.0)) throw DomainError("isotropic_shrink: threshold must be >= 0");
  PixelField<C> out(x.rows(), x.cols());
  for (std::size_t k = 0; k < x.pixels(); ++k) {
    const double m = x.pixel_magnitude(k);
    if (m <= t) continue;
    const double scale = (m - t) / m;
    for (std::size_t c = 0; c < C; ++c) out.channel(c)[k] = scale * x.channel(c)[k];
  }
  return out;
}

template PixelField<2> isotropic_shrink<2>(const PixelField<2>&, double);
template PixelField<4> isotropic_shrink<4>(const PixelField<4>&, double);

QuadraticSolver::QuadraticSolver(const FourierSymbol& kernel,
                                 std::span<const FourierSymbol> reg_channels, double penalty)
    : rows_(kernel.rows()),
      cols_(kernel.cols()),
      kernel_(kernel.bins().begin(), kernel.bins().end()),
      kernel_is_identity_(kernel.is_identity()),
      denominator_(rows_ * cols_),
      spectrum_(rows_ * cols_),
      scratch_(rows_ * cols_),
      fft_(rows_, cols_) {
  if (!(penalty > 0.0) || !std::isfinite(penalty)) {
    throw DomainError("fft_quadratic_solve: penalty must be > 0");
  }
  for (const auto& s : reg_channels) {
    if (s.rows() != rows_ || s.cols() != cols_) {
      throw ShapeError("fft_quadratic_solve: regularizer symbol shape mismatch");
    }
  }
  for (std::size_t k = 0; k < rows_ * cols_; ++k) {
    double reg = 0.0;
    for (const auto& s : reg_channels) reg += std::norm(s.bins()[k]);
    const double d = std::norm(kernel_[k]) + penalty * reg;
    if (!(std::abs(d) >= 1e-14)) throw SingularSystemError(k / cols_, k % cols_, std::abs(d));
    denominator_[k] = d;
  }
}

ImageGrid QuadraticSolver::solve(const ImageGrid& rhs) {
  if (rhs.rows() != rows_ || rhs.cols() != cols_) {
    throw ShapeError("fft_quadratic_solve: rhs shape mismatch");
  }
  fft_.forward(rhs.values(), spectrum_);
  for (std::size_t k = 0; k < spectrum_.size(); ++k) spectrum_[k] /= denominator_[k];
  ImageGrid u(rows_, cols_);
  fft_.inverse_real(spectrum_, u.values());
  return u;
}

ImageGrid QuadraticSolver::solve(const ImageGrid& rhs, ImageGrid& blurred) {
  ImageGrid u = solve(rhs);
  if (kernel_is_identity_) {
    blurred = u;
    return u;
  }
  for (std::size_t k = 0; k < spectrum_.size(); ++k) scratch_[k] = kernel_[k] * spectrum_[k];
  blurred = ImageGrid(rows_, cols_);
  fft_.inverse_real(scratch_, blurred.values());
  return u;
}

ImageGrid fft_quadratic_solve(const ImageGrid& rhs, const FourierSymbol& kernel,
                              std::span<const FourierSymbol> reg_channels, double penalty) {
  QuadraticSolver solver(kernel, reg_channels, penalty);
  return solver.solve(rhs);
}

namespace {

double data_misfit(const ImageGrid& u, const ImageGrid& f, const FourierSymbol& kernel) {
  require_conformable(u, f, "objective");
  if (!kernel.conformable(u)) throw ShapeError("objective: kernel symbol shape mismatch");
  const ImageGrid ku = kernel.is_identity() ? u : apply_symbol(kernel, u);
  const double r = (ku - f).norm();
  return 0.5 * r * r;
}

/// ||a - b|| / ||b||, falling back to ||a - b|| when b = 0.
double relative_change(const ImageGrid& a, const ImageGrid& b) {
  const double diff = (a - b).norm();
  const double base = b.norm();
  return base > 0.0 ? diff / base : diff;
}

template <std::size_t C>
PixelField<C> initial_field(const std::vector<ImageGrid>& planes, const ImageGrid& f,
                            const char* what) {
  PixelField<C> field(f.rows(), f.cols());
  if (planes.empty()) return field;
  if (planes.size() != C) throw ShapeError(std::string(what) + ": wrong channel count");
  for (std::size_t c = 0; c < C; ++c) {
    require_conformable(planes[c], f, what);
    field.channel(c) = planes[c];
  }
  return field;
}

template <std::size_t C, typename Forward, typename Adjoint>
AdmmResult run_admm(const ImageGrid& f, const FourierSymbol& kernel, const AdmmConfig& cfg,
                    const ImageGrid& u0, const AdmmOptions& options,
                    const std::array<FourierSymbol, C>& reg_symbols, Forward&& forward,
                    Adjoint&& adjoint) {
  cfg.validate();
  require_conformable(f, u0, "admm: initial iterate");
  if (!kernel.conformable(f)) throw ShapeError("admm: kernel symbol shape mismatch");

  const double rho = cfg.penalty;
  QuadraticSolver solver(kernel, reg_symbols, rho);
  const ImageGrid kt_f = kernel.is_identity() ? f : apply_symbol_adjoint(kernel, f);
  const double f_norm = f.norm();

  PixelField<C> v = initial_field<C>(options.initial_split, f, "admm: initial split");
  PixelField<C> mu = initial_field<C>(options.initial_multiplier, f, "admm: initial multiplier");

  AdmmResult result;
  result.trace.reserve(cfg.max_inner_iters);
  double best_score = -std::numeric_limits<double>::infinity();
  ImageGrid prev = u0;
  ImageGrid blurred;

  for (std::size_t k = 1; k <= cfg.max_inner_iters; ++k) {
    PixelField<C> weighted = v;
    weighted *= rho;
    weighted -= mu;
    ImageGrid u = solver.solve(kt_f + adjoint(weighted), blurred);

    if (!u.all_finite()) throw DivergenceError(k, "non-finite iterate");
    if (f_norm > 0.0 && u.norm() > 1e6 * f_norm) throw DivergenceError(k, "iterate norm blow-up");

    const PixelField<C> lu = forward(u);
    PixelField<C> x = mu;
    x *= 1.0 / rho;
    x += lu;
    v = isotropic_shrink(x, cfg.lambda / rho);
    PixelField<C> gap = v;
    gap -= lu;
    PixelField<C> step = gap;
    step *= rho;
    mu -= step;

    InnerIterate stats;
    stats.k = k;
    stats.rel_change = relative_change(u, prev);
    stats.data_residual = (blurred - f).norm();
    stats.primal_residual = gap.norm();
    stats.objective =
        0.5 * stats.data_residual * stats.data_residual + cfg.lambda * lu.magnitude_sum();
    if (!std::isfinite(stats.rel_change) || !std::isfinite(stats.objective) ||
        !std::isfinite(stats.primal_residual)) {
      throw DivergenceError(k, "non-finite diagnostics");
    }
    result.trace.push_back(stats);

    if (options.on_iterate) options.on_iterate(IterateView{result.trace.back(), u, blurred});
    if (options.keep_iterates) {
      result.iterates.push_back(u);
    } else if (options.score) {
      const double s = options.score(u);
      if (s > best_score || result.iterates.empty()) {
        best_score = s;
        result.iterates.assign(1, u);
        result.best_iteration = k;
      }
    }

    prev = std::move(u);
    if (stats.rel_change < cfg.tol) {
      result.stop = StopReason::Tolerance;
      break;
    }
  }
  result.u = std::move(prev);
  for (std::size_t c = 0; c < C; ++c) {
    result.split.push_back(v.channel(c));
    result.multiplier.push_back(mu.channel(c));
  }
  return result;
}

} // namespace

double objective_rof(const ImageGrid& u, const ImageGrid& f, const FourierSymbol& kernel,
                     double lambda) {
  return data_misfit(u, f, kernel) + lambda * grad(u).magnitude_sum();
}

double objective_llt(const ImageGrid& u, const ImageGrid& f, const FourierSymbol& kernel,
                     double lambda) {
  return data_misfit(u, f, kernel) + lambda * hessian(u).magnitude_sum();
}

AdmmResult admm_rof(const ImageGrid& f, const FourierSymbol& kernel, const AdmmConfig& cfg,
                    const ImageGrid& u0, const AdmmOptions& options) {
  return run_admm<2>(f, kernel, cfg, u0, options, gradient_symbols(f.rows(), f.cols()),
                     [](const ImageGrid& u) { return grad(u); },
                     [](const GradientField& p) { return grad_adjoint(p); });
}

AdmmResult admm_llt(const ImageGrid& f, const FourierSymbol& kernel, const AdmmConfig& cfg,
                    const ImageGrid& u0, const AdmmOptions& options) {
  return run_admm<4>(f, kernel, cfg, u0, options, hessian_symbols(f.rows(), f.cols()),
                     [](const ImageGrid& u) { return hessian(u); },
                     [](const HessianField& q) { return hessian_adjoint(q); });
}

} // namespace stagetv
