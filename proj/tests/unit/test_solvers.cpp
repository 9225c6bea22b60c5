#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dense.hpp"
#include "phantoms.hpp"
#include "stagetv/errors.hpp"
#include "stagetv/metrics.hpp"
#include "stagetv/solvers.hpp"

using namespace stagetv;
using dense::MatrixXd;
using dense::VectorXd;

namespace {

double max_abs(const VectorXd& x) { return x.cwiseAbs().maxCoeff(); }

// Radial scan of t*m + (m - |x|)^2 / 2 over m in [0, |x|].
double radial_argmin(double norm_x, double t, int points) {
  double best_m = 0.0, best = 0.5 * norm_x * norm_x;
  for (int s = 0; s <= points; ++s) {
    const double m = norm_x * s / points;
    const double val = t * m + 0.5 * (m - norm_x) * (m - norm_x);
    if (val < best) {
      best = val;
      best_m = m;
    }
  }
  return best_m;
}

ImageGrid noisy(const ImageGrid& u, double sigma, std::uint64_t seed) {
  return u + gaussian_noise(u.rows(), u.cols(), sigma, seed);
}

AdmmConfig config(double lambda, double penalty, std::size_t iters, double tol = 1e-8) {
  AdmmConfig c;
  c.lambda = lambda;
  c.penalty = penalty;
  c.max_inner_iters = iters;
  c.tol = tol;
  return c;
}

} // namespace

TEST_CASE("isotropic_shrink examples") {
  GradientField x(1, 3);
  x.channel(0)[0] = 3.0;
  x.channel(1)[0] = 4.0;
  x.channel(0)[1] = 1.0;
  x.channel(1)[1] = -1.0;
  const GradientField v = isotropic_shrink(x, 2.0);
  CHECK(v.channel(0)[0] == doctest::Approx(1.8).epsilon(1e-15));
  CHECK(v.channel(1)[0] == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(v.channel(0)[1] == 0.0);
  CHECK(v.channel(1)[1] == 0.0);
  CHECK(v.channel(0)[2] == 0.0);
  CHECK(isotropic_shrink(x, 0.0) == x);
  CHECK_THROWS_AS(isotropic_shrink(x, -1.0), DomainError);
  CHECK(radial_argmin(5.0, 2.0, 100000) == doctest::Approx(3.0).epsilon(1e-4));
}

TEST_CASE("isotropic_shrink is the prox of the pixel norm") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> tdist(0.0, 3.0);
  const auto x = phantoms::random_field<4>(4, 4, rng);
  for (double t : {0.3, 1.0, 1.7}) {
    const auto v = isotropic_shrink(x, t);
    for (std::size_t k = 0; k < x.pixels(); ++k) {
      const double m = x.pixel_magnitude(k);
      CHECK(std::abs(v.pixel_magnitude(k) - radial_argmin(m, t, 10000)) <= 1e-4 * std::max(1.0, m));
      if (v.pixel_magnitude(k) > 0.0) {
        for (std::size_t c = 0; c < 4; ++c) {
          CHECK(v.channel(c)[k] / v.pixel_magnitude(k) ==
                doctest::Approx(x.channel(c)[k] / m).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("fft_quadratic_solve inverts the normal-equation operator") {
  std::mt19937_64 rng(22);
  const std::size_t m = 8, n = 8;
  const ImageGrid w = phantoms::random_grid(m, n, rng);
  const auto gs = gradient_symbols(m, n);
  const FourierSymbol id = FourierSymbol::identity(m, n);
  const ImageGrid rhs = w + grad_adjoint(grad(w));
  CHECK(linf_distance(fft_quadratic_solve(rhs, id, gs, 1.0), w) <= 1e-9);
  CHECK(fft_quadratic_solve(ImageGrid(m, n), id, gs, 1.0).norm() == 0.0);

  const MatrixXd k = dense::convolution(dense::gaussian_taps(3, 0.5), 3, m, n);
  const FourierSymbol ks = kernel_symbol(gaussian_kernel(3, 0.5), m, n);
  const MatrixXd l = dense::second_order(m, n);
  const auto hs = hessian_symbols(m, n);
  const ImageGrid b = phantoms::random_grid(m, n, rng);
  const MatrixXd a = k.transpose() * k + 2.0 * l.transpose() * l;
  const VectorXd expected = a.ldlt().solve(dense::vec(b));
  const ImageGrid u = fft_quadratic_solve(b, ks, hs, 2.0);
  CHECK((dense::vec(u) - expected).norm() <= 1e-8 * expected.norm());
  CHECK((a * dense::vec(u) - dense::vec(b)).norm() <= 1e-8 * b.norm());
}

TEST_CASE("fft_quadratic_solve rejects singular systems and bad penalties") {
  const std::size_t m = 4, n = 6;
  const FourierSymbol dx = operator_symbol(forward_diff_x, m, n);
  const auto gs = gradient_symbols(m, n);
  try {
    fft_quadratic_solve(ImageGrid(m, n, 1.0), dx, gs, 1.0);
    FAIL("expected a singular system");
  } catch (const SingularSystemError& e) {
    CHECK(e.row_bin() == 0);
    CHECK(e.col_bin() == 0);
  }
  CHECK_THROWS_AS(fft_quadratic_solve(ImageGrid(m, n), FourierSymbol::identity(m, n), gs, 0.0),
                  DomainError);
  CHECK_THROWS_AS(fft_quadratic_solve(ImageGrid(m, n + 1), FourierSymbol::identity(m, n), gs, 1.0),
                  ShapeError);
}

TEST_CASE("objectives") {
  const std::size_t m = 8, n = 8;
  const FourierSymbol id = FourierSymbol::identity(m, n);
  const ImageGrid c(m, n, 3.0);
  CHECK(objective_rof(c, c, id, 2.0) == 0.0);
  CHECK(objective_llt(c, c, id, 2.0) == 0.0);
  CHECK(objective_rof(c, ImageGrid(m, n), id, 2.0) == doctest::Approx(0.5 * 64 * 9));

  ImageGrid ramp(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) ramp(i, j) = static_cast<double>(j);
  // Only the two wrap columns carry second differences, of size 8 each, in every row.
  CHECK(objective_llt(ramp, ramp, id, 2.0) == doctest::Approx(2.0 * 8 * 16));

  std::mt19937_64 rng(23);
  const ImageGrid u = phantoms::random_grid(m, n, rng, 0, 255);
  const ImageGrid f = phantoms::random_grid(m, n, rng, 0, 255);
  const MatrixXd k = dense::convolution(dense::gaussian_taps(3, 0.5), 3, m, n);
  const FourierSymbol ks = kernel_symbol(gaussian_kernel(3, 0.5), m, n);
  const VectorXd r = k * dense::vec(u) - dense::vec(f);
  const double rof = 0.5 * r.squaredNorm() + 1.5 * dense::pixel_magnitude_sum(dense::gradient(m, n) * dense::vec(u), 2);
  const double llt = 0.5 * r.squaredNorm() + 1.5 * dense::pixel_magnitude_sum(dense::second_order(m, n) * dense::vec(u), 4);
  CHECK(objective_rof(u, f, ks, 1.5) == doctest::Approx(rof).epsilon(1e-12));
  CHECK(objective_llt(u, f, ks, 1.5) == doctest::Approx(llt).epsilon(1e-12));
}

TEST_CASE("constant data is a fixed point of both solvers") {
  const ImageGrid f(6, 6, 77.0);
  const FourierSymbol id = FourierSymbol::identity(6, 6);
  for (auto solver : {&admm_rof, &admm_llt}) {
    const AdmmResult r = solver(f, id, config(2.0, 2.0, 50), f, {});
    CHECK(r.iterations() == 1);
    CHECK(r.stop == StopReason::Tolerance);
    CHECK(r.trace[0].rel_change == 0.0);
    CHECK(linf_distance(r.u, f) <= 1e-12);
  }
}

TEST_CASE("first five iterates match a dense straight-line ADMM") {
  const std::size_t m = 8, n = 8;
  std::mt19937_64 rng(24);
  const ImageGrid f = phantoms::random_grid(m, n, rng, 0.0, 255.0);
  const MatrixXd eye = MatrixXd::Identity(64, 64);
  const MatrixXd blur = dense::convolution(dense::gaussian_taps(3, 0.5), 3, m, n);
  const FourierSymbol ks = kernel_symbol(gaussian_kernel(3, 0.5), m, n);
  AdmmOptions keep;
  keep.keep_iterates = true;
  for (bool blurred : {false, true}) {
    const FourierSymbol& sym = blurred ? ks : FourierSymbol::identity(m, n);
    const MatrixXd& k = blurred ? blur : eye;
    const auto rof = admm_rof(f, sym, config(2.0, 2.0, 5, 1e-300), f, keep);
    const auto llt = admm_llt(f, sym, config(2.0, 2.0, 5, 1e-300), f, keep);
    const auto rof_ref = dense::admm_iterates(k, dense::gradient(m, n), 2, dense::vec(f), 2.0, 2.0, 5);
    const auto llt_ref = dense::admm_iterates(k, dense::second_order(m, n), 4, dense::vec(f), 2.0, 2.0, 5);
    REQUIRE(rof.iterates.size() == 5);
    REQUIRE(llt.iterates.size() == 5);
    for (std::size_t it = 0; it < 5; ++it) {
      CHECK(max_abs(dense::vec(rof.iterates[it]) - rof_ref[it]) <= 1e-9);
      CHECK(max_abs(dense::vec(llt.iterates[it]) - llt_ref[it]) <= 1e-9);
    }
  }
}

TEST_CASE("u-update solves its subproblem from arbitrary split states") {
  const std::size_t m = 8, n = 8;
  std::mt19937_64 rng(25);
  const ImageGrid f = phantoms::random_grid(m, n, rng, 0.0, 255.0);
  const MatrixXd k = dense::convolution(dense::gaussian_taps(3, 0.5), 3, m, n);
  const FourierSymbol ks = kernel_symbol(gaussian_kernel(3, 0.5), m, n);
  const MatrixXd l = dense::second_order(m, n);
  AdmmOptions opts;
  for (int c = 0; c < 4; ++c) {
    opts.initial_split.push_back(phantoms::random_grid(m, n, rng, -5, 5));
    opts.initial_multiplier.push_back(phantoms::random_grid(m, n, rng, -5, 5));
  }
  const double beta = 3.0;
  const auto r = admm_llt(f, ks, config(1.0, beta, 1), f, opts);
  VectorXd v(256), mu(256);
  for (int c = 0; c < 4; ++c) {
    v.segment(64 * c, 64) = dense::vec(opts.initial_split[static_cast<std::size_t>(c)]);
    mu.segment(64 * c, 64) = dense::vec(opts.initial_multiplier[static_cast<std::size_t>(c)]);
  }
  const VectorXd rhs = k.transpose() * dense::vec(f) + l.transpose() * (beta * v - mu);
  const VectorXd gradient = (k.transpose() * k + beta * l.transpose() * l) * dense::vec(r.u) - rhs;
  CHECK(gradient.norm() <= 1e-8 * rhs.norm());

  AdmmOptions bad;
  bad.initial_split.assign(2, ImageGrid(m, n));
  CHECK_THROWS_AS(admm_llt(f, ks, config(1.0, 1.0, 1), f, bad), ShapeError);
}

TEST_CASE("one cycle reproduces a saddle point") {
  // With K = I and v = L u, the cycle is stationary when f = u + L^T mu and mu lies in
  // lambda times the subdifferential of the pixel norm at L u.
  const std::size_t m = 8, n = 8;
  const double lambda = 1.5, rho = 2.0;
  std::mt19937_64 rng(26);
  ImageGrid u(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) u(i, j) = (i < 4 ? 50.0 : 120.0) + (j < 3 ? 0.0 : 10.0 * j);
  const GradientField lu = grad(u);
  GradientField mu(m, n);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  for (std::size_t k = 0; k < lu.pixels(); ++k) {
    const double mag = lu.pixel_magnitude(k);
    for (std::size_t c = 0; c < 2; ++c) {
      mu.channel(c)[k] = mag > 0.0 ? lambda * lu.channel(c)[k] / mag : lambda * unit(rng);
    }
  }
  const ImageGrid f = u + grad_adjoint(mu);
  AdmmOptions opts;
  opts.initial_split = {lu.channel(0), lu.channel(1)};
  opts.initial_multiplier = {mu.channel(0), mu.channel(1)};
  const auto r = admm_rof(f, FourierSymbol::identity(m, n), config(lambda, rho, 1), u, opts);
  CHECK(linf_distance(r.u, u) <= 1e-10 * 255);
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(linf_distance(r.split[c], lu.channel(c)) <= 1e-10 * 255);
    CHECK(linf_distance(r.multiplier[c], mu.channel(c)) <= 1e-10 * 255);
  }
}

TEST_CASE("converged ROF solution is a local minimizer") {
  const ImageGrid clean = phantoms::two_region(16);
  const ImageGrid f = noisy(clean, 20.0, 5);
  const FourierSymbol id = FourierSymbol::identity(16, 16);
  const auto r = admm_rof(f, id, config(2.0, 2.0, 5000), f, {});
  CHECK(r.stop == StopReason::Tolerance);
  const double best = objective_rof(r.u, f, id, 2.0);
  CHECK(best <= objective_rof(f, f, id, 2.0));
  std::mt19937_64 rng(27);
  for (int trial = 0; trial < 20; ++trial) {
    const ImageGrid d = 1e-3 * phantoms::random_grid(16, 16, rng);
    CHECK(best <= objective_rof(r.u + d, f, id, 2.0));
    CHECK(best <= objective_rof(r.u - d, f, id, 2.0));
  }
  CHECK(r.trace.back().primal_residual <= r.trace.front().primal_residual);
}

TEST_CASE("LLT lowers its objective on a smooth bowl") {
  const ImageGrid f = noisy(phantoms::quadratic(16), 20.0, 6);
  const FourierSymbol id = FourierSymbol::identity(16, 16);
  const auto r = admm_llt(f, id, config(2.0, 2.0, 2000), f, {});
  CHECK(objective_llt(r.u, f, id, 2.0) <= objective_llt(f, f, id, 2.0));
  CHECK(r.trace.back().primal_residual <= r.trace.front().primal_residual);
}

TEST_CASE("traces, iterate retention, and observers") {
  const ImageGrid clean = phantoms::two_region(16);
  const ImageGrid f = noisy(clean, 30.0, 8);
  const FourierSymbol id = FourierSymbol::identity(16, 16);
  AdmmOptions opts;
  opts.keep_iterates = true;
  std::size_t seen = 0;
  opts.on_iterate = [&](const IterateView& view) {
    ++seen;
    CHECK(view.stats.k == seen);
    CHECK(view.u == view.blurred);
  };
  const auto all = admm_rof(f, id, config(0.5, 2.0, 40), f, opts);
  CHECK(seen == all.iterations());
  CHECK(all.iterates.size() == all.iterations());
  CHECK(all.iterates.back() == all.u);
  for (std::size_t i = 0; i < all.trace.size(); ++i) {
    CHECK(all.trace[i].k == i + 1);
    CHECK(std::isfinite(all.trace[i].rel_change));
    CHECK(std::isfinite(all.trace[i].objective));
    CHECK(all.trace[i].data_residual == doctest::Approx((all.iterates[i] - f).norm()));
  }

  AdmmOptions best;
  best.score = [&](const ImageGrid& u) { return psnr(u, clean); };
  const auto kept = admm_rof(f, id, config(0.5, 2.0, 40), f, best);
  REQUIRE(kept.iterates.size() == 1);
  REQUIRE(kept.best_iteration.has_value());
  double top = -1.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < all.iterates.size(); ++i) {
    const double p = psnr(all.iterates[i], clean);
    if (p > top) {
      top = p;
      arg = i + 1;
    }
  }
  CHECK(*kept.best_iteration == arg);
  CHECK(kept.iterates[0] == all.iterates[arg - 1]);
}

TEST_CASE("configuration and divergence errors") {
  const ImageGrid f(4, 4, 1.0);
  const FourierSymbol id = FourierSymbol::identity(4, 4);
  CHECK_THROWS_AS(admm_rof(f, id, config(0.0, 2.0, 10), f), ConfigError);
  CHECK_THROWS_AS(admm_rof(f, id, config(2.0, -1.0, 10), f), ConfigError);
  CHECK_THROWS_AS(admm_rof(f, id, config(2.0, 2.0, 0), f), ConfigError);
  CHECK_THROWS_AS(admm_rof(f, id, config(2.0, 2.0, 10, 0.0), f), ConfigError);
  CHECK_THROWS_AS(admm_rof(f, id, config(2.0, 2.0, 10), ImageGrid(4, 5)), ShapeError);
  CHECK_THROWS_AS(admm_llt(f, FourierSymbol::identity(5, 4), config(2.0, 2.0, 10), f), ShapeError);

  // A forward operator with a tiny DC gain amplifies the mean beyond the guard.
  const FourierSymbol weak(4, 4, std::vector<std::complex<double>>(16, {2e-7, 0.0}));
  try {
    admm_rof(f, weak, config(2.0, 2.0, 10), f);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration() == 1);
  }
}
