#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "stagetv/errors.hpp"
#include "stagetv/io.hpp"
#include "stagetv/metrics.hpp"
#include "stagetv/operators.hpp"
#include "stagetv/solvers.hpp"
#include "stagetv/stagewise.hpp"

namespace py = pybind11;
using namespace stagetv;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ImageGrid to_grid(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return ImageGrid(rows, cols, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const ImageGrid& g) {
  Array a({g.rows(), g.cols()});
  std::copy(g.values().begin(), g.values().end(), a.mutable_data());
  return a;
}

template <std::size_t C>
PixelField<C> to_field(const Array& a) {
  if (a.ndim() != 3 || a.shape(0) != static_cast<py::ssize_t>(C)) {
    throw ShapeError("expected an array of shape (" + std::to_string(C) + ", rows, cols)");
  }
  const auto rows = static_cast<std::size_t>(a.shape(1));
  const auto cols = static_cast<std::size_t>(a.shape(2));
  const std::size_t n = rows * cols;
  std::array<ImageGrid, C> planes;
  for (std::size_t c = 0; c < C; ++c) {
    const double* p = a.data() + c * n;
    planes[c] = ImageGrid(rows, cols, std::vector<double>(p, p + n));
  }
  return PixelField<C>(std::move(planes));
}

template <std::size_t C>
Array to_array(const PixelField<C>& f) {
  const std::size_t n = f.pixels();
  Array a({C, f.rows(), f.cols()});
  for (std::size_t c = 0; c < C; ++c) {
    const auto v = f.channel(c).values();
    std::copy(v.begin(), v.end(), a.mutable_data() + c * n);
  }
  return a;
}

BlurKernel to_kernel(const Array& taps) {
  if (taps.ndim() != 2 || taps.shape(0) != taps.shape(1)) {
    throw ShapeError("kernel must be a square 2-D array");
  }
  return BlurKernel(static_cast<std::size_t>(taps.shape(0)),
                    std::vector<double>(taps.data(), taps.data() + taps.size()));
}

Array kernel_array(const BlurKernel& k) {
  Array a({k.size(), k.size()});
  std::copy(k.taps().begin(), k.taps().end(), a.mutable_data());
  return a;
}

FourierSymbol symbol_for(const std::optional<Array>& kernel, const ImageGrid& f) {
  if (!kernel) return FourierSymbol::identity(f.rows(), f.cols());
  return kernel_symbol(to_kernel(*kernel), f.rows(), f.cols());
}

py::dict inner_trace(const InnerTrace& trace) {
  py::list k, rel, res, obj;
  for (const auto& it : trace) {
    k.append(it.k);
    rel.append(it.rel_change);
    res.append(it.data_residual);
    obj.append(it.objective);
  }
  py::dict d;
  d["k"] = k;
  d["rel_change"] = rel;
  d["residual"] = res;
  d["objective"] = obj;
  return d;
}

py::dict solve(bool second_order, const Array& f_arr, double lam, double penalty, double tol,
               std::size_t max_inner, const std::optional<Array>& kernel,
               const std::optional<Array>& u0) {
  const ImageGrid f = to_grid(f_arr);
  AdmmConfig cfg;
  cfg.lambda = lam;
  cfg.penalty = penalty;
  cfg.tol = tol;
  cfg.max_inner_iters = max_inner;
  const FourierSymbol sym = symbol_for(kernel, f);
  const ImageGrid start = u0 ? to_grid(*u0) : f;
  AdmmResult r;
  {
    py::gil_scoped_release release;
    r = second_order ? admm_llt(f, sym, cfg, start) : admm_rof(f, sym, cfg, start);
  }
  py::dict d;
  d["u"] = to_array(r.u);
  d["iterations"] = r.iterations();
  d["converged"] = r.stop == StopReason::Tolerance;
  d["trace"] = inner_trace(r.trace);
  return d;
}

py::dict restore_result(const RestoreResult& r) {
  py::list stages;
  for (const auto& s : r.stages) {
    py::dict d;
    d["stage"] = s.stage;
    d["regularizer"] = std::string(to_string(s.regularizer));
    d["inner_iterations"] = s.inner_iterations;
    d["selected_iteration"] = s.selected_iteration;
    d["score"] = s.score;
    d["input_score"] = s.input_score;
    d["output_score"] = s.output_score;
    d["progressed"] = s.progressed;
    stages.append(d);
  }
  py::list trace;
  for (const auto& row : r.trace) {
    py::dict d;
    d["stage"] = row.stage;
    d["sigma"] = row.sigma;
    d["iter"] = row.iter;
    d["rel_err"] = row.rel_err;
    d["residual"] = row.residual;
    d["psnr"] = row.psnr ? py::object(py::float_(*row.psnr)) : py::none();
    d["ssim"] = row.ssim ? py::object(py::float_(*row.ssim)) : py::none();
    trace.append(d);
  }
  py::dict d;
  d["image"] = to_array(r.image);
  d["stages"] = stages;
  d["trace"] = trace;
  d["termination"] = std::string(to_string(r.termination));
  d["total_iterations"] = r.total_iterations();
  return d;
}

} // namespace

PYBIND11_MODULE(_stagetv, m) {
  m.doc() = "Stage-wise alternating first/higher-order TV restoration";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  m.def("grad", [](const Array& u) { return to_array(grad(to_grid(u))); }, py::arg("u"),
        "Forward differences, shape (2, rows, cols) as (x, y).");
  m.def("grad_adjoint", [](const Array& p) { return to_array(grad_adjoint(to_field<2>(p))); },
        py::arg("p"));
  m.def("hessian", [](const Array& u) { return to_array(hessian(to_grid(u))); }, py::arg("u"),
        "Second differences, shape (4, rows, cols) as (xx, yx, xy, yy).");
  m.def("hessian_adjoint",
        [](const Array& q) { return to_array(hessian_adjoint(to_field<4>(q))); }, py::arg("q"));

  m.def("gaussian_kernel",
        [](std::size_t size, double sigma) { return kernel_array(gaussian_kernel(size, sigma)); },
        py::arg("size"), py::arg("sigma"));
  m.def("convolve",
        [](const Array& u, const Array& k) {
          return to_array(circular_convolve(to_grid(u), to_kernel(k)));
        },
        py::arg("u"), py::arg("kernel"), "Periodic convolution.");
  m.def("degrade",
        [](const Array& u, double noise_sigma, std::uint64_t seed, std::size_t blur_size,
           std::optional<double> blur_sigma) {
          DegradeSpec spec;
          spec.kernel_size = blur_size;
          spec.blur_sigma = blur_sigma;
          spec.noise_sigma = noise_sigma;
          spec.seed = seed;
          spec.validate();
          return to_array(degrade(to_grid(u), spec));
        },
        py::arg("u"), py::arg("noise_sigma"), py::arg("seed"), py::arg("blur_size") = 3,
        py::arg("blur_sigma") = py::none());

  m.def("psnr", [](const Array& u, const Array& ref) { return psnr(to_grid(u), to_grid(ref)); },
        py::arg("u"), py::arg("ref"));
  m.def("ssim", [](const Array& u, const Array& ref) { return ssim(to_grid(u), to_grid(ref)); },
        py::arg("u"), py::arg("ref"));
  m.def("fom", [](const Array& u, const Array& ref) { return fom(to_grid(u), to_grid(ref)); },
        py::arg("u"), py::arg("ref"));
  m.def("quantize_8bit", [](const Array& u) { return to_array(quantize_8bit(to_grid(u))); },
        py::arg("u"));

  m.def("admm_rof",
        [](const Array& f, double lam, double penalty, double tol, std::size_t max_inner,
           const std::optional<Array>& kernel, const std::optional<Array>& u0) {
          return solve(false, f, lam, penalty, tol, max_inner, kernel, u0);
        },
        py::arg("f"), py::arg("lam") = 2.0, py::arg("penalty") = 2.0, py::arg("tol") = 1e-8,
        py::arg("max_inner") = 200, py::arg("kernel") = py::none(), py::arg("u0") = py::none());
  m.def("admm_llt",
        [](const Array& f, double lam, double penalty, double tol, std::size_t max_inner,
           const std::optional<Array>& kernel, const std::optional<Array>& u0) {
          return solve(true, f, lam, penalty, tol, max_inner, kernel, u0);
        },
        py::arg("f"), py::arg("lam") = 2.0, py::arg("penalty") = 2.0, py::arg("tol") = 1e-8,
        py::arg("max_inner") = 200, py::arg("kernel") = py::none(), py::arg("u0") = py::none());

  m.def("run_stagewise",
        [](const Array& f_arr, double lambda1, double lambda2, double penalty, double tol,
           std::size_t max_inner, std::size_t n_max, const std::optional<Array>& kernel,
           const std::optional<Array>& oracle) {
          const ImageGrid f = to_grid(f_arr);
          StagewiseConfig cfg;
          cfg.lambda1 = lambda1;
          cfg.lambda2 = lambda2;
          cfg.penalty = penalty;
          cfg.tol = tol;
          cfg.max_inner_iters = max_inner;
          cfg.n_max = n_max;
          if (oracle) {
            cfg.selection = SelectionMode::OraclePsnr;
            cfg.oracle = to_grid(*oracle);
          }
          const FourierSymbol sym = symbol_for(kernel, f);
          RestoreResult r;
          {
            py::gil_scoped_release release;
            r = run_stagewise(f, sym, cfg);
          }
          return restore_result(r);
        },
        py::arg("f"), py::arg("lambda1") = 2.0, py::arg("lambda2") = 2.0,
        py::arg("penalty") = 2.0, py::arg("tol") = 1e-8, py::arg("max_inner") = 200,
        py::arg("n_max") = 12, py::arg("kernel") = py::none(), py::arg("oracle") = py::none(),
        "Alternating ROF/LLT stages; an oracle switches selection from residual to PSNR.");

  m.def("load_image", [](const std::string& path) { return to_array(load_image(path)); },
        py::arg("path"));
  m.def("save_image",
        [](const Array& u, const std::string& path) { save_image(to_grid(u), path); },
        py::arg("u"), py::arg("path"), "Quantizes to 8 bits and writes .pgm or .png.");
}
