#include "stagetv/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include "stagetv/errors.hpp"
#include "stagetv/io.hpp"
#include "stagetv/metrics.hpp"
#include "stagetv/stagewise.hpp"

namespace stagetv {

namespace {

using nlohmann::ordered_json;

struct BlurFlags {
  std::size_t size = 3;
  std::optional<double> sigma;

  void attach(CLI::App* app) {
    app->add_option("--blur-size", size, "Gaussian blur kernel size (odd)");
    app->add_option("--blur-sigma", sigma, "Gaussian blur sigma; omit for no blur");
  }
};

struct DegradeArgs {
  std::string in, out;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  BlurFlags blur;
};

struct RestoreArgs {
  std::string in, out, method = "stagewise";
  std::string oracle, trace;
  double lambda1 = 2.0, lambda2 = 2.0, penalty = 2.0, tol = 1e-8;
  std::size_t max_inner = 200, n_max = 12;
  BlurFlags blur;
};

struct MetricsArgs {
  std::string a, b;
};

ordered_json number_or_inf(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

// PSNR/SSIM/FOM of `u` against `ref`; metrics that are undefined for the pair are null.
ordered_json quality(const ImageGrid& u, const ImageGrid& ref) {
  ordered_json j;
  j["psnr"] = number_or_inf(psnr(u, ref));
  if (u.rows() >= kSsimWindow && u.cols() >= kSsimWindow) j["ssim"] = ssim(u, ref);
  else j["ssim"] = nullptr;
  const EdgeMap ref_edges = detect_edges(ref);
  if (ref_edges.count() > 0) j["fom"] = fom_edges(detect_edges(u), ref_edges);
  else j["fom"] = nullptr;
  return j;
}

void write_json_file(const ordered_json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path, "cannot open for writing");
  out << j.dump(2) << '\n';
}

int run_degrade(const DegradeArgs& a) {
  DegradeSpec spec;
  spec.kernel_size = a.blur.size;
  spec.blur_sigma = a.blur.sigma;
  spec.noise_sigma = a.noise_sigma;
  spec.seed = a.seed;
  spec.validate();

  const ImageGrid u = load_image(a.in);
  save_image(degrade(u, spec), a.out);

  ordered_json side;
  side["input"] = a.in;
  side["kernel_size"] = spec.blur_sigma ? spec.kernel_size : std::size_t{1};
  side["blur_sigma"] = spec.blur_sigma ? ordered_json(*spec.blur_sigma) : ordered_json(nullptr);
  side["noise_sigma"] = spec.noise_sigma;
  side["seed"] = spec.seed;
  side["noise_scheme"] = kNoiseScheme;
  side["boundary"] = "periodic";
  side["output_quantization"] = "clamp [0,255], round half away from zero";
  write_json_file(side, a.out + ".json");
  return 0;
}

int run_restore(const RestoreArgs& a, std::ostream& out) {
  const ImageGrid f = load_image(a.in);
  std::optional<ImageGrid> oracle;
  if (!a.oracle.empty()) {
    oracle = load_image(a.oracle);
    require_conformable(f, *oracle, "restore: oracle");
  }
  const BlurKernel kernel =
      a.blur.sigma ? gaussian_kernel(a.blur.size, *a.blur.sigma) : BlurKernel::identity();
  const FourierSymbol sym = a.blur.sigma ? kernel_symbol(kernel, f.rows(), f.cols())
                                         : FourierSymbol::identity(f.rows(), f.cols());

  RestoreResult result;
  if (a.method == "stagewise") {
    StagewiseConfig cfg;
    cfg.lambda1 = a.lambda1;
    cfg.lambda2 = a.lambda2;
    cfg.penalty = a.penalty;
    cfg.tol = a.tol;
    cfg.max_inner_iters = a.max_inner;
    cfg.n_max = a.n_max;
    cfg.selection = oracle ? SelectionMode::OraclePsnr : SelectionMode::BlindResidual;
    cfg.oracle = oracle;
    result = run_stagewise(f, sym, cfg);
  } else {
    AdmmConfig cfg;
    const bool first = a.method == "rof";
    cfg.lambda = first ? a.lambda1 : a.lambda2;
    cfg.penalty = a.penalty;
    cfg.tol = a.tol;
    cfg.max_inner_iters = a.max_inner;
    result = run_single_model(f, sym, first ? Regularizer::FirstOrder : Regularizer::HigherOrder,
                              cfg, oracle ? &*oracle : nullptr);
  }

  save_image(result.image, a.out);
  if (!a.trace.empty()) write_trace(result.trace, a.trace);

  ordered_json j;
  j["method"] = a.method;
  if (oracle) {
    const ordered_json saved = quality(quantize_8bit(result.image), *oracle);
    j["psnr"] = saved["psnr"];
    j["ssim"] = saved["ssim"];
    j["fom"] = saved["fom"];
  } else {
    j["psnr"] = nullptr;
    j["ssim"] = nullptr;
    j["fom"] = nullptr;
  }
  j["stages"] = result.stages.size();
  j["total_iters"] = result.total_iterations();
  j["termination"] = std::string(to_string(result.termination));
  if (oracle) j["raw"] = quality(result.image, *oracle);
  out << j.dump() << '\n';
  return 0;
}

int run_metrics(const MetricsArgs& a, std::ostream& out) {
  const ImageGrid x = load_image(a.a);
  const ImageGrid y = load_image(a.b);
  require_conformable(x, y, "metrics");
  out << quality(x, y).dump() << '\n';
  return 0;
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stage-wise alternating TV image restoration", "stagetv"};
  app.require_subcommand(1);

  DegradeArgs degrade_args;
  auto* deg = app.add_subcommand("degrade", "Blur and add seeded Gaussian noise to an image");
  deg->add_option("--in", degrade_args.in, "Clean input image")->required();
  deg->add_option("--out", degrade_args.out, "Degraded output image")->required();
  deg->add_option("--noise-sigma", degrade_args.noise_sigma, "Noise standard deviation")
      ->required();
  deg->add_option("--seed", degrade_args.seed, "Noise seed")->required();
  degrade_args.blur.attach(deg);

  RestoreArgs restore_args;
  auto* res = app.add_subcommand("restore", "Restore a degraded image");
  res->add_option("--in", restore_args.in, "Degraded input image")->required();
  res->add_option("--out", restore_args.out, "Restored output image")->required();
  res->add_option("--method", restore_args.method, "Restoration method")
      ->check(CLI::IsMember({"rof", "llt", "stagewise"}));
  res->add_option("--lambda1", restore_args.lambda1, "First-order weight");
  res->add_option("--lambda2", restore_args.lambda2, "Higher-order weight");
  res->add_option("--penalty", restore_args.penalty, "ADMM penalty");
  res->add_option("--tol", restore_args.tol, "Inner stopping tolerance");
  res->add_option("--max-inner", restore_args.max_inner, "Inner iteration cap per stage");
  res->add_option("--n-max", restore_args.n_max, "Stage cap");
  res->add_option("--oracle", restore_args.oracle, "Ground truth (enables PSNR selection)");
  res->add_option("--trace", restore_args.trace, "Trace CSV output");
  restore_args.blur.attach(res);

  MetricsArgs metrics_args;
  auto* met = app.add_subcommand("metrics", "Compare two images");
  met->add_option("--a", metrics_args.a, "Test image")->required();
  met->add_option("--b", metrics_args.b, "Reference image")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return 1;
  }

  try {
    if (deg->parsed()) return run_degrade(degrade_args);
    if (res->parsed()) return run_restore(restore_args, out);
    return run_metrics(metrics_args, out);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

} // namespace stagetv
