#include "stagetv/stagewise.hpp"

#include <cmath>
#include <string>

#include "stagetv/errors.hpp"
#include "stagetv/metrics.hpp"

namespace stagetv {

Regularizer regularizer_for_stage(std::size_t stage) {
  if (stage == 0) throw DomainError("stages are numbered from 1");
  return stage % 2 == 1 ? Regularizer::FirstOrder : Regularizer::HigherOrder;
}

std::string_view to_string(Regularizer r) {
  return r == Regularizer::FirstOrder ? "rof" : "llt";
}

std::string_view to_string(SelectionMode m) {
  return m == SelectionMode::BlindResidual ? "blind" : "oracle";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::MaxStages: return "max_stages";
    case Termination::NoProgress: return "no_progress";
    case Termination::Tolerance: return "tolerance";
    case Termination::MaxInnerIterations: return "max_inner_iters";
  }
  return "unknown";
}

bool SelectionRule::offer(double score) {
  const std::size_t index = count_++;
  bool take = false;
  if (index == 0) {
    take = true;
  } else if (mode_ == SelectionMode::BlindResidual) {
    if (!frozen_) {
      if (score > last_) frozen_ = true;
      else take = true;
    }
  } else {
    take = score > best_.score;
  }
  last_ = score;
  if (take) best_ = Selection{index, score};
  return take;
}

SemiconvergenceMonitor::SemiconvergenceMonitor(SelectionMode mode, const ImageGrid& f,
                                               const ImageGrid* oracle)
    : mode_(mode), f_(&f), oracle_(oracle), rule_(mode) {
  if (mode == SelectionMode::OraclePsnr) {
    if (oracle == nullptr) throw ConfigError("oracle selection requires an oracle image");
    require_conformable(f, *oracle, "semiconv_select: oracle");
  }
}

double SemiconvergenceMonitor::score_of(const ImageGrid& u, const ImageGrid& blurred) const {
  if (mode_ == SelectionMode::OraclePsnr) return psnr(u, *oracle_);
  require_conformable(blurred, *f_, "semiconv_select");
  return (blurred - *f_).norm();
}

void SemiconvergenceMonitor::observe(const ImageGrid& u, const ImageGrid& blurred) {
  if (rule_.frozen()) return;
  if (rule_.offer(score_of(u, blurred))) selected_ = u;
}

Selection semiconv_select(std::span<const ImageGrid> iterates, const ImageGrid& f,
                          const FourierSymbol& kernel, SelectionMode mode,
                          const ImageGrid* oracle) {
  if (iterates.empty()) throw DomainError("semiconv_select: empty iterate sequence");
  if (mode == SelectionMode::OraclePsnr && oracle == nullptr) {
    throw ConfigError("semiconv_select: oracle mode requires an oracle image");
  }
  if (!kernel.conformable(f)) throw ShapeError("semiconv_select: kernel symbol shape mismatch");
  SemiconvergenceMonitor monitor(mode, f, oracle);
  for (const auto& u : iterates) {
    require_conformable(u, f, "semiconv_select");
    if (mode == SelectionMode::OraclePsnr) monitor.observe(u, u);
    else monitor.observe(u, kernel.is_identity() ? u : apply_symbol(kernel, u));
  }
  return monitor.selection();
}

void StagewiseConfig::validate() const {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(lambda1) || !positive(lambda2)) throw ConfigError("stagewise: lambdas must be > 0");
  if (!positive(penalty)) throw ConfigError("stagewise: penalty must be > 0");
  if (!positive(tol)) throw ConfigError("stagewise: tol must be > 0");
  if (max_inner_iters < 1) throw ConfigError("stagewise: max_inner_iters must be >= 1");
  if (n_max < 1) throw ConfigError("stagewise: n_max must be >= 1");
  const bool wants_oracle = selection == SelectionMode::OraclePsnr;
  if (wants_oracle && !oracle) throw ConfigError("stagewise: oracle selection needs an oracle");
  if (!wants_oracle && oracle) throw ConfigError("stagewise: oracle given in blind mode");
}

AdmmConfig StagewiseConfig::stage_config(std::size_t stage) const {
  AdmmConfig c;
  c.lambda = regularizer_for_stage(stage) == Regularizer::FirstOrder ? lambda1 : lambda2;
  c.penalty = penalty;
  c.tol = tol;
  c.max_inner_iters = max_inner_iters;
  return c;
}

std::size_t RestoreResult::total_iterations() const noexcept {
  std::size_t n = 0;
  for (const auto& s : stages) n += s.inner_iterations;
  return n;
}

namespace {

double relative_change(const ImageGrid& a, const ImageGrid& b) {
  const double diff = (a - b).norm();
  const double base = b.norm();
  return base > 0.0 ? diff / base : diff;
}

// Builds trace rows while a stage runs. The residual is always taken against the
// original observation, not the stage's data.
class RowRecorder {
public:
  RowRecorder(const ImageGrid& f, const ImageGrid* oracle, bool with_ssim)
      : f_(f),
        oracle_(oracle),
        with_ssim_(with_ssim && oracle != nullptr && f.rows() >= kSsimWindow &&
                   f.cols() >= kSsimWindow) {}

  void record(std::size_t stage, Regularizer reg, const IterateView& view) {
    TraceRow row;
    row.stage = stage;
    row.sigma = static_cast<int>(reg);
    row.iter = view.stats.k;
    row.rel_err = view.stats.rel_change;
    row.residual = (view.blurred - f_).norm();
    if (oracle_ != nullptr) row.psnr = psnr(view.u, *oracle_);
    if (with_ssim_) row.ssim = ssim(view.u, *oracle_);
    rows_.push_back(row);
  }

  std::vector<TraceRow>& rows() { return rows_; }

private:
  const ImageGrid& f_;
  const ImageGrid* oracle_;
  bool with_ssim_;
  std::vector<TraceRow> rows_;
};

AdmmResult run_model(Regularizer model, const ImageGrid& data, const FourierSymbol& kernel,
                     const AdmmConfig& cfg, const ImageGrid& u0, const AdmmOptions& options) {
  return model == Regularizer::FirstOrder ? admm_rof(data, kernel, cfg, u0, options)
                                          : admm_llt(data, kernel, cfg, u0, options);
}

} // namespace

RestoreResult run_stagewise(const ImageGrid& f, const FourierSymbol& kernel,
                            const StagewiseConfig& cfg) {
  cfg.validate();
  if (!kernel.conformable(f)) throw ShapeError("stagewise: kernel symbol shape mismatch");
  const ImageGrid* oracle = cfg.oracle ? &*cfg.oracle : nullptr;
  if (oracle) require_conformable(f, *oracle, "stagewise: oracle");

  const bool blind = cfg.selection == SelectionMode::BlindResidual;
  const SemiconvergenceMonitor scorer(cfg.selection, f, oracle);

  RestoreResult result;
  result.termination = Termination::MaxStages;
  ImageGrid input = f;
  double input_score = scorer.score_of(f, kernel.is_identity() ? f : apply_symbol(kernel, f));
  std::size_t stalled = 0;

  for (std::size_t stage = 1; stage <= cfg.n_max; ++stage) {
    const Regularizer reg = regularizer_for_stage(stage);
    SemiconvergenceMonitor monitor(cfg.selection, f, oracle);
    RowRecorder recorder(f, oracle, cfg.trace_ssim);

    AdmmOptions options;
    options.on_iterate = [&](const IterateView& view) {
      monitor.observe(view.u, view.blurred);
      recorder.record(stage, reg, view);
    };
    AdmmResult run = run_model(reg, input, kernel, cfg.stage_config(stage), input, options);

    const Selection sel = monitor.selection();
    StageRecord rec;
    rec.stage = stage;
    rec.regularizer = reg;
    rec.inner_iterations = run.iterations();
    rec.selected_iteration = sel.index + 1;
    rec.score = sel.score;
    rec.input_score = input_score;
    rec.entry_rel_change = run.trace.front().rel_change;
    rec.exit_rel_change = run.trace[sel.index].rel_change;
    const bool better = blind ? sel.score < input_score : sel.score > input_score;
    rec.progressed = better || (blind && stage == 1);

    const bool stationary = relative_change(monitor.selected(), input) < cfg.tol;
    if (rec.progressed) {
      auto& rows = recorder.rows();
      result.trace.insert(result.trace.end(), rows.begin(),
                          rows.begin() + static_cast<std::ptrdiff_t>(rec.selected_iteration));
      input = monitor.selected();
      input_score = sel.score;
      stalled = 0;
    } else {
      ++stalled;
    }
    rec.output_score = input_score;
    rec.trace = std::move(run.trace);
    result.stages.push_back(std::move(rec));

    if (stationary) {
      result.termination = Termination::Tolerance;
      break;
    }
    if (stalled >= 2) {
      result.termination = Termination::NoProgress;
      break;
    }
  }
  result.image = std::move(input);
  return result;
}

RestoreResult run_single_model(const ImageGrid& f, const FourierSymbol& kernel, Regularizer model,
                               const AdmmConfig& cfg, const ImageGrid* oracle, bool trace_ssim) {
  if (oracle) require_conformable(f, *oracle, "single model: oracle");
  RowRecorder recorder(f, oracle, trace_ssim);
  AdmmOptions options;
  options.on_iterate = [&](const IterateView& view) { recorder.record(1, model, view); };
  AdmmResult run = run_model(model, f, kernel, cfg, f, options);

  RestoreResult result;
  StageRecord rec;
  rec.stage = 1;
  rec.regularizer = model;
  rec.inner_iterations = run.iterations();
  rec.selected_iteration = run.iterations();
  rec.score = run.trace.back().data_residual;
  rec.input_score = 0.0;
  rec.output_score = rec.score;
  rec.entry_rel_change = run.trace.front().rel_change;
  rec.exit_rel_change = run.trace.back().rel_change;
  rec.progressed = true;
  rec.trace = std::move(run.trace);
  result.stages.push_back(std::move(rec));
  result.trace = std::move(recorder.rows());
  result.termination = run.stop == StopReason::Tolerance ? Termination::Tolerance
                                                         : Termination::MaxInnerIterations;
  result.image = std::move(run.u);
  return result;
}

} // namespace stagetv
