#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stagetv/grid.hpp"
#include "stagetv/operators.hpp"
#include "stagetv/solvers.hpp"

namespace stagetv {

enum class Regularizer { FirstOrder = 1, HigherOrder = 2 };

/// Odd stages use the first-order model, even stages the higher-order one.
Regularizer regularizer_for_stage(std::size_t stage);

enum class SelectionMode {
  /// Keep the iterate just before ||K u - f|| first increases.
  BlindResidual,
  /// Keep the iterate with the highest PSNR against a reference image.
  OraclePsnr,
};

std::string_view to_string(Regularizer r);
std::string_view to_string(SelectionMode m);

struct Selection {
  std::size_t index = 0;
  /// Residual (blind) or PSNR in dB (oracle).
  double score = 0.0;
};

/// Incremental form of the selection rule over a score sequence. Blind mode scores
/// are residuals (lower is better, frozen at the first rise); oracle mode scores are
/// PSNRs (argmax, earliest index on ties).
class SelectionRule {
public:
  explicit SelectionRule(SelectionMode mode) : mode_(mode) {}

  /// Offers the next score; returns true when it becomes the current selection.
  bool offer(double score);

  bool empty() const noexcept { return count_ == 0; }
  Selection selection() const noexcept { return best_; }
  /// Blind mode has seen a rise; no later score can be selected.
  bool frozen() const noexcept { return frozen_; }

private:
  SelectionMode mode_;
  std::size_t count_ = 0;
  double last_ = 0.0;
  bool frozen_ = false;
  Selection best_;
};

/// Streams solver iterates through a SelectionRule, keeping a copy of the selected image.
class SemiconvergenceMonitor {
public:
  SemiconvergenceMonitor(SelectionMode mode, const ImageGrid& f, const ImageGrid* oracle);

  /// `blurred` must be K u for the forward operator of the problem.
  void observe(const ImageGrid& u, const ImageGrid& blurred);

  double score_of(const ImageGrid& u, const ImageGrid& blurred) const;
  bool empty() const noexcept { return rule_.empty(); }
  Selection selection() const noexcept { return rule_.selection(); }
  const ImageGrid& selected() const noexcept { return selected_; }

private:
  SelectionMode mode_;
  const ImageGrid* f_;
  const ImageGrid* oracle_;
  SelectionRule rule_;
  ImageGrid selected_;
};

/// Semi-convergence selection over a stored iterate sequence.
/// Throws DomainError on an empty sequence and ConfigError when oracle mode lacks an oracle.
Selection semiconv_select(std::span<const ImageGrid> iterates, const ImageGrid& f,
                          const FourierSymbol& kernel, SelectionMode mode,
                          const ImageGrid* oracle = nullptr);

struct StagewiseConfig {
  double lambda1 = 2.0;
  double lambda2 = 2.0;
  double penalty = 2.0;
  double tol = 1e-8;
  std::size_t max_inner_iters = 200;
  std::size_t n_max = 12;
  SelectionMode selection = SelectionMode::BlindResidual;
  /// Reference image; required iff selection == OraclePsnr.
  std::optional<ImageGrid> oracle;
  /// Fill the ssim column of trace rows (oracle mode, images at least 11x11).
  bool trace_ssim = true;

  void validate() const;
  AdmmConfig stage_config(std::size_t stage) const;
};

struct StageRecord {
  std::size_t stage = 0;
  Regularizer regularizer = Regularizer::FirstOrder;
  std::size_t inner_iterations = 0;
  /// 1-based inner iteration of the selected iterate.
  std::size_t selected_iteration = 0;
  /// Score of the selected iterate.
  double score = 0.0;
  /// Score of the stage input.
  double input_score = 0.0;
  /// Score of what the stage propagated (the selection, or the input on no progress).
  double output_score = 0.0;
  /// e_r at the first and at the selected inner iteration.
  double entry_rel_change = 0.0;
  double exit_rel_change = 0.0;
  bool progressed = false;
  InnerTrace trace;
};

/// One row of the convergence trace (CSV schema stage,sigma,iter,rel_err,residual,psnr,ssim).
struct TraceRow {
  std::size_t stage = 0;
  int sigma = 1;
  std::size_t iter = 0;
  double rel_err = 0.0;
  /// ||K u - f|| against the original observation.
  double residual = 0.0;
  std::optional<double> psnr;
  std::optional<double> ssim;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

enum class Termination { MaxStages, NoProgress, Tolerance, MaxInnerIterations };

std::string_view to_string(Termination t);

struct RestoreResult {
  ImageGrid image;
  std::vector<StageRecord> stages;
  /// Rows of the accepted path: for every stage that made progress, iterations
  /// 1..selected_iteration; single-model runs keep every iteration.
  std::vector<TraceRow> trace;
  Termination termination = Termination::MaxStages;

  /// Inner iterations actually computed across all stages.
  std::size_t total_iterations() const noexcept;
};

/// Alternates first-order (odd) and higher-order (even) ADMM stages. Stage N solves its
/// model with the image propagated by stage N-1 as data (f itself for N = 1), selects
/// an iterate by semi-convergence against the original f, and propagates it when it
/// beats the stage input; otherwise the input is passed on unchanged. Stops after
/// n_max stages, after two consecutive stages without progress, or when a stage's
/// selection is within tol (relative) of its input. In blind mode the first stage's
/// selection is always accepted, since f itself has zero residual when K = I.
RestoreResult run_stagewise(const ImageGrid& f, const FourierSymbol& kernel,
                            const StagewiseConfig& cfg);

/// Plain single-model run (the final iterate is the output), traced like a stage.
RestoreResult run_single_model(const ImageGrid& f, const FourierSymbol& kernel,
                               Regularizer model, const AdmmConfig& cfg,
                               const ImageGrid* oracle = nullptr, bool trace_ssim = true);

} // namespace stagetv
