#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cft_report.hpp"
#include "head.hpp"
#include "losses.hpp"
#include "metrics.hpp"

namespace cft {

enum class Optimizer { FullBatchGd, FullBatchAdam };

struct BPConfig {
  Optimizer optimizer = Optimizer::FullBatchGd;
  double learning_rate = 1e-4;
  std::size_t epochs = 500;
  ASLParams asl;
  std::optional<MetricKind> early_stop_metric;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

struct TrajectoryPoint {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> valid_metric;
};
// Record e describes the parameters after e updates; record 0 is the initial
// state, so a full run has epochs + 1 records.
using Trajectory = std::vector<TrajectoryPoint>;

struct UnitValidSet {
  Mat features;
  std::vector<int8_t> labels;  // {-1, +1}
};

struct FinetuneResult {
  LRUnit unit;
  Trajectory trajectory;  // empty when the training set is empty (skip)
  std::size_t best_epoch = 0;
};

// Full-batch fine-tuning of a single logistic regression on soft targets.
// With a validation set and an early-stop metric, returns the parameters of
// the best-metric epoch (ties -> earliest); otherwise the final epoch.
FinetuneResult finetune_unit_bp(const LRUnit& unit, const Mat& features,
                                std::span<const double> targets, const UnitValidSet* valid,
                                const BPConfig& config, uint64_t seed);

// Category-wise fine-tuning by backprop: each category's LR is tuned
// independently on its known-label samples and merged back. Result is
// invariant to processing order and to opts.jobs.
std::pair<ClassificationHead, CftReport> cft_bp(const ClassificationHead& head,
                                                const FeatureCache& cache,
                                                const LabelMatrix& labels,
                                                const std::optional<CftDataset>& valid,
                                                const UncertainPolicy& policy,
                                                const BPConfig& config, uint64_t seed,
                                                const CftRunOptions& opts = {});

struct JointReport {
  std::vector<double> train_loss;                 // epochs + 1 entries
  std::vector<std::vector<double>> valid_metric;  // [epoch][category], NaN = undefined
  std::vector<double> valid_mean;                 // per epoch, NaN when nothing defined
  std::size_t best_epoch = 0;
  std::size_t n_cells = 0;
};

// The whole-layer fine-tuning baseline: one joint run over the union of known
// cells, early-stopped once at the best mean validation metric. Exists to
// contrast with per-category early stopping.
std::pair<ClassificationHead, JointReport> ft_joint_baseline(
    const ClassificationHead& head, const FeatureCache& cache, const LabelMatrix& labels,
    const std::optional<CftDataset>& valid, const UncertainPolicy& policy,
    const BPConfig& config, uint64_t seed);

}  // namespace cft
