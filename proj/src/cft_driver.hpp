#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

#include "cft_bp.hpp"
#include "cft_report.hpp"
#include "head.hpp"
#include "metrics.hpp"

// Shared per-category orchestration for both CFT variants: gathering,
// uncertain-policy handling (including the greedy search), before/after
// metrics, deterministic parallelism, and the disjoint-row merge.

namespace cft::detail {

struct TuneOutput {
  LRUnit unit;
  bool skipped = false;
  std::size_t steps_run = 0;
  std::size_t best_step = 0;
  std::vector<double> valid_curve;
  std::vector<double> history;
  std::optional<double> fitness_initial;
  std::optional<double> fitness_final;
};

// tune(original unit, gathered features, targets, valid or null, category seed)
using TuneFn = std::function<TuneOutput(const LRUnit&, const Mat&, const std::vector<double>&,
                                        const UnitValidSet*, uint64_t)>;

std::pair<ClassificationHead, CftReport> run_cft(
    const ClassificationHead& head, const FeatureCache& cache, const LabelMatrix& labels,
    const std::optional<CftDataset>& valid, const UncertainPolicy& policy, uint64_t seed,
    const CftRunOptions& opts, MetricKind metric, const char* variant, const TuneFn& tune);

}  // namespace cft::detail
