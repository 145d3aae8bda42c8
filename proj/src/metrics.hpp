#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cft {

enum class MetricKind { Auc, Ap };

const char* metric_name(MetricKind kind);
MetricKind metric_from_name(const std::string& name);

// One category's evaluation data: hard labels in {-1, +1} paired with
// predicted probabilities. Callers filter out unknown/uncertain/masked cells
// before building one.
struct EvalSet {
  std::vector<int8_t> labels;
  std::vector<double> predictions;
};

// Pairwise ranking AUC. Ties count zero by default; tie_half=true scores each
// tied positive-negative pair 0.5 (midrank convention). Throws an
// undefined-metric error unless both classes are present.
double auc(const EvalSet& set, bool tie_half = false);

// Average precision: for each positive i, precision of the prediction-
// threshold cut at p_i (ties included on both sides of the ratio), averaged
// over positives. Throws an undefined-metric error without a positive.
double ap(const EvalSet& set);

double eval_metric(const EvalSet& set, MetricKind kind, bool tie_half = false);

struct MeanMetric {
  double value = 0.0;
  std::vector<std::size_t> used;     // categories included in the mean
  std::vector<std::size_t> skipped;  // categories dropped as undefined
};

// Unweighted mean over categories. With a subset, every listed category must
// be present and defined; without one, undefined categories are skipped and
// reported.
MeanMetric mean_metric(const std::vector<std::pair<std::size_t, EvalSet>>& sets, MetricKind kind,
                       const std::optional<std::vector<std::size_t>>& subset = std::nullopt,
                       bool tie_half = false);

}  // namespace cft
