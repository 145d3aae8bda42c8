#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "feature_cache.hpp"
#include "labels.hpp"

namespace cft {

// Per-category outcome of a CFT run. steps are epochs for the BP variant and
// generations for the GA variant.
struct CategoryOutcome {
  std::size_t category = 0;
  bool skipped = false;
  std::size_t n_train = 0;
  std::size_t n_valid = 0;
  std::size_t steps_run = 0;
  std::size_t best_step = 0;
  std::optional<double> metric_before;
  std::optional<double> metric_after;
  std::string policy;
  std::vector<double> valid_curve;  // bp: per-epoch validation metric, NaN = undefined
  std::vector<double> history;      // ga: best fitness per generation
  std::optional<double> fitness_initial;
  std::optional<double> fitness_final;
};

struct CftReport {
  std::string variant;  // "bp" or "ga"
  std::string metric;
  std::vector<CategoryOutcome> categories;
  std::optional<double> mean_before;
  std::optional<double> mean_after;
};

// Held-out data used for before/after metrics and early stopping.
struct CftDataset {
  const FeatureCache* cache = nullptr;
  const LabelMatrix* labels = nullptr;
};

struct CftRunOptions {
  unsigned jobs = 1;
  std::vector<std::size_t> order;  // processing order; empty = 0..C-1
  bool greedy = false;             // per-category uncertain-policy search
};

}  // namespace cft
