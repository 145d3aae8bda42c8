#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cft {

// Per-cell annotation state. Unknown and Uncertain are distinct: Unknown means
// unannotated, Uncertain is an explicit ambiguous annotation and is resolved
// by an UncertainPolicy, never auto-coerced.
enum class LabelValue : int8_t {
  Negative = -1,
  Unknown = 0,
  Positive = 1,
  Uncertain = 2,
};

struct LabelMatrix {
  std::size_t n_samples = 0;
  std::size_t n_categories = 0;
  std::vector<LabelValue> cells;  // row-major, n_samples x n_categories

  LabelMatrix() = default;
  LabelMatrix(std::size_t n, std::size_t c)
      : n_samples(n), n_categories(c), cells(n * c, LabelValue::Unknown) {}

  LabelValue at(std::size_t sample, std::size_t category) const {
    return cells[sample * n_categories + category];
  }
  LabelValue& at(std::size_t sample, std::size_t category) {
    return cells[sample * n_categories + category];
  }

  void validate() const;
};

// Soft training targets plus a parallel validity mask. Masked cells carry no
// target and must contribute nothing downstream; MASKED is never a magic
// float value.
struct TargetMatrix {
  std::size_t n_samples = 0;
  std::size_t n_categories = 0;
  std::vector<double> values;
  std::vector<uint8_t> mask;  // 1 = target valid, 0 = MASKED

  TargetMatrix() = default;
  TargetMatrix(std::size_t n, std::size_t c)
      : n_samples(n), n_categories(c), values(n * c, 0.0), mask(n * c, 0) {}

  double value_at(std::size_t sample, std::size_t category) const {
    return values[sample * n_categories + category];
  }
  bool masked_at(std::size_t sample, std::size_t category) const {
    return mask[sample * n_categories + category] == 0;
  }
  void set(std::size_t sample, std::size_t category, double v) {
    values[sample * n_categories + category] = v;
    mask[sample * n_categories + category] = 1;
  }
  void set_masked(std::size_t sample, std::size_t category) {
    values[sample * n_categories + category] = 0.0;
    mask[sample * n_categories + category] = 0;
  }
};

enum class PolicyKind {
  Ignore,       // uncertain -> MASKED
  Ones,         // uncertain -> 1.0
  Zeros,        // uncertain -> 0.0
  OnesLsr,      // uncertain -> uniform draw in [lo, hi]
  PerCategory,  // per-category rule map
};

struct CategoryRule {
  PolicyKind kind = PolicyKind::Ignore;  // never PerCategory
  double lo = 0.55;
  double hi = 0.85;
};

struct UncertainPolicy {
  PolicyKind kind = PolicyKind::Ignore;
  double lo = 0.55;
  double hi = 0.85;
  std::map<std::size_t, CategoryRule> per_category;

  static UncertainPolicy ignore() { return {}; }
  static UncertainPolicy ones() { return {PolicyKind::Ones, 0, 0, {}}; }
  static UncertainPolicy zeros() { return {PolicyKind::Zeros, 0, 0, {}}; }
  static UncertainPolicy ones_lsr(double lo, double hi) {
    return {PolicyKind::OnesLsr, lo, hi, {}};
  }
  static UncertainPolicy per(std::map<std::size_t, CategoryRule> rules) {
    return {PolicyKind::PerCategory, 0, 0, std::move(rules)};
  }

  void validate() const;
  // Rule applying to one category. Throws a configuration error for a
  // PerCategory policy with no entry; callers only ask when they actually hit
  // an Uncertain cell, so the error fires exactly when it matters.
  CategoryRule rule_for(std::size_t category) const;
};

// Uniform label dropping: keeps exactly round(keep_fraction * #known) known
// cells (Positive/Negative), sets the rest to Unknown. Uncertain and Unknown
// cells are untouched. stratified=true applies the same rule per category.
LabelMatrix drop_labels(const LabelMatrix& labels, double keep_fraction, uint64_t seed,
                        bool stratified = false);

// Assume Negative pseudo-labeling: Positive->1, Negative->0, Unknown->0,
// Uncertain->MASKED (left for resolve_uncertain).
TargetMatrix assume_negative(const LabelMatrix& labels);

// Resolves cells that are Uncertain in `labels` according to `policy`; every
// other cell of `targets` is passed through unchanged.
TargetMatrix resolve_uncertain(const TargetMatrix& targets, const LabelMatrix& labels,
                               const UncertainPolicy& policy, uint64_t seed);

// Sample indices with a known (Positive/Negative) label for one category,
// ascending.
std::vector<std::size_t> known_index(const LabelMatrix& labels, std::size_t category);

// Per-category training set for category-wise fine-tuning: known cells plus
// Uncertain cells resolved to unmasked targets under `policy`. Draw for a
// given cell depends only on (seed, sample, category).
struct CategoryTargets {
  std::vector<std::size_t> indices;
  std::vector<double> targets;
};
CategoryTargets category_training_targets(const LabelMatrix& labels, std::size_t category,
                                          const UncertainPolicy& policy, uint64_t seed);

// Matrix form of the same selection rule: known cells become hard targets,
// Unknown cells are MASKED, Uncertain cells go through `policy` with the same
// (seed, sample, category) keyed draws as category_training_targets.
TargetMatrix known_targets(const LabelMatrix& labels, const UncertainPolicy& policy,
                           uint64_t seed);

// CSV with header `sample_id,cat_0,...,cat_{C-1}` and cells in {1,-1,0,u}.
void save_labels_csv(const LabelMatrix& labels, const std::string& path);
LabelMatrix load_labels_csv(const std::string& path);

}  // namespace cft
