#pragma once

#include <cstdint>

#include "feature_cache.hpp"
#include "head.hpp"
#include "labels.hpp"

namespace cft {

// Ground-truth-known generator: standard-normal features, a logistic teacher
// head, labels sampled from the teacher's probabilities. Since each category
// is one logistic regression over the features, the hypothesis class can
// recover the teacher, making "calibration repairs a damaged head" a
// well-posed desk-scale claim.
struct SyntheticSpec {
  std::size_t n_samples = 0;
  std::size_t dim_z = 0;
  std::size_t n_categories = 0;
  double positive_rate = 0.1;
  double label_noise = 0.0;  // fraction of cells flipped after sampling
  uint64_t seed = 0;
  // Teacher rows are unit-norm directions scaled by this; the bias is then
  // solved so the expected positive fraction hits positive_rate. Around 6 the
  // teacher is sharp enough to be near-separable (oracle AUC > 0.95).
  double teacher_scale = 6.0;

  void validate() const;
};

struct SyntheticData {
  FeatureCache cache;
  LabelMatrix labels;  // fully labeled, Positive/Negative only
  ClassificationHead oracle_head;
};

SyntheticData generate(const SyntheticSpec& spec);

}  // namespace cft
