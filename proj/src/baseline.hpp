#pragma once

#include <cstdint>

#include "cft_bp.hpp"
#include "feature_cache.hpp"
#include "head.hpp"
#include "labels.hpp"

namespace cft {

// Trains a fresh head full-batch on the unmasked cells of `targets` (mean ASL
// over cells). Weights start uniform in +-1/sqrt(Z), biases at zero; the whole
// run is deterministic given the seed. This produces the "trained model" that
// category-wise fine-tuning is then applied to.
ClassificationHead train_head(const FeatureCache& cache, const TargetMatrix& targets,
                              const BPConfig& config, uint64_t seed);

// Mean ASL over unmasked cells; the quantity train_head minimizes.
double head_mean_loss(const ClassificationHead& head, const FeatureCache& cache,
                      const TargetMatrix& targets, const ASLParams& params);

}  // namespace cft
