#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace cft {

// Frozen-backbone feature vectors, one row per sample. float32 on disk and in
// memory; everything downstream computes at 64-bit.
struct FeatureCache {
  std::size_t n_samples = 0;
  std::size_t dim_z = 0;
  std::vector<float> data;  // row-major

  FeatureCache() = default;
  FeatureCache(std::size_t n, std::size_t z) : n_samples(n), dim_z(z), data(n * z, 0.0f) {}

  const float* row(std::size_t i) const { return data.data() + i * dim_z; }
  float* row(std::size_t i) { return data.data() + i * dim_z; }
};

void save_cache(const FeatureCache& cache, const std::string& path);
FeatureCache load_cache(const std::string& path);

// Copies the given rows, in the given order, into a 64-bit matrix.
Mat gather(const FeatureCache& cache, std::span<const std::size_t> indices);

}  // namespace cft
