#include "baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "losses.hpp"
#include "rng.hpp"

namespace cft {

static void check_shapes(const FeatureCache& cache, const TargetMatrix& targets) {
  if (cache.n_samples != targets.n_samples)
    fail(Errc::Param, "cache and targets disagree on sample count");
  if (cache.n_samples == 0 || cache.dim_z == 0 || targets.n_categories == 0)
    fail(Errc::Param, "cannot train on empty data");
}

double head_mean_loss(const ClassificationHead& head, const FeatureCache& cache,
                      const TargetMatrix& targets, const ASLParams& params) {
  check_shapes(cache, targets);
  if (head.n_categories != targets.n_categories || head.dim_z != cache.dim_z)
    fail(Errc::Param, "head shape does not match data");
  const std::size_t z = cache.dim_z;
  std::vector<double> xi(z);
  double loss = 0.0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < cache.n_samples; ++i) {
    const float* row = cache.row(i);
    for (std::size_t j = 0; j < z; ++j) xi[j] = static_cast<double>(row[j]);
    for (std::size_t c = 0; c < targets.n_categories; ++c) {
      if (targets.masked_at(i, c)) continue;
      double p = logistic(dot(head.row(c), xi.data(), z) + head.bias[c]);
      loss += asl_loss(targets.value_at(i, c), p, params);
      ++m;
    }
  }
  if (m == 0) fail(Errc::Param, "every target cell is masked");
  return loss / static_cast<double>(m);
}

ClassificationHead train_head(const FeatureCache& cache, const TargetMatrix& targets,
                              const BPConfig& config, uint64_t seed) {
  config.validate();
  check_shapes(cache, targets);
  std::size_t m_cells = 0;
  for (uint8_t v : targets.mask) m_cells += v;
  if (m_cells == 0) fail(Errc::Param, "every target cell is masked");
  const double inv_m = 1.0 / static_cast<double>(m_cells);

  const std::size_t n = cache.n_samples;
  const std::size_t z = cache.dim_z;
  const std::size_t c_count = targets.n_categories;

  ClassificationHead head(c_count, z);
  const double scale = 1.0 / std::sqrt(static_cast<double>(z));
  Rng rng(seed);
  for (double& w : head.weights) w = rng.uniform(-scale, scale);

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  Mat x = gather(cache, all);

  Mat grad_w(c_count, z);
  std::vector<double> grad_b(c_count);
  std::vector<double> adam_m, adam_v;
  if (config.optimizer == Optimizer::FullBatchAdam) {
    adam_m.assign(c_count * z + c_count, 0.0);
    adam_v.assign(c_count * z + c_count, 0.0);
  }

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad_w.data.begin(), grad_w.data.end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = x.row(i);
      for (std::size_t c = 0; c < c_count; ++c) {
        if (targets.masked_at(i, c)) continue;
        double p = logistic(dot(head.row(c), xi, z) + head.bias[c]);
        double g = asl_grad_logit(targets.value_at(i, c), p, config.asl);
        double* gc = grad_w.row(c);
        for (std::size_t j = 0; j < z; ++j) gc[j] += g * xi[j];
        grad_b[c] += g;
      }
    }

    if (config.optimizer == Optimizer::FullBatchGd) {
      for (std::size_t c = 0; c < c_count; ++c) {
        double* wc = head.row(c);
        const double* gc = grad_w.row(c);
        for (std::size_t j = 0; j < z; ++j) wc[j] -= config.learning_rate * gc[j] * inv_m;
        head.bias[c] -= config.learning_rate * grad_b[c] * inv_m;
      }
    } else {
      double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(epoch + 1));
      double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(epoch + 1));
      auto step = [&](std::size_t k, double g, double& param) {
        adam_m[k] = config.adam_beta1 * adam_m[k] + (1.0 - config.adam_beta1) * g;
        adam_v[k] = config.adam_beta2 * adam_v[k] + (1.0 - config.adam_beta2) * g * g;
        param -= config.learning_rate * (adam_m[k] / bc1) / (std::sqrt(adam_v[k] / bc2) +
                                                             config.adam_eps);
      };
      for (std::size_t c = 0; c < c_count; ++c) {
        double* wc = head.row(c);
        const double* gc = grad_w.row(c);
        for (std::size_t j = 0; j < z; ++j) step(c * z + j, gc[j] * inv_m, wc[j]);
      }
      for (std::size_t c = 0; c < c_count; ++c)
        step(c_count * z + c, grad_b[c] * inv_m, head.bias[c]);
    }
  }
  return head;
}

}  // namespace cft
