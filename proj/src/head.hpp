#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace cft {

// Numerically stable logistic; safe for |x| in the thousands.
inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// The classification layer: p = sigma(W z + b). Row c plus bias c is an
// independent logistic regression for category c, and that equivalence is
// what category-wise fine-tuning exploits.
struct ClassificationHead {
  std::size_t n_categories = 0;
  std::size_t dim_z = 0;
  std::vector<double> weights;  // row-major, n_categories x dim_z
  std::vector<double> bias;

  ClassificationHead() = default;
  ClassificationHead(std::size_t c, std::size_t z)
      : n_categories(c), dim_z(z), weights(c * z, 0.0), bias(c, 0.0) {}

  const double* row(std::size_t c) const { return weights.data() + c * dim_z; }
  double* row(std::size_t c) { return weights.data() + c * dim_z; }

  void validate() const;
};

// One category's logistic regression, detached from its head.
struct LRUnit {
  std::vector<double> weight;
  double bias = 0.0;
  std::size_t category = 0;
};

std::vector<double> predict(const ClassificationHead& head, std::span<const double> z);
double predict_unit(const LRUnit& unit, std::span<const double> z);
// One probability per row of a gathered feature matrix.
std::vector<double> predict_unit_batch(const LRUnit& unit, const Mat& features);

std::vector<LRUnit> decompose(const ClassificationHead& head);
ClassificationHead reassemble(const std::vector<LRUnit>& units);
ClassificationHead replace_unit(const ClassificationHead& head, const LRUnit& unit);
LRUnit extract_unit(const ClassificationHead& head, std::size_t category);

void save_head(const ClassificationHead& head, const std::string& path);
ClassificationHead load_head(const std::string& path);
std::string head_to_json(const ClassificationHead& head);

}  // namespace cft
