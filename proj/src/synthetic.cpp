#include "synthetic.hpp"

#include <cmath>

#include "error.hpp"
#include "rng.hpp"

namespace cft {

void SyntheticSpec::validate() const {
  if (n_samples == 0 || dim_z == 0 || n_categories == 0)
    fail(Errc::Param, "synthetic dimensions must be positive");
  if (!(positive_rate > 0.0 && positive_rate < 1.0))
    fail(Errc::Param, "positive_rate must lie in (0, 1)");
  if (!(label_noise >= 0.0 && label_noise < 1.0))
    fail(Errc::Param, "label_noise must lie in [0, 1)");
  if (!(teacher_scale > 0.0)) fail(Errc::Param, "teacher_scale must be positive");
}

// E[sigma(s*t + b)] over t ~ N(0,1), by Simpson's rule. The teacher logit is
// s*t + b with t standard normal because the row has norm s and the features
// are isotropic.
static double expected_positive_rate(double s, double b) {
  constexpr int kIntervals = 2000;  // even
  constexpr double kLim = 8.0;
  const double h = 2.0 * kLim / kIntervals;
  auto f = [&](double t) {
    return logistic(s * t + b) * std::exp(-0.5 * t * t) / std::sqrt(2.0 * 3.14159265358979323846);
  };
  double sum = f(-kLim) + f(kLim);
  for (int i = 1; i < kIntervals; ++i) sum += f(-kLim + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// Bisection on the (monotone) expected rate.
static double solve_bias(double s, double rate) {
  double lo = -60.0, hi = 60.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (expected_positive_rate(s, mid) < rate)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

SyntheticData generate(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_samples;
  const std::size_t z = spec.dim_z;
  const std::size_t c_count = spec.n_categories;

  SyntheticData out;
  out.cache = FeatureCache(n, z);
  Rng feat_rng(mix64(spec.seed, 0xFEA7));
  for (float& v : out.cache.data) v = static_cast<float>(feat_rng.normal());

  out.oracle_head = ClassificationHead(c_count, z);
  const double bias = solve_bias(spec.teacher_scale, spec.positive_rate);
  for (std::size_t c = 0; c < c_count; ++c) {
    Rng dir_rng(mix64(spec.seed, 0x4EAD, c));
    double* row = out.oracle_head.row(c);
    double norm2 = 0.0;
    for (std::size_t j = 0; j < z; ++j) {
      row[j] = dir_rng.normal();
      norm2 += row[j] * row[j];
    }
    const double scale = spec.teacher_scale / std::sqrt(norm2);
    for (std::size_t j = 0; j < z; ++j) row[j] *= scale;
    out.oracle_head.bias[c] = bias;
  }

  out.labels = LabelMatrix(n, c_count);
  const uint64_t label_seed = mix64(spec.seed, 0x1ABE1);
  std::vector<double> xi(z);
  for (std::size_t i = 0; i < n; ++i) {
    const float* row = out.cache.row(i);
    for (std::size_t j = 0; j < z; ++j) xi[j] = static_cast<double>(row[j]);
    for (std::size_t c = 0; c < c_count; ++c) {
      double p = logistic(dot(out.oracle_head.row(c), xi.data(), z) + out.oracle_head.bias[c]);
      out.labels.at(i, c) =
          p > keyed_u01(label_seed, i, c) ? LabelValue::Positive : LabelValue::Negative;
    }
  }

  const auto flips =
      static_cast<std::size_t>(std::llround(spec.label_noise * static_cast<double>(n * c_count)));
  if (flips > 0) {
    std::vector<std::size_t> cells(n * c_count);
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = i;
    Rng flip_rng(mix64(spec.seed, 0xF11B));
    for (std::size_t i = 0; i < flips; ++i) {
      std::size_t j = i + static_cast<std::size_t>(flip_rng.below(cells.size() - i));
      std::swap(cells[i], cells[j]);
      LabelValue& v = out.labels.cells[cells[i]];
      v = v == LabelValue::Positive ? LabelValue::Negative : LabelValue::Positive;
    }
  }
  return out;
}

}  // namespace cft
