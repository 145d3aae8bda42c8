#include "cft_bp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cft_driver.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace cft {

void BPConfig::validate() const {
  if (!(learning_rate > 0.0)) fail(Errc::Param, "learning rate must be positive");
  asl.validate();
  if (optimizer == Optimizer::FullBatchAdam) {
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
      fail(Errc::Param, "adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) fail(Errc::Param, "adam eps must be positive");
  }
}

namespace {

// Per-parameter Adam state for one logistic regression (weights + bias).
struct AdamState {
  std::vector<double> m, v;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void step(std::size_t i, double grad, double& param, const BPConfig& cfg, double bc1,
            double bc2) {
    m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * grad;
    v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * grad * grad;
    param -= cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.adam_eps);
  }
};

std::optional<double> curve_metric(const std::vector<double>& w, double b, const UnitValidSet& vs,
                                   MetricKind kind) {
  EvalSet set;
  set.labels = vs.labels;
  set.predictions.resize(vs.features.rows);
  for (std::size_t i = 0; i < vs.features.rows; ++i)
    set.predictions[i] = logistic(dot(w.data(), vs.features.row(i), vs.features.cols) + b);
  try {
    return eval_metric(set, kind);
  } catch (const Error& e) {
    if (e.code() == Errc::UndefinedMetric) return std::nullopt;
    throw;
  }
}

}  // namespace

static FinetuneResult finetuning_impl(const LRUnit& unit, const Mat& x,
                                      std::span<const double> targets,
                                      const UnitValidSet* valid, const BPConfig& config) {
  FinetuneResult res;
  res.unit = unit;
  if (x.rows == 0) return res;  // skip signal: unchanged unit, empty trajectory

  if (x.cols != unit.weight.size()) fail(Errc::Param, "feature dimension does not match unit");
  if (targets.size() != x.rows) fail(Errc::Param, "target count does not match feature rows");
  for (double t : targets)
    if (!(t >= 0.0 && t <= 1.0)) fail(Errc::Param, "targets must lie in [0, 1]");

  const std::size_t n = x.rows;
  const std::size_t z = x.cols;
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool want_metric = valid != nullptr && config.early_stop_metric.has_value();

  std::vector<double> w = unit.weight;
  double b = unit.bias;
  std::vector<double> gw(z);
  AdamState adam(z + 1);

  std::vector<double> best_w;
  double best_b = 0.0;
  double best_metric = -std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  bool have_best = false;

  res.trajectory.reserve(config.epochs + 1);
  for (std::size_t epoch = 0; epoch <= config.epochs; ++epoch) {
    // Loss and gradient at the current parameters.
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = x.row(i);
      double p = logistic(dot(w.data(), xi, z) + b);
      loss += asl_loss(targets[i], p, config.asl);
      double g = asl_grad_logit(targets[i], p, config.asl);
      for (std::size_t j = 0; j < z; ++j) gw[j] += g * xi[j];
      gb += g;
    }
    loss *= inv_n;

    TrajectoryPoint pt;
    pt.epoch = epoch;
    pt.train_loss = loss;
    if (want_metric) pt.valid_metric = curve_metric(w, b, *valid, *config.early_stop_metric);
    if (pt.valid_metric && *pt.valid_metric > best_metric) {
      best_metric = *pt.valid_metric;
      best_w = w;
      best_b = b;
      best_epoch = epoch;
      have_best = true;
    }
    res.trajectory.push_back(std::move(pt));
    if (epoch == config.epochs) break;

    if (config.optimizer == Optimizer::FullBatchGd) {
      for (std::size_t j = 0; j < z; ++j) w[j] -= config.learning_rate * gw[j] * inv_n;
      b -= config.learning_rate * gb * inv_n;
    } else {
      double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(epoch + 1));
      double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(epoch + 1));
      for (std::size_t j = 0; j < z; ++j) adam.step(j, gw[j] * inv_n, w[j], config, bc1, bc2);
      adam.step(z, gb * inv_n, b, config, bc1, bc2);
    }
  }

  if (have_best) {
    res.unit.weight = std::move(best_w);
    res.unit.bias = best_b;
    res.best_epoch = best_epoch;
  } else {
    res.unit.weight = std::move(w);
    res.unit.bias = b;
    res.best_epoch = config.epochs;
  }
  return res;
}

FinetuneResult finetune_unit_bp(const LRUnit& unit, const Mat& features,
                                std::span<const double> targets, const UnitValidSet* valid,
                                const BPConfig& config, uint64_t seed) {
  (void)seed;  // full-batch updates are deterministic; kept for interface stability
  config.validate();
  return finetuning_impl(unit, features, targets, valid, config);
}

std::pair<ClassificationHead, CftReport> cft_bp(const ClassificationHead& head,
                                                const FeatureCache& cache,
                                                const LabelMatrix& labels,
                                                const std::optional<CftDataset>& valid,
                                                const UncertainPolicy& policy,
                                                const BPConfig& config, uint64_t seed,
                                                const CftRunOptions& opts) {
  config.validate();
  MetricKind metric = config.early_stop_metric.value_or(MetricKind::Auc);
  auto tune = [&config](const LRUnit& unit, const Mat& x, const std::vector<double>& targets,
                        const UnitValidSet* vs, uint64_t cat_seed) {
    FinetuneResult r = finetune_unit_bp(unit, x, targets, vs, config, cat_seed);
    detail::TuneOutput out;
    out.unit = std::move(r.unit);
    out.skipped = r.trajectory.empty();
    out.steps_run = r.trajectory.empty() ? 0 : config.epochs;
    out.best_step = r.best_epoch;
    out.valid_curve.reserve(r.trajectory.size());
    for (const TrajectoryPoint& pt : r.trajectory)
      out.valid_curve.push_back(
          pt.valid_metric.value_or(std::numeric_limits<double>::quiet_NaN()));
    return out;
  };
  return detail::run_cft(head, cache, labels, valid, policy, seed, opts, metric, "bp", tune);
}

std::pair<ClassificationHead, JointReport> ft_joint_baseline(
    const ClassificationHead& head, const FeatureCache& cache, const LabelMatrix& labels,
    const std::optional<CftDataset>& valid, const UncertainPolicy& policy,
    const BPConfig& config, uint64_t seed) {
  config.validate();
  policy.validate();
  head.validate();
  labels.validate();
  if (cache.n_samples != labels.n_samples)
    fail(Errc::Param, "cache and labels disagree on sample count");
  if (head.n_categories != labels.n_categories)
    fail(Errc::Param, "head and labels disagree on category count");
  if (head.dim_z != cache.dim_z) fail(Errc::Param, "head and cache disagree on feature dimension");

  const std::size_t n = labels.n_samples;
  const std::size_t c_count = labels.n_categories;
  const std::size_t z = head.dim_z;

  TargetMatrix targets = known_targets(labels, policy, seed);
  std::size_t m_cells = 0;
  for (uint8_t v : targets.mask) m_cells += v;

  JointReport report;
  report.n_cells = m_cells;
  if (m_cells == 0) return {head, report};  // nothing known, nothing to update
  const double inv_m = 1.0 / static_cast<double>(m_cells);

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  Mat x = gather(cache, all);

  // Per-category validation eval sets, built once.
  const bool want_metric = valid.has_value() && config.early_stop_metric.has_value();
  MetricKind metric = config.early_stop_metric.value_or(MetricKind::Auc);
  std::vector<UnitValidSet> vs(want_metric ? c_count : 0);
  if (want_metric) {
    if (!valid->cache || !valid->labels) fail(Errc::Param, "validation dataset is incomplete");
    if (valid->labels->n_categories != c_count)
      fail(Errc::Param, "validation labels disagree on category count");
    if (valid->cache->dim_z != z) fail(Errc::Param, "validation cache disagrees on dimension");
    for (std::size_t c = 0; c < c_count; ++c) {
      auto idx = known_index(*valid->labels, c);
      vs[c].features = gather(*valid->cache, idx);
      vs[c].labels.reserve(idx.size());
      for (std::size_t i : idx)
        vs[c].labels.push_back(valid->labels->at(i, c) == LabelValue::Positive ? 1 : -1);
    }
  }

  ClassificationHead current = head;
  Mat grad_w(c_count, z);
  std::vector<double> grad_b(c_count);
  AdamState adam(c_count * z + c_count);

  ClassificationHead best = head;
  double best_mean = -std::numeric_limits<double>::infinity();
  bool have_best = false;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t epoch = 0; epoch <= config.epochs; ++epoch) {
    std::fill(grad_w.data.begin(), grad_w.data.end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = x.row(i);
      for (std::size_t c = 0; c < c_count; ++c) {
        if (targets.masked_at(i, c)) continue;
        double t = targets.value_at(i, c);
        double p = logistic(dot(current.row(c), xi, z) + current.bias[c]);
        loss += asl_loss(t, p, config.asl);
        double g = asl_grad_logit(t, p, config.asl);
        double* gc = grad_w.row(c);
        for (std::size_t j = 0; j < z; ++j) gc[j] += g * xi[j];
        grad_b[c] += g;
      }
    }
    report.train_loss.push_back(loss * inv_m);

    if (want_metric) {
      std::vector<double> per_cat(c_count, nan);
      double sum = 0.0;
      std::size_t defined = 0;
      for (std::size_t c = 0; c < c_count; ++c) {
        std::vector<double> w(current.row(c), current.row(c) + z);
        auto v = curve_metric(w, current.bias[c], vs[c], metric);
        if (v) {
          per_cat[c] = *v;
          sum += *v;
          ++defined;
        }
      }
      double mean = defined ? sum / static_cast<double>(defined) : nan;
      report.valid_metric.push_back(std::move(per_cat));
      report.valid_mean.push_back(mean);
      if (defined && mean > best_mean) {
        best_mean = mean;
        best = current;
        report.best_epoch = epoch;
        have_best = true;
      }
    }
    if (epoch == config.epochs) break;

    if (config.optimizer == Optimizer::FullBatchGd) {
      for (std::size_t c = 0; c < c_count; ++c) {
        double* wc = current.row(c);
        const double* gc = grad_w.row(c);
        for (std::size_t j = 0; j < z; ++j) wc[j] -= config.learning_rate * gc[j] * inv_m;
      }
      for (std::size_t c = 0; c < c_count; ++c)
        current.bias[c] -= config.learning_rate * grad_b[c] * inv_m;
    } else {
      double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(epoch + 1));
      double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(epoch + 1));
      for (std::size_t c = 0; c < c_count; ++c) {
        double* wc = current.row(c);
        const double* gc = grad_w.row(c);
        for (std::size_t j = 0; j < z; ++j)
          adam.step(c * z + j, gc[j] * inv_m, wc[j], config, bc1, bc2);
      }
      for (std::size_t c = 0; c < c_count; ++c)
        adam.step(c_count * z + c, grad_b[c] * inv_m, current.bias[c], config, bc1, bc2);
    }
  }

  if (!have_best) {
    best = current;
    report.best_epoch = config.epochs;
  }
  return {std::move(best), std::move(report)};
}

}  // namespace cft
