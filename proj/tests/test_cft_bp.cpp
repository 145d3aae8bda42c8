#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "baseline.hpp"
#include "cft_bp.hpp"
#include "error.hpp"
#include "feature_cache.hpp"
#include "helpers.hpp"
#include "losses.hpp"
#include "metrics.hpp"
#include "oracles.hpp"
#include "rng.hpp"
#include "synthetic.hpp"

using cft::BPConfig;
using cft::Errc;
using cft::LRUnit;
using cft::Optimizer;
using cft_test::thrown_code;

namespace {

// 1-D separable toy: feature -1 with target 0, feature +1 with target 1.
void separable_toy(cft::Mat& features, std::vector<double>& targets, std::size_t n) {
  features = cft::Mat(n, 1);
  targets.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    features.at(i, 0) = i % 2 == 0 ? 1.0 : -1.0;
    targets[i] = i % 2 == 0 ? 1.0 : 0.0;
  }
}

LRUnit unit_1d(double w, double b) {
  LRUnit u;
  u.weight = {w};
  u.bias = b;
  u.category = 0;
  return u;
}

// Small damaged-head fixture shared by the driver tests: a synthetic problem,
// labels dropped hard, and a head trained on the damaged assume-negative
// targets.
struct Fixture {
  cft::SyntheticSpec spec;
  cft::SyntheticData train;
  cft::FeatureCache valid_cache;
  cft::LabelMatrix valid_labels;
  cft::LabelMatrix dropped;
  cft::ClassificationHead head;

  Fixture(std::size_t n, std::size_t n_valid, std::size_t z, std::size_t c, double keep) {
    spec.n_samples = n + n_valid;
    spec.dim_z = z;
    spec.n_categories = c;
    spec.positive_rate = 0.3;
    spec.seed = 414243;
    cft::SyntheticData all = cft::generate(spec);

    train.cache = cft::FeatureCache(n, z);
    std::copy_n(all.cache.data.begin(), n * z, train.cache.data.begin());
    train.labels = cft::LabelMatrix(n, c);
    std::copy_n(all.labels.cells.begin(), n * c, train.labels.cells.begin());
    train.oracle_head = all.oracle_head;

    valid_cache = cft::FeatureCache(n_valid, z);
    std::copy(all.cache.data.begin() + n * z, all.cache.data.end(), valid_cache.data.begin());
    valid_labels = cft::LabelMatrix(n_valid, c);
    std::copy(all.labels.cells.begin() + n * c, all.labels.cells.end(),
              valid_labels.cells.begin());

    dropped = cft::drop_labels(train.labels, keep, 7);
    BPConfig config;
    config.optimizer = Optimizer::FullBatchAdam;
    config.learning_rate = 1e-2;
    config.epochs = 150;
    config.asl = {0.0, 4.0, 0.05};
    head = cft::train_head(train.cache, cft::assume_negative(dropped), config, 99);
  }

  cft::CftDataset valid_set() const { return {&valid_cache, &valid_labels}; }
};

}  // namespace

TEST_CASE("finetune_unit_bp with zero epochs records only the initial state") {
  cft::Mat features;
  std::vector<double> targets;
  separable_toy(features, targets, 8);
  LRUnit unit = unit_1d(0.3, -0.1);

  BPConfig config;
  config.epochs = 0;
  auto res = cft::finetune_unit_bp(unit, features, targets, nullptr, config, 1);
  CHECK(res.unit.weight == unit.weight);
  CHECK(res.unit.bias == unit.bias);
  REQUIRE(res.trajectory.size() == 1);
  CHECK(res.trajectory[0].epoch == 0);
  CHECK(res.best_epoch == 0);
}

TEST_CASE("finetune_unit_bp strictly decreases loss on a separable toy") {
  cft::Mat features;
  std::vector<double> targets;
  separable_toy(features, targets, 10);
  LRUnit unit = unit_1d(0.0, 0.0);

  BPConfig config;
  config.optimizer = Optimizer::FullBatchGd;
  config.learning_rate = 0.1;
  config.epochs = 200;
  auto res = cft::finetune_unit_bp(unit, features, targets, nullptr, config, 1);
  REQUIRE(res.trajectory.size() == 201);
  for (std::size_t e = 1; e < res.trajectory.size(); ++e)
    CHECK(res.trajectory[e].train_loss < res.trajectory[e - 1].train_loss);
  // Final parameters point the right way.
  CHECK(res.unit.weight[0] > 0.0);
}

TEST_CASE("finetune_unit_bp trajectory length is epochs plus one") {
  cft::Mat features;
  std::vector<double> targets;
  separable_toy(features, targets, 6);
  BPConfig config;
  config.epochs = 17;
  auto res = cft::finetune_unit_bp(unit_1d(0, 0), features, targets, nullptr, config, 1);
  CHECK(res.trajectory.size() == 18);
  for (std::size_t e = 0; e < res.trajectory.size(); ++e) CHECK(res.trajectory[e].epoch == e);
}

TEST_CASE("finetune_unit_bp empty training set is the skip signal") {
  cft::Mat features(0, 3);
  std::vector<double> targets;
  LRUnit unit;
  unit.weight = {1.0, 2.0, 3.0};
  unit.bias = 0.5;
  BPConfig config;
  auto res = cft::finetune_unit_bp(unit, features, targets, nullptr, config, 1);
  CHECK(res.unit.weight == unit.weight);
  CHECK(res.unit.bias == unit.bias);
  CHECK(res.trajectory.empty());
}

TEST_CASE("one full-batch gd epoch equals the hand-computed update") {
  // Single sample, so the mean gradient is the sample gradient.
  cft::Mat features(1, 2);
  features.at(0, 0) = 0.7;
  features.at(0, 1) = -1.3;
  std::vector<double> targets{1.0};
  LRUnit unit;
  unit.weight = {0.2, -0.4};
  unit.bias = 0.1;

  BPConfig config;
  config.optimizer = Optimizer::FullBatchGd;
  config.learning_rate = 0.05;
  config.epochs = 1;
  config.asl = {1.5, 3.0, 0.1};

  double logit = 0.2 * 0.7 + (-0.4) * (-1.3) + 0.1;
  double p = cft::logistic(logit);
  double g = cft::asl_grad_logit(1.0, p, config.asl);

  auto res = cft::finetune_unit_bp(unit, features, targets, nullptr, config, 1);
  CHECK(std::abs(res.unit.weight[0] - (0.2 - 0.05 * g * 0.7)) <= 1e-10);
  CHECK(std::abs(res.unit.weight[1] - (-0.4 - 0.05 * g * -1.3)) <= 1e-10);
  CHECK(std::abs(res.unit.bias - (0.1 - 0.05 * g)) <= 1e-10);
}

TEST_CASE("adam first step has learning-rate magnitude") {
  cft::Mat features(1, 1);
  features.at(0, 0) = 1.0;
  std::vector<double> targets{1.0};
  LRUnit unit = unit_1d(0.0, 0.0);

  BPConfig config;
  config.optimizer = Optimizer::FullBatchAdam;
  config.learning_rate = 1e-3;
  config.epochs = 1;
  auto res = cft::finetune_unit_bp(unit, features, targets, nullptr, config, 1);
  // Bias-corrected Adam: first update is lr * g / (|g| + eps) = lr * sign(g).
  // Gradient is negative (push p toward 1), so parameters move up by ~lr.
  CHECK(res.unit.weight[0] == doctest::Approx(1e-3).epsilon(1e-6));
  CHECK(res.unit.bias == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("early stopping returns the trajectory's best epoch") {
  // Drive the unit past the optimum with a huge learning rate so the
  // validation metric peaks somewhere in the middle of the run.
  cft::Rng rng(1234);
  cft::Mat train(64, 2);
  std::vector<double> targets(64);
  for (std::size_t i = 0; i < 64; ++i) {
    double cls = i % 2 == 0 ? 1.0 : -1.0;
    train.at(i, 0) = cls + 0.8 * rng.normal();
    train.at(i, 1) = 0.3 * rng.normal();
    targets[i] = cls > 0 ? 1.0 : 0.0;
  }
  cft::UnitValidSet valid;
  valid.features = cft::Mat(40, 2);
  valid.labels.resize(40);
  for (std::size_t i = 0; i < 40; ++i) {
    double cls = i % 2 == 0 ? 1.0 : -1.0;
    valid.features.at(i, 0) = cls + 0.8 * rng.normal();
    valid.features.at(i, 1) = 0.3 * rng.normal();
    valid.labels[i] = cls > 0 ? 1 : -1;
  }

  BPConfig config;
  config.optimizer = Optimizer::FullBatchGd;
  config.learning_rate = 2.0;
  config.epochs = 120;
  config.early_stop_metric = cft::MetricKind::Auc;

  LRUnit start = unit_1d(0.0, 0.0);
  start.weight = {0.0, 0.0};
  auto res = cft::finetune_unit_bp(start, train, targets, &valid, config, 1);
  REQUIRE(res.trajectory.size() == 121);

  double best = -1.0;
  std::size_t best_epoch = 0;
  for (const auto& pt : res.trajectory) {
    REQUIRE(pt.valid_metric.has_value());
    if (*pt.valid_metric > best) {
      best = *pt.valid_metric;
      best_epoch = pt.epoch;
    }
  }
  CHECK(res.best_epoch == best_epoch);

  // The returned parameters really are the best-epoch snapshot: re-evaluating
  // them on the validation set reproduces the trajectory maximum.
  cft::EvalSet set;
  set.labels = valid.labels;
  set.predictions = cft::predict_unit_batch(res.unit, valid.features);
  CHECK(cft::auc(set) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("early stopping ties resolve to the earliest epoch") {
  // Zero learning rate: parameters never move, every epoch has the same
  // validation metric, so the earliest epoch (0) must win.
  cft::Mat features;
  std::vector<double> targets;
  separable_toy(features, targets, 8);
  cft::UnitValidSet valid;
  valid.features = features;
  valid.labels.resize(8);
  for (std::size_t i = 0; i < 8; ++i) valid.labels[i] = targets[i] > 0.5 ? 1 : -1;

  BPConfig config;
  config.optimizer = Optimizer::FullBatchGd;
  config.learning_rate = 1e-300;  // positive but inert
  config.epochs = 30;
  config.early_stop_metric = cft::MetricKind::Auc;
  auto res = cft::finetune_unit_bp(unit_1d(1.0, 0.0), features, targets, &valid, config, 1);
  CHECK(res.best_epoch == 0);
}

TEST_CASE("config validation") {
  cft::Mat features;
  std::vector<double> targets;
  separable_toy(features, targets, 4);
  BPConfig bad;
  bad.learning_rate = 0.0;
  CHECK(thrown_code([&] {
          cft::finetune_unit_bp(unit_1d(0, 0), features, targets, nullptr, bad, 1);
        }) == Errc::Param);
  BPConfig bad_beta;
  bad_beta.optimizer = Optimizer::FullBatchAdam;
  bad_beta.adam_beta1 = 1.0;
  CHECK(thrown_code([&] { bad_beta.validate(); }) == Errc::Param);
  BPConfig bad_target;
  std::vector<double> outside{1.5};
  cft::Mat one(1, 1);
  CHECK(thrown_code([&] {
          cft::finetune_unit_bp(unit_1d(0, 0), one, outside, nullptr, bad_target, 1);
        }) == Errc::Param);
}

TEST_CASE("cft_bp leaves the head unchanged when no category has labels") {
  Fixture fx(60, 40, 4, 3, 1.0);
  cft::LabelMatrix blank(60, 3);  // all Unknown
  auto [out, report] = cft::cft_bp(fx.head, fx.train.cache, blank, std::nullopt,
                                   cft::UncertainPolicy::ignore(), BPConfig{}, 5);
  CHECK(out.weights == fx.head.weights);
  CHECK(out.bias == fx.head.bias);
  REQUIRE(report.categories.size() == 3);
  for (const auto& cat : report.categories) {
    CHECK(cat.skipped);
    CHECK(cat.n_train == 0);
  }
}

TEST_CASE("cft_bp only touches categories that have data") {
  Fixture fx(60, 40, 4, 2, 1.0);
  cft::LabelMatrix partial = fx.dropped;
  for (std::size_t i = 0; i < partial.n_samples; ++i)
    partial.at(i, 1) = cft::LabelValue::Unknown;

  BPConfig config;
  config.epochs = 20;
  auto [out, report] = cft::cft_bp(fx.head, fx.train.cache, partial, std::nullopt,
                                   cft::UncertainPolicy::ignore(), config, 5);
  // Category 1 untouched, bitwise.
  for (std::size_t j = 0; j < fx.head.dim_z; ++j) CHECK(out.row(1)[j] == fx.head.row(1)[j]);
  CHECK(out.bias[1] == fx.head.bias[1]);
  // Category 0 trained.
  CHECK(report.categories[0].n_train > 0);
  CHECK_FALSE(report.categories[0].skipped);
  CHECK(report.categories[1].skipped);
}

TEST_CASE("cft_bp output is invariant to order and jobs") {
  Fixture fx(80, 40, 6, 5, 0.5);
  BPConfig config;
  config.optimizer = Optimizer::FullBatchAdam;
  config.learning_rate = 1e-2;
  config.epochs = 40;
  config.early_stop_metric = cft::MetricKind::Auc;

  cft::CftRunOptions base;
  auto [h1, r1] = cft::cft_bp(fx.head, fx.train.cache, fx.dropped, fx.valid_set(),
                              cft::UncertainPolicy::ignore(), config, 31, base);

  cft::CftRunOptions shuffled;
  shuffled.order = {4, 0, 3, 1, 2};
  shuffled.jobs = 4;
  auto [h2, r2] = cft::cft_bp(fx.head, fx.train.cache, fx.dropped, fx.valid_set(),
                              cft::UncertainPolicy::ignore(), config, 31, shuffled);

  CHECK(h1.weights == h2.weights);
  CHECK(h1.bias == h2.bias);
  REQUIRE(r1.categories.size() == r2.categories.size());
  for (std::size_t c = 0; c < r1.categories.size(); ++c) {
    CHECK(r1.categories[c].category == r2.categories[c].category);
    CHECK(r1.categories[c].metric_after == r2.categories[c].metric_after);
  }
}

TEST_CASE("cft_bp improves the damaged head's held-out mean metric") {
  Fixture fx(300, 200, 8, 5, 0.2);
  BPConfig config;
  config.optimizer = Optimizer::FullBatchAdam;
  config.learning_rate = 1e-2;
  config.epochs = 80;
  config.early_stop_metric = cft::MetricKind::Ap;

  auto [out, report] = cft::cft_bp(fx.head, fx.train.cache, fx.dropped, fx.valid_set(),
                                   cft::UncertainPolicy::ignore(), config, 11);
  REQUIRE(report.mean_before.has_value());
  REQUIRE(report.mean_after.has_value());
  CHECK(*report.mean_after >= *report.mean_before);
  // Early stopping can never settle below the starting point.
  for (const auto& cat : report.categories) {
    if (cat.metric_before && cat.metric_after) CHECK(*cat.metric_after >= *cat.metric_before);
  }
}

TEST_CASE("cft_bp rejects shape mismatches and misconfiguration") {
  Fixture fx(30, 20, 4, 2, 1.0);
  cft::LabelMatrix wrong(29, 2);
  CHECK(thrown_code([&] {
          cft::cft_bp(fx.head, fx.train.cache, wrong, std::nullopt,
                      cft::UncertainPolicy::ignore(), BPConfig{}, 1);
        }) == Errc::Param);

  cft::CftRunOptions bad_order;
  bad_order.order = {0, 0};
  CHECK(thrown_code([&] {
          cft::cft_bp(fx.head, fx.train.cache, fx.dropped, std::nullopt,
                      cft::UncertainPolicy::ignore(), BPConfig{}, 1, bad_order);
        }) == Errc::Param);

  cft::CftRunOptions greedy;
  greedy.greedy = true;
  CHECK(thrown_code([&] {
          cft::cft_bp(fx.head, fx.train.cache, fx.dropped, std::nullopt,
                      cft::UncertainPolicy::ignore(), BPConfig{}, 1, greedy);
        }) == Errc::Config);
}

TEST_CASE("greedy policy search picks the best validation candidate per category") {
  Fixture fx(200, 150, 6, 3, 1.0);
  // Inject uncertainty into category 0 only.
  cft::LabelMatrix labels = fx.dropped;
  cft::Rng rng(64);
  for (std::size_t i = 0; i < labels.n_samples; ++i)
    if (rng.uniform01() < 0.3) labels.at(i, 0) = cft::LabelValue::Uncertain;

  BPConfig config;
  config.optimizer = Optimizer::FullBatchAdam;
  config.learning_rate = 1e-2;
  config.epochs = 30;
  config.early_stop_metric = cft::MetricKind::Auc;

  cft::CftRunOptions greedy;
  greedy.greedy = true;
  auto [out, report] = cft::cft_bp(fx.head, fx.train.cache, labels, fx.valid_set(),
                                   cft::UncertainPolicy::ignore(), config, 21, greedy);

  // Candidates are only explored where uncertainty exists.
  CHECK((report.categories[0].policy == "ignore" || report.categories[0].policy == "ones" ||
         report.categories[0].policy == "zeros"));
  CHECK(report.categories[1].policy == "ignore");
  CHECK(report.categories[2].policy == "ignore");

  // The winner must not lose to the ignore baseline on the validation set.
  auto [ignore_head, ignore_report] =
      cft::cft_bp(fx.head, fx.train.cache, labels, fx.valid_set(),
                  cft::UncertainPolicy::ignore(), config, 21);
  REQUIRE(report.categories[0].metric_after.has_value());
  REQUIRE(ignore_report.categories[0].metric_after.has_value());
  CHECK(*report.categories[0].metric_after >= *ignore_report.categories[0].metric_after);
}

TEST_CASE("ft_joint_baseline with one category equals cft_bp bitwise") {
  Fixture fx(120, 80, 5, 1, 0.6);
  BPConfig config;
  config.optimizer = Optimizer::FullBatchAdam;
  config.learning_rate = 1e-2;
  config.epochs = 50;
  config.early_stop_metric = cft::MetricKind::Auc;

  auto [joint_head, joint_report] =
      cft::ft_joint_baseline(fx.head, fx.train.cache, fx.dropped, fx.valid_set(),
                             cft::UncertainPolicy::ignore(), config, 17);
  auto [cft_head, cft_report] = cft::cft_bp(fx.head, fx.train.cache, fx.dropped, fx.valid_set(),
                                            cft::UncertainPolicy::ignore(), config, 17);
  CHECK(joint_head.weights == cft_head.weights);
  CHECK(joint_head.bias == cft_head.bias);
  CHECK(joint_report.best_epoch == cft_report.categories[0].best_step);
}

TEST_CASE("per-category early stopping dominates joint early stopping") {
  Fixture fx(300, 200, 8, 5, 0.3);
  BPConfig config;
  config.optimizer = Optimizer::FullBatchAdam;
  config.learning_rate = 2e-2;
  config.epochs = 60;
  config.early_stop_metric = cft::MetricKind::Auc;

  auto [joint_head, joint_report] =
      cft::ft_joint_baseline(fx.head, fx.train.cache, fx.dropped, fx.valid_set(),
                             cft::UncertainPolicy::ignore(), config, 23);

  // Mean of per-category maxima >= max of per-epoch means, on the very same
  // recorded curves. Exact inequality, no tolerance.
  REQUIRE_FALSE(joint_report.valid_metric.empty());
  std::size_t c_count = joint_report.valid_metric[0].size();
  std::vector<double> cat_max(c_count, -1.0);
  for (const auto& epoch_row : joint_report.valid_metric)
    for (std::size_t c = 0; c < c_count; ++c)
      if (!std::isnan(epoch_row[c])) cat_max[c] = std::max(cat_max[c], epoch_row[c]);
  double mean_of_max = 0.0;
  std::size_t defined = 0;
  for (double v : cat_max)
    if (v >= 0.0) {
      mean_of_max += v;
      ++defined;
    }
  REQUIRE(defined > 0);
  mean_of_max /= static_cast<double>(defined);

  double max_of_means = -1.0;
  for (double m : joint_report.valid_mean)
    if (!std::isnan(m)) max_of_means = std::max(max_of_means, m);

  CHECK(mean_of_max >= max_of_means);

  // And the per-category driver achieves at least the joint baseline's mean.
  auto [cft_head, cft_report] = cft::cft_bp(fx.head, fx.train.cache, fx.dropped, fx.valid_set(),
                                            cft::UncertainPolicy::ignore(), config, 23);
  auto mean_valid_auc = [&](const cft::ClassificationHead& h) {
    std::vector<std::pair<std::size_t, cft::EvalSet>> sets;
    for (std::size_t c = 0; c < h.n_categories; ++c) {
      auto idx = cft::known_index(fx.valid_labels, c);
      cft::EvalSet s;
      for (std::size_t i : idx) {
        s.labels.push_back(fx.valid_labels.at(i, c) == cft::LabelValue::Positive ? 1 : -1);
        LRUnit u = cft::extract_unit(h, c);
        std::vector<double> zi(fx.valid_cache.dim_z);
        for (std::size_t j = 0; j < zi.size(); ++j)
          zi[j] = static_cast<double>(fx.valid_cache.row(i)[j]);
        s.predictions.push_back(cft::predict_unit(u, zi));
      }
      sets.emplace_back(c, std::move(s));
    }
    return cft::mean_metric(sets, cft::MetricKind::Auc).value;
  };
  CHECK(mean_valid_auc(cft_head) >= mean_valid_auc(joint_head) - 1e-12);
}

TEST_CASE("joint baseline trajectory bookkeeping") {
  Fixture fx(80, 40, 4, 3, 0.8);
  BPConfig config;
  config.epochs = 25;
  config.optimizer = Optimizer::FullBatchAdam;
  config.learning_rate = 1e-2;
  config.early_stop_metric = cft::MetricKind::Auc;
  auto [head, report] = cft::ft_joint_baseline(fx.head, fx.train.cache, fx.dropped,
                                               fx.valid_set(), cft::UncertainPolicy::ignore(),
                                               config, 3);
  CHECK(report.train_loss.size() == 26);
  CHECK(report.valid_mean.size() == 26);
  CHECK(report.n_cells > 0);
  CHECK(report.best_epoch <= 25);
}
