#include "cft_driver.hpp"

#include <algorithm>
#include <numeric>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace cft::detail {

namespace {

const char* policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Ignore: return "ignore";
    case PolicyKind::Ones: return "ones";
    case PolicyKind::Zeros: return "zeros";
    case PolicyKind::OnesLsr: return "ones-lsr";
    case PolicyKind::PerCategory: return "per-category";
  }
  return "?";
}

std::optional<double> unit_metric(const LRUnit& unit, const UnitValidSet& valid,
                                  MetricKind kind) {
  if (valid.labels.empty()) return std::nullopt;
  EvalSet set;
  set.labels = valid.labels;
  set.predictions = predict_unit_batch(unit, valid.features);
  try {
    return eval_metric(set, kind);
  } catch (const Error& e) {
    if (e.code() == Errc::UndefinedMetric) return std::nullopt;
    throw;
  }
}

void check_shapes(const ClassificationHead& head, const FeatureCache& cache,
                  const LabelMatrix& labels, const std::optional<CftDataset>& valid) {
  head.validate();
  labels.validate();
  if (cache.n_samples != labels.n_samples)
    fail(Errc::Param, "cache and labels disagree on sample count");
  if (head.n_categories != labels.n_categories)
    fail(Errc::Param, "head and labels disagree on category count");
  if (head.dim_z != cache.dim_z) fail(Errc::Param, "head and cache disagree on feature dimension");
  if (valid) {
    if (!valid->cache || !valid->labels) fail(Errc::Param, "validation dataset is incomplete");
    if (valid->cache->n_samples != valid->labels->n_samples)
      fail(Errc::Param, "validation cache and labels disagree on sample count");
    if (valid->labels->n_categories != labels.n_categories)
      fail(Errc::Param, "validation labels disagree on category count");
    if (valid->cache->dim_z != cache.dim_z)
      fail(Errc::Param, "validation cache disagrees on feature dimension");
  }
}

std::vector<std::size_t> resolve_order(const CftRunOptions& opts, std::size_t n_categories) {
  if (opts.order.empty()) {
    std::vector<std::size_t> order(n_categories);
    std::iota(order.begin(), order.end(), 0);
    return order;
  }
  if (opts.order.size() != n_categories)
    fail(Errc::Param, "category order must list every category exactly once");
  std::vector<bool> seen(n_categories, false);
  for (std::size_t c : opts.order) {
    if (c >= n_categories || seen[c])
      fail(Errc::Param, "category order must be a permutation of 0..C-1");
    seen[c] = true;
  }
  return opts.order;
}

}  // namespace

std::pair<ClassificationHead, CftReport> run_cft(
    const ClassificationHead& head, const FeatureCache& cache, const LabelMatrix& labels,
    const std::optional<CftDataset>& valid, const UncertainPolicy& policy, uint64_t seed,
    const CftRunOptions& opts, MetricKind metric, const char* variant, const TuneFn& tune) {
  check_shapes(head, cache, labels, valid);
  policy.validate();
  if (opts.greedy && !valid)
    fail(Errc::Config, "greedy uncertain-policy selection needs a validation set");

  const std::size_t n_categories = labels.n_categories;
  auto order = resolve_order(opts, n_categories);

  std::vector<CategoryOutcome> outcomes(n_categories);
  std::vector<LRUnit> tuned(n_categories);

  auto run_category = [&](std::size_t c) {
    const uint64_t cat_seed = mix64(seed, c);
    const LRUnit unit0 = extract_unit(head, c);

    UnitValidSet vs;
    if (valid) {
      auto idx = known_index(*valid->labels, c);
      vs.features = gather(*valid->cache, idx);
      vs.labels.reserve(idx.size());
      for (std::size_t n : idx)
        vs.labels.push_back(valid->labels->at(n, c) == LabelValue::Positive ? 1 : -1);
    }

    CategoryOutcome out;
    out.category = c;
    out.n_valid = vs.labels.size();
    out.metric_before = valid ? unit_metric(unit0, vs, metric) : std::nullopt;

    bool has_uncertain = false;
    for (std::size_t n = 0; n < labels.n_samples && !has_uncertain; ++n)
      has_uncertain = labels.at(n, c) == LabelValue::Uncertain;

    // Greedy mode compares validation metrics across plain policies; without
    // uncertain cells (or without a defined metric) there is nothing to
    // compare and a single ignore-run suffices.
    std::vector<UncertainPolicy> candidates;
    if (opts.greedy) {
      if (has_uncertain && out.metric_before.has_value())
        candidates = {UncertainPolicy::ignore(), UncertainPolicy::ones(),
                      UncertainPolicy::zeros()};
      else
        candidates = {UncertainPolicy::ignore()};
    } else {
      candidates = {policy};
    }

    bool have_best = false;
    for (const UncertainPolicy& cand : candidates) {
      auto tt = category_training_targets(labels, c, cand, seed);

      CategoryOutcome attempt = out;
      attempt.n_train = tt.indices.size();
      if (cand.kind == PolicyKind::PerCategory && has_uncertain)
        attempt.policy = policy_name(cand.rule_for(c).kind);
      else
        attempt.policy = policy_name(cand.kind);

      LRUnit unit_c = unit0;
      if (tt.indices.empty()) {
        attempt.skipped = true;
        attempt.metric_after = attempt.metric_before;
      } else {
        Mat x = gather(cache, tt.indices);
        TuneOutput t = tune(unit0, x, tt.targets, valid ? &vs : nullptr, cat_seed);
        attempt.skipped = t.skipped;
        attempt.steps_run = t.steps_run;
        attempt.best_step = t.best_step;
        attempt.valid_curve = std::move(t.valid_curve);
        attempt.history = std::move(t.history);
        attempt.fitness_initial = t.fitness_initial;
        attempt.fitness_final = t.fitness_final;
        if (!t.skipped) unit_c = std::move(t.unit);
        attempt.metric_after =
            valid ? (t.skipped ? attempt.metric_before : unit_metric(unit_c, vs, metric))
                  : std::nullopt;
      }

      bool better = !have_best;
      if (have_best && attempt.metric_after && outcomes[c].metric_after)
        better = *attempt.metric_after > *outcomes[c].metric_after;
      if (better) {
        outcomes[c] = std::move(attempt);
        tuned[c] = std::move(unit_c);
        have_best = true;
      }
    }
  };

  parallel_for_each(order, opts.jobs == 0 ? 1 : opts.jobs, run_category);

  ClassificationHead result = head;
  CftReport report;
  report.variant = variant;
  report.metric = metric_name(metric);
  double sum_before = 0.0, sum_after = 0.0;
  std::size_t defined = 0;
  for (std::size_t c = 0; c < n_categories; ++c) {
    result = replace_unit(result, tuned[c]);
    if (outcomes[c].metric_before && outcomes[c].metric_after) {
      sum_before += *outcomes[c].metric_before;
      sum_after += *outcomes[c].metric_after;
      ++defined;
    }
    report.categories.push_back(std::move(outcomes[c]));
  }
  if (defined > 0) {
    report.mean_before = sum_before / static_cast<double>(defined);
    report.mean_after = sum_after / static_cast<double>(defined);
  }
  return {std::move(result), std::move(report)};
}

}  // namespace cft::detail
