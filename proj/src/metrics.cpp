#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "error.hpp"

namespace cft {

const char* metric_name(MetricKind kind) { return kind == MetricKind::Auc ? "auc" : "ap"; }

MetricKind metric_from_name(const std::string& name) {
  if (name == "auc") return MetricKind::Auc;
  if (name == "ap") return MetricKind::Ap;
  fail(Errc::Param, "unknown metric '" + name + "' (expected auc or ap)");
}

static void check_set(const EvalSet& set) {
  if (set.labels.size() != set.predictions.size())
    fail(Errc::Param, "labels and predictions must have equal length");
  for (int8_t l : set.labels)
    if (l != 1 && l != -1) fail(Errc::Validation, "labels must be -1 or +1");
  for (double p : set.predictions)
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
      fail(Errc::Validation, "predictions must be finite and within [0, 1]");
}

// Sorted view of (prediction, label), ascending by prediction.
static std::vector<std::size_t> order_by_prediction(const EvalSet& set) {
  std::vector<std::size_t> idx(set.labels.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return set.predictions[a] < set.predictions[b];
  });
  return idx;
}

double auc(const EvalSet& set, bool tie_half) {
  check_set(set);
  std::size_t n_pos = 0, n_neg = 0;
  for (int8_t l : set.labels) (l == 1 ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0)
    fail(Errc::UndefinedMetric, "AUC needs at least one positive and one negative");

  // Walk tie groups in ascending prediction order; each positive beats every
  // negative in strictly lower groups.
  auto idx = order_by_prediction(set);
  const std::size_t n = idx.size();
  double pairs = 0.0;
  std::size_t neg_below = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    std::size_t pos_in = 0, neg_in = 0;
    const double p = set.predictions[idx[i]];
    while (j < n && set.predictions[idx[j]] == p) {
      (set.labels[idx[j]] == 1 ? pos_in : neg_in)++;
      ++j;
    }
    pairs += static_cast<double>(pos_in) * static_cast<double>(neg_below);
    if (tie_half) pairs += 0.5 * static_cast<double>(pos_in) * static_cast<double>(neg_in);
    neg_below += neg_in;
    i = j;
  }
  return pairs / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double ap(const EvalSet& set) {
  check_set(set);
  std::size_t n_pos = 0;
  for (int8_t l : set.labels)
    if (l == 1) ++n_pos;
  if (n_pos == 0) fail(Errc::UndefinedMetric, "AP needs at least one positive");

  // Descending tie groups; every member of a group shares the same
  // at-or-above counts, which include the whole group.
  auto idx = order_by_prediction(set);
  std::reverse(idx.begin(), idx.end());
  const std::size_t n = idx.size();
  double sum = 0.0;
  std::size_t cum_pos = 0, cum_total = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    std::size_t pos_in = 0;
    const double p = set.predictions[idx[i]];
    while (j < n && set.predictions[idx[j]] == p) {
      if (set.labels[idx[j]] == 1) ++pos_in;
      ++j;
    }
    cum_pos += pos_in;
    cum_total += j - i;
    sum += static_cast<double>(pos_in) * static_cast<double>(cum_pos) /
           static_cast<double>(cum_total);
    i = j;
  }
  return sum / static_cast<double>(n_pos);
}

double eval_metric(const EvalSet& set, MetricKind kind, bool tie_half) {
  return kind == MetricKind::Auc ? auc(set, tie_half) : ap(set);
}

MeanMetric mean_metric(const std::vector<std::pair<std::size_t, EvalSet>>& sets, MetricKind kind,
                       const std::optional<std::vector<std::size_t>>& subset, bool tie_half) {
  MeanMetric out;
  double total = 0.0;

  if (subset) {
    for (std::size_t want : *subset) {
      auto it = std::find_if(sets.begin(), sets.end(),
                             [&](const auto& s) { return s.first == want; });
      if (it == sets.end())
        fail(Errc::Param, "subset category " + std::to_string(want) + " is not present");
      total += eval_metric(it->second, kind, tie_half);  // undefined -> propagate
      out.used.push_back(want);
    }
  } else {
    for (const auto& [category, set] : sets) {
      try {
        total += eval_metric(set, kind, tie_half);
        out.used.push_back(category);
      } catch (const Error& e) {
        if (e.code() != Errc::UndefinedMetric) throw;
        out.skipped.push_back(category);
      }
    }
  }

  if (out.used.empty()) fail(Errc::UndefinedMetric, "no category has a defined metric");
  out.value = total / static_cast<double>(out.used.size());
  return out;
}

}  // namespace cft
