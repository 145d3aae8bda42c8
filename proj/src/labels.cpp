#include "labels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"

namespace cft {

void LabelMatrix::validate() const {
  if (cells.size() != n_samples * n_categories)
    fail(Errc::Param, "label matrix cell count does not match its dimensions");
  if (!cells.empty() && (n_samples == 0 || n_categories == 0))
    fail(Errc::Param, "label matrix dimensions must be strictly positive when non-empty");
}

static void validate_range(double lo, double hi) {
  if (!(lo <= hi) || lo < 0.0 || hi > 1.0)
    fail(Errc::Param, "uncertain policy range must satisfy 0 <= lo <= hi <= 1");
}

void UncertainPolicy::validate() const {
  if (kind == PolicyKind::OnesLsr) validate_range(lo, hi);
  if (kind == PolicyKind::PerCategory) {
    for (const auto& [c, rule] : per_category) {
      if (rule.kind == PolicyKind::PerCategory)
        fail(Errc::Param, "per-category rules cannot nest");
      if (rule.kind == PolicyKind::OnesLsr) validate_range(rule.lo, rule.hi);
    }
  }
}

CategoryRule UncertainPolicy::rule_for(std::size_t category) const {
  if (kind != PolicyKind::PerCategory) return {kind, lo, hi};
  auto it = per_category.find(category);
  if (it == per_category.end())
    fail(Errc::Config,
         "per-category policy has no rule for category " + std::to_string(category) +
             " which contains uncertain cells");
  return it->second;
}

static bool known(LabelValue v) {
  return v == LabelValue::Positive || v == LabelValue::Negative;
}

// Keeps `keep` elements of `cells` chosen uniformly without replacement,
// wipes the rest to Unknown.
static void drop_subset(LabelMatrix& out, std::vector<std::size_t>& cells, std::size_t keep,
                        Rng& rng) {
  // Partial Fisher-Yates: positions [0, keep) end up holding the kept subset.
  for (std::size_t i = 0; i < keep; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(cells.size() - i));
    std::swap(cells[i], cells[j]);
  }
  for (std::size_t i = keep; i < cells.size(); ++i)
    out.cells[cells[i]] = LabelValue::Unknown;
}

LabelMatrix drop_labels(const LabelMatrix& labels, double keep_fraction, uint64_t seed,
                        bool stratified) {
  if (!(keep_fraction >= 0.0 && keep_fraction <= 1.0))
    fail(Errc::Param, "keep_fraction must lie in [0, 1]");
  labels.validate();

  LabelMatrix out = labels;
  if (stratified) {
    for (std::size_t c = 0; c < labels.n_categories; ++c) {
      std::vector<std::size_t> cells;
      for (std::size_t n = 0; n < labels.n_samples; ++n)
        if (known(labels.at(n, c))) cells.push_back(n * labels.n_categories + c);
      if (cells.empty()) continue;
      auto keep = static_cast<std::size_t>(std::llround(keep_fraction * cells.size()));
      Rng rng(mix64(seed, c));
      drop_subset(out, cells, keep, rng);
    }
    return out;
  }

  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < labels.cells.size(); ++i)
    if (known(labels.cells[i])) cells.push_back(i);
  if (cells.empty()) return out;
  auto keep = static_cast<std::size_t>(std::llround(keep_fraction * cells.size()));
  Rng rng(seed);
  drop_subset(out, cells, keep, rng);
  return out;
}

TargetMatrix assume_negative(const LabelMatrix& labels) {
  labels.validate();
  TargetMatrix t(labels.n_samples, labels.n_categories);
  for (std::size_t i = 0; i < labels.cells.size(); ++i) {
    switch (labels.cells[i]) {
      case LabelValue::Positive:
        t.values[i] = 1.0;
        t.mask[i] = 1;
        break;
      case LabelValue::Negative:
      case LabelValue::Unknown:
        t.values[i] = 0.0;
        t.mask[i] = 1;
        break;
      case LabelValue::Uncertain:
        break;  // stays MASKED
    }
  }
  return t;
}

static double resolve_one(const CategoryRule& rule, uint64_t seed, std::size_t sample,
                          std::size_t category, bool& masked) {
  masked = false;
  switch (rule.kind) {
    case PolicyKind::Ignore:
      masked = true;
      return 0.0;
    case PolicyKind::Ones:
      return 1.0;
    case PolicyKind::Zeros:
      return 0.0;
    case PolicyKind::OnesLsr:
      return rule.lo + (rule.hi - rule.lo) * keyed_u01(seed, sample, category);
    case PolicyKind::PerCategory:
      break;
  }
  fail(Errc::Param, "invalid uncertain rule");
}

TargetMatrix resolve_uncertain(const TargetMatrix& targets, const LabelMatrix& labels,
                               const UncertainPolicy& policy, uint64_t seed) {
  if (targets.n_samples != labels.n_samples || targets.n_categories != labels.n_categories)
    fail(Errc::Param, "targets and labels must have the same shape");
  policy.validate();

  TargetMatrix out = targets;
  for (std::size_t n = 0; n < labels.n_samples; ++n) {
    for (std::size_t c = 0; c < labels.n_categories; ++c) {
      if (labels.at(n, c) != LabelValue::Uncertain) continue;
      bool masked = false;
      double v = resolve_one(policy.rule_for(c), seed, n, c, masked);
      if (masked)
        out.set_masked(n, c);
      else
        out.set(n, c, v);
    }
  }
  return out;
}

std::vector<std::size_t> known_index(const LabelMatrix& labels, std::size_t category) {
  if (category >= labels.n_categories) fail(Errc::Param, "category out of range");
  std::vector<std::size_t> idx;
  for (std::size_t n = 0; n < labels.n_samples; ++n)
    if (known(labels.at(n, category))) idx.push_back(n);
  return idx;
}

CategoryTargets category_training_targets(const LabelMatrix& labels, std::size_t category,
                                          const UncertainPolicy& policy, uint64_t seed) {
  if (category >= labels.n_categories) fail(Errc::Param, "category out of range");
  policy.validate();
  CategoryTargets out;
  for (std::size_t n = 0; n < labels.n_samples; ++n) {
    switch (labels.at(n, category)) {
      case LabelValue::Positive:
        out.indices.push_back(n);
        out.targets.push_back(1.0);
        break;
      case LabelValue::Negative:
        out.indices.push_back(n);
        out.targets.push_back(0.0);
        break;
      case LabelValue::Unknown:
        break;
      case LabelValue::Uncertain: {
        bool masked = false;
        double v = resolve_one(policy.rule_for(category), seed, n, category, masked);
        if (!masked) {
          out.indices.push_back(n);
          out.targets.push_back(v);
        }
        break;
      }
    }
  }
  return out;
}

TargetMatrix known_targets(const LabelMatrix& labels, const UncertainPolicy& policy,
                           uint64_t seed) {
  labels.validate();
  policy.validate();
  TargetMatrix t(labels.n_samples, labels.n_categories);
  for (std::size_t n = 0; n < labels.n_samples; ++n) {
    for (std::size_t c = 0; c < labels.n_categories; ++c) {
      switch (labels.at(n, c)) {
        case LabelValue::Positive:
          t.set(n, c, 1.0);
          break;
        case LabelValue::Negative:
          t.set(n, c, 0.0);
          break;
        case LabelValue::Unknown:
          break;
        case LabelValue::Uncertain: {
          bool masked = false;
          double v = resolve_one(policy.rule_for(c), seed, n, c, masked);
          if (!masked) t.set(n, c, v);
          break;
        }
      }
    }
  }
  return t;
}

void save_labels_csv(const LabelMatrix& labels, const std::string& path) {
  labels.validate();
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::Io, "cannot open " + path + " for writing");
  f << "sample_id";
  for (std::size_t c = 0; c < labels.n_categories; ++c) f << ",cat_" << c;
  f << "\n";
  for (std::size_t n = 0; n < labels.n_samples; ++n) {
    f << n;
    for (std::size_t c = 0; c < labels.n_categories; ++c) {
      switch (labels.at(n, c)) {
        case LabelValue::Positive: f << ",1"; break;
        case LabelValue::Negative: f << ",-1"; break;
        case LabelValue::Unknown: f << ",0"; break;
        case LabelValue::Uncertain: f << ",u"; break;
      }
    }
    f << "\n";
  }
  if (!f) fail(Errc::Io, "write failed for " + path);
}

LabelMatrix load_labels_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::Io, "cannot open " + path);

  std::string line;
  if (!std::getline(f, line)) fail(Errc::Format, path + ": empty label file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("sample_id", 0) != 0)
    fail(Errc::Format, path + ": header must start with sample_id");
  std::size_t n_categories = 0;
  for (char ch : line)
    if (ch == ',') ++n_categories;

  std::vector<LabelValue> cells;
  std::size_t row = 0;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::size_t col = 0;
    while (std::getline(ss, field, ',')) {
      if (col == 0) {
        ++col;
        continue;  // sample id; file order is authoritative
      }
      if (field == "1")
        cells.push_back(LabelValue::Positive);
      else if (field == "-1")
        cells.push_back(LabelValue::Negative);
      else if (field == "0")
        cells.push_back(LabelValue::Unknown);
      else if (field == "u")
        cells.push_back(LabelValue::Uncertain);
      else
        fail(Errc::Format, path + ": bad cell '" + field + "' at row " + std::to_string(row) +
                               " column " + std::to_string(col - 1));
      ++col;
    }
    if (col != n_categories + 1)
      fail(Errc::Format, path + ": row " + std::to_string(row) + " has " + std::to_string(col) +
                             " fields, expected " + std::to_string(n_categories + 1));
    ++row;
  }

  LabelMatrix out;
  out.n_samples = row;
  out.n_categories = n_categories;
  out.cells = std::move(cells);
  out.validate();
  return out;
}

}  // namespace cft
