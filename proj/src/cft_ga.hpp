#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cft_report.hpp"
#include "head.hpp"
#include "metrics.hpp"

namespace cft {

// A candidate solution: [w_1 .. w_Z, b].
using Individual = std::vector<double>;

enum class CrossoverKind {
  TwoPoint,      // with probability `param`, splice a uniformly chosen segment of b into a
  SwapFraction,  // replace a uniformly chosen floor(param * len) positions with b's values
};

struct GAConfig {
  std::size_t population = 30;
  std::size_t generations = 500;
  std::size_t n_parents = 14;
  std::size_t elitism = 10;
  CrossoverKind crossover = CrossoverKind::TwoPoint;
  double crossover_param = 0.8;
  double mutation_prob = 0.02;
  double mutation_fraction = 0.01;
  double mutation_lo = -0.02;
  double mutation_hi = 0.02;
  MetricKind fitness_metric = MetricKind::Auc;

  void validate() const;
};

// Named hyperparameter presets: "chexpert-ga" and "coco-ga".
GAConfig ga_preset(const std::string& name);

Individual encode(const LRUnit& unit);
LRUnit decode(const Individual& genome, std::size_t category);

// The decoded unit's ranking metric over the given rows; labels in {-1, +1}.
double fitness(const Individual& genome, const Mat& features, std::span<const int8_t> labels,
               MetricKind metric);

// k indices sampled with replacement, probability proportional to
// f_i - min(f) + 1e-9 (uniform when all fitnesses are equal).
std::vector<std::size_t> roulette_select(std::span<const double> fitnesses, std::size_t k,
                                         uint64_t seed);

Individual crossover(const Individual& parent_a, const Individual& parent_b, CrossoverKind kind,
                     double param, uint64_t seed);

// With probability prob, adds an independent uniform draw from [lo, hi] to
// each of ceil(fraction * len) uniformly chosen positions.
Individual mutate(const Individual& genome, double prob, double fraction, double lo, double hi,
                  uint64_t seed);

struct EvolveResult {
  LRUnit unit;
  std::vector<double> history;  // best fitness per generation, generations + 1 entries
  bool skipped = false;         // fitness undefined at initialization
  std::size_t best_generation = 0;
  double fitness_initial = 0.0;
  double fitness_final = 0.0;
};

// Evolves one logistic regression to directly maximize its ranking metric.
// The population starts as identical copies of the unit and diverges through
// mutation; elites survive unchanged, so the best fitness never decreases.
EvolveResult evolve(const LRUnit& unit, const Mat& features, std::span<const int8_t> labels,
                    const GAConfig& config, uint64_t seed);

// Category-wise fine-tuning by GA. Mirrors cft_bp: independent categories,
// order- and jobs-invariant.
std::pair<ClassificationHead, CftReport> cft_ga(const ClassificationHead& head,
                                                const FeatureCache& cache,
                                                const LabelMatrix& labels,
                                                const std::optional<CftDataset>& valid,
                                                const UncertainPolicy& policy,
                                                const GAConfig& config, uint64_t seed,
                                                const CftRunOptions& opts = {});

}  // namespace cft
