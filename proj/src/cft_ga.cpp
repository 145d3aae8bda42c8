#include "cft_ga.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cft_driver.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace cft {

void GAConfig::validate() const {
  if (population == 0) fail(Errc::Param, "population must be positive");
  if (elitism > population) fail(Errc::Param, "elitism cannot exceed the population");
  if (n_parents < 2) fail(Errc::Param, "need at least two parents");
  if (!(crossover_param >= 0.0 && crossover_param <= 1.0))
    fail(Errc::Param, "crossover parameter must lie in [0, 1]");
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0))
    fail(Errc::Param, "mutation probability must lie in [0, 1]");
  if (!(mutation_fraction >= 0.0 && mutation_fraction <= 1.0))
    fail(Errc::Param, "mutation fraction must lie in [0, 1]");
  if (!(mutation_lo <= mutation_hi)) fail(Errc::Param, "mutation range must satisfy lo <= hi");
}

GAConfig ga_preset(const std::string& name) {
  if (name == "chexpert-ga") {
    return GAConfig{};  // the defaults are this preset
  }
  if (name == "coco-ga") {
    GAConfig cfg;
    cfg.population = 50;
    cfg.generations = 5000;
    cfg.n_parents = 25;
    cfg.elitism = 1;
    cfg.crossover = CrossoverKind::SwapFraction;
    cfg.crossover_param = 0.2;
    cfg.mutation_prob = 0.5;
    cfg.mutation_fraction = 1.0;
    cfg.mutation_lo = -0.001;
    cfg.mutation_hi = 0.001;
    cfg.fitness_metric = MetricKind::Ap;
    return cfg;
  }
  fail(Errc::Param, "unknown GA preset '" + name + "'");
}

Individual encode(const LRUnit& unit) {
  Individual genome = unit.weight;
  genome.push_back(unit.bias);
  return genome;
}

LRUnit decode(const Individual& genome, std::size_t category) {
  if (genome.empty()) fail(Errc::Param, "genome must hold at least a bias");
  LRUnit unit;
  unit.weight.assign(genome.begin(), genome.end() - 1);
  unit.bias = genome.back();
  unit.category = category;
  return unit;
}

double fitness(const Individual& genome, const Mat& features, std::span<const int8_t> labels,
               MetricKind metric) {
  if (genome.size() != features.cols + 1)
    fail(Errc::Param, "genome length does not match feature dimension");
  if (labels.size() != features.rows) fail(Errc::Param, "label count does not match feature rows");
  EvalSet set;
  set.labels.assign(labels.begin(), labels.end());
  set.predictions.resize(features.rows);
  const double b = genome.back();
  for (std::size_t i = 0; i < features.rows; ++i)
    set.predictions[i] = logistic(dot(genome.data(), features.row(i), features.cols) + b);
  return eval_metric(set, metric);
}

std::vector<std::size_t> roulette_select(std::span<const double> fitnesses, std::size_t k,
                                         uint64_t seed) {
  if (fitnesses.empty()) fail(Errc::Param, "cannot select from an empty population");
  if (k == 0) fail(Errc::Param, "must select at least one parent");

  const double min_fit = *std::min_element(fitnesses.begin(), fitnesses.end());
  std::vector<double> cum(fitnesses.size());
  double total = 0.0;
  for (std::size_t i = 0; i < fitnesses.size(); ++i) {
    total += fitnesses[i] - min_fit + 1e-9;
    cum[i] = total;
  }

  Rng rng(seed);
  std::vector<std::size_t> picks(k);
  for (std::size_t i = 0; i < k; ++i) {
    double u = rng.uniform01() * total;
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    picks[i] = std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()),
                                     fitnesses.size() - 1);
  }
  return picks;
}

// FP-robust subset sizes: exact-integer products must not fall on the wrong
// side of floor/ceil.
static std::size_t floor_count(double fraction, std::size_t len) {
  double v = std::floor(fraction * static_cast<double>(len) + 1e-9);
  return std::min<std::size_t>(static_cast<std::size_t>(v), len);
}
static std::size_t ceil_count(double fraction, std::size_t len) {
  double v = std::ceil(fraction * static_cast<double>(len) - 1e-9);
  return std::min<std::size_t>(static_cast<std::size_t>(std::max(v, 0.0)), len);
}

Individual crossover(const Individual& parent_a, const Individual& parent_b, CrossoverKind kind,
                     double param, uint64_t seed) {
  if (parent_a.size() != parent_b.size()) fail(Errc::Param, "parent genome lengths differ");
  Individual child = parent_a;
  const std::size_t len = parent_a.size();
  if (len == 0) return child;
  Rng rng(seed);

  if (kind == CrossoverKind::TwoPoint) {
    if (rng.uniform01() < param) {
      std::size_t c1 = static_cast<std::size_t>(rng.below(len + 1));
      std::size_t c2 = static_cast<std::size_t>(rng.below(len + 1));
      if (c1 > c2) std::swap(c1, c2);
      for (std::size_t i = c1; i < c2; ++i) child[i] = parent_b[i];
    }
    return child;
  }

  // SwapFraction: uniformly chosen positions, without replacement.
  std::size_t count = floor_count(param, len);
  std::vector<std::size_t> pos(len);
  std::iota(pos.begin(), pos.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(len - i));
    std::swap(pos[i], pos[j]);
    child[pos[i]] = parent_b[pos[i]];
  }
  return child;
}

Individual mutate(const Individual& genome, double prob, double fraction, double lo, double hi,
                  uint64_t seed) {
  Individual out = genome;
  if (genome.empty()) return out;
  Rng rng(seed);
  if (!(rng.uniform01() < prob)) return out;

  const std::size_t len = genome.size();
  std::size_t count = ceil_count(fraction, len);
  if (count == 0) return out;
  std::vector<std::size_t> pos(len);
  std::iota(pos.begin(), pos.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(len - i));
    std::swap(pos[i], pos[j]);
    out[pos[i]] += rng.uniform(lo, hi);
  }
  return out;
}

EvolveResult evolve(const LRUnit& unit, const Mat& features, std::span<const int8_t> labels,
                    const GAConfig& config, uint64_t seed) {
  config.validate();
  if (labels.size() != features.rows) fail(Errc::Param, "label count does not match feature rows");

  EvolveResult res;
  res.unit = unit;

  Individual base = encode(unit);
  std::vector<Individual> pop(config.population, base);
  std::vector<double> fit(config.population);
  try {
    // The initial population is identical, so one evaluation covers it.
    std::fill(fit.begin(), fit.end(), fitness(base, features, labels, config.fitness_metric));
  } catch (const Error& e) {
    if (e.code() == Errc::UndefinedMetric) {
      res.skipped = true;
      return res;
    }
    throw;
  }

  Individual best = base;
  double best_fit = fit[0];
  res.history.push_back(best_fit);

  std::vector<std::size_t> rank(pop.size());
  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(),
                     [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });
    auto parents = roulette_select(fit, config.n_parents, mix64(seed, gen, 1));

    std::vector<Individual> next;
    next.reserve(pop.size());
    for (std::size_t e = 0; e < config.elitism; ++e) next.push_back(pop[rank[e]]);
    std::size_t j = 0;
    while (next.size() < pop.size()) {
      const Individual& pa = pop[parents[j % parents.size()]];
      const Individual& pb = pop[parents[(j + 1) % parents.size()]];
      Individual child =
          crossover(pa, pb, config.crossover, config.crossover_param, mix64(seed, gen, 2 + 2 * j));
      child = mutate(child, config.mutation_prob, config.mutation_fraction, config.mutation_lo,
                     config.mutation_hi, mix64(seed, gen, 3 + 2 * j));
      next.push_back(std::move(child));
      ++j;
    }
    pop = std::move(next);

    double gen_best = -std::numeric_limits<double>::infinity();
    std::size_t gen_best_i = 0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      fit[i] = fitness(pop[i], features, labels, config.fitness_metric);
      if (fit[i] > gen_best) {
        gen_best = fit[i];
        gen_best_i = i;
      }
    }
    res.history.push_back(gen_best);
    if (gen_best > best_fit) {
      best_fit = gen_best;
      best = pop[gen_best_i];
      res.best_generation = gen;
    }
  }

  res.unit = decode(best, unit.category);
  res.fitness_initial = res.history.front();
  res.fitness_final = res.history.back();
  return res;
}

std::pair<ClassificationHead, CftReport> cft_ga(const ClassificationHead& head,
                                                const FeatureCache& cache,
                                                const LabelMatrix& labels,
                                                const std::optional<CftDataset>& valid,
                                                const UncertainPolicy& policy,
                                                const GAConfig& config, uint64_t seed,
                                                const CftRunOptions& opts) {
  config.validate();
  auto tune = [&config](const LRUnit& unit, const Mat& x, const std::vector<double>& targets,
                        const UnitValidSet* vs, uint64_t cat_seed) {
    (void)vs;  // fitness is evaluated on the training rows
    std::vector<int8_t> hard(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) hard[i] = targets[i] >= 0.5 ? 1 : -1;
    EvolveResult r = evolve(unit, x, hard, config, cat_seed);
    detail::TuneOutput out;
    out.unit = std::move(r.unit);
    out.skipped = r.skipped;
    out.steps_run = r.skipped ? 0 : config.generations;
    out.best_step = r.best_generation;
    out.history = std::move(r.history);
    if (!r.skipped) {
      out.fitness_initial = r.fitness_initial;
      out.fitness_final = r.fitness_final;
    }
    return out;
  };
  return detail::run_cft(head, cache, labels, valid, policy, seed, opts,
                         config.fitness_metric, "ga", tune);
}

}  // namespace cft
