// C ABI wrapper around the core library. Every entry point validates its
// arguments, translates exceptions into status codes, and keeps the failure
// message in thread-local storage for cft_last_error().

#include "cft/cft.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "baseline.hpp"
#include "cft_bp.hpp"
#include "cft_ga.hpp"
#include "error.hpp"
#include "feature_cache.hpp"
#include "head.hpp"
#include "labels.hpp"
#include "metrics.hpp"
#include "rng.hpp"
#include "synthetic.hpp"

struct cft_cache {
  cft::FeatureCache v;
};
struct cft_labels {
  cft::LabelMatrix v;
};
struct cft_head {
  cft::ClassificationHead v;
};

namespace {

thread_local std::string g_last_error;

cft_status to_status(cft::Errc code) {
  switch (code) {
    case cft::Errc::Param: return CFT_ERR_PARAM;
    case cft::Errc::Io: return CFT_ERR_IO;
    case cft::Errc::Format: return CFT_ERR_FORMAT;
    case cft::Errc::Corrupt: return CFT_ERR_CORRUPT;
    case cft::Errc::Validation: return CFT_ERR_VALIDATION;
    case cft::Errc::Config: return CFT_ERR_CONFIG;
    case cft::Errc::UndefinedMetric: return CFT_ERR_UNDEFINED_METRIC;
  }
  return CFT_ERR_INTERNAL;
}

template <typename Fn>
cft_status guarded(Fn&& fn) {
  try {
    fn();
    return CFT_OK;
  } catch (const cft::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CFT_ERR_INTERNAL;
  }
}

void require(bool cond, const char* msg) {
  if (!cond) cft::fail(cft::Errc::Param, msg);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

cft::PolicyKind to_policy_kind(int kind) {
  switch (kind) {
    case CFT_UNCERTAIN_IGNORE: return cft::PolicyKind::Ignore;
    case CFT_UNCERTAIN_ONES: return cft::PolicyKind::Ones;
    case CFT_UNCERTAIN_ZEROS: return cft::PolicyKind::Zeros;
    case CFT_UNCERTAIN_ONES_LSR: return cft::PolicyKind::OnesLsr;
    default: break;
  }
  cft::fail(cft::Errc::Param, "unknown uncertain-policy kind " + std::to_string(kind));
}

cft::UncertainPolicy to_policy(const cft_uncertain_policy* p) {
  if (p == nullptr) return cft::UncertainPolicy::ignore();
  cft::UncertainPolicy out;
  if (p->per_category != nullptr && p->per_category_len > 0) {
    std::map<std::size_t, cft::CategoryRule> rules;
    for (uint32_t c = 0; c < p->per_category_len; ++c) {
      if (p->per_category[c] < 0) continue;
      rules[c] = cft::CategoryRule{to_policy_kind(p->per_category[c]), p->lsr_lo, p->lsr_hi};
    }
    out = cft::UncertainPolicy::per(std::move(rules));
  } else {
    out.kind = to_policy_kind(p->kind);
    out.lo = p->lsr_lo;
    out.hi = p->lsr_hi;
  }
  out.validate();
  return out;
}

std::optional<cft::MetricKind> to_metric_opt(int metric) {
  switch (metric) {
    case CFT_METRIC_NONE: return std::nullopt;
    case CFT_METRIC_AUC: return cft::MetricKind::Auc;
    case CFT_METRIC_AP: return cft::MetricKind::Ap;
    default: break;
  }
  cft::fail(cft::Errc::Param, "unknown metric " + std::to_string(metric));
}

cft::BPConfig to_bp_config(const cft_bp_config* c) {
  require(c != nullptr, "config must not be null");
  cft::BPConfig out;
  switch (c->optimizer) {
    case CFT_OPT_GD: out.optimizer = cft::Optimizer::FullBatchGd; break;
    case CFT_OPT_ADAM: out.optimizer = cft::Optimizer::FullBatchAdam; break;
    default: cft::fail(cft::Errc::Param, "unknown optimizer " + std::to_string(c->optimizer));
  }
  out.learning_rate = c->learning_rate;
  out.epochs = static_cast<std::size_t>(c->epochs);
  out.asl = cft::ASLParams{c->asl.gamma_pos, c->asl.gamma_neg, c->asl.margin};
  out.early_stop_metric = to_metric_opt(c->early_stop_metric);
  out.adam_beta1 = c->adam_beta1;
  out.adam_beta2 = c->adam_beta2;
  out.adam_eps = c->adam_eps;
  out.validate();
  return out;
}

cft::GAConfig to_ga_config(const cft_ga_config* c) {
  require(c != nullptr, "config must not be null");
  cft::GAConfig out;
  out.population = static_cast<std::size_t>(c->population);
  out.generations = static_cast<std::size_t>(c->generations);
  out.n_parents = static_cast<std::size_t>(c->n_parents);
  out.elitism = static_cast<std::size_t>(c->elitism);
  switch (c->crossover) {
    case CFT_CROSS_TWO_POINT: out.crossover = cft::CrossoverKind::TwoPoint; break;
    case CFT_CROSS_SWAP_FRACTION: out.crossover = cft::CrossoverKind::SwapFraction; break;
    default: cft::fail(cft::Errc::Param, "unknown crossover " + std::to_string(c->crossover));
  }
  out.crossover_param = c->crossover_param;
  out.mutation_prob = c->mutation_prob;
  out.mutation_fraction = c->mutation_fraction;
  out.mutation_lo = c->mutation_lo;
  out.mutation_hi = c->mutation_hi;
  auto metric = to_metric_opt(c->fitness_metric);
  require(metric.has_value(), "fitness metric must be AUC or AP");
  out.fitness_metric = *metric;
  out.validate();
  return out;
}

nlohmann::json opt_json(const std::optional<double>& v) {
  if (v.has_value()) return *v;
  return nullptr;
}

nlohmann::json outcome_to_json(const cft::CategoryOutcome& o, bool ga) {
  nlohmann::json j;
  j["category"] = o.category;
  j["skipped"] = o.skipped;
  j["n_train"] = o.n_train;
  j["n_valid"] = o.n_valid;
  j["policy"] = o.policy;
  j["metric_before"] = opt_json(o.metric_before);
  j["metric_after"] = opt_json(o.metric_after);
  if (ga) {
    j["generations_run"] = o.steps_run;
    j["best_generation"] = o.best_step;
    j["fitness_initial"] = opt_json(o.fitness_initial);
    j["fitness_final"] = opt_json(o.fitness_final);
    j["history"] = o.history;
  } else {
    j["epochs_run"] = o.steps_run;
    j["best_epoch"] = o.best_step;
    j["valid_curve"] = o.valid_curve;  // NaN serializes as null
  }
  return j;
}

std::string run_report_json(const cft::CftReport& r, uint64_t seed, uint32_t jobs, bool greedy) {
  nlohmann::json j;
  j["schema"] = 1;
  j["command"] = "cft";
  j["variant"] = r.variant;
  j["metric"] = r.metric;
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["greedy"] = greedy;
  j["mean_before"] = opt_json(r.mean_before);
  j["mean_after"] = opt_json(r.mean_after);
  auto cats = nlohmann::json::array();
  for (const auto& o : r.categories) cats.push_back(outcome_to_json(o, r.variant == "ga"));
  j["categories"] = std::move(cats);
  return j.dump(2);
}

std::optional<cft::CftDataset> to_valid_set(const cft_cache* valid_cache,
                                            const cft_labels* valid_labels) {
  require((valid_cache == nullptr) == (valid_labels == nullptr),
          "valid cache and valid labels must be given together");
  if (valid_cache == nullptr) return std::nullopt;
  return cft::CftDataset{&valid_cache->v, &valid_labels->v};
}

}  // namespace

extern "C" {

const char* cft_last_error(void) { return g_last_error.c_str(); }

uint32_t cft_version(void) { return 1; }

void cft_string_free(char* s) { std::free(s); }

/* ---------- feature caches ---------- */

cft_status cft_cache_create(uint64_t n_samples, uint32_t dim_z, const float* data,
                            cft_cache** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    require(data != nullptr, "data must not be null");
    require(n_samples > 0 && dim_z > 0, "cache dimensions must be positive");
    auto h = std::make_unique<cft_cache>();
    h->v.n_samples = static_cast<std::size_t>(n_samples);
    h->v.dim_z = dim_z;
    h->v.data.assign(data, data + n_samples * dim_z);
    for (std::size_t i = 0; i < h->v.data.size(); ++i) {
      if (!std::isfinite(h->v.data[i])) {
        cft::fail(cft::Errc::Validation,
                  "non-finite feature value at flat index " + std::to_string(i));
      }
    }
    *out = h.release();
  });
}

cft_status cft_cache_load(const char* path, cft_cache** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path and out must not be null");
    auto h = std::make_unique<cft_cache>();
    h->v = cft::load_cache(path);
    *out = h.release();
  });
}

cft_status cft_cache_save(const cft_cache* cache, const char* path) {
  return guarded([&] {
    require(cache != nullptr && path != nullptr, "cache and path must not be null");
    cft::save_cache(cache->v, path);
  });
}

uint64_t cft_cache_n_samples(const cft_cache* cache) {
  return cache == nullptr ? 0 : cache->v.n_samples;
}

uint32_t cft_cache_dim_z(const cft_cache* cache) {
  return cache == nullptr ? 0 : static_cast<uint32_t>(cache->v.dim_z);
}

const float* cft_cache_row(const cft_cache* cache, uint64_t sample) {
  if (cache == nullptr || sample >= cache->v.n_samples) return nullptr;
  return cache->v.row(static_cast<std::size_t>(sample));
}

void cft_cache_free(cft_cache* cache) { delete cache; }

/* ---------- labels ---------- */

cft_status cft_labels_create(uint64_t n_samples, uint32_t n_categories, const int8_t* cells,
                             cft_labels** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    require(cells != nullptr, "cells must not be null");
    require(n_samples > 0 && n_categories > 0, "label dimensions must be positive");
    auto h = std::make_unique<cft_labels>();
    h->v.n_samples = static_cast<std::size_t>(n_samples);
    h->v.n_categories = n_categories;
    h->v.cells.resize(h->v.n_samples * h->v.n_categories);
    for (std::size_t i = 0; i < h->v.cells.size(); ++i) {
      switch (cells[i]) {
        case 1: h->v.cells[i] = cft::LabelValue::Positive; break;
        case -1: h->v.cells[i] = cft::LabelValue::Negative; break;
        case 0: h->v.cells[i] = cft::LabelValue::Unknown; break;
        case 2: h->v.cells[i] = cft::LabelValue::Uncertain; break;
        default:
          cft::fail(cft::Errc::Validation, "label cell at flat index " + std::to_string(i) +
                                               " must be one of {1, -1, 0, 2}");
      }
    }
    h->v.validate();
    *out = h.release();
  });
}

cft_status cft_labels_load_csv(const char* path, cft_labels** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path and out must not be null");
    auto h = std::make_unique<cft_labels>();
    h->v = cft::load_labels_csv(path);
    *out = h.release();
  });
}

cft_status cft_labels_save_csv(const cft_labels* labels, const char* path) {
  return guarded([&] {
    require(labels != nullptr && path != nullptr, "labels and path must not be null");
    cft::save_labels_csv(labels->v, path);
  });
}

uint64_t cft_labels_n_samples(const cft_labels* labels) {
  return labels == nullptr ? 0 : labels->v.n_samples;
}

uint32_t cft_labels_n_categories(const cft_labels* labels) {
  return labels == nullptr ? 0 : static_cast<uint32_t>(labels->v.n_categories);
}

int8_t cft_labels_cell(const cft_labels* labels, uint64_t sample, uint32_t category) {
  if (labels == nullptr || sample >= labels->v.n_samples || category >= labels->v.n_categories) {
    return 0;
  }
  return static_cast<int8_t>(
      labels->v.at(static_cast<std::size_t>(sample), static_cast<std::size_t>(category)));
}

cft_status cft_labels_drop(const cft_labels* labels, double keep_fraction, uint64_t seed,
                           int stratified, cft_labels** out) {
  return guarded([&] {
    require(labels != nullptr && out != nullptr, "labels and out must not be null");
    auto h = std::make_unique<cft_labels>();
    h->v = cft::drop_labels(labels->v, keep_fraction, seed, stratified != 0);
    *out = h.release();
  });
}

void cft_labels_free(cft_labels* labels) { delete labels; }

/* ---------- heads ---------- */

cft_status cft_head_create(uint32_t n_categories, uint32_t dim_z, const double* weights,
                           const double* bias, cft_head** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    require(weights != nullptr && bias != nullptr, "weights and bias must not be null");
    require(n_categories > 0 && dim_z > 0, "head dimensions must be positive");
    auto h = std::make_unique<cft_head>();
    h->v.n_categories = n_categories;
    h->v.dim_z = dim_z;
    h->v.weights.assign(weights, weights + std::size_t{n_categories} * dim_z);
    h->v.bias.assign(bias, bias + n_categories);
    h->v.validate();
    *out = h.release();
  });
}

cft_status cft_head_load(const char* path, cft_head** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path and out must not be null");
    auto h = std::make_unique<cft_head>();
    h->v = cft::load_head(path);
    *out = h.release();
  });
}

cft_status cft_head_save(const cft_head* head, const char* path) {
  return guarded([&] {
    require(head != nullptr && path != nullptr, "head and path must not be null");
    cft::save_head(head->v, path);
  });
}

uint32_t cft_head_n_categories(const cft_head* head) {
  return head == nullptr ? 0 : static_cast<uint32_t>(head->v.n_categories);
}

uint32_t cft_head_dim_z(const cft_head* head) {
  return head == nullptr ? 0 : static_cast<uint32_t>(head->v.dim_z);
}

cft_status cft_head_predict(const cft_head* head, const double* z, double* probs_out) {
  return guarded([&] {
    require(head != nullptr && z != nullptr && probs_out != nullptr,
            "head, z, and probs_out must not be null");
    auto probs = cft::predict(head->v, std::span<const double>(z, head->v.dim_z));
    std::memcpy(probs_out, probs.data(), probs.size() * sizeof(double));
  });
}

cft_status cft_head_to_json(const cft_head* head, char** json_out) {
  return guarded([&] {
    require(head != nullptr && json_out != nullptr, "head and json_out must not be null");
    *json_out = dup_string(cft::head_to_json(head->v));
  });
}

void cft_head_free(cft_head* head) { delete head; }

/* ---------- configuration ---------- */

void cft_bp_config_init(cft_bp_config* cfg) {
  if (cfg == nullptr) return;
  cfg->optimizer = CFT_OPT_GD;
  cfg->learning_rate = 1e-4;
  cfg->epochs = 500;
  cfg->asl = cft_asl_params{0.0, 0.0, 0.0};
  cfg->early_stop_metric = CFT_METRIC_NONE;
  cfg->adam_beta1 = 0.9;
  cfg->adam_beta2 = 0.999;
  cfg->adam_eps = 1e-8;
}

cft_status cft_ga_config_preset(const char* name, cft_ga_config* out) {
  return guarded([&] {
    require(name != nullptr && out != nullptr, "name and out must not be null");
    cft::GAConfig g = cft::ga_preset(name);
    out->population = g.population;
    out->generations = g.generations;
    out->n_parents = g.n_parents;
    out->elitism = g.elitism;
    out->crossover = g.crossover == cft::CrossoverKind::TwoPoint ? CFT_CROSS_TWO_POINT
                                                                 : CFT_CROSS_SWAP_FRACTION;
    out->crossover_param = g.crossover_param;
    out->mutation_prob = g.mutation_prob;
    out->mutation_fraction = g.mutation_fraction;
    out->mutation_lo = g.mutation_lo;
    out->mutation_hi = g.mutation_hi;
    out->fitness_metric =
        g.fitness_metric == cft::MetricKind::Auc ? CFT_METRIC_AUC : CFT_METRIC_AP;
  });
}

void cft_uncertain_policy_init(cft_uncertain_policy* policy) {
  if (policy == nullptr) return;
  policy->kind = CFT_UNCERTAIN_IGNORE;
  policy->lsr_lo = 0.55;
  policy->lsr_hi = 0.85;
  policy->per_category = nullptr;
  policy->per_category_len = 0;
}

/* ---------- synthetic data ---------- */

void cft_synth_spec_init(cft_synth_spec* spec) {
  if (spec == nullptr) return;
  spec->n_samples = 0;
  spec->dim_z = 0;
  spec->n_categories = 0;
  spec->positive_rate = 0.1;
  spec->label_noise = 0.0;
  spec->seed = 0;
  spec->teacher_scale = 6.0;
}

cft_status cft_synth_generate(const cft_synth_spec* spec, cft_cache** cache_out,
                              cft_labels** labels_out, cft_head** oracle_head_out) {
  return guarded([&] {
    require(spec != nullptr, "spec must not be null");
    require(cache_out != nullptr && labels_out != nullptr,
            "cache_out and labels_out must not be null");
    cft::SyntheticSpec s;
    s.n_samples = static_cast<std::size_t>(spec->n_samples);
    s.dim_z = spec->dim_z;
    s.n_categories = spec->n_categories;
    s.positive_rate = spec->positive_rate;
    s.label_noise = spec->label_noise;
    s.seed = spec->seed;
    s.teacher_scale = spec->teacher_scale;
    cft::SyntheticData data = cft::generate(s);
    auto cache = std::make_unique<cft_cache>();
    cache->v = std::move(data.cache);
    auto labels = std::make_unique<cft_labels>();
    labels->v = std::move(data.labels);
    std::unique_ptr<cft_head> head;
    if (oracle_head_out != nullptr) {
      head = std::make_unique<cft_head>();
      head->v = std::move(data.oracle_head);
    }
    *cache_out = cache.release();
    *labels_out = labels.release();
    if (oracle_head_out != nullptr) *oracle_head_out = head.release();
  });
}

/* ---------- pipeline ---------- */

cft_status cft_train_head(const cft_cache* cache, const cft_labels* labels,
                          const cft_uncertain_policy* policy, const cft_bp_config* config,
                          uint64_t seed, cft_head** head_out, char** report_json_out) {
  return guarded([&] {
    require(cache != nullptr && labels != nullptr && head_out != nullptr,
            "cache, labels, and head_out must not be null");
    auto pol = to_policy(policy);
    auto cfg = to_bp_config(config);
    auto targets = cft::resolve_uncertain(cft::assume_negative(labels->v), labels->v, pol, seed);
    std::size_t n_cells = 0;
    for (uint8_t m : targets.mask) n_cells += m;

    cft::BPConfig init_only = cfg;
    init_only.epochs = 0;
    auto initial = cft::train_head(cache->v, targets, init_only, seed);
    double loss_initial = cft::head_mean_loss(initial, cache->v, targets, cfg.asl);
    auto trained = cft::train_head(cache->v, targets, cfg, seed);
    double loss_final = cft::head_mean_loss(trained, cache->v, targets, cfg.asl);

    auto h = std::make_unique<cft_head>();
    h->v = std::move(trained);
    if (report_json_out != nullptr) {
      nlohmann::json j;
      j["schema"] = 1;
      j["command"] = "train";
      j["seed"] = seed;
      j["n_samples"] = cache->v.n_samples;
      j["n_categories"] = labels->v.n_categories;
      j["n_cells"] = n_cells;
      j["epochs"] = cfg.epochs;
      j["loss_initial"] = loss_initial;
      j["loss_final"] = loss_final;
      *report_json_out = dup_string(j.dump(2));
    }
    *head_out = h.release();
  });
}

cft_status cft_run_bp(const cft_head* head, const cft_cache* cache, const cft_labels* labels,
                      const cft_cache* valid_cache, const cft_labels* valid_labels,
                      const cft_uncertain_policy* policy, const cft_bp_config* config,
                      uint64_t seed, uint32_t jobs, int greedy, cft_head** head_out,
                      char** report_json_out) {
  return guarded([&] {
    require(head != nullptr && cache != nullptr && labels != nullptr && head_out != nullptr,
            "head, cache, labels, and head_out must not be null");
    auto valid = to_valid_set(valid_cache, valid_labels);
    auto pol = to_policy(policy);
    auto cfg = to_bp_config(config);
    cft::CftRunOptions opts;
    opts.jobs = jobs == 0 ? 1 : jobs;
    opts.greedy = greedy != 0;
    auto [tuned, report] = cft::cft_bp(head->v, cache->v, labels->v, valid, pol, cfg, seed, opts);
    auto h = std::make_unique<cft_head>();
    h->v = std::move(tuned);
    if (report_json_out != nullptr) {
      *report_json_out = dup_string(run_report_json(report, seed, opts.jobs, opts.greedy));
    }
    *head_out = h.release();
  });
}

cft_status cft_run_ga(const cft_head* head, const cft_cache* cache, const cft_labels* labels,
                      const cft_cache* valid_cache, const cft_labels* valid_labels,
                      const cft_uncertain_policy* policy, const cft_ga_config* config,
                      uint64_t seed, uint32_t jobs, int greedy, cft_head** head_out,
                      char** report_json_out) {
  return guarded([&] {
    require(head != nullptr && cache != nullptr && labels != nullptr && head_out != nullptr,
            "head, cache, labels, and head_out must not be null");
    auto valid = to_valid_set(valid_cache, valid_labels);
    auto pol = to_policy(policy);
    auto cfg = to_ga_config(config);
    cft::CftRunOptions opts;
    opts.jobs = jobs == 0 ? 1 : jobs;
    opts.greedy = greedy != 0;
    auto [tuned, report] = cft::cft_ga(head->v, cache->v, labels->v, valid, pol, cfg, seed, opts);
    auto h = std::make_unique<cft_head>();
    h->v = std::move(tuned);
    if (report_json_out != nullptr) {
      *report_json_out = dup_string(run_report_json(report, seed, opts.jobs, opts.greedy));
    }
    *head_out = h.release();
  });
}

cft_status cft_run_joint(const cft_head* head, const cft_cache* cache, const cft_labels* labels,
                         const cft_cache* valid_cache, const cft_labels* valid_labels,
                         const cft_uncertain_policy* policy, const cft_bp_config* config,
                         uint64_t seed, cft_head** head_out, char** report_json_out) {
  return guarded([&] {
    require(head != nullptr && cache != nullptr && labels != nullptr && head_out != nullptr,
            "head, cache, labels, and head_out must not be null");
    auto valid = to_valid_set(valid_cache, valid_labels);
    auto pol = to_policy(policy);
    auto cfg = to_bp_config(config);
    auto [tuned, jr] = cft::ft_joint_baseline(head->v, cache->v, labels->v, valid, pol, cfg, seed);
    auto h = std::make_unique<cft_head>();
    h->v = std::move(tuned);
    if (report_json_out != nullptr) {
      nlohmann::json j;
      j["schema"] = 1;
      j["command"] = "joint";
      j["seed"] = seed;
      j["n_cells"] = jr.n_cells;
      j["epochs_run"] = jr.train_loss.empty() ? 0 : jr.train_loss.size() - 1;
      j["best_epoch"] = jr.best_epoch;
      j["train_loss"] = jr.train_loss;
      j["valid_mean"] = jr.valid_mean;  // NaN serializes as null
      *report_json_out = dup_string(j.dump(2));
    }
    *head_out = h.release();
  });
}

cft_status cft_evaluate(const cft_head* head, const cft_cache* cache, const cft_labels* labels,
                        const uint32_t* subset, uint32_t subset_len, uint32_t groups,
                        char** report_json_out) {
  return guarded([&] {
    require(head != nullptr && cache != nullptr && labels != nullptr &&
                report_json_out != nullptr,
            "head, cache, labels, and report_json_out must not be null");
    require(head->v.dim_z == cache->v.dim_z, "head and cache disagree on feature dimension");
    require(labels->v.n_samples == cache->v.n_samples,
            "labels and cache disagree on sample count");
    require(head->v.n_categories == labels->v.n_categories,
            "head and labels disagree on category count");
    const std::size_t n = cache->v.n_samples;
    const std::size_t c_count = head->v.n_categories;
    require(groups <= c_count, "groups exceeds the category count");

    std::vector<cft::EvalSet> sets(c_count);
    std::vector<double> z(cache->v.dim_z);
    for (std::size_t i = 0; i < n; ++i) {
      const float* row = cache->v.row(i);
      for (std::size_t d = 0; d < cache->v.dim_z; ++d) z[d] = row[d];
      auto probs = cft::predict(head->v, z);
      for (std::size_t c = 0; c < c_count; ++c) {
        cft::LabelValue lv = labels->v.at(i, c);
        if (lv != cft::LabelValue::Positive && lv != cft::LabelValue::Negative) continue;
        sets[c].labels.push_back(lv == cft::LabelValue::Positive ? 1 : -1);
        sets[c].predictions.push_back(probs[c]);
      }
    }

    auto try_metric = [](const cft::EvalSet& s, cft::MetricKind kind) -> std::optional<double> {
      try {
        return cft::eval_metric(s, kind);
      } catch (const cft::Error& e) {
        if (e.code() == cft::Errc::UndefinedMetric) return std::nullopt;
        throw;
      }
    };

    auto per_cat = nlohmann::json::array();
    std::vector<std::pair<std::size_t, cft::EvalSet>> pairs;
    pairs.reserve(c_count);
    std::vector<std::size_t> known_counts(c_count, 0);
    for (std::size_t c = 0; c < c_count; ++c) {
      known_counts[c] = sets[c].labels.size();
      nlohmann::json e;
      e["category"] = c;
      e["n_known"] = known_counts[c];
      e["auc"] = opt_json(try_metric(sets[c], cft::MetricKind::Auc));
      e["ap"] = opt_json(try_metric(sets[c], cft::MetricKind::Ap));
      per_cat.push_back(std::move(e));
      pairs.emplace_back(c, std::move(sets[c]));
    }

    std::optional<std::vector<std::size_t>> sub;
    if (subset != nullptr && subset_len > 0) {
      sub.emplace();
      sub->reserve(subset_len);
      for (uint32_t i = 0; i < subset_len; ++i) sub->push_back(subset[i]);
    }

    auto mean_to_json = [&](cft::MetricKind kind) {
      cft::MeanMetric m = cft::mean_metric(pairs, kind, sub);
      nlohmann::json j;
      j["value"] = m.value;
      j["used"] = m.used;
      j["skipped"] = m.skipped;
      return j;
    };

    nlohmann::json j;
    j["schema"] = 1;
    j["command"] = "eval";
    j["n_samples"] = n;
    j["n_categories"] = c_count;
    j["per_category"] = std::move(per_cat);
    j["mean_auc"] = mean_to_json(cft::MetricKind::Auc);
    j["mean_ap"] = mean_to_json(cft::MetricKind::Ap);

    if (groups > 0) {
      std::vector<std::size_t> order(c_count);
      for (std::size_t c = 0; c < c_count; ++c) order[c] = c;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return known_counts[a] < known_counts[b];
      });
      auto group_mean = [&](const std::vector<std::pair<std::size_t, cft::EvalSet>>& gp,
                            cft::MetricKind kind) -> std::optional<double> {
        try {
          return cft::mean_metric(gp, kind).value;
        } catch (const cft::Error& e) {
          if (e.code() == cft::Errc::UndefinedMetric) return std::nullopt;
          throw;
        }
      };
      auto groups_json = nlohmann::json::array();
      for (uint32_t g = 0; g < groups; ++g) {
        std::size_t lo = static_cast<std::size_t>(g) * c_count / groups;
        std::size_t hi = static_cast<std::size_t>(g + 1) * c_count / groups;
        std::vector<std::pair<std::size_t, cft::EvalSet>> gp;
        std::vector<std::size_t> cats;
        for (std::size_t k = lo; k < hi; ++k) {
          cats.push_back(order[k]);
          gp.push_back(pairs[order[k]]);
        }
        nlohmann::json e;
        e["group"] = g;
        e["categories"] = cats;
        e["n_known_min"] = cats.empty() ? 0 : known_counts[cats.front()];
        e["n_known_max"] = cats.empty() ? 0 : known_counts[cats.back()];
        e["mean_auc"] = opt_json(group_mean(gp, cft::MetricKind::Auc));
        e["mean_ap"] = opt_json(group_mean(gp, cft::MetricKind::Ap));
        groups_json.push_back(std::move(e));
      }
      j["groups"] = std::move(groups_json);
    }

    *report_json_out = dup_string(j.dump(2));
  });
}

cft_status cft_bench(uint64_t n_samples, uint32_t dim_z, double known_fraction, uint64_t epochs,
                     uint64_t generations, uint64_t population, uint64_t seed,
                     char** report_json_out) {
  return guarded([&] {
    require(report_json_out != nullptr, "report_json_out must not be null");
    require(n_samples > 0 && dim_z > 0, "bench dimensions must be positive");
    require(known_fraction > 0.0 && known_fraction <= 1.0, "known_fraction must be in (0, 1]");
    require(population >= 1, "population must be at least 1");

    // Pseudo training set: the timed loops only care about shapes, not signal.
    const std::size_t rows = static_cast<std::size_t>(
        std::max<long long>(std::llround(known_fraction * static_cast<double>(n_samples)), 2));
    const std::size_t z = dim_z;
    cft::Mat x(rows, z);
    {
      cft::Rng rng(cft::mix64(seed, 1));
      for (double& v : x.data) v = rng.normal();
    }
    std::vector<int8_t> labels(rows);
    {
      cft::Rng rng(cft::mix64(seed, 2));
      for (auto& l : labels) l = rng.uniform01() < 0.5 ? int8_t{1} : int8_t{-1};
      labels[0] = 1;
      labels[1] = -1;  // both classes present, so AP stays defined
    }
    std::vector<double> targets(rows);
    for (std::size_t i = 0; i < rows; ++i) targets[i] = labels[i] > 0 ? 1.0 : 0.0;
    cft::LRUnit unit;
    unit.weight.resize(z);
    {
      cft::Rng rng(cft::mix64(seed, 3));
      double bound = 1.0 / std::sqrt(static_cast<double>(z));
      for (double& w : unit.weight) w = rng.uniform(-bound, bound);
    }

    cft::BPConfig bp;
    bp.optimizer = cft::Optimizer::FullBatchAdam;
    bp.learning_rate = 1e-4;
    bp.epochs = static_cast<std::size_t>(epochs);
    bp.asl = cft::ASLParams{0.0, 4.0, 0.05};

    cft::GAConfig ga = cft::ga_preset("coco-ga");
    ga.population = static_cast<std::size_t>(population);
    ga.generations = static_cast<std::size_t>(generations);
    ga.n_parents = std::max<std::size_t>(2, ga.population / 2);
    ga.elitism = std::min<std::size_t>(ga.elitism, ga.population);

    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    auto bp_result = cft::finetune_unit_bp(unit, x, targets, nullptr, bp, cft::mix64(seed, 4));
    auto t1 = clock::now();
    auto ga_result = cft::evolve(unit, x, labels, ga, cft::mix64(seed, 5));
    auto t2 = clock::now();

    double bp_seconds = std::chrono::duration<double>(t1 - t0).count();
    double ga_seconds = std::chrono::duration<double>(t2 - t1).count();

    nlohmann::json j;
    j["schema"] = 1;
    j["command"] = "bench";
    j["n"] = n_samples;
    j["dim_z"] = dim_z;
    j["known_fraction"] = known_fraction;
    j["rows"] = rows;
    j["epochs"] = epochs;
    j["generations"] = generations;
    j["population"] = population;
    j["seed"] = seed;
    j["bp_seconds_per_lr"] = bp_seconds;
    j["ga_seconds_per_lr"] = ga_seconds;
    j["bp_final_loss"] = bp_result.trajectory.empty() ? 0.0 : bp_result.trajectory.back().train_loss;
    j["ga_final_fitness"] = ga_result.fitness_final;
    *report_json_out = dup_string(j.dump(2));
  });
}

} /* extern "C" */
