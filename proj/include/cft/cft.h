/* Category-wise fine-tuning of multi-label classification heads over cached
 * feature vectors: per-category calibration by backprop on asymmetric loss or
 * by a genetic algorithm that directly maximizes AUC/AP.
 *
 * All functions return CFT_OK or an error code; cft_last_error() describes
 * the most recent failure on the calling thread. Strings returned through
 * char** out-parameters are heap-allocated; release them with
 * cft_string_free(). Handles are opaque and freed with their _free function.
 */
#ifndef CFT_H
#define CFT_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cft_status {
  CFT_OK = 0,
  CFT_ERR_PARAM = 1,
  CFT_ERR_IO = 2,
  CFT_ERR_FORMAT = 3,
  CFT_ERR_CORRUPT = 4,
  CFT_ERR_VALIDATION = 5,
  CFT_ERR_CONFIG = 6,
  CFT_ERR_UNDEFINED_METRIC = 7,
  CFT_ERR_INTERNAL = 8,
} cft_status;

const char* cft_last_error(void);
uint32_t cft_version(void);
void cft_string_free(char* s);

/* ---------- opaque handles ---------- */

typedef struct cft_cache cft_cache;   /* N x Z float32 feature vectors */
typedef struct cft_labels cft_labels; /* N x C partial labels */
typedef struct cft_head cft_head;     /* C x Z weights + C biases */

/* ---------- feature caches ---------- */

cft_status cft_cache_create(uint64_t n_samples, uint32_t dim_z, const float* data,
                            cft_cache** out);
cft_status cft_cache_load(const char* path, cft_cache** out);
cft_status cft_cache_save(const cft_cache* cache, const char* path);
uint64_t cft_cache_n_samples(const cft_cache* cache);
uint32_t cft_cache_dim_z(const cft_cache* cache);
const float* cft_cache_row(const cft_cache* cache, uint64_t sample);
void cft_cache_free(cft_cache* cache);

/* ---------- labels ----------
 * Cell values: 1 positive, -1 negative, 0 unknown, 2 uncertain. */

cft_status cft_labels_create(uint64_t n_samples, uint32_t n_categories, const int8_t* cells,
                             cft_labels** out);
cft_status cft_labels_load_csv(const char* path, cft_labels** out);
cft_status cft_labels_save_csv(const cft_labels* labels, const char* path);
uint64_t cft_labels_n_samples(const cft_labels* labels);
uint32_t cft_labels_n_categories(const cft_labels* labels);
int8_t cft_labels_cell(const cft_labels* labels, uint64_t sample, uint32_t category);

/* Keeps exactly round(keep_fraction * #known) known cells, uniformly at
 * random; the rest become unknown. stratified != 0 applies the rule per
 * category instead of over the whole matrix. */
cft_status cft_labels_drop(const cft_labels* labels, double keep_fraction, uint64_t seed,
                           int stratified, cft_labels** out);
void cft_labels_free(cft_labels* labels);

/* ---------- heads ---------- */

cft_status cft_head_create(uint32_t n_categories, uint32_t dim_z, const double* weights,
                           const double* bias, cft_head** out);
cft_status cft_head_load(const char* path, cft_head** out);
cft_status cft_head_save(const cft_head* head, const char* path);
uint32_t cft_head_n_categories(const cft_head* head);
uint32_t cft_head_dim_z(const cft_head* head);
/* probs_out must hold n_categories doubles; z must hold dim_z doubles. */
cft_status cft_head_predict(const cft_head* head, const double* z, double* probs_out);
cft_status cft_head_to_json(const cft_head* head, char** json_out);
void cft_head_free(cft_head* head);

/* ---------- configuration ---------- */

typedef enum cft_optimizer {
  CFT_OPT_GD = 0,
  CFT_OPT_ADAM = 1,
} cft_optimizer;

typedef enum cft_metric {
  CFT_METRIC_NONE = -1, /* disables early stopping */
  CFT_METRIC_AUC = 0,
  CFT_METRIC_AP = 1,
} cft_metric;

typedef struct cft_asl_params {
  double gamma_pos;
  double gamma_neg;
  double margin;
} cft_asl_params;

typedef struct cft_bp_config {
  int optimizer; /* cft_optimizer */
  double learning_rate;
  uint64_t epochs;
  cft_asl_params asl;
  int early_stop_metric; /* cft_metric */
  double adam_beta1;
  double adam_beta2;
  double adam_eps;
} cft_bp_config;

/* Full-batch GD, lr 1e-4, 500 epochs, plain BCE, no early stopping. */
void cft_bp_config_init(cft_bp_config* cfg);

typedef enum cft_crossover {
  CFT_CROSS_TWO_POINT = 0,     /* param = crossover probability */
  CFT_CROSS_SWAP_FRACTION = 1, /* param = fraction of positions taken from parent b */
} cft_crossover;

typedef struct cft_ga_config {
  uint64_t population;
  uint64_t generations;
  uint64_t n_parents;
  uint64_t elitism;
  int crossover; /* cft_crossover */
  double crossover_param;
  double mutation_prob;
  double mutation_fraction;
  double mutation_lo;
  double mutation_hi;
  int fitness_metric; /* cft_metric, AUC or AP */
} cft_ga_config;

/* Named presets: "chexpert-ga", "coco-ga". */
cft_status cft_ga_config_preset(const char* name, cft_ga_config* out);

typedef enum cft_uncertain_kind {
  CFT_UNCERTAIN_IGNORE = 0,
  CFT_UNCERTAIN_ONES = 1,
  CFT_UNCERTAIN_ZEROS = 2,
  CFT_UNCERTAIN_ONES_LSR = 3, /* uniform draw in [lsr_lo, lsr_hi] */
} cft_uncertain_kind;

typedef struct cft_uncertain_policy {
  int kind; /* cft_uncertain_kind */
  double lsr_lo;
  double lsr_hi;
  /* Optional per-category override: entries are cft_uncertain_kind values or
   * -1 for "no rule". NULL applies `kind` uniformly. A category holding
   * uncertain cells but no rule is a configuration error. */
  const int* per_category;
  uint32_t per_category_len;
} cft_uncertain_policy;

/* Ignore, with the conventional LSR range [0.55, 0.85]. */
void cft_uncertain_policy_init(cft_uncertain_policy* policy);

/* ---------- synthetic data ---------- */

typedef struct cft_synth_spec {
  uint64_t n_samples;
  uint32_t dim_z;
  uint32_t n_categories;
  double positive_rate;
  double label_noise;
  uint64_t seed;
  double teacher_scale;
} cft_synth_spec;

/* rate 0.1, noise 0, teacher_scale 6; dimensions must be set by the caller. */
void cft_synth_spec_init(cft_synth_spec* spec);

cft_status cft_synth_generate(const cft_synth_spec* spec, cft_cache** cache_out,
                              cft_labels** labels_out, cft_head** oracle_head_out);

/* ---------- pipeline ----------
 * Every run function is deterministic given its inputs and seed. Report
 * strings are JSON documents with "schema": 1. report_json_out may be NULL
 * when the caller does not want the report. */

/* Assume-negative training of a fresh head: unknown cells become negative
 * targets, uncertain cells follow the policy. */
cft_status cft_train_head(const cft_cache* cache, const cft_labels* labels,
                          const cft_uncertain_policy* policy, const cft_bp_config* config,
                          uint64_t seed, cft_head** head_out, char** report_json_out);

/* Category-wise fine-tuning, backprop variant. valid_cache/valid_labels may
 * both be NULL (then no before/after metrics and no early stopping). greedy
 * != 0 selects the best uncertain policy per category on the validation
 * metric. jobs is the worker thread count; results are independent of it. */
cft_status cft_run_bp(const cft_head* head, const cft_cache* cache, const cft_labels* labels,
                      const cft_cache* valid_cache, const cft_labels* valid_labels,
                      const cft_uncertain_policy* policy, const cft_bp_config* config,
                      uint64_t seed, uint32_t jobs, int greedy, cft_head** head_out,
                      char** report_json_out);

/* Category-wise fine-tuning, genetic-algorithm variant. */
cft_status cft_run_ga(const cft_head* head, const cft_cache* cache, const cft_labels* labels,
                      const cft_cache* valid_cache, const cft_labels* valid_labels,
                      const cft_uncertain_policy* policy, const cft_ga_config* config,
                      uint64_t seed, uint32_t jobs, int greedy, cft_head** head_out,
                      char** report_json_out);

/* Whole-layer joint fine-tuning baseline with a single early stop at the best
 * mean validation metric. */
cft_status cft_run_joint(const cft_head* head, const cft_cache* cache, const cft_labels* labels,
                         const cft_cache* valid_cache, const cft_labels* valid_labels,
                         const cft_uncertain_policy* policy, const cft_bp_config* config,
                         uint64_t seed, cft_head** head_out, char** report_json_out);

/* AUC and AP per category over the known labels, plus means. subset (may be
 * NULL) restricts the means to the listed categories and requires each to be
 * defined. groups > 0 additionally reports per-group means with categories
 * sorted ascending by known-label count and split into `groups` equal
 * slices. */
cft_status cft_evaluate(const cft_head* head, const cft_cache* cache, const cft_labels* labels,
                        const uint32_t* subset, uint32_t subset_len, uint32_t groups,
                        char** report_json_out);

/* Per-LR wall-clock timing of both variants on pseudo training samples:
 * round(known_fraction * n_samples) feature rows with balanced random +-1
 * labels, one backprop fine-tune of `epochs` epochs and one GA run of
 * `generations` generations with `population` individuals. */
cft_status cft_bench(uint64_t n_samples, uint32_t dim_z, double known_fraction, uint64_t epochs,
                     uint64_t generations, uint64_t population, uint64_t seed,
                     char** report_json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CFT_H */
