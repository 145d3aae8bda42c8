// Command-line pipeline driver. Talks to the library exclusively through the
// C API; every command writes a machine-readable JSON report (--out) that
// embeds its own argument set, and prints a short table to stdout.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cft/cft.h"

namespace {

using nlohmann::json;

void check(cft_status status) {
  if (status == CFT_OK) return;
  std::fprintf(stderr, "error: %s\n", cft_last_error());
  std::exit(1);
}

[[noreturn]] void die_msg(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  std::exit(1);
}

struct CacheDeleter {
  void operator()(cft_cache* p) const { cft_cache_free(p); }
};
struct LabelsDeleter {
  void operator()(cft_labels* p) const { cft_labels_free(p); }
};
struct HeadDeleter {
  void operator()(cft_head* p) const { cft_head_free(p); }
};
using CachePtr = std::unique_ptr<cft_cache, CacheDeleter>;
using LabelsPtr = std::unique_ptr<cft_labels, LabelsDeleter>;
using HeadPtr = std::unique_ptr<cft_head, HeadDeleter>;

CachePtr load_cache(const std::string& path) {
  cft_cache* p = nullptr;
  check(cft_cache_load(path.c_str(), &p));
  return CachePtr(p);
}

LabelsPtr load_labels(const std::string& path) {
  cft_labels* p = nullptr;
  check(cft_labels_load_csv(path.c_str(), &p));
  return LabelsPtr(p);
}

HeadPtr load_head(const std::string& path) {
  cft_head* p = nullptr;
  check(cft_head_load(path.c_str(), &p));
  return HeadPtr(p);
}

// Takes ownership of the C string.
json take_report(char* s) {
  json j = json::parse(s);
  cft_string_free(s);
  return j;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) die_msg("cannot open " + path + " for writing");
  out << content;
  if (!out) die_msg("failed writing " + path);
}

void emit_report(json& report, const json& args, const std::string& out_path) {
  report["args"] = args;
  if (!out_path.empty()) write_text(out_path, report.dump(2) + "\n");
}

std::string fmt_metric(const json& v) {
  if (v.is_null()) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v.get<double>());
  return buf;
}

std::string fmt_delta(const json& before, const json& after) {
  if (before.is_null() || after.is_null()) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.6f", after.get<double>() - before.get<double>());
  return buf;
}

int policy_kind_from_name(const std::string& name) {
  if (name == "ignore") return CFT_UNCERTAIN_IGNORE;
  if (name == "ones") return CFT_UNCERTAIN_ONES;
  if (name == "zeros") return CFT_UNCERTAIN_ZEROS;
  if (name == "ones-lsr") return CFT_UNCERTAIN_ONES_LSR;
  die_msg("unknown uncertain policy " + name);
}

/* ---------- synth ---------- */

struct SynthOpts {
  uint64_t n = 0;
  uint64_t n_valid = 0;
  uint32_t z = 0;
  uint32_t c = 0;
  double rate = 0.1;
  double noise = 0.0;
  uint64_t seed = 0;
  double teacher_scale = 6.0;
  std::string out_cache;
  std::string out_labels;
  std::string out_valid_cache;
  std::string out_valid_labels;
  std::string out_oracle;
  std::string out_report;
};

// Copies rows [lo, hi) of a cache/label pair into fresh handles.
std::pair<CachePtr, LabelsPtr> slice_rows(const cft_cache* cache, const cft_labels* labels,
                                          uint64_t lo, uint64_t hi) {
  uint32_t z = cft_cache_dim_z(cache);
  uint32_t c = cft_labels_n_categories(labels);
  std::vector<float> feat(static_cast<std::size_t>(hi - lo) * z);
  std::vector<int8_t> cells(static_cast<std::size_t>(hi - lo) * c);
  for (uint64_t i = lo; i < hi; ++i) {
    const float* row = cft_cache_row(cache, i);
    std::copy(row, row + z, feat.begin() + static_cast<std::size_t>(i - lo) * z);
    for (uint32_t j = 0; j < c; ++j)
      cells[static_cast<std::size_t>(i - lo) * c + j] = cft_labels_cell(labels, i, j);
  }
  cft_cache* out_cache = nullptr;
  check(cft_cache_create(hi - lo, z, feat.data(), &out_cache));
  cft_labels* out_labels = nullptr;
  check(cft_labels_create(hi - lo, c, cells.data(), &out_labels));
  return {CachePtr(out_cache), LabelsPtr(out_labels)};
}

void run_synth(const SynthOpts& o) {
  if ((o.n_valid > 0) != (!o.out_valid_cache.empty() && !o.out_valid_labels.empty()))
    die_msg("--n-valid requires --out-valid-cache and --out-valid-labels (and vice versa)");

  cft_synth_spec spec;
  cft_synth_spec_init(&spec);
  spec.n_samples = o.n + o.n_valid;
  spec.dim_z = o.z;
  spec.n_categories = o.c;
  spec.positive_rate = o.rate;
  spec.label_noise = o.noise;
  spec.seed = o.seed;
  spec.teacher_scale = o.teacher_scale;

  cft_cache* cache = nullptr;
  cft_labels* labels = nullptr;
  cft_head* oracle = nullptr;
  check(cft_synth_generate(&spec, &cache, &labels, &oracle));
  CachePtr cache_p(cache);
  LabelsPtr labels_p(labels);
  HeadPtr oracle_p(oracle);

  if (o.n_valid > 0) {
    auto [train_cache, train_labels] = slice_rows(cache, labels, 0, o.n);
    auto [valid_cache, valid_labels] = slice_rows(cache, labels, o.n, o.n + o.n_valid);
    check(cft_cache_save(train_cache.get(), o.out_cache.c_str()));
    check(cft_labels_save_csv(train_labels.get(), o.out_labels.c_str()));
    check(cft_cache_save(valid_cache.get(), o.out_valid_cache.c_str()));
    check(cft_labels_save_csv(valid_labels.get(), o.out_valid_labels.c_str()));
  } else {
    check(cft_cache_save(cache, o.out_cache.c_str()));
    check(cft_labels_save_csv(labels, o.out_labels.c_str()));
  }
  if (!o.out_oracle.empty()) check(cft_head_save(oracle, o.out_oracle.c_str()));

  uint64_t positives = 0;
  uint64_t total = spec.n_samples;
  for (uint64_t i = 0; i < total; ++i)
    for (uint32_t c = 0; c < o.c; ++c)
      if (cft_labels_cell(labels, i, c) == 1) ++positives;
  double frac =
      total && o.c ? static_cast<double>(positives) / (static_cast<double>(total) * o.c) : 0.0;

  std::printf("synth: %llu samples x %u features, %u categories\n",
              static_cast<unsigned long long>(total), o.z, o.c);
  std::printf("  positive cells: %llu (%.4f of all cells, target %.4f)\n",
              static_cast<unsigned long long>(positives), frac, o.rate);
  std::printf("  cache  -> %s\n", o.out_cache.c_str());
  std::printf("  labels -> %s\n", o.out_labels.c_str());
  if (o.n_valid > 0) {
    std::printf("  valid cache  (%llu rows) -> %s\n",
                static_cast<unsigned long long>(o.n_valid), o.out_valid_cache.c_str());
    std::printf("  valid labels -> %s\n", o.out_valid_labels.c_str());
  }
  if (!o.out_oracle.empty()) std::printf("  oracle -> %s\n", o.out_oracle.c_str());

  json report;
  report["schema"] = 1;
  report["command"] = "synth";
  report["n_positive_cells"] = positives;
  report["positive_fraction"] = frac;
  json args{{"n", o.n},       {"n_valid", o.n_valid},
            {"z", o.z},       {"c", o.c},
            {"rate", o.rate}, {"noise", o.noise},
            {"seed", o.seed}, {"teacher_scale", o.teacher_scale},
            {"out_cache", o.out_cache}, {"out_labels", o.out_labels},
            {"out_valid_cache", o.out_valid_cache}, {"out_valid_labels", o.out_valid_labels},
            {"out_oracle", o.out_oracle}};
  emit_report(report, args, o.out_report);
}

/* ---------- drop ---------- */

struct DropOpts {
  std::string labels;
  double keep = 1.0;
  uint64_t seed = 0;
  bool stratified = false;
  std::string out_labels;
  std::string out_report;
};

uint64_t count_known(const cft_labels* labels) {
  uint64_t n = cft_labels_n_samples(labels);
  uint32_t c = cft_labels_n_categories(labels);
  uint64_t known = 0;
  for (uint64_t i = 0; i < n; ++i)
    for (uint32_t j = 0; j < c; ++j) {
      int8_t v = cft_labels_cell(labels, i, j);
      if (v == 1 || v == -1) ++known;
    }
  return known;
}

void run_drop(const DropOpts& o) {
  LabelsPtr in = load_labels(o.labels);
  cft_labels* dropped = nullptr;
  check(cft_labels_drop(in.get(), o.keep, o.seed, o.stratified ? 1 : 0, &dropped));
  LabelsPtr out(dropped);
  check(cft_labels_save_csv(dropped, o.out_labels.c_str()));

  uint64_t before = count_known(in.get());
  uint64_t after = count_known(dropped);
  std::printf("drop: kept %llu of %llu known cells (keep %.4f%s)\n",
              static_cast<unsigned long long>(after), static_cast<unsigned long long>(before),
              o.keep, o.stratified ? ", stratified" : "");
  std::printf("  labels -> %s\n", o.out_labels.c_str());

  json report;
  report["schema"] = 1;
  report["command"] = "drop";
  report["known_before"] = before;
  report["known_after"] = after;
  json args{{"labels", o.labels},   {"keep", o.keep},
            {"seed", o.seed},       {"stratified", o.stratified},
            {"out_labels", o.out_labels}};
  emit_report(report, args, o.out_report);
}

/* ---------- train ---------- */

struct TrainOpts {
  std::string cache;
  std::string labels;
  std::string uncertain = "ignore";
  double lsr_lo = 0.55;
  double lsr_hi = 0.85;
  std::string optimizer = "adam";
  double lr = 1e-4;
  uint64_t epochs = 500;
  double gamma_pos = 0.0;
  double gamma_neg = 0.0;
  double margin = 0.0;
  uint64_t seed = 0;
  std::string out_head;
  std::string out_report;
};

cft_bp_config bp_config_from(const std::string& optimizer, double lr, uint64_t epochs,
                             double gamma_pos, double gamma_neg, double margin,
                             int early_stop_metric) {
  cft_bp_config cfg;
  cft_bp_config_init(&cfg);
  if (optimizer == "gd") {
    cfg.optimizer = CFT_OPT_GD;
  } else if (optimizer == "adam") {
    cfg.optimizer = CFT_OPT_ADAM;
  } else {
    die_msg("unknown optimizer " + optimizer);
  }
  cfg.learning_rate = lr;
  cfg.epochs = epochs;
  cfg.asl = cft_asl_params{gamma_pos, gamma_neg, margin};
  cfg.early_stop_metric = early_stop_metric;
  return cfg;
}

void run_train(const TrainOpts& o) {
  CachePtr cache = load_cache(o.cache);
  LabelsPtr labels = load_labels(o.labels);

  cft_uncertain_policy policy;
  cft_uncertain_policy_init(&policy);
  policy.kind = policy_kind_from_name(o.uncertain);
  policy.lsr_lo = o.lsr_lo;
  policy.lsr_hi = o.lsr_hi;

  cft_bp_config cfg = bp_config_from(o.optimizer, o.lr, o.epochs, o.gamma_pos, o.gamma_neg,
                                     o.margin, CFT_METRIC_NONE);

  cft_head* head = nullptr;
  char* report_str = nullptr;
  check(cft_train_head(cache.get(), labels.get(), &policy, &cfg, o.seed, &head, &report_str));
  HeadPtr head_p(head);
  json report = take_report(report_str);
  check(cft_head_save(head, o.out_head.c_str()));

  std::printf("train: %s cells over %s epochs, loss %s -> %s\n",
              report["n_cells"].dump().c_str(), report["epochs"].dump().c_str(),
              fmt_metric(report["loss_initial"]).c_str(),
              fmt_metric(report["loss_final"]).c_str());
  std::printf("  head -> %s\n", o.out_head.c_str());

  json args{{"cache", o.cache},         {"labels", o.labels},
            {"uncertain", o.uncertain}, {"lsr_lo", o.lsr_lo},
            {"lsr_hi", o.lsr_hi},       {"optimizer", o.optimizer},
            {"lr", o.lr},               {"epochs", o.epochs},
            {"gamma_pos", o.gamma_pos}, {"gamma_neg", o.gamma_neg},
            {"margin", o.margin},       {"seed", o.seed},
            {"out_head", o.out_head}};
  emit_report(report, args, o.out_report);
}

/* ---------- cft ---------- */

struct CftOpts {
  std::string head;
  std::string cache;
  std::string labels;
  std::string valid_cache;
  std::string valid_labels;
  std::string variant = "bp";
  std::string metric = "auc";
  std::string uncertain = "ignore";
  double lsr_lo = 0.55;
  double lsr_hi = 0.85;
  // bp
  std::string optimizer = "adam";
  double lr = 1e-4;
  uint64_t epochs = 500;
  double gamma_pos = 0.0;
  double gamma_neg = 4.0;
  double margin = 0.05;
  std::string early_stop = "metric";
  // ga
  std::string preset;
  uint64_t pop = 0;
  uint64_t generations = 0;
  uint64_t parents = 0;
  int64_t elitism = -1;
  std::string crossover;
  double crossover_param = -1.0;
  double mut_prob = -1.0;
  double mut_frac = -1.0;
  double mut_lo = 0.0;
  double mut_hi = 0.0;
  bool mut_range_set = false;
  // run
  uint64_t seed = 0;
  uint32_t jobs = 1;
  std::string out_head;
  std::string out_report;
  std::string history_csv;
};

int metric_from_name(const std::string& name) {
  if (name == "auc") return CFT_METRIC_AUC;
  if (name == "ap") return CFT_METRIC_AP;
  die_msg("unknown metric " + name);
}

void print_cft_table(const json& report) {
  const auto& cats = report["categories"];
  std::printf("%-9s %-9s %8s %10s %10s %10s\n", "category", "policy", "n_train", "before",
              "after", "delta");
  std::size_t shown = 0;
  for (const auto& c : cats) {
    if (shown == 24 && cats.size() > 25) {
      std::printf("  ... (%zu categories total)\n", cats.size());
      break;
    }
    std::printf("%-9llu %-9s %8llu %10s %10s %10s%s\n",
                c["category"].get<unsigned long long>(),
                c["policy"].get<std::string>().c_str(),
                c["n_train"].get<unsigned long long>(),
                fmt_metric(c["metric_before"]).c_str(), fmt_metric(c["metric_after"]).c_str(),
                fmt_delta(c["metric_before"], c["metric_after"]).c_str(),
                c["skipped"].get<bool>() ? "  (skipped)" : "");
    ++shown;
  }
  std::printf("mean %s: %s -> %s\n", report["metric"].get<std::string>().c_str(),
              fmt_metric(report["mean_before"]).c_str(),
              fmt_metric(report["mean_after"]).c_str());
}

void write_history_csv(const json& report, const std::string& path) {
  std::string csv = "category,step,value\n";
  bool ga = report["variant"] == "ga";
  for (const auto& c : report["categories"]) {
    const json& curve = ga ? c["history"] : c["valid_curve"];
    unsigned long long cat = c["category"].get<unsigned long long>();
    std::size_t step = 0;
    for (const auto& v : curve) {
      csv += std::to_string(cat);
      csv += ',';
      csv += std::to_string(step++);
      csv += ',';
      csv += v.is_null() ? "nan" : std::to_string(v.get<double>());
      csv += '\n';
    }
  }
  write_text(path, csv);
}

void run_cft(const CftOpts& o, const CLI::App* sub) {
  if (o.valid_cache.empty() != o.valid_labels.empty())
    die_msg("--valid-cache and --valid-labels must be given together");

  HeadPtr head = load_head(o.head);
  CachePtr cache = load_cache(o.cache);
  LabelsPtr labels = load_labels(o.labels);
  CachePtr valid_cache;
  LabelsPtr valid_labels;
  if (!o.valid_cache.empty()) {
    valid_cache = load_cache(o.valid_cache);
    valid_labels = load_labels(o.valid_labels);
  }

  bool greedy = o.uncertain == "greedy";
  cft_uncertain_policy policy;
  cft_uncertain_policy_init(&policy);
  policy.kind = greedy ? CFT_UNCERTAIN_IGNORE : policy_kind_from_name(o.uncertain);
  policy.lsr_lo = o.lsr_lo;
  policy.lsr_hi = o.lsr_hi;

  int metric = metric_from_name(o.metric);

  cft_head* tuned = nullptr;
  char* report_str = nullptr;
  if (o.variant == "bp" || o.variant == "joint") {
    int early_stop = CFT_METRIC_NONE;
    if (o.early_stop == "metric") {
      early_stop = metric;
    } else if (o.early_stop == "auc") {
      early_stop = CFT_METRIC_AUC;
    } else if (o.early_stop == "ap") {
      early_stop = CFT_METRIC_AP;
    } else if (o.early_stop != "none") {
      die_msg("unknown early-stop choice " + o.early_stop);
    }
    cft_bp_config cfg = bp_config_from(o.optimizer, o.lr, o.epochs, o.gamma_pos, o.gamma_neg,
                                       o.margin, early_stop);
    if (o.variant == "bp") {
      check(cft_run_bp(head.get(), cache.get(), labels.get(), valid_cache.get(),
                       valid_labels.get(), &policy, &cfg, o.seed, o.jobs, greedy ? 1 : 0, &tuned,
                       &report_str));
    } else {
      if (greedy) die_msg("--uncertain greedy requires --variant bp or ga");
      check(cft_run_joint(head.get(), cache.get(), labels.get(), valid_cache.get(),
                          valid_labels.get(), &policy, &cfg, o.seed, &tuned, &report_str));
    }
  } else if (o.variant == "ga") {
    std::string preset = o.preset;
    if (preset.empty()) preset = o.metric == "ap" ? "coco-ga" : "chexpert-ga";
    cft_ga_config cfg;
    check(cft_ga_config_preset(preset.c_str(), &cfg));
    cfg.fitness_metric = metric;
    if (sub->count("--pop")) cfg.population = o.pop;
    if (sub->count("--generations")) cfg.generations = o.generations;
    if (sub->count("--parents")) cfg.n_parents = o.parents;
    if (sub->count("--elitism")) cfg.elitism = static_cast<uint64_t>(o.elitism);
    if (sub->count("--crossover")) {
      if (o.crossover == "two-point") {
        cfg.crossover = CFT_CROSS_TWO_POINT;
      } else if (o.crossover == "swap-fraction") {
        cfg.crossover = CFT_CROSS_SWAP_FRACTION;
      } else {
        die_msg("unknown crossover " + o.crossover);
      }
    }
    if (sub->count("--crossover-param")) cfg.crossover_param = o.crossover_param;
    if (sub->count("--mut-prob")) cfg.mutation_prob = o.mut_prob;
    if (sub->count("--mut-frac")) cfg.mutation_fraction = o.mut_frac;
    if (sub->count("--mut-lo")) cfg.mutation_lo = o.mut_lo;
    if (sub->count("--mut-hi")) cfg.mutation_hi = o.mut_hi;
    check(cft_run_ga(head.get(), cache.get(), labels.get(), valid_cache.get(),
                     valid_labels.get(), &policy, &cfg, o.seed, o.jobs, greedy ? 1 : 0, &tuned,
                     &report_str));
  } else {
    die_msg("unknown variant " + o.variant);
  }
  HeadPtr tuned_p(tuned);
  json report = take_report(report_str);
  check(cft_head_save(tuned, o.out_head.c_str()));

  if (o.variant == "joint") {
    std::printf("joint: %s cells, best epoch %s of %s\n", report["n_cells"].dump().c_str(),
                report["best_epoch"].dump().c_str(), report["epochs_run"].dump().c_str());
  } else {
    print_cft_table(report);
  }
  std::printf("  head -> %s\n", o.out_head.c_str());

  if (!o.history_csv.empty()) {
    if (o.variant == "joint") {
      std::string csv = "step,value\n";
      std::size_t step = 0;
      for (const auto& v : report["valid_mean"]) {
        csv += std::to_string(step++);
        csv += ',';
        csv += v.is_null() ? "nan" : std::to_string(v.get<double>());
        csv += '\n';
      }
      write_text(o.history_csv, csv);
    } else {
      write_history_csv(report, o.history_csv);
    }
  }

  json args{{"head", o.head},
            {"cache", o.cache},
            {"labels", o.labels},
            {"valid_cache", o.valid_cache},
            {"valid_labels", o.valid_labels},
            {"variant", o.variant},
            {"metric", o.metric},
            {"uncertain", o.uncertain},
            {"lsr_lo", o.lsr_lo},
            {"lsr_hi", o.lsr_hi},
            {"optimizer", o.optimizer},
            {"lr", o.lr},
            {"epochs", o.epochs},
            {"gamma_pos", o.gamma_pos},
            {"gamma_neg", o.gamma_neg},
            {"margin", o.margin},
            {"early_stop", o.early_stop},
            {"preset", o.preset},
            {"seed", o.seed},
            {"jobs", o.jobs},
            {"out_head", o.out_head}};
  if (o.variant == "ga") {
    if (sub->count("--pop")) args["pop"] = o.pop;
    if (sub->count("--generations")) args["generations"] = o.generations;
    if (sub->count("--parents")) args["parents"] = o.parents;
    if (sub->count("--elitism")) args["elitism"] = o.elitism;
    if (sub->count("--crossover")) args["crossover"] = o.crossover;
    if (sub->count("--crossover-param")) args["crossover_param"] = o.crossover_param;
    if (sub->count("--mut-prob")) args["mut_prob"] = o.mut_prob;
    if (sub->count("--mut-frac")) args["mut_frac"] = o.mut_frac;
    if (sub->count("--mut-lo")) args["mut_lo"] = o.mut_lo;
    if (sub->count("--mut-hi")) args["mut_hi"] = o.mut_hi;
  }
  emit_report(report, args, o.out_report);
}

/* ---------- eval ---------- */

struct EvalOpts {
  std::string head;
  std::string cache;
  std::string labels;
  std::vector<uint32_t> subset;
  uint32_t groups = 0;
  std::string out_report;
};

void run_eval(const EvalOpts& o) {
  HeadPtr head = load_head(o.head);
  CachePtr cache = load_cache(o.cache);
  LabelsPtr labels = load_labels(o.labels);

  char* report_str = nullptr;
  check(cft_evaluate(head.get(), cache.get(), labels.get(),
                     o.subset.empty() ? nullptr : o.subset.data(),
                     static_cast<uint32_t>(o.subset.size()), o.groups, &report_str));
  json report = take_report(report_str);

  const auto& cats = report["per_category"];
  std::printf("%-9s %8s %10s %10s\n", "category", "n_known", "auc", "ap");
  std::size_t shown = 0;
  for (const auto& c : cats) {
    if (shown == 24 && cats.size() > 25) {
      std::printf("  ... (%zu categories total)\n", cats.size());
      break;
    }
    std::printf("%-9llu %8llu %10s %10s\n", c["category"].get<unsigned long long>(),
                c["n_known"].get<unsigned long long>(), fmt_metric(c["auc"]).c_str(),
                fmt_metric(c["ap"]).c_str());
    ++shown;
  }
  auto print_mean = [](const char* name, const json& m) {
    std::printf("mean %-4s %10s  (used %zu, skipped %zu)\n", name,
                fmt_metric(m["value"]).c_str(), m["used"].size(), m["skipped"].size());
  };
  print_mean("auc", report["mean_auc"]);
  print_mean("ap", report["mean_ap"]);
  if (report.contains("groups")) {
    std::printf("%-7s %12s %12s %10s %10s\n", "group", "n_known_min", "n_known_max", "mean_auc",
                "mean_ap");
    for (const auto& g : report["groups"]) {
      std::printf("%-7llu %12llu %12llu %10s %10s\n", g["group"].get<unsigned long long>(),
                  g["n_known_min"].get<unsigned long long>(),
                  g["n_known_max"].get<unsigned long long>(), fmt_metric(g["mean_auc"]).c_str(),
                  fmt_metric(g["mean_ap"]).c_str());
    }
  }

  json args{{"head", o.head},     {"cache", o.cache},   {"labels", o.labels},
            {"subset", o.subset}, {"groups", o.groups}};
  emit_report(report, args, o.out_report);
}

/* ---------- bench ---------- */

struct BenchOpts {
  uint64_t n = 300000;
  uint32_t z = 512;
  double known_frac = 0.1;
  uint64_t epochs = 1000;
  uint64_t generations = 1000;
  uint64_t pop = 50;
  uint64_t seed = 0;
  std::string out_report;
};

void run_bench(const BenchOpts& o) {
  char* report_str = nullptr;
  check(cft_bench(o.n, o.z, o.known_frac, o.epochs, o.generations, o.pop, o.seed, &report_str));
  json report = take_report(report_str);

  std::printf("bench: %s rows x %u features (known fraction %.3f of %llu)\n",
              report["rows"].dump().c_str(), o.z, o.known_frac,
              static_cast<unsigned long long>(o.n));
  std::printf("  bp  per-LR seconds: %.3f  (%llu epochs)\n",
              report["bp_seconds_per_lr"].get<double>(),
              static_cast<unsigned long long>(o.epochs));
  std::printf("  ga  per-LR seconds: %.3f  (%llu generations, population %llu)\n",
              report["ga_seconds_per_lr"].get<double>(),
              static_cast<unsigned long long>(o.generations),
              static_cast<unsigned long long>(o.pop));

  json args{{"n", o.n},           {"z", o.z},
            {"known_frac", o.known_frac}, {"epochs", o.epochs},
            {"generations", o.generations}, {"pop", o.pop},
            {"seed", o.seed}};
  emit_report(report, args, o.out_report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"category-wise fine-tuning of classification heads over cached features"};
  app.set_version_flag("--version", "cft " + std::to_string(cft_version()));
  app.require_subcommand(1);

  SynthOpts synth;
  auto* s_synth = app.add_subcommand("synth", "generate a synthetic dataset with a known teacher");
  s_synth->add_option("--n", synth.n, "number of samples")->required();
  s_synth->add_option("--n-valid", synth.n_valid,
                      "extra same-teacher samples written as a validation split");
  s_synth->add_option("--z", synth.z, "feature dimension")->required();
  s_synth->add_option("--c", synth.c, "number of categories")->required();
  s_synth->add_option("--rate", synth.rate, "target positive rate");
  s_synth->add_option("--noise", synth.noise, "fraction of label cells flipped");
  s_synth->add_option("--seed", synth.seed, "random seed");
  s_synth->add_option("--teacher-scale", synth.teacher_scale, "teacher weight norm");
  s_synth->add_option("--out-cache", synth.out_cache, "feature cache output path")->required();
  s_synth->add_option("--out-labels", synth.out_labels, "label CSV output path")->required();
  s_synth->add_option("--out-valid-cache", synth.out_valid_cache,
                      "validation feature cache output path");
  s_synth->add_option("--out-valid-labels", synth.out_valid_labels,
                      "validation label CSV output path");
  s_synth->add_option("--out-oracle", synth.out_oracle, "teacher head output path");
  s_synth->add_option("--out", synth.out_report, "JSON report output path");
  s_synth->callback([&] { run_synth(synth); });

  DropOpts drop;
  auto* s_drop = app.add_subcommand("drop", "drop known labels down to a kept fraction");
  s_drop->add_option("--labels", drop.labels, "input label CSV")->required();
  s_drop->add_option("--keep", drop.keep, "fraction of known cells to keep")->required();
  s_drop->add_option("--seed", drop.seed, "random seed");
  s_drop->add_flag("--stratified", drop.stratified, "apply the kept fraction per category");
  s_drop->add_option("--out-labels", drop.out_labels, "output label CSV")->required();
  s_drop->add_option("--out", drop.out_report, "JSON report output path");
  s_drop->callback([&] { run_drop(drop); });

  TrainOpts train;
  auto* s_train = app.add_subcommand("train", "train a fresh head, unknowns assumed negative");
  s_train->add_option("--cache", train.cache, "feature cache")->required();
  s_train->add_option("--labels", train.labels, "label CSV")->required();
  s_train->add_option("--uncertain", train.uncertain, "uncertain-label policy")
      ->check(CLI::IsMember({"ignore", "ones", "zeros", "ones-lsr"}));
  s_train->add_option("--lsr-lo", train.lsr_lo, "ones-lsr lower bound");
  s_train->add_option("--lsr-hi", train.lsr_hi, "ones-lsr upper bound");
  s_train->add_option("--optimizer", train.optimizer, "gd or adam")
      ->check(CLI::IsMember({"gd", "adam"}));
  s_train->add_option("--lr", train.lr, "learning rate");
  s_train->add_option("--epochs", train.epochs, "full-batch epochs");
  s_train->add_option("--gamma-pos", train.gamma_pos, "asymmetric loss gamma+");
  s_train->add_option("--gamma-neg", train.gamma_neg, "asymmetric loss gamma-");
  s_train->add_option("--margin", train.margin, "asymmetric loss probability margin");
  s_train->add_option("--seed", train.seed, "random seed");
  s_train->add_option("--out-head", train.out_head, "output head path")->required();
  s_train->add_option("--out", train.out_report, "JSON report output path");
  s_train->callback([&] { run_train(train); });

  CftOpts cft;
  auto* s_cft = app.add_subcommand("cft", "category-wise fine-tuning of an existing head");
  s_cft->add_option("--head", cft.head, "input head")->required();
  s_cft->add_option("--cache", cft.cache, "training feature cache")->required();
  s_cft->add_option("--labels", cft.labels, "training label CSV")->required();
  s_cft->add_option("--valid-cache", cft.valid_cache, "validation feature cache");
  s_cft->add_option("--valid-labels", cft.valid_labels, "validation label CSV");
  s_cft->add_option("--variant", cft.variant, "bp, ga, or joint")
      ->check(CLI::IsMember({"bp", "ga", "joint"}));
  s_cft->add_option("--metric", cft.metric, "auc or ap")->check(CLI::IsMember({"auc", "ap"}));
  s_cft->add_option("--uncertain", cft.uncertain, "uncertain-label policy, or greedy search")
      ->check(CLI::IsMember({"ignore", "ones", "zeros", "ones-lsr", "greedy"}));
  s_cft->add_option("--lsr-lo", cft.lsr_lo, "ones-lsr lower bound");
  s_cft->add_option("--lsr-hi", cft.lsr_hi, "ones-lsr upper bound");
  s_cft->add_option("--optimizer", cft.optimizer, "bp: gd or adam")
      ->check(CLI::IsMember({"gd", "adam"}));
  s_cft->add_option("--lr", cft.lr, "bp: learning rate");
  s_cft->add_option("--epochs", cft.epochs, "bp: full-batch epochs");
  s_cft->add_option("--gamma-pos", cft.gamma_pos, "bp: asymmetric loss gamma+");
  s_cft->add_option("--gamma-neg", cft.gamma_neg, "bp: asymmetric loss gamma-");
  s_cft->add_option("--margin", cft.margin, "bp: asymmetric loss probability margin");
  s_cft->add_option("--early-stop", cft.early_stop, "bp: metric, auc, ap, or none")
      ->check(CLI::IsMember({"metric", "auc", "ap", "none"}));
  s_cft->add_option("--preset", cft.preset, "ga: chexpert-ga or coco-ga")
      ->check(CLI::IsMember({"chexpert-ga", "coco-ga"}));
  s_cft->add_option("--pop", cft.pop, "ga: population size");
  s_cft->add_option("--generations", cft.generations, "ga: generations");
  s_cft->add_option("--parents", cft.parents, "ga: parents per generation");
  s_cft->add_option("--elitism", cft.elitism, "ga: elites kept per generation");
  s_cft->add_option("--crossover", cft.crossover, "ga: two-point or swap-fraction")
      ->check(CLI::IsMember({"two-point", "swap-fraction"}));
  s_cft->add_option("--crossover-param", cft.crossover_param, "ga: crossover parameter");
  s_cft->add_option("--mut-prob", cft.mut_prob, "ga: mutation probability");
  s_cft->add_option("--mut-frac", cft.mut_frac, "ga: mutated fraction of positions");
  s_cft->add_option("--mut-lo", cft.mut_lo, "ga: mutation delta lower bound");
  s_cft->add_option("--mut-hi", cft.mut_hi, "ga: mutation delta upper bound");
  s_cft->add_option("--seed", cft.seed, "random seed");
  s_cft->add_option("--jobs", cft.jobs, "worker threads (result independent of it)");
  s_cft->add_option("--out-head", cft.out_head, "output head path")->required();
  s_cft->add_option("--out", cft.out_report, "JSON report output path");
  s_cft->add_option("--history-csv", cft.history_csv, "per-category step curves as CSV");
  s_cft->callback([&] { run_cft(cft, s_cft); });

  EvalOpts eval;
  auto* s_eval = app.add_subcommand("eval", "per-category AUC/AP of a head over known labels");
  s_eval->add_option("--head", eval.head, "head to evaluate")->required();
  s_eval->add_option("--cache", eval.cache, "feature cache")->required();
  s_eval->add_option("--labels", eval.labels, "label CSV")->required();
  s_eval->add_option("--subset", eval.subset, "categories for the means, e.g. 0,3,7")
      ->delimiter(',');
  s_eval->add_option("--groups", eval.groups, "per-group means over K known-count groups");
  s_eval->add_option("--out", eval.out_report, "JSON report output path");
  s_eval->callback([&] { run_eval(eval); });

  BenchOpts bench;
  auto* s_bench = app.add_subcommand("bench", "per-LR wall-clock timing of bp vs ga");
  s_bench->add_option("--n", bench.n, "nominal sample count");
  s_bench->add_option("--z", bench.z, "feature dimension");
  s_bench->add_option("--known-frac", bench.known_frac, "known-label fraction");
  s_bench->add_option("--epochs", bench.epochs, "bp epochs");
  s_bench->add_option("--generations", bench.generations, "ga generations");
  s_bench->add_option("--pop", bench.pop, "ga population");
  s_bench->add_option("--seed", bench.seed, "random seed");
  s_bench->add_option("--out", bench.out_report, "JSON report output path");
  s_bench->callback([&] { run_bench(bench); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  }
  return 0;
}
