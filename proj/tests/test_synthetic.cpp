#include <doctest.h>

#include <cmath>

#include "error.hpp"
#include "helpers.hpp"
#include "metrics.hpp"
#include "rng.hpp"
#include "synthetic.hpp"

using cft::Errc;
using cft::SyntheticData;
using cft::SyntheticSpec;
using cft_test::thrown_code;

namespace {

SyntheticSpec base_spec(std::size_t n, std::size_t z, std::size_t c, uint64_t seed) {
  SyntheticSpec spec;
  spec.n_samples = n;
  spec.dim_z = z;
  spec.n_categories = c;
  spec.seed = seed;
  return spec;
}

// Per-category AUC of an arbitrary head on generated data.
std::vector<double> per_category_auc(const cft::ClassificationHead& head,
                                     const SyntheticData& data) {
  std::vector<double> out;
  std::vector<double> zi(data.cache.dim_z);
  for (std::size_t c = 0; c < head.n_categories; ++c) {
    cft::EvalSet set;
    for (std::size_t i = 0; i < data.cache.n_samples; ++i) {
      for (std::size_t j = 0; j < zi.size(); ++j)
        zi[j] = static_cast<double>(data.cache.row(i)[j]);
      set.predictions.push_back(cft::predict(head, zi)[c]);
      set.labels.push_back(data.labels.at(i, c) == cft::LabelValue::Positive ? 1 : -1);
    }
    out.push_back(cft::auc(set));
  }
  return out;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  SyntheticSpec spec = base_spec(100, 8, 3, 77);
  SyntheticData a = cft::generate(spec);
  SyntheticData b = cft::generate(spec);
  CHECK(a.cache.data == b.cache.data);
  CHECK(a.labels.cells == b.labels.cells);
  CHECK(a.oracle_head.weights == b.oracle_head.weights);
  CHECK(a.oracle_head.bias == b.oracle_head.bias);

  spec.seed = 78;
  SyntheticData c = cft::generate(spec);
  CHECK(a.cache.data != c.cache.data);
}

TEST_CASE("output shapes are consistent and labels fully known") {
  SyntheticData data = cft::generate(base_spec(40, 5, 7, 1));
  CHECK(data.cache.n_samples == 40);
  CHECK(data.cache.dim_z == 5);
  CHECK(data.labels.n_samples == 40);
  CHECK(data.labels.n_categories == 7);
  CHECK(data.oracle_head.n_categories == 7);
  CHECK(data.oracle_head.dim_z == 5);
  for (cft::LabelValue v : data.labels.cells)
    CHECK((v == cft::LabelValue::Positive || v == cft::LabelValue::Negative));
}

TEST_CASE("positive rate calibration holds empirically") {
  SyntheticSpec spec = base_spec(100000, 8, 4, 5);
  spec.positive_rate = 0.1;
  SyntheticData data = cft::generate(spec);
  for (std::size_t c = 0; c < 4; ++c) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < spec.n_samples; ++i)
      pos += data.labels.at(i, c) == cft::LabelValue::Positive;
    double rate = static_cast<double>(pos) / static_cast<double>(spec.n_samples);
    CHECK(rate >= 0.08);
    CHECK(rate <= 0.12);
  }
}

TEST_CASE("oracle head ranks its own noiseless data almost perfectly") {
  SyntheticSpec spec = base_spec(10000, 16, 3, 9);
  spec.positive_rate = 0.2;
  SyntheticData data = cft::generate(spec);
  for (double auc : per_category_auc(data.oracle_head, data)) CHECK(auc >= 0.95);
}

TEST_CASE("oracle head beats random heads on its own data") {
  SyntheticSpec spec = base_spec(2000, 8, 1, 13);
  spec.positive_rate = 0.25;
  SyntheticData data = cft::generate(spec);
  double oracle_auc = per_category_auc(data.oracle_head, data)[0];

  cft::Rng rng(31);
  int beaten = 0;
  for (int trial = 0; trial < 100; ++trial) {
    cft::ClassificationHead random_head(1, 8);
    for (double& w : random_head.weights) w = rng.normal();
    random_head.bias[0] = rng.normal();
    if (oracle_auc > per_category_auc(random_head, data)[0]) ++beaten;
  }
  CHECK(beaten >= 99);
}

TEST_CASE("label noise flips exactly the rounded cell count") {
  SyntheticSpec clean = base_spec(500, 6, 4, 23);
  SyntheticSpec noisy = clean;
  noisy.label_noise = 0.1;

  SyntheticData a = cft::generate(clean);
  SyntheticData b = cft::generate(noisy);
  CHECK(a.cache.data == b.cache.data);  // noise only perturbs labels

  // Exactly round(noise * N * C) distinct cells get flipped.
  std::size_t diffs = 0;
  for (std::size_t k = 0; k < a.labels.cells.size(); ++k)
    diffs += a.labels.cells[k] != b.labels.cells[k];
  CHECK(diffs == static_cast<std::size_t>(std::llround(0.1 * 500 * 4)));
}

TEST_CASE("spec validation") {
  SyntheticSpec spec = base_spec(10, 2, 1, 1);
  spec.n_samples = 0;
  CHECK(thrown_code([&] { cft::generate(spec); }) == Errc::Param);

  spec = base_spec(10, 2, 1, 1);
  spec.positive_rate = 0.0;
  CHECK(thrown_code([&] { cft::generate(spec); }) == Errc::Param);
  spec.positive_rate = 1.0;
  CHECK(thrown_code([&] { cft::generate(spec); }) == Errc::Param);

  spec = base_spec(10, 2, 1, 1);
  spec.label_noise = 1.0;
  CHECK(thrown_code([&] { cft::generate(spec); }) == Errc::Param);

  spec = base_spec(10, 2, 1, 1);
  spec.teacher_scale = 0.0;
  CHECK(thrown_code([&] { cft::generate(spec); }) == Errc::Param);
}
