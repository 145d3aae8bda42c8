#include "head.hpp"

#include <cmath>
#include <cstring>

#include <json.hpp>

#include "binio.hpp"
#include "error.hpp"

namespace cft {

static constexpr char kHeadMagic[4] = {'C', 'F', 'T', 'H'};
static constexpr uint32_t kHeadVersion = 1;

void ClassificationHead::validate() const {
  if (n_categories == 0 || dim_z == 0)
    fail(Errc::Param, "head dimensions must be strictly positive");
  if (weights.size() != n_categories * dim_z || bias.size() != n_categories)
    fail(Errc::Param, "head parameter sizes do not match its dimensions");
  for (double w : weights)
    if (!std::isfinite(w)) fail(Errc::Validation, "head weights must be finite");
  for (double b : bias)
    if (!std::isfinite(b)) fail(Errc::Validation, "head biases must be finite");
}

std::vector<double> predict(const ClassificationHead& head, std::span<const double> z) {
  if (z.size() != head.dim_z) fail(Errc::Param, "input dimension does not match head");
  std::vector<double> out(head.n_categories);
  for (std::size_t c = 0; c < head.n_categories; ++c)
    out[c] = logistic(dot(head.row(c), z.data(), head.dim_z) + head.bias[c]);
  return out;
}

double predict_unit(const LRUnit& unit, std::span<const double> z) {
  if (z.size() != unit.weight.size()) fail(Errc::Param, "input dimension does not match unit");
  return logistic(dot(unit.weight.data(), z.data(), z.size()) + unit.bias);
}

std::vector<double> predict_unit_batch(const LRUnit& unit, const Mat& features) {
  if (features.cols != unit.weight.size())
    fail(Errc::Param, "feature dimension does not match unit");
  std::vector<double> out(features.rows);
  for (std::size_t i = 0; i < features.rows; ++i)
    out[i] = logistic(dot(unit.weight.data(), features.row(i), features.cols) + unit.bias);
  return out;
}

std::vector<LRUnit> decompose(const ClassificationHead& head) {
  std::vector<LRUnit> units(head.n_categories);
  for (std::size_t c = 0; c < head.n_categories; ++c) {
    units[c].weight.assign(head.row(c), head.row(c) + head.dim_z);
    units[c].bias = head.bias[c];
    units[c].category = c;
  }
  return units;
}

ClassificationHead reassemble(const std::vector<LRUnit>& units) {
  if (units.empty()) fail(Errc::Param, "cannot reassemble an empty unit list");
  ClassificationHead head(units.size(), units[0].weight.size());
  for (const LRUnit& u : units) {
    if (u.category >= head.n_categories) fail(Errc::Param, "unit category out of range");
    if (u.weight.size() != head.dim_z) fail(Errc::Param, "unit dimension mismatch");
    std::memcpy(head.row(u.category), u.weight.data(), head.dim_z * sizeof(double));
    head.bias[u.category] = u.bias;
  }
  return head;
}

ClassificationHead replace_unit(const ClassificationHead& head, const LRUnit& unit) {
  if (unit.category >= head.n_categories) fail(Errc::Param, "unit category out of range");
  if (unit.weight.size() != head.dim_z) fail(Errc::Param, "unit dimension does not match head");
  ClassificationHead out = head;
  std::memcpy(out.row(unit.category), unit.weight.data(), head.dim_z * sizeof(double));
  out.bias[unit.category] = unit.bias;
  return out;
}

LRUnit extract_unit(const ClassificationHead& head, std::size_t category) {
  if (category >= head.n_categories) fail(Errc::Param, "category out of range");
  LRUnit u;
  u.weight.assign(head.row(category), head.row(category) + head.dim_z);
  u.bias = head.bias[category];
  u.category = category;
  return u;
}

void save_head(const ClassificationHead& head, const std::string& path) {
  head.validate();
  auto f = open_write(path);
  f.write(kHeadMagic, 4);
  write_pod(f, kHeadVersion);
  write_pod(f, static_cast<uint32_t>(head.n_categories));
  write_pod(f, static_cast<uint32_t>(head.dim_z));
  f.write(reinterpret_cast<const char*>(head.weights.data()),
          static_cast<std::streamsize>(head.weights.size() * sizeof(double)));
  f.write(reinterpret_cast<const char*>(head.bias.data()),
          static_cast<std::streamsize>(head.bias.size() * sizeof(double)));
  if (!f) fail(Errc::Io, "write failed for " + path);
}

ClassificationHead load_head(const std::string& path) {
  auto f = open_read(path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kHeadMagic, 4) != 0)
    fail(Errc::Format, path + ": not a head file (bad magic)");
  uint32_t version;
  read_pod(f, version, path);
  if (version != kHeadVersion)
    fail(Errc::Format, path + ": unsupported head version " + std::to_string(version));
  uint32_t c, z;
  read_pod(f, c, path);
  read_pod(f, z, path);
  if (c == 0 || z == 0) fail(Errc::Format, path + ": head dimensions must be positive");

  uint64_t want = (static_cast<uint64_t>(c) * z + c) * sizeof(double);
  uint64_t have = file_bytes_remaining(f);
  if (have != want)
    fail(Errc::Corrupt, path + ": payload is " + std::to_string(have) + " bytes, header declares " +
                            std::to_string(want));

  ClassificationHead head(c, z);
  f.read(reinterpret_cast<char*>(head.weights.data()),
         static_cast<std::streamsize>(head.weights.size() * sizeof(double)));
  f.read(reinterpret_cast<char*>(head.bias.data()),
         static_cast<std::streamsize>(head.bias.size() * sizeof(double)));
  if (!f) fail(Errc::Corrupt, path + ": truncated payload");
  for (std::size_t i = 0; i < head.weights.size(); ++i)
    if (!std::isfinite(head.weights[i]))
      fail(Errc::Validation, path + ": non-finite weight at (" + std::to_string(i / z) + ", " +
                                 std::to_string(i % z) + ")");
  for (std::size_t i = 0; i < head.bias.size(); ++i)
    if (!std::isfinite(head.bias[i]))
      fail(Errc::Validation, path + ": non-finite bias at " + std::to_string(i));
  return head;
}

std::string head_to_json(const ClassificationHead& head) {
  nlohmann::json j;
  j["n_categories"] = head.n_categories;
  j["dim_z"] = head.dim_z;
  auto rows = nlohmann::json::array();
  for (std::size_t c = 0; c < head.n_categories; ++c)
    rows.push_back(std::vector<double>(head.row(c), head.row(c) + head.dim_z));
  j["weights"] = std::move(rows);
  j["bias"] = head.bias;
  return j.dump(2);
}

}  // namespace cft
