#include "feature_cache.hpp"

#include <cmath>
#include <cstring>

#include "binio.hpp"
#include "error.hpp"

namespace cft {

// On-disk container: magic CFTC, version u32, n_samples u64, dim_z u32,
// then n_samples*dim_z float32 row-major. 20-byte header, little-endian.
static constexpr char kCacheMagic[4] = {'C', 'F', 'T', 'C'};
static constexpr uint32_t kCacheVersion = 1;

void save_cache(const FeatureCache& cache, const std::string& path) {
  if (cache.data.size() != cache.n_samples * cache.dim_z)
    fail(Errc::Param, "cache data size does not match its dimensions");
  auto f = open_write(path);
  f.write(kCacheMagic, 4);
  write_pod(f, kCacheVersion);
  write_pod(f, static_cast<uint64_t>(cache.n_samples));
  write_pod(f, static_cast<uint32_t>(cache.dim_z));
  f.write(reinterpret_cast<const char*>(cache.data.data()),
          static_cast<std::streamsize>(cache.data.size() * sizeof(float)));
  if (!f) fail(Errc::Io, "write failed for " + path);
}

FeatureCache load_cache(const std::string& path) {
  auto f = open_read(path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kCacheMagic, 4) != 0)
    fail(Errc::Format, path + ": not a feature cache file (bad magic)");
  uint32_t version;
  read_pod(f, version, path);
  if (version != kCacheVersion)
    fail(Errc::Format, path + ": unsupported cache version " + std::to_string(version));
  uint64_t n;
  uint32_t z;
  read_pod(f, n, path);
  read_pod(f, z, path);

  uint64_t want = n * static_cast<uint64_t>(z) * sizeof(float);
  uint64_t have = file_bytes_remaining(f);
  if (have != want)
    fail(Errc::Corrupt, path + ": payload is " + std::to_string(have) + " bytes, header declares " +
                            std::to_string(want));

  FeatureCache cache(static_cast<std::size_t>(n), z);
  f.read(reinterpret_cast<char*>(cache.data.data()), static_cast<std::streamsize>(want));
  if (!f && want > 0) fail(Errc::Corrupt, path + ": truncated payload");

  for (std::size_t i = 0; i < cache.data.size(); ++i) {
    if (!std::isfinite(cache.data[i]))
      fail(Errc::Validation, path + ": non-finite entry at (" + std::to_string(i / cache.dim_z) +
                                 ", " + std::to_string(i % cache.dim_z) + ")");
  }
  return cache;
}

Mat gather(const FeatureCache& cache, std::span<const std::size_t> indices) {
  Mat m(indices.size(), cache.dim_z);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= cache.n_samples) fail(Errc::Param, "gather index out of range");
    const float* src = cache.row(indices[i]);
    double* dst = m.row(i);
    for (std::size_t j = 0; j < cache.dim_z; ++j) dst[j] = static_cast<double>(src[j]);
  }
  return m;
}

}  // namespace cft
