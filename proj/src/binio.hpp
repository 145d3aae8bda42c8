#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "error.hpp"

// Raw little-endian binary I/O helpers for the CFTC/CFTH containers.
// Little-endian host assumed.

namespace cft {

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& f, T& v, const std::string& path) {
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f) fail(Errc::Corrupt, path + ": truncated file");
}

inline std::ofstream open_write(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::Io, "cannot open " + path + " for writing");
  return f;
}

inline std::ifstream open_read(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::Io, "cannot open " + path);
  return f;
}

inline uint64_t file_bytes_remaining(std::ifstream& f) {
  auto pos = f.tellg();
  f.seekg(0, std::ios::end);
  auto end = f.tellg();
  f.seekg(pos);
  return static_cast<uint64_t>(end - pos);
}

}  // namespace cft
