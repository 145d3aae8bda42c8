#pragma once

#include <doctest.h>

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>

#include "error.hpp"

namespace cft_test {

// Runs fn, which must throw a cft::Error, and returns its code.
inline cft::Errc thrown_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const cft::Error& e) {
    return e.code();
  }
  FAIL("expected a cft::Error");
  return cft::Errc::Param;
}

// Unique scratch path, removed on scope exit.
class TempFile {
public:
  explicit TempFile(const std::string& stem) {
    static std::atomic<unsigned> counter{0};
    path_ = (std::filesystem::temp_directory_path() /
             (stem + "." + std::to_string(::getpid()) + "." +
              std::to_string(counter.fetch_add(1))))
                .string();
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

  const std::string& path() const { return path_; }

private:
  std::string path_;
};

}  // namespace cft_test
