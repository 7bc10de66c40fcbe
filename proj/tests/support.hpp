#pragma once

// Shared helpers for property tests: a tiny deterministic generator.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "fldi/random.hpp"

namespace fldi::test {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() { return state_ = splitmix64(state_); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }

 private:
  std::uint64_t state_;
};

/// Wrapped angle difference in (-90, 90] for polarization orientations.
inline double orientation_diff(double a, double b) {
  double d = std::fmod(a - b, 180.0);
  if (d > 90) d -= 180;
  if (d <= -90) d += 180;
  return d;
}

inline std::filesystem::path source_dir() { return FLDI_SOURCE_DIR; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("fldi_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace fldi::test
