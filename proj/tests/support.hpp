#pragma once

#include <cmath>
#include <filesystem>
#include <string>

namespace testing {

/// |a - b| <= rel * max(|a|, |b|), exact match for two zeros.
inline bool rel_close(double a, double b, double rel = 1e-12) {
  if (a == b) return true;
  return std::fabs(a - b) <= rel * std::fmax(std::fabs(a), std::fabs(b));
}

/// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path(AQMLAB_TEST_TMPDIR) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace testing
