#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace testing {

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("leadtime_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

// Small panel: Weibull leads with seasonality, a regime shift and noise.
inline const char* kFixtureScenario = R"({
  "n_days": 60, "start_date": "2019-01-01", "family": "weibull",
  "base_params": {"a": 0.85, "b": 54.2}, "seasonal_amplitude": 0.1,
  "regimes": [{"start": 30, "params": {"a": 0.85, "b": 90}}],
  "noise_draws": 5000, "gbv_shift": 0.14, "seed": 7})";

}  // namespace testing
