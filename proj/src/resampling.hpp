#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace leadtime {

struct BootstrapResult {
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t replicates = 0;
  std::size_t block_len = 0;
};

// ceil(cbrt(n)), computed exactly in integers.
std::size_t block_length(std::size_t n);

// Circular moving-block bootstrap of the mean with block_length(n) and a
// 2.5/97.5 percentile interval. Replicate r draws from substream r of seed.
BootstrapResult block_bootstrap_mean(std::span<const double> series,
                                     std::size_t replicates, std::uint64_t seed);

struct SupFNullConfig {
  double trim = 0.05;
  std::size_t draws = 1000;
  std::uint64_t seed = 42;
};

// Sorted sup-F statistics of Gaussian white-noise series of one length.
class SupFNull {
 public:
  SupFNull(std::size_t series_length, double trim, std::vector<double> sorted_draws);

  // Upper-tail rank: (1 + #{draws >= statistic}) / (draws + 1).
  double p_value(double statistic) const;

  std::size_t series_length() const { return series_length_; }
  double trim() const { return trim_; }
  const std::vector<double>& draws() const { return draws_; }

 private:
  std::size_t series_length_;
  double trim_;
  std::vector<double> draws_;
};

// Throws InvalidConfig unless n >= 40 and draws >= 200.
SupFNull simulate_supf_null(std::size_t n, const SupFNullConfig& config);

}  // namespace leadtime
