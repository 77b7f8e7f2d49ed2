#include "resampling.hpp"

#include <algorithm>
#include <cmath>

#include "breakpoints.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace leadtime {
namespace {

// Linear interpolation between order statistics (type 7).
double percentile(const std::vector<double>& sorted, double prob) {
  const double pos = prob * double(sorted.size() - 1);
  const std::size_t lo = std::size_t(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - double(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::size_t block_length(std::size_t n) {
  if (n == 0) fail(ErrorCode::kInvalidArgument, "block_length needs n >= 1");
  std::size_t b = std::size_t(std::cbrt(double(n)));
  while (b * b * b < n) ++b;
  while (b > 1 && (b - 1) * (b - 1) * (b - 1) >= n) --b;
  return std::max<std::size_t>(b, 1);
}

BootstrapResult block_bootstrap_mean(std::span<const double> series,
                                     std::size_t replicates, std::uint64_t seed) {
  const std::size_t n = series.size();
  if (n < 2) fail(ErrorCode::kSeriesTooShort, "bootstrap needs at least 2 observations");
  if (replicates < 100)
    fail(ErrorCode::kInvalidArgument, "bootstrap needs at least 100 replicates");

  BootstrapResult result;
  result.replicates = replicates;
  result.block_len = block_length(n);
  double total = 0.0;
  for (double v : series) total += v;
  result.point = total / double(n);

  const std::size_t blocks = (n + result.block_len - 1) / result.block_len;
  std::vector<double> means(replicates);
  parallel_for(replicates, [&](std::size_t r) {
    Rng rng(seed, r);
    double sum = 0.0;
    std::size_t filled = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
      std::size_t start = std::size_t(rng.below(n));
      for (std::size_t k = 0; k < result.block_len && filled < n; ++k, ++filled) {
        sum += series[start];
        if (++start == n) start = 0;
      }
    }
    means[r] = sum / double(n);
  });
  std::sort(means.begin(), means.end());
  result.ci_low = std::min(percentile(means, 0.025), result.point);
  result.ci_high = std::max(percentile(means, 0.975), result.point);
  return result;
}

SupFNull::SupFNull(std::size_t series_length, double trim, std::vector<double> sorted_draws)
    : series_length_(series_length), trim_(trim), draws_(std::move(sorted_draws)) {
  if (draws_.empty()) fail(ErrorCode::kInvalidConfig, "empty sup-F null");
  std::sort(draws_.begin(), draws_.end());
}

double SupFNull::p_value(double statistic) const {
  const auto first_ge = std::lower_bound(draws_.begin(), draws_.end(), statistic);
  const double at_least = double(draws_.end() - first_ge);
  return (1.0 + at_least) / (double(draws_.size()) + 1.0);
}

SupFNull simulate_supf_null(std::size_t n, const SupFNullConfig& config) {
  if (n < 40) fail(ErrorCode::kInvalidConfig, "sup-F null needs series length >= 40");
  if (config.draws < 200) fail(ErrorCode::kInvalidConfig, "sup-F null needs >= 200 draws");
  if (!(config.trim > 0.0 && config.trim < 0.5))
    fail(ErrorCode::kInvalidConfig, "trim must lie in (0, 0.5)");
  if (n < 2 * min_segment(n, config.trim))
    fail(ErrorCode::kInvalidConfig, "trim too large for series length");

  std::vector<double> stats(config.draws);
  parallel_for(config.draws, [&](std::size_t d) {
    Rng rng(config.seed, d);
    std::vector<double> noise(n);
    for (double& v : noise) v = rng.normal();
    stats[d] = supf_statistic(noise, config.trim).statistic;
  });
  return SupFNull(n, config.trim, std::move(stats));
}

}  // namespace leadtime
