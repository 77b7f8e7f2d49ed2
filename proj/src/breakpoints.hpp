#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace leadtime {

struct HacEstimate {
  double long_run_variance = 0.0;
  double bandwidth = 0.0;  // Bartlett truncation lag
};

// Mean-shift segmentation of a scalar series.
struct BreakModel {
  // 0-based index of the last element of every segment except the final one.
  std::vector<std::size_t> break_indices;
  std::vector<double> segment_means;
  // Minimal SSR and BIC for m = 0..max_breaks breaks.
  std::vector<double> ssr_by_m;
  std::vector<double> bic_by_m;
  std::size_t chosen_m = 0;
  std::size_t min_segment = 0;
  // Filled by the sup-F test; NaN until then.
  double supf = std::numeric_limits<double>::quiet_NaN();
  double supf_p = std::numeric_limits<double>::quiet_NaN();

  // Segment id (0-based) of every observation.
  std::vector<std::size_t> segment_ids(std::size_t n) const;
};

struct SupFResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t split = 0;  // last index of the first segment at the supremum
};

// ceil(trim * n), guarded against representation error in trim * n.
std::size_t min_segment(std::size_t n, double trim);

// Newey-West long-run variance of the demeaned series, Bartlett kernel,
// AR(1) plug-in bandwidth. Throws SeriesTooShort below 20 points.
HacEstimate newey_west(std::span<const double> series);

// Exact least-squares segmentation for every m <= max_breaks by dynamic
// programming; m chosen by BIC(m) = n ln(SSR_m / n) + (2m + 1) ln n.
BreakModel bai_perron(std::span<const double> series, std::size_t max_breaks,
                      double trim);

// sup over admissible splits of (SSR_0 - SSR_1(k)) / HAC variance of the
// one-break residuals. p_value is left at 1; see sup_f for the simulated one.
SupFResult supf_statistic(std::span<const double> series, double trim);

class SupFNull;

// Statistic plus simulated p-value from a precomputed null of matching n.
SupFResult sup_f(std::span<const double> series, double trim,
                 const SupFNull& null);

// Convenience overload that simulates its own null.
SupFResult sup_f(std::span<const double> series, double trim,
                 std::size_t null_draws = 1000, unsigned long long seed = 42);

}  // namespace leadtime
