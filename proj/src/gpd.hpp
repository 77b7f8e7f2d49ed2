#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "composition.hpp"

namespace leadtime {

// GBV-to-nights tail-mass ratios per (date, threshold), row-major by date.
struct TailRatioSeries {
  std::vector<Date> dates;
  std::vector<int> thresholds;
  std::vector<double> ratio;        // NaN where undefined
  std::vector<double> gbv_tail;
  std::vector<double> nights_tail;
  std::vector<bool> undefined_mask;  // nights tail below 1e-12

  std::size_t index(std::size_t day, std::size_t threshold) const {
    return day * thresholds.size() + threshold;
  }
};

// Thresholds must lie in [0, 364] (ThresholdOutOfRange).
TailRatioSeries tail_ratio_series(std::span<const PairedDay> days,
                                  std::span<const int> thresholds);

// draws_per_day lead times from every day's pmf, day d using substream d of
// seed. With jitter each lead l spreads uniformly over [l - 0.5, l + 0.5),
// clipped to the support: lead 0 over [0, 0.5), lead 365 over [364.5, 365).
std::vector<double> draw_leads(std::span<const DailyPmf> pool, std::size_t draws_per_day,
                               std::uint64_t seed, bool jitter);

// x - u for every draw x > u.
std::vector<double> exceedances_over(std::span<const double> draws, double u);

std::vector<double> sample_exceedances(std::span<const DailyPmf> pool, double u,
                                       std::size_t draws_per_day, std::uint64_t seed,
                                       bool jitter = true);

enum class GpdEstimator { kMleA, kMleB, kPwm, kMom };

std::string_view to_string(GpdEstimator estimator) noexcept;

struct GpdFit {
  double threshold = 0.0;
  double xi = 0.0;
  double beta = 1.0;
  std::size_t n_exceed = 0;
  GpdEstimator estimator = GpdEstimator::kMleA;
};

inline constexpr std::size_t kMinExceedances = 30;

// GPD negative log-likelihood; +inf outside the support.
double gpd_negative_log_likelihood(std::span<const double> exceedances, double xi,
                                   double beta);

// Closed-form estimators, returned as (xi, beta).
std::pair<double, double> gpd_pwm(std::span<const double> exceedances);
std::pair<double, double> gpd_mom(std::span<const double> exceedances);
std::pair<double, double> gpd_mom_from_moments(double mean, double variance);

// Fallback chain: MLE (backtracking BFGS from the PWM estimate), MLE
// (strong-Wolfe BFGS from the exponential fit), PWM, MOM. A stage fails
// when it does not converge, leaves xi <= -1 (MLE only), or violates
// 1 + xi y / beta > 0 on some exceedance. Throws TooFewExceedances or
// AllStagesFailed.
GpdFit fit_gpd(std::span<const double> exceedances, double u);

struct StabilityProfile {
  std::vector<int> thresholds;
  std::vector<double> xi_by_threshold;  // NaN where masked
  std::vector<std::size_t> n_by_threshold;
  std::vector<std::optional<GpdFit>> fits;
};

// One shared draw set, one fit per threshold; thresholds with too few
// exceedances or a failed chain are masked rather than thrown.
StabilityProfile stability_sweep(std::span<const DailyPmf> pool,
                                 std::span<const int> thresholds,
                                 std::size_t draws_per_day, std::uint64_t seed,
                                 bool jitter = true);

}  // namespace leadtime
