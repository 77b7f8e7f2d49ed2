#pragma once

#include <span>
#include <vector>

#include "composition.hpp"

namespace leadtime {

struct DivergenceSeries {
  std::vector<Date> dates;
  std::vector<double> w1;
};

// Earth-mover distance in days: sum of absolute cdf differences.
double wasserstein1(std::span<const double, kSupportSize> p,
                    std::span<const double, kSupportSize> q);
inline double wasserstein1(const DailyPmf& p, const DailyPmf& q) {
  return wasserstein1(p.mass(), q.mass());
}

// Throws EmptyInput, UnsortedDates or DuplicateDates.
DivergenceSeries divergence_series(std::span<const PairedDay> days);

inline constexpr double kKldSmoothing = 1e-16;

// KL(x || xhat) in nats after adding kKldSmoothing to both arguments and
// renormalizing.
double kld(std::span<const double, kSupportSize> x,
           std::span<const double, kSupportSize> xhat);
inline double kld(const DailyPmf& x, const DailyPmf& xhat) {
  return kld(x.mass(), xhat.mass());
}

// Sum of squared cdf differences over the support. fitted_cdf must be
// nondecreasing within [0, 1] and end within 1e-6 of one (NonMonotoneCdf).
double crps(std::span<const double, kSupportSize> fitted_cdf,
            std::span<const double, kSupportSize> empirical_pmf);
inline double crps(std::span<const double, kSupportSize> fitted_cdf,
                   const DailyPmf& empirical) {
  return crps(fitted_cdf, empirical.mass());
}

}  // namespace leadtime
