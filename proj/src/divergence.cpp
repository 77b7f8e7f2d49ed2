#include "divergence.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace leadtime {

double wasserstein1(std::span<const double, kSupportSize> p,
                    std::span<const double, kSupportSize> q) {
  double fp = 0.0;
  double fq = 0.0;
  double total = 0.0;
  for (std::size_t lead = 0; lead < kSupportSize; ++lead) {
    fp += p[lead];
    fq += q[lead];
    total += std::abs(fp - fq);
  }
  return total;
}

DivergenceSeries divergence_series(std::span<const PairedDay> days) {
  if (days.empty()) fail(ErrorCode::kEmptyInput, "no days for divergence series");
  DivergenceSeries out;
  out.dates.reserve(days.size());
  out.w1.reserve(days.size());
  for (std::size_t i = 0; i < days.size(); ++i) {
    if (i > 0) {
      if (days[i].date == days[i - 1].date)
        fail(ErrorCode::kDuplicateDates, "duplicate date " + days[i].date.iso());
      if (days[i].date < days[i - 1].date)
        fail(ErrorCode::kUnsortedDates, "dates out of order at " + days[i].date.iso());
    }
    out.dates.push_back(days[i].date);
    out.w1.push_back(wasserstein1(days[i].nights, days[i].gbv));
  }
  return out;
}

double kld(std::span<const double, kSupportSize> x,
           std::span<const double, kSupportSize> xhat) {
  double sx = 0.0;
  double sh = 0.0;
  for (std::size_t lead = 0; lead < kSupportSize; ++lead) {
    sx += x[lead] + kKldSmoothing;
    sh += xhat[lead] + kKldSmoothing;
  }
  double total = 0.0;
  for (std::size_t lead = 0; lead < kSupportSize; ++lead) {
    const double a = (x[lead] + kKldSmoothing) / sx;
    const double b = (xhat[lead] + kKldSmoothing) / sh;
    total += a * std::log(a / b);
  }
  return total;
}

double crps(std::span<const double, kSupportSize> fitted_cdf,
            std::span<const double, kSupportSize> empirical_pmf) {
  constexpr double kCdfTolerance = 1e-6;
  double previous = 0.0;
  for (std::size_t lead = 0; lead < kSupportSize; ++lead) {
    const double f = fitted_cdf[lead];
    if (!(f >= -kCdfTolerance && f <= 1.0 + kCdfTolerance) ||
        f < previous - 1e-12)
      fail(ErrorCode::kNonMonotoneCdf,
           "fitted cdf not monotone within [0, 1] at lead " + std::to_string(lead));
    previous = f;
  }
  if (std::abs(fitted_cdf[kMaxLead] - 1.0) > kCdfTolerance)
    fail(ErrorCode::kNonMonotoneCdf, "fitted cdf does not reach one");
  double running = 0.0;
  double total = 0.0;
  for (std::size_t lead = 0; lead < kSupportSize; ++lead) {
    running += empirical_pmf[lead];
    const double gap = fitted_cdf[lead] - running;
    total += gap * gap;
  }
  return total;
}

}  // namespace leadtime
