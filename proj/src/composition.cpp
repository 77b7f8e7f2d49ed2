#include "composition.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "error.hpp"

namespace leadtime {

std::string_view to_string(Metric metric) noexcept {
  return metric == Metric::kNights ? "nights" : "gbv";
}

DailyPmf DailyPmf::with_date(Date date) const {
  DailyPmf copy = *this;
  copy.date_ = date;
  return copy;
}

PairedDay::PairedDay(DailyPmf nights_pmf, DailyPmf gbv_pmf)
    : date(nights_pmf.date()),
      nights(std::move(nights_pmf)),
      gbv(std::move(gbv_pmf)) {
  if (nights.date() != gbv.date())
    fail(ErrorCode::kInvalidArgument, "paired pmfs carry different dates");
  if (nights.metric() != Metric::kNights || gbv.metric() != Metric::kGbv)
    fail(ErrorCode::kMixedMetrics, "paired day needs one nights and one gbv pmf");
}

DailyPmf validate_pmf(std::span<const double> raw, Date date, Metric metric) {
  if (raw.size() != kSupportSize)
    fail(ErrorCode::kBadLength, "pmf must have 366 entries, got " +
                                    std::to_string(raw.size()));
  DailyPmf pmf;
  pmf.date_ = date;
  pmf.metric_ = metric;
  double sum = 0.0;
  for (std::size_t lead = 0; lead < kSupportSize; ++lead) {
    const double v = raw[lead];
    if (!std::isfinite(v))
      fail(ErrorCode::kNegativeMass, "non-finite mass at lead " + std::to_string(lead));
    if (v < -kNegativeTolerance)
      fail(ErrorCode::kNegativeMass, "negative mass at lead " + std::to_string(lead));
    pmf.mass_[lead] = v < 0.0 ? 0.0 : v;
    sum += pmf.mass_[lead];
  }
  if (sum == 0.0) fail(ErrorCode::kSumOutOfTolerance, "all-zero pmf");
  if (std::abs(sum - 1.0) > kSumTolerance)
    fail(ErrorCode::kSumOutOfTolerance,
         "pmf sums to " + std::to_string(sum) + ", outside 1 +/- 1e-6");
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    for (double& v : pmf.mass_) v /= sum;
    pmf.renormalized_ = true;
  }
  return pmf;
}

PmfArray cdf(std::span<const double, kSupportSize> pmf) {
  PmfArray out{};
  double running = 0.0;
  for (std::size_t lead = 0; lead < kSupportSize; ++lead) {
    running += pmf[lead];
    out[lead] = running;
  }
  return out;
}

double tail_mass(std::span<const double, kSupportSize> pmf, int u) {
  if (u < 0 || u > kMaxLead)
    fail(ErrorCode::kThresholdOutOfRange,
         "tail threshold " + std::to_string(u) + " outside [0, 365]");
  double tail = 0.0;
  // Summed from the far end so small tails keep full precision.
  for (int lead = kMaxLead; lead > u; --lead) tail += pmf[std::size_t(lead)];
  return tail;
}

PooledPmf pool_days(std::span<const DailyPmf> days) {
  if (days.empty()) fail(ErrorCode::kEmptyInput, "no days to pool");
  const Metric metric = days.front().metric();
  PooledPmf pooled;
  for (const DailyPmf& day : days) {
    if (day.metric() != metric)
      fail(ErrorCode::kMixedMetrics, "cannot pool nights and gbv pmfs together");
    for (std::size_t lead = 0; lead < kSupportSize; ++lead)
      pooled.mass[lead] += day[lead];
  }
  const double count = double(days.size());
  for (double& v : pooled.mass) v /= count;
  pooled.day_count = days.size();
  return pooled;
}

std::vector<DailyPmf> select_metric(std::span<const PairedDay> days,
                                    Metric metric) {
  std::vector<DailyPmf> out;
  out.reserve(days.size());
  for (const PairedDay& day : days)
    out.push_back(metric == Metric::kNights ? day.nights : day.gbv);
  return out;
}

}  // namespace leadtime
