#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "date.hpp"

namespace leadtime {

inline constexpr int kMaxLead = 365;
inline constexpr std::size_t kSupportSize = kMaxLead + 1;

using PmfArray = std::array<double, kSupportSize>;

enum class Metric { kNights, kGbv };

std::string_view to_string(Metric metric) noexcept;

// One day's allocation of a metric across lead times 0..365. Only
// validate_pmf constructs these, so every instance is on the simplex.
class DailyPmf {
 public:
  const PmfArray& mass() const noexcept { return mass_; }
  double operator[](std::size_t lead) const { return mass_[lead]; }
  Date date() const noexcept { return date_; }
  Metric metric() const noexcept { return metric_; }
  // True when the raw input was rescaled to close the simplex.
  bool renormalized() const noexcept { return renormalized_; }

  DailyPmf with_date(Date date) const;

 private:
  friend DailyPmf validate_pmf(std::span<const double>, Date, Metric);
  DailyPmf() = default;

  PmfArray mass_{};
  Date date_{};
  Metric metric_ = Metric::kNights;
  bool renormalized_ = false;
};

struct PairedDay {
  PairedDay(DailyPmf nights_pmf, DailyPmf gbv_pmf);

  Date date;
  DailyPmf nights;
  DailyPmf gbv;
};

struct PooledPmf {
  PmfArray mass{};
  std::size_t day_count = 0;
};

inline constexpr double kSumTolerance = 1e-6;
inline constexpr double kSimplexTolerance = 1e-9;
inline constexpr double kNegativeTolerance = 1e-12;

// Throws NegativeMass, BadLength or SumOutOfTolerance. Sums within
// kSumTolerance of one are rescaled and flagged.
DailyPmf validate_pmf(std::span<const double> raw, Date date = {},
                      Metric metric = Metric::kNights);

PmfArray cdf(std::span<const double, kSupportSize> pmf);
inline PmfArray cdf(const DailyPmf& pmf) { return cdf(pmf.mass()); }

// Mass strictly beyond lead u.
double tail_mass(std::span<const double, kSupportSize> pmf, int u);
inline double tail_mass(const DailyPmf& pmf, int u) {
  return tail_mass(pmf.mass(), u);
}

PooledPmf pool_days(std::span<const DailyPmf> days);

std::vector<DailyPmf> select_metric(std::span<const PairedDay> days,
                                    Metric metric);

}  // namespace leadtime
