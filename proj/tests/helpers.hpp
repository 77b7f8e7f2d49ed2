#pragma once

#include <random>
#include <vector>

#include "composition.hpp"

namespace testing {

inline leadtime::DailyPmf pmf_from(std::vector<double> raw,
                                   leadtime::Metric metric = leadtime::Metric::kNights,
                                   leadtime::Date date = leadtime::Date(2020, 1, 1)) {
  raw.resize(leadtime::kSupportSize, 0.0);
  double total = 0.0;
  for (double v : raw) total += v;
  for (double& v : raw) v /= total;
  return leadtime::validate_pmf(raw, date, metric);
}

inline leadtime::DailyPmf point_mass(int lead,
                                     leadtime::Metric metric = leadtime::Metric::kNights) {
  std::vector<double> raw(leadtime::kSupportSize, 0.0);
  raw[std::size_t(lead)] = 1.0;
  return pmf_from(raw, metric);
}

inline leadtime::DailyPmf uniform_pmf(leadtime::Metric metric = leadtime::Metric::kNights) {
  return pmf_from(std::vector<double>(leadtime::kSupportSize, 1.0), metric);
}

// Dirichlet(1)-like random pmf with a random fraction of zero bins.
inline std::vector<double> random_raw(std::mt19937_64& rng, std::size_t size,
                                      double zero_fraction = 0.0) {
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> raw(size);
  double total = 0.0;
  for (double& v : raw) {
    v = u(rng) < zero_fraction ? 0.0 : e(rng);
    total += v;
  }
  if (total == 0.0) {
    raw[0] = 1.0;
    total = 1.0;
  }
  for (double& v : raw) v /= total;
  return raw;
}

inline leadtime::DailyPmf random_pmf(std::mt19937_64& rng, double zero_fraction = 0.0,
                                     leadtime::Metric metric = leadtime::Metric::kNights,
                                     leadtime::Date date = leadtime::Date(2020, 1, 1)) {
  return pmf_from(random_raw(rng, leadtime::kSupportSize, zero_fraction), metric, date);
}

}  // namespace testing
