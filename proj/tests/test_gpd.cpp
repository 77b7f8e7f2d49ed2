#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "error.hpp"
#include "gpd.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace leadtime;

namespace {

std::vector<DailyPmf> exponential_pool(double scale, std::size_t days) {
  std::vector<double> raw(kSupportSize);
  for (std::size_t l = 0; l < kSupportSize; ++l)
    raw[l] = std::exp(-(double(l) - 0.5) / scale) - std::exp(-(double(l) + 0.5) / scale);
  raw[0] = 1.0 - std::exp(-0.5 / scale);
  std::vector<DailyPmf> pool;
  for (std::size_t d = 0; d < days; ++d)
    pool.push_back(testing::pmf_from(raw, Metric::kNights, Date(2020, 1, 1).plus_days(int(d))));
  return pool;
}

}  // namespace

TEST_CASE("tail ratios") {
  std::vector<double> g(kSupportSize, 0.0), n(kSupportSize, 0.0);
  g[10] = 0.64;
  g[120] = 0.36;
  n[10] = 0.70;
  n[120] = 0.30;
  const Date date(2020, 1, 1);
  std::vector<PairedDay> days{PairedDay(testing::pmf_from(n, Metric::kNights, date),
                                        testing::pmf_from(g, Metric::kGbv, date))};
  const std::vector<int> thresholds{7, 90, 200};
  const TailRatioSeries s = tail_ratio_series(days, thresholds);
  CHECK(s.ratio[s.index(0, 1)] == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(s.ratio[s.index(0, 0)] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.undefined_mask[s.index(0, 2)]);
  CHECK(std::isnan(s.ratio[s.index(0, 2)]));

  std::mt19937_64 rng(1);
  std::vector<PairedDay> random_days;
  for (int d = 0; d < 20; ++d) {
    const Date dd = date.plus_days(d);
    random_days.emplace_back(testing::random_pmf(rng, 0.6, Metric::kNights, dd),
                             testing::random_pmf(rng, 0.6, Metric::kGbv, dd));
  }
  const std::vector<int> us{0, 7, 30, 60, 90, 180, 300, 364};
  const TailRatioSeries r = tail_ratio_series(random_days, us);
  for (std::size_t d = 0; d < random_days.size(); ++d)
    for (std::size_t k = 0; k < us.size(); ++k) {
      const std::size_t i = r.index(d, k);
      if (r.undefined_mask[i]) continue;
      CHECK(r.ratio[i] >= 0.0);
      CHECK(std::abs(r.ratio[i] * r.nights_tail[i] - r.gbv_tail[i]) < 1e-12);
    }

  const std::vector<int> bad{365};
  CHECK_THROWS_AS(tail_ratio_series(days, bad), Error);
}

TEST_CASE("identical pmfs give unit ratios") {
  std::mt19937_64 rng(2);
  std::vector<double> raw = testing::random_raw(rng, kSupportSize, 0.2);
  const Date date(2021, 1, 1);
  std::vector<PairedDay> days{PairedDay(testing::pmf_from(raw, Metric::kNights, date),
                                        testing::pmf_from(raw, Metric::kGbv, date))};
  const std::vector<int> us{7, 30, 60, 90, 180};
  const TailRatioSeries s = tail_ratio_series(days, us);
  for (std::size_t k = 0; k < us.size(); ++k)
    if (!s.undefined_mask[k]) CHECK(s.ratio[k] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exceedance sampling") {
  const std::vector<DailyPmf> spike{testing::point_mass(200)};
  const auto y = sample_exceedances(spike, 100, 1000, 7, false);
  REQUIRE(y.size() == 1000);
  CHECK(std::all_of(y.begin(), y.end(), [](double v) { return v == 100.0; }));

  const std::vector<DailyPmf> uniform{testing::uniform_pmf()};
  CHECK(sample_exceedances(uniform, 365, 1000, 7).empty());
  CHECK(sample_exceedances(uniform, 365, 1000, 7, false).empty());

  const auto half = sample_exceedances(uniform, 182, 1000000, 8, false);
  CHECK(std::abs(double(half.size()) / 1e6 - 183.0 / 366.0) < 0.005 * 183.0 / 366.0);

  // Jitter keeps draws inside the bin and the support.
  const auto jittered = draw_leads(std::vector<DailyPmf>{testing::point_mass(0)}, 1000, 3, true);
  CHECK(std::all_of(jittered.begin(), jittered.end(), [](double v) { return v >= 0 && v < 0.5; }));
  const auto top = draw_leads(std::vector<DailyPmf>{testing::point_mass(365)}, 1000, 3, true);
  CHECK(std::all_of(top.begin(), top.end(), [](double v) { return v >= 364.5 && v < 365; }));
  const auto mid = draw_leads(std::vector<DailyPmf>{testing::point_mass(40)}, 1000, 3, true);
  CHECK(std::all_of(mid.begin(), mid.end(), [](double v) { return v >= 39.5 && v < 40.5; }));
}

TEST_CASE("sampling fidelity") {
  std::mt19937_64 rng(4);
  const DailyPmf p = exponential_pool(20.0, 1).front();
  const auto draws = draw_leads(std::vector<DailyPmf>{p}, 1000000, 5, false);
  std::vector<double> counts(kSupportSize, 0.0);
  for (double v : draws) counts[std::size_t(v)] += 1.0;
  double tv = 0.0;
  for (std::size_t l = 0; l < kSupportSize; ++l) tv += std::abs(counts[l] / 1e6 - p[l]);
  CHECK(tv / 2 < 0.005);

  // Per-day substreams: a day's draws do not depend on the rest of the pool.
  const std::vector<DailyPmf> pool{testing::random_pmf(rng), testing::random_pmf(rng)};
  const auto both = draw_leads(pool, 100, 9, true);
  const auto first = draw_leads(std::vector<DailyPmf>{pool[0]}, 100, 9, true);
  CHECK(std::equal(first.begin(), first.end(), both.begin()));
  CHECK(draw_leads(pool, 100, 9, true) == both);
}

TEST_CASE("closed-form estimators match the oracles") {
  std::mt19937_64 rng(6);
  for (int sample = 0; sample < 10; ++sample) {
    std::uniform_int_distribution<std::size_t> size(30, 400);
    const double xi = std::uniform_real_distribution<double>(-0.4, 0.4)(rng);
    const auto y = oracle::gpd_sample(xi, 20.0, size(rng), unsigned(100 + sample));
    const auto [pxi, pbeta] = gpd_pwm(y);
    const auto [oxi, obeta] = oracle::pwm_lmoments(y);
    CHECK(std::abs(pxi - oxi) < 1e-10);
    CHECK(std::abs(pbeta - obeta) < 1e-10 * std::max(1.0, obeta));
    const auto [mxi, mbeta] = gpd_mom(y);
    const auto [qxi, qbeta] = oracle::mom_moments(y);
    CHECK(std::abs(mxi - qxi) < 1e-10);
    CHECK(std::abs(mbeta - qbeta) < 1e-10 * std::max(1.0, qbeta));
  }

  // Exact GPD(-0.2, 50) moments: mean 125/3, variance 156250/126.
  const auto exact = gpd_mom_from_moments(125.0 / 3.0, 156250.0 / 126.0);
  CHECK(std::abs(exact.first + 0.2) < 1e-6);
  CHECK(std::abs(exact.second - 50.0) < 1e-6);
  const auto rounded = gpd_mom_from_moments(41.667, 1240.08);
  CHECK(std::abs(rounded.first + 0.2) < 1e-4);
  CHECK(std::abs(rounded.second - 50.0) < 1e-2);
}

TEST_CASE("likelihood support") {
  const std::vector<double> y{1.0, 2.0, 10.0};
  CHECK(std::isinf(gpd_negative_log_likelihood(y, -0.5, 4.0)));
  CHECK(std::isfinite(gpd_negative_log_likelihood(y, -0.5, 6.0)));
  const double expo = gpd_negative_log_likelihood(y, 0.0, 5.0);
  CHECK(expo == doctest::Approx(3 * std::log(5.0) + 13.0 / 5.0));
  CHECK(gpd_negative_log_likelihood(y, 1e-9, 5.0) == doctest::Approx(expo).epsilon(1e-8));
}

TEST_CASE("fit_gpd recovers known parameters") {
  const auto heavy = oracle::gpd_sample(0.3, 10.0, 100000, 11);
  const GpdFit a = fit_gpd(heavy, 50.0);
  CHECK(std::abs(a.xi - 0.3) < 0.03);
  CHECK(std::abs(a.beta - 10.0) < 0.4);
  CHECK(a.n_exceed == heavy.size());
  CHECK(a.threshold == 50.0);

  const auto expo = oracle::gpd_sample(0.0, 50.0, 100000, 12);
  CHECK(std::abs(fit_gpd(expo, 0.0).xi) < 0.02);

  const auto light = oracle::gpd_sample(-0.3, 50.0, 100000, 13);
  const GpdFit c = fit_gpd(light, 0.0);
  CHECK(std::abs(c.xi + 0.3) < 0.05);
  CHECK(std::abs(c.beta - 50.0) < 2.5);
  for (double v : light) CHECK(1 + c.xi * v / c.beta > 0);

  CHECK(fit_gpd(light, 0.0).xi == c.xi);
}

TEST_CASE("fit_gpd errors and fallbacks") {
  const auto few = oracle::gpd_sample(0.1, 5.0, 29, 14);
  try {
    fit_gpd(few, 0.0);
    FAIL("expected TooFewExceedances");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTooFewExceedances);
  }
  // Strongly bounded sample: the likelihood runs off to xi <= -1, so a
  // moment estimator must take over and still respect the support.
  std::vector<double> bounded;
  for (int i = 0; i < 200; ++i) bounded.push_back(10.0 - 1e-6 * i);
  const GpdFit f = fit_gpd(bounded, 0.0);
  CHECK((f.estimator == GpdEstimator::kPwm || f.estimator == GpdEstimator::kMom));
  for (double v : bounded) CHECK(1 + f.xi * v / f.beta > 0);
  CHECK(to_string(GpdEstimator::kMleB) == "MLE_B");
}

TEST_CASE("stability sweep") {
  const auto pool = exponential_pool(30.0, 250);
  const std::vector<int> low{30, 60, 90};
  const StabilityProfile s = stability_sweep(pool, low, 1000, 21);
  REQUIRE(s.xi_by_threshold.size() == 3);
  for (std::size_t k = 0; k < low.size(); ++k) {
    CHECK(s.n_by_threshold[k] >= 10000);
    CHECK(std::abs(s.xi_by_threshold[k]) < 0.05);
  }
  const StabilityProfile again = stability_sweep(pool, low, 1000, 21);
  CHECK(again.xi_by_threshold == s.xi_by_threshold);
  CHECK(again.n_by_threshold == s.n_by_threshold);

  const std::vector<DailyPmf> spike{testing::point_mass(100)};
  const std::vector<int> us{60, 120};
  const StabilityProfile m = stability_sweep(spike, us, 1000, 3);
  CHECK(m.n_by_threshold[1] == 0);
  CHECK(std::isnan(m.xi_by_threshold[1]));
  CHECK_FALSE(m.fits[1].has_value());

  const std::vector<int> unsorted{90, 60};
  CHECK_THROWS_AS(stability_sweep(pool, unsorted, 10, 1), Error);
}
