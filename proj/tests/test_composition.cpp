#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "composition.hpp"
#include "csv_io.hpp"
#include "date.hpp"
#include "error.hpp"
#include "helpers.hpp"

using namespace leadtime;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("dates parse strictly") {
  CHECK(Date::parse("2019-01-01").has_value());
  CHECK(Date::parse("2020-02-29").has_value());
  CHECK_FALSE(Date::parse("2019-02-29").has_value());
  CHECK_FALSE(Date::parse("2019-1-01").has_value());
  CHECK_FALSE(Date::parse("2019-01-01x").has_value());
  CHECK_FALSE(Date::parse("").has_value());
  CHECK(Date::parse("2019-12-31")->plus_days(1).iso() == "2020-01-01");
  CHECK(Date(2019, 3, 4).iso() == "2019-03-04");
}

TEST_CASE("validate_pmf accepts, renormalizes and rejects") {
  std::vector<double> uniform(kSupportSize, 1.0 / 366.0);
  const DailyPmf u = validate_pmf(uniform);
  double total = 0.0;
  for (double v : u.mass()) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> high = uniform;
  high[0] += 5e-7;
  const DailyPmf h = validate_pmf(high);
  CHECK(h.renormalized());
  total = 0.0;
  for (double v : h.mass()) total += v;
  CHECK(std::abs(total - 1.0) < 1e-12);
  CHECK_FALSE(u.renormalized());

  std::vector<double> negative = uniform;
  negative[3] = -0.01;
  negative[4] += 0.01;
  CHECK(code_of([&] { validate_pmf(negative); }) == ErrorCode::kNegativeMass);

  std::vector<double> off = uniform;
  off[0] += 2e-6;
  CHECK(code_of([&] { validate_pmf(off); }) == ErrorCode::kSumOutOfTolerance);

  std::vector<double> short_vec(365, 1.0 / 365.0);
  CHECK(code_of([&] { validate_pmf(short_vec); }) == ErrorCode::kBadLength);

  std::vector<double> zeros(kSupportSize, 0.0);
  CHECK(code_of([&] { validate_pmf(zeros); }) == ErrorCode::kSumOutOfTolerance);

  // Tiny negative rounding noise is clamped, not rejected.
  std::vector<double> noisy = uniform;
  noisy[10] = -1e-13;
  noisy[11] += 1.0 / 366.0 + 1e-13;
  CHECK(validate_pmf(noisy)[10] == 0.0);
}

TEST_CASE("cdf examples and round trip") {
  const PmfArray c0 = cdf(testing::point_mass(0));
  CHECK(std::all_of(c0.begin(), c0.end(), [](double v) { return v == 1.0; }));

  const PmfArray c2 = cdf(testing::pmf_from({0.5, 0.5}));
  CHECK(c2[0] == 0.5);
  CHECK(c2[1] == 1.0);
  CHECK(c2[365] == 1.0);

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const DailyPmf p = testing::random_pmf(rng, 0.3);
    const PmfArray c = cdf(p);
    CHECK(std::abs(c[365] - 1.0) < 1e-9);
    for (std::size_t l = 0; l < kSupportSize; ++l) {
      const double diff = l == 0 ? c[0] : c[l] - c[l - 1];
      CHECK(std::abs(diff - p[l]) < 1e-12);
      if (l > 0) CHECK(c[l] >= c[l - 1]);
    }
  }
}

TEST_CASE("tail_mass") {
  CHECK(tail_mass(testing::point_mass(0), 7) == 0.0);
  CHECK(tail_mass(testing::uniform_pmf(), 182) == doctest::Approx(183.0 / 366.0).epsilon(1e-12));

  std::vector<double> raw(kSupportSize, 0.0);
  raw[10] = 0.64;
  raw[120] = 0.36;
  CHECK(tail_mass(testing::pmf_from(raw), 90) == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(code_of([&] { tail_mass(testing::uniform_pmf(), 366); }) ==
        ErrorCode::kThresholdOutOfRange);
  CHECK(code_of([&] { tail_mass(testing::uniform_pmf(), -1); }) ==
        ErrorCode::kThresholdOutOfRange);
  CHECK(tail_mass(testing::uniform_pmf(), 365) == 0.0);

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const DailyPmf p = testing::random_pmf(rng, 0.5);
    const PmfArray c = cdf(p);
    double previous = 2.0;
    for (int u = 0; u <= kMaxLead; ++u) {
      const double t = tail_mass(p, u);
      CHECK(t <= previous);
      CHECK(t >= 0.0);
      CHECK(std::abs(t - (1.0 - c[std::size_t(u)])) < 1e-12);
      previous = t;
    }
    CHECK(tail_mass(p, 0) == doctest::Approx(1.0 - p[0]).epsilon(1e-12));
  }
}

TEST_CASE("pool_days") {
  const DailyPmf one = testing::point_mass(3);
  const PooledPmf single = pool_days(std::vector<DailyPmf>{one});
  CHECK(single.day_count == 1);
  CHECK(single.mass[3] == 1.0);

  const PooledPmf two = pool_days(std::vector<DailyPmf>{testing::point_mass(0), testing::point_mass(10)});
  CHECK(two.mass[0] == 0.5);
  CHECK(two.mass[10] == 0.5);

  std::mt19937_64 rng(3);
  std::vector<DailyPmf> days;
  for (int d = 0; d < 100; ++d) days.push_back(testing::random_pmf(rng, 0.2));
  const PooledPmf pooled = pool_days(days);
  double total = 0.0;
  for (std::size_t l = 0; l < kSupportSize; ++l) {
    long double naive = 0.0L;
    for (const DailyPmf& d : days) naive += d[l];
    naive /= days.size();
    CHECK(std::abs(pooled.mass[l] - double(naive)) < 1e-12);
    total += pooled.mass[l];
  }
  CHECK(std::abs(total - 1.0) < 1e-9);

  std::vector<DailyPmf> shuffled = days;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const PooledPmf again = pool_days(shuffled);
  for (std::size_t l = 0; l < kSupportSize; ++l)
    CHECK(std::abs(again.mass[l] - pooled.mass[l]) < 1e-15);

  CHECK(code_of([&] { pool_days(std::vector<DailyPmf>{}); }) == ErrorCode::kEmptyInput);
  CHECK(code_of([&] {
          pool_days(std::vector<DailyPmf>{testing::point_mass(0),
                                          testing::point_mass(0, Metric::kGbv)});
        }) == ErrorCode::kMixedMetrics);
}

TEST_CASE("paired days check dates and metrics") {
  const DailyPmf n = testing::point_mass(1);
  const DailyPmf g = testing::point_mass(2, Metric::kGbv);
  CHECK_NOTHROW(PairedDay(n, g));
  CHECK(code_of([&] { PairedDay(n, n); }) == ErrorCode::kMixedMetrics);
  CHECK(code_of([&] { PairedDay(n, g.with_date(Date(2021, 1, 1))); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("panel csv parsing") {
  const std::string good =
      "date,lead,nights_share,gbv_share\n"
      "2020-01-02,0,0.5,0.25\n"
      "2020-01-02,3,0.5,0.75\n"
      "2020-01-01,0,1,1\r\n"
      "\n";
  const PanelRead read = parse_panel_csv(good);
  REQUIRE(read.ok());
  REQUIRE(read.days.size() == 2);
  CHECK(read.days[0].date.iso() == "2020-01-01");
  CHECK(read.days[1].nights[3] == 0.5);
  CHECK(read.days[1].gbv[3] == 0.75);
  CHECK(read.days[1].gbv[1] == 0.0);

  // Round trip through the writer is exact.
  const PanelRead again = parse_panel_csv(panel_to_csv(read.days));
  REQUIRE(again.ok());
  std::mt19937_64 rng(9);
  std::vector<PairedDay> days;
  for (int d = 0; d < 5; ++d) {
    const Date date = Date(2021, 5, 1).plus_days(d);
    days.emplace_back(testing::random_pmf(rng, 0.5, Metric::kNights, date),
                      testing::random_pmf(rng, 0.5, Metric::kGbv, date));
  }
  const PanelRead round = parse_panel_csv(panel_to_csv(days));
  REQUIRE(round.ok());
  REQUIRE(round.days.size() == days.size());
  for (std::size_t d = 0; d < days.size(); ++d)
    for (std::size_t l = 0; l < kSupportSize; ++l) {
      CHECK(round.days[d].nights[l] == days[d].nights[l]);
      CHECK(round.days[d].gbv[l] == days[d].gbv[l]);
    }
}

TEST_CASE("panel csv diagnostics name the row") {
  const std::string bad =
      "date,lead,nights_share,gbv_share\n"
      "2020-01-01,0,1,1\n"
      "2020-13-01,0,1,1\n"
      "2020-01-02,366,1,1\n"
      "2020-01-03,x,1,1\n"
      "2020-01-04,0,abc,1\n"
      "2020-01-01,0,1,1\n"
      "2020-01-05,0,0.5,1\n"
      "2020-01-06,0,1\n";
  const PanelRead read = parse_panel_csv(bad);
  REQUIRE(read.diagnostics.size() == 7);
  CHECK(read.diagnostics[0].line == 3);
  CHECK(read.diagnostics[1].line == 4);
  CHECK(read.diagnostics[1].message.find("outside 0-365") != std::string::npos);
  CHECK(read.diagnostics[2].line == 5);
  CHECK(read.diagnostics[3].line == 6);
  CHECK(read.diagnostics[4].line == 7);
  CHECK(read.diagnostics[4].message.find("duplicate") != std::string::npos);
  CHECK(read.diagnostics[5].line == 9);
  // Day-level problem reported by date.
  CHECK(read.diagnostics[6].message.find("2020-01-05") != std::string::npos);

  CHECK_FALSE(parse_panel_csv("").ok());
  CHECK_FALSE(parse_panel_csv("day,lead,a,b\n").ok());
  CHECK_FALSE(parse_panel_csv("date,lead,nights_share,gbv_share\n").ok());
}

TEST_CASE("negative shares are reported against their row") {
  const PanelRead read = parse_panel_csv(
      "date,lead,nights_share,gbv_share\n"
      "2020-01-01,0,0.5,1\n"
      "2020-01-01,1,0.5,-0.25\n");
  REQUIRE(read.diagnostics.size() == 1);
  CHECK(read.diagnostics[0].line == 3);
  CHECK(read.diagnostics[0].message == "negative gbv_share -0.25");
}
