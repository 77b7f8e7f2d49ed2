#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "error.hpp"
#include "helpers.hpp"
#include "optimize.hpp"
#include "parametric.hpp"

using namespace leadtime;

namespace {

double relative(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::span<const double, kSupportSize> view(const PmfArray& a) {
  return std::span<const double, kSupportSize>(a);
}

// Random parameters with shape in [0.5, 2] and implied mean in [20, 120].
FamilyParams random_params(std::mt19937_64& rng, Family family) {
  std::uniform_real_distribution<double> shape(0.5, 2.0), mean(20.0, 120.0);
  const double s = shape(rng), m = mean(rng);
  switch (family) {
    case Family::kGamma: return {family, s, s / m};
    case Family::kWeibull: return {family, s, m / std::tgamma(1.0 + 1.0 / s)};
    case Family::kLognormal: {
      const double sigma = std::uniform_real_distribution<double>(0.5, 1.5)(rng);
      return {family, std::log(m) - sigma * sigma / 2, sigma};
    }
  }
  return {};
}

}  // namespace

TEST_CASE("induced pmf") {
  const PmfArray g = induced_pmf({Family::kGamma, 1.0, 0.01});
  CHECK(g[0] == doctest::Approx((1 - std::exp(-0.005)) / (1 - std::exp(-3.655))).epsilon(1e-12));
  const double p7 =
      (std::exp(-0.065) - std::exp(-0.075)) / (1 - std::exp(-3.655));
  CHECK(g[7] == doctest::Approx(p7).epsilon(1e-10));

  const PmfArray w = induced_pmf({Family::kWeibull, 1.0, 100.0});
  for (std::size_t l = 0; l < kSupportSize; ++l) CHECK(std::abs(w[l] - g[l]) < 1e-12);

  std::mt19937_64 rng(1);
  for (Family f : kFamilies)
    for (int trial = 0; trial < 30; ++trial) {
      const PmfArray p = induced_pmf(random_params(rng, f));
      double total = 0.0;
      for (double v : p) {
        CHECK(v >= 0.0);
        total += v;
      }
      CHECK(std::abs(total - 1.0) < 1e-9);
    }

  // Anchor triples.
  for (FamilyParams p : {FamilyParams{Family::kGamma, 0.77, 0.013},
                         FamilyParams{Family::kWeibull, 0.85, 54.2},
                         FamilyParams{Family::kLognormal, 3.41, 1.32}}) {
    const PmfArray pmf = induced_pmf(p);
    double total = 0.0;
    for (double v : pmf) total += v;
    CHECK(std::abs(total - 1.0) < 1e-9);
  }

  try {
    induced_pmf({Family::kLognormal, 1000.0, 0.1});
    FAIL("expected DegenerateMass");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateMass);
  }
}

TEST_CASE("cross entropy") {
  PmfArray half{};
  half[0] = 0.5;
  half[1] = 0.5;
  CHECK(cross_entropy(testing::point_mass(0).mass(), view(half)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const DailyPmf x = testing::random_pmf(rng, 0.5);
    const DailyPmf p = testing::random_pmf(rng, 0.0);
    double entropy = 0.0, direct = 0.0;
    for (std::size_t l = 0; l < kSupportSize; ++l) {
      if (x[l] > 0) entropy -= x[l] * std::log(x[l]);
      direct -= x[l] * std::log(std::max(p[l], 1e-300));
    }
    CHECK(cross_entropy(x.mass(), x.mass()) == doctest::Approx(entropy).epsilon(1e-12));
    CHECK(std::abs(cross_entropy(x.mass(), p.mass()) - direct) < 1e-12 * std::max(1.0, direct));
    CHECK(cross_entropy(x.mass(), p.mass()) >= entropy - 1e-9);
  }

  // Exponential nesting.
  for (int trial = 0; trial < 10; ++trial) {
    const DailyPmf x = testing::random_pmf(rng, 0.3);
    const double scale = std::uniform_real_distribution<double>(5.0, 200.0)(rng);
    const PmfArray w = induced_pmf({Family::kWeibull, 1.0, scale});
    const PmfArray g = induced_pmf({Family::kGamma, 1.0, 1.0 / scale});
    CHECK(std::abs(cross_entropy(x.mass(), view(w)) - cross_entropy(x.mass(), view(g))) < 1e-10);
  }
}

TEST_CASE("objective gradient matches finite differences") {
  std::mt19937_64 rng(3);
  for (Family f : kFamilies) {
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
      const PmfArray x = induced_pmf(random_params(rng, f));
      const CrossEntropyObjective objective(view(x), f);
      const auto theta = CrossEntropyObjective::to_theta(random_params(rng, f));
      std::array<double, 2> grad{};
      objective(theta, grad);
      for (std::size_t i = 0; i < 2; ++i) {
        std::array<double, 2> up = theta, down = theta;
        up[i] += 1e-5;
        down[i] -= 1e-5;
        const double fd = (objective.value(up) - objective.value(down)) / 2e-5;
        const double err = std::abs(fd - grad[i]) / std::max(std::abs(grad[i]), 1e-3);
        CHECK(err < 1e-4);
      }
      ++checked;
    }
    CHECK(checked == 20);
  }
}

TEST_CASE("fit_family recovers anchor parameters") {
  for (FamilyParams p : {FamilyParams{Family::kGamma, 0.77, 0.013},
                         FamilyParams{Family::kWeibull, 0.85, 54.2},
                         FamilyParams{Family::kLognormal, 3.41, 1.32}}) {
    const PmfArray x = induced_pmf(p);
    const FamilyFit fit = fit_family(view(x), p.family);
    CHECK(fit.converged);
    CHECK(relative(fit.params.a, p.a) < 0.01);
    CHECK(relative(fit.params.b, p.b) < 0.01);
    double total = 0.0;
    for (double v : fit.induced_pmf) total += v;
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("fit_family recovers random parameters") {
  std::mt19937_64 rng(4);
  for (Family f : kFamilies)
    for (int trial = 0; trial < 15; ++trial) {
      const FamilyParams p = random_params(rng, f);
      const FamilyFit fit = fit_family(view(induced_pmf(p)), f);
      CHECK(relative(fit.params.a, p.a) < 0.01);
      CHECK(relative(fit.params.b, p.b) < 0.01);
    }
}

TEST_CASE("fit_family rejects a point mass") {
  try {
    fit_family(testing::point_mass(12), Family::kGamma);
    FAIL("expected DegenerateInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateInput);
  }
}

TEST_CASE("optimizer trace never increases") {
  const PmfArray x = induced_pmf({Family::kWeibull, 1.3, 70.0});
  const CrossEntropyObjective objective(view(x), Family::kGamma);
  for (LineSearch ls : {LineSearch::kBacktracking, LineSearch::kStrongWolfe}) {
    BfgsOptions options;
    options.line_search = ls;
    const BfgsResult r = minimize_bfgs(
        [&](const Eigen::VectorXd& t, Eigen::VectorXd& g) {
          std::array<double, 2> th{t[0], t[1]}, gr{};
          const double v = objective(th, gr);
          g.resize(2);
          g << gr[0], gr[1];
          return v;
        },
        Eigen::Vector2d(0.0, std::log(0.05)), options);
    CHECK(r.converged);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
  }

  // Rosenbrock as a plain sanity check.
  const BfgsResult rb = minimize_bfgs(
      [](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
        const double a = v[0], b = v[1];
        g.resize(2);
        g << -2 * (1 - a) - 400 * a * (b - a * a), 200 * (b - a * a);
        return (1 - a) * (1 - a) + 100 * (b - a * a) * (b - a * a);
      },
      Eigen::Vector2d(-1.2, 1.0));
  CHECK(rb.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(rb.x[1] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("compare_day and win_tally") {
  const DailyPmf gamma = testing::pmf_from(
      std::vector<double>(induced_pmf({Family::kGamma, 0.8, 0.012}).begin(),
                          induced_pmf({Family::kGamma, 0.8, 0.012}).end()));
  const DayComparison c = compare_day(gamma);
  REQUIRE(c.winner.has_value());
  CHECK(*c.winner == Family::kGamma);
  CHECK(c.ln_minus_gamma ==
        doctest::Approx(c.fits[2]->cross_entropy - c.fits[0]->cross_entropy).epsilon(1e-12));
  CHECK(c.wei_minus_gamma ==
        doctest::Approx(c.fits[1]->cross_entropy - c.fits[0]->cross_entropy).epsilon(1e-12));

  // Exponential: Gamma and Weibull tie, Gamma wins by order.
  const PmfArray e = induced_pmf({Family::kGamma, 1.0, 1.0 / 40.0});
  const DayComparison tie = compare_day(testing::pmf_from(std::vector<double>(e.begin(), e.end())));
  CHECK(*tie.winner == Family::kGamma);

  std::vector<DayComparison> days(2557);
  for (std::size_t i = 0; i < days.size(); ++i)
    days[i].winner = i < 1570 ? Family::kGamma : i < 2539 ? Family::kWeibull : Family::kLognormal;
  const WinTally t = win_tally(days);
  CHECK(t.counts[0] == 1570);
  CHECK(t.counts[1] == 969);
  CHECK(t.counts[2] == 18);
  CHECK(t.shares[0] == doctest::Approx(0.614).epsilon(1e-3));
  CHECK(t.shares[1] == doctest::Approx(0.379).epsilon(1e-3));
  CHECK(t.shares[2] == doctest::Approx(0.007).epsilon(1e-1));
  CHECK(std::abs(t.shares[0] + t.shares[1] + t.shares[2] - 1.0) < 1e-12);

  std::vector<DayComparison> all_gamma(5);
  for (auto& d : all_gamma) d.winner = Family::kGamma;
  CHECK(win_tally(all_gamma).shares[0] == 1.0);
  CHECK_THROWS_AS(win_tally(std::vector<DayComparison>{}), Error);
}
