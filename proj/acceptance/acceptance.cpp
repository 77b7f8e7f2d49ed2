// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria. `acceptance 4 7` runs a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "breakpoints.hpp"
#include "csv_io.hpp"
#include "divergence.hpp"
#include "error.hpp"
#include "fixture.hpp"
#include "gpd.hpp"
#include "helpers.hpp"
#include "oracles.hpp"
#include "parametric.hpp"
#include "pipeline.hpp"
#include "resampling.hpp"
#include "smoother.hpp"
#include "synth.hpp"

using namespace leadtime;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, format, args...);
  return buffer;
}

std::span<const double, kSupportSize> view(const PmfArray& a) {
  return std::span<const double, kSupportSize>(a);
}

Verdict wasserstein_oracle() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> size(1, 10);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = size(rng);
    const auto a = testing::random_raw(rng, k, 0.25);
    const auto b = testing::random_raw(rng, k, 0.25);
    const double lp = k == 1 ? 0.0 : oracle::transport_lp(a, b);
    worst = std::max(worst, std::abs(lp - wasserstein1(testing::pmf_from(a), testing::pmf_from(b))));
  }
  return {worst <= 1e-9, fmt("max |W1 - LP| = %.3g over 1000 pairs", worst)};
}

Verdict metric_properties() {
  std::mt19937_64 rng(102);
  double asym = 0.0, triangle = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const DailyPmf p = testing::random_pmf(rng, 0.3);
    const DailyPmf q = testing::random_pmf(rng, 0.3);
    const DailyPmf r = testing::random_pmf(rng, 0.3);
    asym = std::max(asym, std::abs(wasserstein1(p, q) - wasserstein1(q, p)));
    triangle =
        std::max(triangle, wasserstein1(p, q) - wasserstein1(p, r) - wasserstein1(r, q));
  }
  return {asym <= 1e-10 && triangle <= 1e-10,
          fmt("max asymmetry %.3g, max triangle excess %.3g", asym, triangle)};
}

Verdict bootstrap_coverage() {
  int covered = 0;
  for (unsigned trial = 0; trial < 500; ++trial) {
    const auto x = oracle::ar1(1000, 0.5, 5000 + trial);
    const BootstrapResult r = block_bootstrap_mean(x, 1000, trial);
    if (r.ci_low <= 0.0 && 0.0 <= r.ci_high) ++covered;
  }
  const double rate = covered / 500.0;
  return {rate >= 0.90 && rate <= 0.98, fmt("coverage %.3f (need 0.90-0.98)", rate)};
}

Verdict break_recovery() {
  const std::vector<std::size_t> at{300, 600};
  const std::vector<double> means{0.0, 4.0, 8.0};
  int good = 0;
  for (unsigned seed = 0; seed < 100; ++seed) {
    const auto x = generate_break_series(900, at, means, 1.0, seed);
    const BreakModel m = bai_perron(x, 5, 0.05);
    if (m.chosen_m == 2 && std::abs(double(m.break_indices[0]) - 299.0) <= 5 &&
        std::abs(double(m.break_indices[1]) - 599.0) <= 5)
      ++good;
  }
  std::mt19937_64 rng(104);
  std::uniform_int_distribution<std::size_t> length(12, 120);
  std::normal_distribution<double> z(0.0, 1.0);
  double worst = 0.0;
  int instances = 0;
  while (instances < 200) {
    const std::size_t n = length(rng);
    const double trim = std::uniform_real_distribution<double>(0.02, 0.3)(rng);
    const std::size_t h = min_segment(n, trim);
    if (3 * h > n) continue;
    std::vector<double> x(n);
    const std::size_t jump = n / 2;
    for (std::size_t t = 0; t < n; ++t) x[t] = z(rng) + (t >= jump ? 1.5 : 0.0);
    const BreakModel m = bai_perron(x, 2, trim);
    for (std::size_t k = 0; k <= 2; ++k) {
      const double o = oracle::exhaustive_ssr(x, k, h);
      worst = std::max(worst, std::abs(m.ssr_by_m[k] - o) / std::max(1.0, o));
    }
    ++instances;
  }
  return {good >= 95 && worst <= 1e-9,
          fmt("two-break recovery %d/100; max relative SSR gap vs exhaustive %.3g on %d "
              "instances",
              good, worst, instances)};
}

Verdict supf_size_power() {
  const SupFNull null = simulate_supf_null(500, {0.05, 1000, 105});
  int null_rejections = 0, power = 0;
  for (unsigned seed = 0; seed < 100; ++seed) {
    const auto quiet = generate_break_series(500, {}, std::vector<double>{0.0}, 1.0, 1000 + seed);
    if (sup_f(quiet, 0.05, null).p_value < 0.05) ++null_rejections;
    const std::vector<std::size_t> at{250};
    const auto loud =
        generate_break_series(500, at, std::vector<double>{0.0, 3.0}, 1.0, 2000 + seed);
    if (sup_f(loud, 0.05, null).p_value < 0.05) ++power;
  }
  const double size = null_rejections / 100.0;
  return {size >= 0.02 && size <= 0.09 && power >= 99,
          fmt("size %.2f (need 0.02-0.09), power %d/100", size, power)};
}

Verdict hac_accuracy() {
  std::vector<double> lrv;
  for (unsigned seed = 0; seed < 20; ++seed)
    lrv.push_back(newey_west(oracle::ar1(20000, 0.5, 600 + seed)).long_run_variance);
  std::sort(lrv.begin(), lrv.end());
  const double median = (lrv[9] + lrv[10]) / 2;
  return {std::abs(median - 4.0) <= 0.6, fmt("median long-run variance %.4f (target 4)", median)};
}

Verdict gpd_recovery() {
  bool ok = true;
  std::string detail;
  unsigned seed = 700;
  for (double xi : {-0.3, 0.0, 0.3}) {
    const auto y = oracle::gpd_sample(xi, 50.0, 100000, seed++);
    const GpdFit f = fit_gpd(y, 0.0);
    const bool good = std::abs(f.xi - xi) <= 0.05 && std::abs(f.beta - 50.0) <= 2.5;
    ok = ok && good;
    detail += fmt("xi %.1f -> (%.4f, %.3f) %s; ", xi, f.xi, f.beta,
                  std::string(to_string(f.estimator)).c_str());
  }
  // MOM from the exact moments of GPD(-0.2, 50): mean 125/3, variance 156250/126.
  const auto mom = gpd_mom_from_moments(125.0 / 3.0, 156250.0 / 126.0);
  const double mom_err = std::max(std::abs(mom.first + 0.2), std::abs(mom.second - 50.0));
  const auto rounded = gpd_mom_from_moments(41.667, 1240.08);
  // PWM on y = (1, 2, 3, 4) by hand: b0 = 5/2, b1 = 27/32, so xi = -14/13, beta = 135/26.
  const std::vector<double> four{4.0, 2.0, 1.0, 3.0};
  const auto pwm = gpd_pwm(four);
  const double pwm_err =
      std::max(std::abs(pwm.first + 14.0 / 13.0), std::abs(pwm.second - 135.0 / 26.0));
  ok = ok && mom_err <= 1e-6 && pwm_err <= 1e-6;
  detail += fmt("MOM exact-moment error %.2g, PWM hand-derived error %.2g; "
                "MOM on rounded (41.667, 1240.08) gives (%.6f, %.4f)",
                mom_err, pwm_err, rounded.first, rounded.second);
  return {ok, detail};
}

// Every day exponential; 30 days at a longer scale put the far tail into
// the truncation window.
std::vector<DailyPmf> truncation_pool() {
  ScenarioSpec spec;
  spec.n_days = 1000;
  spec.base_params = {Family::kGamma, 1.0, 1.0 / 36.0};
  spec.regimes = {{485, {Family::kGamma, 1.0, 1.0 / 80.0}},
                  {515, {Family::kGamma, 1.0, 1.0 / 36.0}}};
  std::vector<DailyPmf> pool;
  for (const PairedDay& d : generate_panel(spec)) pool.push_back(d.nights);
  return pool;
}

Verdict truncation_artifact() {
  const auto pool = truncation_pool();
  const std::vector<int> us{60, 90, 120, 150, 180, 210, 240, 270};
  const StabilityProfile p = stability_sweep(pool, us, 1000, 108);
  bool ok = true;
  std::string detail = "xi(u):";
  for (std::size_t k = 0; k < us.size(); ++k) {
    const double xi = p.xi_by_threshold[k];
    if (us[k] <= 150) ok = ok && std::abs(xi) <= 0.07;
    if (us[k] >= 270) ok = ok && xi < -0.5;
    detail += fmt(" %d:%.3f", us[k], xi);
  }
  return {ok, detail};
}

Verdict parametric_recovery() {
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> shape(0.5, 2.0), mean(20.0, 120.0);
  double worst = 0.0, worst_grad = 0.0;
  for (Family f : kFamilies) {
    std::vector<FamilyParams> cases;
    if (f == Family::kGamma) cases.push_back({f, 0.77, 0.013});
    if (f == Family::kWeibull) cases.push_back({f, 0.85, 54.2});
    if (f == Family::kLognormal) cases.push_back({f, 3.41, 1.32});
    while (cases.size() < 51) {
      const double s = shape(rng), m = mean(rng);
      if (f == Family::kGamma) cases.push_back({f, s, s / m});
      if (f == Family::kWeibull) cases.push_back({f, s, m / std::tgamma(1 + 1 / s)});
      // Lognormal shape is sigma; mean exp(mu + sigma^2 / 2).
      if (f == Family::kLognormal) cases.push_back({f, std::log(m) - s * s / 2, s});
    }
    for (const FamilyParams& p : cases) {
      const FamilyFit fit = fit_family(view(induced_pmf(p)), f);
      worst = std::max({worst, std::abs(fit.params.a - p.a) / std::abs(p.a),
                        std::abs(fit.params.b - p.b) / std::abs(p.b)});
    }
    for (int point = 0; point < 20; ++point) {
      const FamilyParams data = cases[std::size_t(point) + 1];
      const FamilyParams at = cases[std::size_t(50 - point)];
      const PmfArray x = induced_pmf(data);
      const CrossEntropyObjective objective(view(x), f);
      const auto theta = CrossEntropyObjective::to_theta(at);
      std::array<double, 2> grad{};
      objective(theta, grad);
      for (std::size_t i = 0; i < 2; ++i) {
        auto up = theta, down = theta;
        up[i] += 1e-5;
        down[i] -= 1e-5;
        const double fd = (objective.value(up) - objective.value(down)) / 2e-5;
        worst_grad =
            std::max(worst_grad, std::abs(fd - grad[i]) / std::max(std::abs(grad[i]), 1e-3));
      }
    }
  }
  return {worst <= 0.01 && worst_grad <= 1e-4,
          fmt("max relative parameter error %.3g over 153 fits; max gradient error %.3g", worst,
              worst_grad)};
}

Verdict winner_tally() {
  ScenarioSpec spec;
  spec.n_days = 500;
  spec.base_params = {Family::kGamma, 0.77, 0.013};
  spec.noise_draws = 5000;
  spec.seed = 110;
  const auto days = generate_panel(spec);
  std::vector<DayComparison> comparisons;
  for (const PairedDay& d : days) comparisons.push_back(compare_day(d.nights));
  const WinTally t = win_tally(comparisons);
  return {2 * t.counts[0] > t.total && t.shares[2] < 0.10,
          fmt("Gamma %.3f, Weibull %.3f, Lognormal %.3f of %zu days", t.shares[0], t.shares[1],
              t.shares[2], t.total)};
}

Verdict smoother_dominance() {
  std::mt19937_64 rng(111);
  std::uniform_real_distribution<double> weight(0.3, 0.7), early(5, 40), late(100, 250),
      narrow(3, 12), wide(15, 50);
  int wins = 0;
  double worst_sum = 0.0;
  for (int day = 0; day < 100; ++day) {
    const double w = weight(rng), m1 = early(rng), s1 = narrow(rng), m2 = late(rng),
                 s2 = wide(rng);
    std::vector<double> raw(kSupportSize);
    for (std::size_t l = 0; l < kSupportSize; ++l) {
      const double z1 = (double(l) - m1) / s1, z2 = (double(l) - m2) / s2;
      raw[l] = w * std::exp(-0.5 * z1 * z1) / s1 + (1 - w) * std::exp(-0.5 * z2 * z2) / s2;
    }
    const DailyPmf x = testing::pmf_from(raw);
    const SmoothFit fit = smooth_pmf(x);
    double total = 0.0;
    for (double v : fit.fitted_pmf) total += v;
    worst_sum = std::max(worst_sum, std::abs(total - 1.0));
    const double smooth = score_smoother(fit, x).first;
    double best = INFINITY;
    for (Family f : kFamilies) {
      try {
        best = std::min(best, crps(cdf(fit_family(x, f).induced_pmf), x));
      } catch (const Error&) {
      }
    }
    if (smooth < best) ++wins;
  }
  return {wins >= 95 && worst_sum <= 1e-9,
          fmt("smoother wins %d/100 bimodal days; max |sum - 1| %.2g", wins, worst_sum)};
}

// Every output file's bytes; the manifest without its wall times.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), dir).string();
    std::string text = testing::slurp(entry.path());
    if (rel == "manifest.json") {
      auto manifest = nlohmann::ordered_json::parse(text);
      for (auto& stage : manifest["stages"]) stage.erase("wall_seconds");
      manifest["config"].erase("output_dir");
      text = manifest.dump();
    }
    out[rel] = text;
  }
  return out;
}

Verdict determinism() {
  const fs::path dir = testing::scratch_dir("acceptance_determinism");
  const fs::path panel = dir / "panel.csv";
  testing::spit(panel, panel_to_csv(generate_panel(parse_scenario(testing::kFixtureScenario))));
  RunConfig config;
  config.input_path = panel.string();
  config.stages = {Stage::kDivergence, Stage::kBreaks, Stage::kTails, Stage::kGpd,
                   Stage::kFit,        Stage::kSmooth, Stage::kScore};
  config.seed = 112;
  config.output_dir = (dir / "a").string();
  const RunOutcome a = run_pipeline(config);
  config.output_dir = (dir / "b").string();
  const RunOutcome b = run_pipeline(config);
  if (a.exit_code != 0 || b.exit_code != 0)
    return {false, "pipeline failed: " + a.message + b.message};
  const auto sa = snapshot(dir / "a"), sb = snapshot(dir / "b");

  std::string mutated = testing::slurp(panel);
  // Same value, one different byte.
  const std::size_t at = mutated.rfind('e');
  mutated[at] = 'E';
  testing::spit(dir / "mutated.csv", mutated);
  config.input_path = (dir / "mutated.csv").string();
  config.stages = {Stage::kDivergence};
  config.output_dir = (dir / "c").string();
  const RunOutcome c = run_pipeline(config);
  if (c.exit_code != 0) return {false, "mutated run failed: " + c.message};
  const auto digest = [](const fs::path& p) {
    return nlohmann::json::parse(testing::slurp(p / "manifest.json"))["input_sha256"];
  };
  const bool detected = digest(dir / "c") != digest(dir / "a");
  return {sa == sb && detected,
          fmt("%zu files identical: %s; mutation changes digest: %s", sa.size(),
              sa == sb ? "yes" : "no", detected ? "yes" : "no")};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "Wasserstein oracle equivalence", 10, wasserstein_oracle},
      {2, "Wasserstein metric properties", 5, metric_properties},
      {3, "Block bootstrap coverage", 120, bootstrap_coverage},
      {4, "Break recovery and exact SSR", 120, break_recovery},
      {5, "sup-F size and power", 300, supf_size_power},
      {6, "HAC accuracy", 30, hac_accuracy},
      {7, "GPD recovery and closed forms", 60, gpd_recovery},
      {8, "Truncation artifact in the stability sweep", 180, truncation_artifact},
      {9, "Parametric recovery and gradients", 60, parametric_recovery},
      {10, "Winner tally direction", 180, winner_tally},
      {11, "Smoother dominance on bimodal days", 120, smoother_dominance},
      {12, "End-to-end determinism", 60, determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool pass = v.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s %2d %s: %s [%.1f s of %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), seconds, c.budget_seconds);
    std::fflush(stdout);
  }
  return failed;
}
