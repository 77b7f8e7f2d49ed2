#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "csv_io.hpp"
#include "error.hpp"
#include "fixture.hpp"
#include "helpers.hpp"
#include "pipeline.hpp"
#include "synth.hpp"

using namespace leadtime;
namespace fs = std::filesystem;

namespace {

fs::path fixture_panel(const fs::path& dir) {
  const fs::path panel = dir / "panel.csv";
  testing::spit(panel, panel_to_csv(generate_panel(parse_scenario(testing::kFixtureScenario))));
  return panel;
}

RunConfig quick_config(const fs::path& input, const fs::path& output,
                       std::vector<Stage> stages) {
  RunConfig c;
  c.input_path = input.string();
  c.output_dir = output.string();
  c.stages = std::move(stages);
  c.bootstrap_replicates = 200;
  c.supf_null_draws = 200;
  c.draws_per_day = 300;
  return c;
}

std::vector<std::string> csv_column(const std::string& csv, std::size_t column) {
  std::vector<std::string> out;
  std::size_t pos = csv.find('\n') + 1;
  while (pos < csv.size()) {
    const std::size_t end = csv.find('\n', pos);
    std::string line = csv.substr(pos, end - pos);
    for (std::size_t c = 0; c < column; ++c) line = line.substr(line.find(',') + 1);
    out.push_back(line.substr(0, line.find(',')));
    pos = end + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("stage names") {
  for (Stage s : kStages) CHECK(parse_stage(to_string(s)) == s);
  CHECK_FALSE(parse_stage("plot").has_value());
}

TEST_CASE("config validation") {
  RunConfig c;
  CHECK_THROWS_AS(validate_config(c), Error);
  c.stages = {Stage::kDivergence};
  c.output_dir = "/tmp/x";
  CHECK_THROWS_AS(validate_config(c), Error);
  c.input_path = "in.csv";
  CHECK_NOTHROW(validate_config(c));
  c.trim = 0.5;
  CHECK_THROWS_AS(validate_config(c), Error);
  c.trim = 0.05;
  c.gpd_thresholds = {90, 60};
  CHECK_THROWS_AS(validate_config(c), Error);
  c.gpd_thresholds = {60};
  c.tail_thresholds = {365};
  CHECK_THROWS_AS(validate_config(c), Error);
  c.tail_thresholds = {7};
  c.bootstrap_replicates = 99;
  CHECK_THROWS_AS(validate_config(c), Error);
  c.bootstrap_replicates = 100;
  c.stages = {Stage::kSimulate};
  CHECK_THROWS_AS(validate_config(c), Error);
}

TEST_CASE("divergence of identical pairs is zero") {
  const fs::path dir = testing::scratch_dir("identical");
  ScenarioSpec spec;
  spec.n_days = 10;
  spec.base_params = {Family::kGamma, 0.77, 0.013};
  testing::spit(dir / "in.csv", panel_to_csv(generate_panel(spec)));
  const RunOutcome r = run_pipeline(quick_config(dir / "in.csv", dir / "out", {Stage::kDivergence}));
  REQUIRE(r.exit_code == kExitOk);
  for (const std::string& w : csv_column(testing::slurp(dir / "out" / "divergence.csv"), 1))
    CHECK(w == "0");
}

TEST_CASE("simulate, divergence and breaks end to end") {
  const fs::path dir = testing::scratch_dir("e2e");
  testing::spit(dir / "scenario.json", R"({
    "n_days": 300, "family": "gamma", "base_params": {"a": 1, "b": 0.05},
    "regimes": [{"start": 150, "params": {"a": 1, "b": 0.025}}],
    "noise_draws": 3000, "gbv_shift": 0.3})");
  RunConfig c = quick_config("", dir / "out", {Stage::kSimulate, Stage::kDivergence, Stage::kBreaks});
  c.scenario_path = (dir / "scenario.json").string();
  const RunOutcome r = run_pipeline(c);
  REQUIRE(r.exit_code == kExitOk);
  const auto manifest = nlohmann::json::parse(testing::slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["stages"].size() == 3);
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["seed"] == 42);
  CHECK(manifest["input_sha256"].get<std::string>().size() == 64);
  const auto breaks = nlohmann::json::parse(testing::slurp(dir / "out" / "breaks.json"));
  REQUIRE(breaks["breaks"].size() >= 1);
  bool near = false;
  for (const auto& b : breaks["breaks"])
    near = near || std::abs(b["index"].get<double>() - 150.0) <= 5.0;
  CHECK(near);
  CHECK(fs::exists(dir / "out" / "panel.csv"));
  CHECK(fs::exists(dir / "out" / "segments.csv"));
  CHECK(fs::exists(dir / "out" / "plots" / "w1_breaks.csv"));
  CHECK(parse_panel_csv(testing::slurp(dir / "out" / "panel.csv")).ok());
}

TEST_CASE("invalid input exits 2 with row diagnostics") {
  const fs::path dir = testing::scratch_dir("invalid");
  testing::spit(dir / "bad.csv",
                "date,lead,nights_share,gbv_share\n2020-01-01,0,1,1\n2020-01-02,400,1,1\n");
  const RunOutcome r = run_pipeline(quick_config(dir / "bad.csv", dir / "out", {Stage::kDivergence}));
  CHECK(r.exit_code == kExitInvalidInput);
  REQUIRE_FALSE(r.diagnostics.empty());
  CHECK(r.diagnostics[0].find("line 3") != std::string::npos);

  const RunOutcome missing =
      run_pipeline(quick_config(dir / "nope.csv", dir / "out", {Stage::kDivergence}));
  CHECK(missing.exit_code == kExitInvalidInput);

  RunConfig bad_scenario = quick_config("", dir / "out2", {Stage::kSimulate});
  testing::spit(dir / "s.json", R"({"n_days": -1})");
  bad_scenario.scenario_path = (dir / "s.json").string();
  const RunOutcome s = run_pipeline(bad_scenario);
  CHECK(s.exit_code == kExitInvalidInput);
  CHECK(s.failed_stage == "simulate");
}

TEST_CASE("stage failure exits 3 and keeps earlier outputs") {
  const fs::path dir = testing::scratch_dir("failure");
  ScenarioSpec spec;
  spec.n_days = 10;
  spec.base_params = {Family::kGamma, 0.77, 0.013};
  spec.noise_draws = 100;
  testing::spit(dir / "in.csv", panel_to_csv(generate_panel(spec)));
  RunConfig c = quick_config(dir / "in.csv", dir / "out", {Stage::kDivergence, Stage::kBreaks});
  c.trim = 0.2;
  const RunOutcome r = run_pipeline(c);
  CHECK(r.exit_code == kExitStageFailed);
  CHECK(r.failed_stage == "breaks");
  CHECK(r.completed_stages == std::vector<std::string>{"divergence"});
  CHECK(fs::exists(dir / "out" / "divergence.csv"));
  const auto manifest = nlohmann::json::parse(testing::slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["status"] == "failed");
  CHECK(manifest["failed_stage"] == "breaks");
}

TEST_CASE("stage isolation and determinism") {
  const fs::path dir = testing::scratch_dir("isolation");
  const fs::path panel = fixture_panel(dir);
  const std::vector<Stage> all{Stage::kDivergence, Stage::kBreaks, Stage::kTails, Stage::kGpd};
  REQUIRE(run_pipeline(quick_config(panel, dir / "all", all)).exit_code == kExitOk);
  REQUIRE(run_pipeline(quick_config(panel, dir / "again", all)).exit_code == kExitOk);
  for (const char* f : {"divergence.csv", "divergence_summary.json", "breaks.json", "segments.csv",
                        "tails.csv", "tail_summary.json", "gpd.csv", "plots/xi_stability.csv",
                        "plots/pooled_pmf.csv", "plots/tail_ratio.csv", "plots/w1_breaks.csv"})
    CHECK_MESSAGE(testing::slurp(dir / "all" / f) == testing::slurp(dir / "again" / f), f);

  for (Stage alone : all) {
    const std::string name(to_string(alone));
    const fs::path out = dir / ("only_" + name);
    REQUIRE(run_pipeline(quick_config(panel, out, {alone})).exit_code == kExitOk);
    for (const auto& entry : fs::recursive_directory_iterator(out)) {
      if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
      const fs::path rel = fs::relative(entry.path(), out);
      CHECK_MESSAGE(testing::slurp(entry.path()) == testing::slurp(dir / "all" / rel),
                    rel.string());
    }
  }
  // Breaks alone must not emit divergence files.
  CHECK_FALSE(fs::exists(dir / "only_breaks" / "divergence.csv"));
}

TEST_CASE("fit, smooth and score on a small panel") {
  const fs::path dir = testing::scratch_dir("scores");
  ScenarioSpec spec;
  spec.n_days = 6;
  spec.base_params = {Family::kGamma, 0.77, 0.013};
  spec.noise_draws = 5000;
  testing::spit(dir / "in.csv", panel_to_csv(generate_panel(spec)));
  const RunOutcome r = run_pipeline(
      quick_config(dir / "in.csv", dir / "out", {Stage::kFit, Stage::kSmooth, Stage::kScore}));
  REQUIRE(r.exit_code == kExitOk);
  const std::string fits = testing::slurp(dir / "out" / "fits.csv");
  CHECK(fits.rfind("date,metric,family,a,b,cross_entropy,converged\n", 0) == 0);
  CHECK(std::count(fits.begin(), fits.end(), '\n') == 1 + 6 * 2 * 3);
  const std::string scores = testing::slurp(dir / "out" / "scores.csv");
  CHECK(scores.rfind("date,metric,model,crps,kld,in_sample\n", 0) == 0);
  CHECK(scores.find(",smoother,") != std::string::npos);
  const auto tally = nlohmann::json::parse(testing::slurp(dir / "out" / "win_tally.json"));
  CHECK(tally.is_object());
  CHECK(fs::exists(dir / "out" / "smoother.csv"));
  CHECK(fs::exists(dir / "out" / "plots" / "ce_difference_hist.csv"));
}

TEST_CASE("plot bundles") {
  StageOutputs outputs;
  CHECK_THROWS_AS(emit_plot_data(outputs, {"pooled_pmf"}), Error);
  try {
    emit_plot_data(outputs, {"xi_stability"});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingStageOutput);
  }

  // Two mirrored days: pooled nights and gbv coincide.
  const DailyPmf a = testing::pmf_from({0.2, 0.8});
  const DailyPmf b = testing::pmf_from({0.8, 0.2});
  outputs.pooled_nights = pool_days(std::vector<DailyPmf>{a, b});
  outputs.pooled_gbv = pool_days(std::vector<DailyPmf>{b, a});
  const std::string pooled = emit_plot_data(outputs, {"pooled_pmf"})["pooled_pmf"];
  CHECK(csv_column(pooled, 1) == csv_column(pooled, 2));
  CHECK(csv_column(pooled, 1).size() == kSupportSize);

  // Every difference zero: one bin holds the full count.
  outputs.comparisons = std::vector<DayComparison>(7);
  for (auto& c : *outputs.comparisons) {
    c.ln_minus_gamma = 0.0;
    c.wei_minus_gamma = 0.0;
  }
  const std::string hist = emit_plot_data(outputs, {"ce_difference_hist"})["ce_difference_hist"];
  const auto lower = csv_column(hist, 3);
  const auto count = csv_column(hist, 5);
  int nonzero = 0;
  for (std::size_t i = 0; i < count.size(); ++i) {
    if (count[i] == "0") continue;
    ++nonzero;
    CHECK(count[i] == "7");
    CHECK(lower[i] == "0");
  }
  CHECK(nonzero == 2);  // ln and wei for nights; gbv rows empty

  CHECK(histogram_bin(0.0) == 10);
  CHECK(histogram_bin(-0.05) == 0);
  CHECK(histogram_bin(-0.0500001) == -1);
  CHECK(histogram_bin(0.25) == 60);
  CHECK(histogram_bin(0.2499) == 59);
  CHECK(histogram_bin(0.005) == 11);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
