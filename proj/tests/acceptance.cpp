// Acceptance suite: one pass/fail line per criterion. Exits nonzero when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oracles.hpp"
#include "uqbench/aggregate.hpp"
#include "uqbench/convert.hpp"
#include "uqbench/metrics_classification.hpp"
#include "uqbench/metrics_regression.hpp"
#include "uqbench/ndjson.hpp"
#include "uqbench/recalibrate.hpp"
#include "uqbench/report.hpp"
#include "uqbench/rng.hpp"
#include "uqbench/stratify.hpp"
#include "uqbench/synth.hpp"

namespace fs = std::filesystem;
using namespace uqbench;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool ok,
            const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", number,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.5g", v);
  return buf;
}

bool within(double value, double target, double tolerance) {
  return std::abs(value - target) <= tolerance;
}

// --- criterion 1: calibrated classifier oracle -------------------------------

void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  const auto preds = gen_classifier(100000, 1.0, 3.0, 1001);
  const double v_ece = ece(preds).value;
  const double v_smece = smece(preds);
  const double v_ace = ace(preds).value;
  const double v_vce = vce(preds).value;
  const double v_uce = uce(preds).value;
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  const bool ok = v_ece <= 0.01 && v_smece <= 0.01 && v_ace <= 0.02 &&
                  v_vce <= 0.015 && v_uce <= 0.02 && seconds < 10.0;
  report(1, "calibrated-classifier oracle", ok,
         "ece=" + fmt(v_ece) + " smece=" + fmt(v_smece) + " ace=" + fmt(v_ace) +
             " vce=" + fmt(v_vce) + " uce=" + fmt(v_uce) +
             " runtime=" + fmt(seconds) + "s; bounds 0.01/0.01/0.02/0.015/0.02");
}

// --- criterion 2: temperature recovery ----------------------------------------

void criterion_2() {
  const auto cal = gen_classifier(50000, 2.0, 3.0, 1002);
  const auto held_out = gen_classifier(50000, 2.0, 3.0, 1003);
  const TemperatureFit fit = fit_temperature(cal);
  std::vector<ClassPrediction> rescaled;
  rescaled.reserve(held_out.size());
  for (const auto& r : held_out) {
    rescaled.push_back(apply_temperature(fit.model, r));
  }
  const double post_ece = ece(rescaled).value;
  const bool ok = within(fit.model.t, 2.0, 0.06) && post_ece <= 0.01;
  report(2, "temperature recovery", ok,
         "fitted T=" + fmt(fit.model.t) + " (target 2 +/- 3%), held-out ece=" +
             fmt(post_ece) + " (bound 0.01)");
}

// --- criterion 3: regression miscalibration and variance scaling ---------------

void criterion_3() {
  const auto cal = gen_regression(100000, 1.25, 0.5, 2.0, 1004);
  const auto test = gen_regression(100000, 1.25, 0.5, 2.0, 1005);

  const double pre_ence = ence(test).value;
  const double pre_picp = picp(test, kOneSigmaCoverage);
  const double analytic = (2.0 * std_normal_cdf(0.8) - 1.0) / kOneSigmaCoverage;

  const VarianceScaleFit fit = fit_variance_scale(cal);
  std::vector<GaussianPrediction> scaled;
  scaled.reserve(test.size());
  for (const auto& g : test) scaled.push_back(apply_variance_scale(fit.model, g));
  const double post_ence = ence(scaled).value;
  const double post_picp = picp(scaled, kOneSigmaCoverage);

  const bool ok = within(pre_ence, 0.25, 0.02) && within(pre_picp, analytic, 0.01) &&
                  within(pre_picp, 0.844, 0.011) && within(fit.model.s, 1.25, 0.01) &&
                  post_ence <= 0.02 && within(post_picp, 1.0, 0.01);
  report(3, "regression miscalibration and variance scaling", ok,
         "ence=" + fmt(pre_ence) + " (0.25 +/- 0.02), picp=" + fmt(pre_picp) +
             " (0.844 +/- 0.01), fitted s=" + fmt(fit.model.s) +
             " (1.25 +/- 0.01), post ence=" + fmt(post_ence) +
             " (<= 0.02), post picp=" + fmt(post_picp) + " (1 +/- 0.01)");
}

// --- criterion 4: conformal coverage guarantee ----------------------------------

struct CoverageSummary {
  double mean = 0.0;
  double se = 0.0;
};

CoverageSummary summarize(const std::vector<double>& coverages) {
  double sum = 0.0;
  for (double c : coverages) sum += c;
  const double mean = sum / static_cast<double>(coverages.size());
  double var = 0.0;
  for (double c : coverages) var += (c - mean) * (c - mean);
  var /= static_cast<double>(coverages.size()) - 1.0;
  return {mean, std::sqrt(var / static_cast<double>(coverages.size()))};
}

void criterion_4() {
  constexpr int kTrials = 200;
  constexpr std::size_t kCal = 500;
  constexpr std::size_t kTest = 500;
  const double alpha = 1.0 - kTwoSigmaPair.central_coverage();
  const CounterRng rng{1006};

  const auto make_quantiles = [&](std::uint64_t trial, std::uint64_t half,
                                  std::size_t n) {
    std::vector<QuantileSet> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double mu = 10.0 * rng.normal(trial, half, i, 0);
      const double sigma = 0.5 + 1.5 * rng.uniform(trial, half, i, 1);
      QuantileSet q;
      q.id = "q" + std::to_string(i);
      q.measurand = "y";
      q.levels = {kTwoSigmaPair.lo, kTwoSigmaPair.hi};
      // Understated spread: the conformal offset has work to do.
      const double z = std_normal_quantile(kTwoSigmaPair.hi);
      q.values = {mu - 0.7 * sigma * z, mu + 0.7 * sigma * z};
      q.truth = mu + sigma * rng.normal(trial, half, i, 2);
      out.push_back(std::move(q));
    }
    return out;
  };

  std::vector<double> cqr_coverage(kTrials), cmap_coverage(kTrials);
  for (int trial = 0; trial < kTrials; ++trial) {
    const auto cal = make_quantiles(trial, 0, kCal);
    const auto test = make_quantiles(trial, 1, kTest);
    const ConformalOffset offset = cqr_fit(cal, kTwoSigmaPair);
    std::size_t inside = 0;
    for (const auto& q : test) {
      if (cqr_apply(offset, q, kTwoSigmaPair).contains(*q.truth)) ++inside;
    }
    cqr_coverage[trial] = static_cast<double>(inside) / kTest;

    // Same harness through the Gaussian route.
    std::vector<GaussianPrediction> gcal, gtest;
    for (const auto& q : cal) {
      GaussianPrediction g = quantiles_to_gaussian(q, kTwoSigmaPair);
      gcal.push_back(g);
    }
    for (const auto& q : test) gtest.push_back(quantiles_to_gaussian(q, kTwoSigmaPair));
    const ConformalOffset goffset =
        cmap_fit(gcal, kTwoSigmaPair.central_coverage());
    inside = 0;
    for (const auto& g : gtest) {
      if (cmap_apply(goffset, g).contains(*g.truth)) ++inside;
    }
    cmap_coverage[trial] = static_cast<double>(inside) / kTest;
  }

  const CoverageSummary cqr_sum = summarize(cqr_coverage);
  const CoverageSummary cmap_sum = summarize(cmap_coverage);
  const double lo = 1.0 - alpha;
  const double hi = 1.0 - alpha + 1.0 / (static_cast<double>(kCal) + 1.0);
  const bool cqr_ok = cqr_sum.mean >= lo - 3.0 * cqr_sum.se &&
                      cqr_sum.mean <= hi + 3.0 * cqr_sum.se;
  const bool cmap_ok = cmap_sum.mean >= lo - 3.0 * cmap_sum.se &&
                       cmap_sum.mean <= hi + 3.0 * cmap_sum.se;
  report(4, "split-conformal coverage guarantee", cqr_ok && cmap_ok,
         "cqr mean=" + fmt(cqr_sum.mean) + " se=" + fmt(cqr_sum.se) +
             ", cmap mean=" + fmt(cmap_sum.mean) + " se=" + fmt(cmap_sum.se) +
             ", window [" + fmt(lo) + ", " + fmt(hi) + "] +/- 3se");
}

// --- criterion 5: CRPS closed form -------------------------------------------------

void criterion_5() {
  const CounterRng rng{1007};
  double max_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double mean = 5.0 * rng.normal(trial, 0);
    const double sigma = 0.2 + 2.0 * rng.uniform(trial, 1);
    const double truth = mean + 4.0 * sigma * (rng.uniform(trial, 2) - 0.5);
    const double gap = std::abs(crps_gaussian(mean, sigma * sigma, truth) -
                                oracles::crps_quadrature(mean, sigma * sigma, truth));
    max_gap = std::max(max_gap, gap);
  }
  const double at_mean = crps_gaussian(0.0, 1.0, 0.0);
  const bool ok = max_gap <= 1e-6 && within(at_mean, 0.23370, 1e-5);
  report(5, "crps closed form vs quadrature", ok,
         "max |closed - quadrature|=" + fmt(max_gap) +
             " (<= 1e-6), crps(y=mu, sigma=1)=" + fmt(at_mean) +
             " (0.23370 +/- 1e-5)");
}

// --- criterion 6: PAVA oracle and Venn-ABERS ---------------------------------------

void criterion_6() {
  const CounterRng rng{1008};
  bool pava_ok = true;
  for (int trial = 0; trial < 1000 && pava_ok; ++trial) {
    const int n = 1 + static_cast<int>(rng.bits(trial, 0) % 12);
    std::vector<double> y(n), w(n);
    for (int i = 0; i < n; ++i) {
      y[i] = 4.0 * rng.normal(trial, 1, i);
      w[i] = 0.25 + 2.0 * rng.uniform(trial, 2, i);
    }
    const auto fast = pava(y, w);
    const auto exact = oracles::monotone_fit_dp(y, w);
    for (int i = 0; i < n; ++i) {
      if (fast[i] != exact[i]) pava_ok = false;
    }
  }

  // Ordered bounds on random calibration sets and scores.
  bool ordered = true;
  const auto cal_records = gen_classifier(50, 1.3, 3.0, 1009);
  std::vector<double> scores;
  scores.reserve(10000);
  for (int i = 0; i < 10000; ++i) scores.push_back(rng.uniform(7, i));
  const auto bounds = venn_abers(cal_records, scores);
  for (const auto& b : bounds) {
    if (!(b.p0 <= b.p1 + 1e-12 && b.p0 >= 0.0 && b.p1 <= 1.0)) ordered = false;
  }

  // Jaccard point probabilities stay calibrated on the calibrated oracle.
  const auto cal = gen_classifier(2000, 1.0, 3.0, 1010);
  const auto test = gen_classifier(5000, 1.0, 3.0, 1011);
  std::vector<double> test_scores;
  test_scores.reserve(test.size());
  for (const auto& r : test) test_scores.push_back(r.probs[1]);
  const auto va = venn_abers(cal, test_scores);
  std::vector<ClassPrediction> va_preds;
  va_preds.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    ClassPrediction p;
    p.id = test[i].id;
    p.probs = {1.0 - va[i].p, va[i].p};
    p.label = test[i].label;
    va_preds.push_back(std::move(p));
  }
  const double va_ece = ece(va_preds).value;

  const bool ok = pava_ok && ordered && va_ece <= 0.02;
  report(6, "pava oracle equality and venn-abers", ok,
         std::string("pava exact on 1000 instances: ") +
             (pava_ok ? "yes" : "no") + ", p0<=p1 on 10^4 cases: " +
             (ordered ? "yes" : "no") + ", point-probability ece=" +
             fmt(va_ece) + " (<= 0.02)");
}

// --- criterion 7: aggregation recovery ----------------------------------------------

void criterion_7() {
  const auto members = gen_members_regression(10000, 5, 1.0, 1.0, 1012);
  double epi = 0.0, ale = 0.0;
  for (const auto& m : members) {
    const auto agg = aggregate_regression(m);
    epi += agg.var_epistemic;
    ale += agg.var_aleatoric;
  }
  const double n = static_cast<double>(members.size());
  epi /= n;
  ale /= n;

  MemberOutputsClassification zero;
  zero.id = "det";
  zero.members.push_back({{0.7, -0.7}, {0.0, 0.0}});
  zero.members.push_back({{-0.5, 0.5}, {0.0, 0.0}});
  const auto a = aggregate_classification(zero, 10, CounterRng{1});
  const auto b = aggregate_classification(zero, 5000, CounterRng{987654321});
  const bool deterministic = a.total_probs == b.total_probs &&
                             a.h_total == b.h_total && a.h_ale == b.h_ale;

  const bool ok = within(epi, 0.8, 0.03) && within(ale, 1.0, 0.03) && deterministic;
  report(7, "aggregation recovery and determinism", ok,
         "mean var_epi=" + fmt(epi) + " (0.8 +/- 0.03), mean var_ale=" +
             fmt(ale) + " (1.0 +/- 0.03), zero-variance aggregation exact: " +
             (deterministic ? "yes" : "no"));
}

// --- criterion 8: MASE arithmetic --------------------------------------------------

void criterion_8() {
  GaussianPrediction sbp;
  sbp.id = "a";
  sbp.measurand = "sbp";
  sbp.mean = 0.0;
  sbp.variance = 1.0;
  sbp.truth = 10.53;
  GaussianPrediction dbp = sbp;
  dbp.measurand = "dbp";
  dbp.truth = 6.83;
  const double sbp_ratio = mase({sbp}, 14.91);
  const double dbp_ratio = mase({dbp}, 9.52);
  const double sbp_2dp = std::round(sbp_ratio * 100.0) / 100.0;
  const double dbp_2dp = std::round(dbp_ratio * 100.0) / 100.0;
  const bool ok = sbp_2dp == 0.71 && dbp_2dp == 0.72;
  report(8, "mase arithmetic reproduction", ok,
         "10.53/14.91=" + fmt(sbp_ratio) + " -> " + fmt(sbp_2dp) +
             " (0.71), 6.83/9.52=" + fmt(dbp_ratio) + " -> " + fmt(dbp_2dp) +
             " (0.72)");
}

// --- criterion 9: CLI determinism ---------------------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool run_ok(const std::string& args) {
  const std::string cmd = std::string(UQBENCH_CLI_PATH) + " " + args;
  return std::system(cmd.c_str()) == 0;
}

void criterion_9() {
  const fs::path dir = fs::temp_directory_path() / "uqbench_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto p = [&](const std::string& name) { return (dir / name).string(); };

  bool ok = true;
  std::string failed;
  const auto check_identical = [&](const std::string& what,
                                   const std::string& args_a,
                                   const std::string& args_b,
                                   const fs::path& out_a,
                                   const fs::path& out_b) {
    if (!run_ok(args_a) || !run_ok(args_b) || slurp(out_a) != slurp(out_b) ||
        slurp(out_a).empty()) {
      ok = false;
      if (!failed.empty()) failed += ", ";
      failed += what;
    }
  };

  check_identical("synth-class",
                  "synth --kind class --n 2000 --seed 5 --out " + p("sc_a"),
                  "synth --kind class --n 2000 --seed 5 --out " + p("sc_b"),
                  p("sc_a"), p("sc_b"));
  check_identical("synth-reg",
                  "synth --kind reg --n 2000 --seed 5 --out " + p("sr_a"),
                  "synth --kind reg --n 2000 --seed 5 --out " + p("sr_b"),
                  p("sr_a"), p("sr_b"));
  run_ok("synth --kind members-class --n 300 --seed 6 --out " + p("mc"));
  run_ok("synth --kind members-reg --n 300 --seed 6 --out " + p("mr"));
  check_identical("aggregate-class-threads",
                  "aggregate " + p("mc") + " --kind class --seed 3 --threads 1 --out " + p("ac_a"),
                  "aggregate " + p("mc") + " --kind class --seed 3 --threads 4 --out " + p("ac_b"),
                  p("ac_a"), p("ac_b"));
  check_identical("aggregate-reg-rerun",
                  "aggregate " + p("mr") + " --kind reg --seed 3 --out " + p("ar_a"),
                  "aggregate " + p("mr") + " --kind reg --seed 3 --out " + p("ar_b"),
                  p("ar_a"), p("ar_b"));
  check_identical(
      "recalibrate-ts",
      "recalibrate " + p("sc_a") + " --method ts --cal " + p("sc_a") +
          " --out " + p("ts_a") + " --model-out " + p("tsm_a"),
      "recalibrate " + p("sc_a") + " --method ts --cal " + p("sc_a") +
          " --out " + p("ts_b") + " --model-out " + p("tsm_b"),
      p("ts_a"), p("ts_b"));
  check_identical(
      "evaluate-bootstrap-threads",
      "evaluate " + p("sc_a") +
          " --metrics ece,nll --bootstrap 200 --seed 11 --threads 1 "
          "--stratify true-class --out " + p("ev_a"),
      "evaluate " + p("sc_a") +
          " --metrics ece,nll --bootstrap 200 --seed 11 --threads 4 "
          "--stratify true-class --out " + p("ev_b"),
      p("ev_a"), p("ev_b"));
  check_identical("diagram",
                  "diagram " + p("sc_a") + " --type reliability --out " + p("dg_a"),
                  "diagram " + p("sc_a") + " --type reliability --out " + p("dg_b"),
                  p("dg_a"), p("dg_b"));
  check_identical("compare",
                  "compare " + p("sc_a") + " " + p("sc_a") +
                      " --metric ece --B 150 --seed 2 --threads 1 --out " + p("cp_a"),
                  "compare " + p("sc_a") + " " + p("sc_a") +
                      " --metric ece --B 150 --seed 2 --threads 4 --out " + p("cp_b"),
                  p("cp_a"), p("cp_b"));

  report(9, "CLI determinism across reruns and thread counts", ok,
         ok ? "all commands byte-identical" : "mismatch in: " + failed);
}

// --- criterion 10: stratified evaluation ---------------------------------------------

void criterion_10() {
  auto records = gen_classifier(20000, 1.0, 3.0, 1013, "calibrated");
  const auto off = gen_classifier(20000, 2.5, 3.0, 1014, "miscalibrated");
  records.insert(records.end(), off.begin(), off.end());
  LabeledSplit split;
  split.kind = PredictionKind::kClassification;
  split.classification = records;

  EvalOptions opts;
  opts.metrics = {"ece"};
  const StratifiedEval two = stratified_evaluate(split, StratifyKey::kGroup, opts);
  const double global = *two.global.metrics.at("ece");
  const double lo = *two.groups.at("calibrated").metrics.at("ece");
  const double hi = *two.groups.at("miscalibrated").metrics.at("ece");
  const bool straddle = lo < global && global < hi;

  // A constant stratifier must reproduce the global numbers bit for bit.
  LabeledSplit constant;
  constant.kind = PredictionKind::kClassification;
  constant.classification = gen_classifier(5000, 1.6, 3.0, 1015, "all");
  EvalOptions full;  // defaults: the whole classification metric set
  const StratifiedEval one =
      stratified_evaluate(constant, StratifyKey::kGroup, full);
  bool bitwise = one.groups.size() == 1;
  if (bitwise) {
    for (const auto& [name, value] : one.global.metrics) {
      const auto& group_value = one.groups.at("all").metrics.at(name);
      if (!value || !group_value || *value != *group_value) bitwise = false;
    }
  }

  report(10, "stratified evaluation", straddle && bitwise,
         "group ece " + fmt(lo) + " < global " + fmt(global) + " < " + fmt(hi) +
             ": " + (straddle ? "yes" : "no") +
             ", constant stratifier bit-identical: " + (bitwise ? "yes" : "no"));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (g_failures > 0) {
    std::printf("%d of 10 criteria failed\n", g_failures);
    return 1;
  }
  std::printf("all 10 criteria passed\n");
  return 0;
}
