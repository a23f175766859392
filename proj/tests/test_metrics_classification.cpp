#include <cmath>

#include "doctest.h"
#include "uqbench/metrics_classification.hpp"
#include "uqbench/recalibrate.hpp"
#include "uqbench/rng.hpp"
#include "uqbench/synth.hpp"

using namespace uqbench;

namespace {

ClassPrediction record(double p1, int label) {
  static int counter = 0;
  ClassPrediction p;
  p.id = "r" + std::to_string(counter++);
  p.probs = {1.0 - p1, p1};
  p.label = label;
  return p;
}

}  // namespace

TEST_CASE("ece hand cases") {
  std::vector<ClassPrediction> perfect;
  for (int i = 0; i < 5; ++i) perfect.push_back(record(1.0, 1));
  CHECK(ece(perfect).value == doctest::Approx(0.0).epsilon(1e-9));

  const std::vector<ClassPrediction> pair = {record(0.8, 1), record(0.8, 0)};
  CHECK(ece(pair).value == doctest::Approx(0.3));

  CHECK_THROWS_AS(ece({}), ValidationError);
}

TEST_CASE("ece with one bin is the global gap") {
  const auto preds = gen_classifier(4000, 1.7, 3.0, 7);
  double conf_sum = 0.0, acc_sum = 0.0;
  for (const auto& p : preds) {
    conf_sum += p.confidence();
    acc_sum += p.predicted_class() == *p.label ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(preds.size());
  CHECK(ece(preds, 1).value ==
        doctest::Approx(std::abs(acc_sum / n - conf_sum / n)).epsilon(1e-12));
}

TEST_CASE("bin stats recombine to the global means") {
  const auto preds = gen_classifier(20000, 1.3, 3.0, 8);
  const auto binned = ece(preds);
  double count = 0.0, conf = 0.0, acc = 0.0;
  for (const auto& b : binned.bins) {
    count += static_cast<double>(b.count);
    conf += static_cast<double>(b.count) * b.conf;
    acc += static_cast<double>(b.count) * b.acc;
  }
  double conf_sum = 0.0, acc_sum = 0.0;
  for (const auto& p : preds) {
    conf_sum += p.confidence();
    acc_sum += p.predicted_class() == *p.label ? 1.0 : 0.0;
  }
  CHECK(count == static_cast<double>(preds.size()));
  CHECK(conf / count == doctest::Approx(conf_sum / count).epsilon(1e-12));
  CHECK(acc / count == doctest::Approx(acc_sum / count).epsilon(1e-12));
}

TEST_CASE("ace hand cases") {
  std::vector<ClassPrediction> perfect;
  for (int i = 0; i < 6; ++i) perfect.push_back(record(i < 3 ? 0.0 : 1.0, i < 3 ? 0 : 1));
  CHECK(ace(perfect).value == doctest::Approx(0.0).epsilon(1e-9));

  // R = 1 collapses to the per-class global gap.
  const std::vector<ClassPrediction> set = {record(0.8, 1), record(0.6, 0),
                                            record(0.3, 1), record(0.9, 1)};
  const double mean_p1 = (0.8 + 0.6 + 0.3 + 0.9) / 4.0;
  const double rate1 = 3.0 / 4.0;
  const double expected =
      (std::abs((1.0 - rate1) - (1.0 - mean_p1)) + std::abs(rate1 - mean_p1)) / 2.0;
  CHECK(ace(set, 1).value == doctest::Approx(expected).epsilon(1e-12));

  // More ranges than records: reduced with a warning.
  const AceResult reduced = ace(set, 50);
  CHECK(reduced.ranges_used == 4);
  CHECK(reduced.warning.has_value());
}

TEST_CASE("smece constant predictors") {
  // Constant 0.5 with balanced labels: residuals cancel.
  std::vector<ClassPrediction> balanced;
  for (int i = 0; i < 1000; ++i) balanced.push_back(record(0.5, i % 2));
  CHECK(smece(balanced) <= 0.01);

  // Constant 1.0, half wrong: the smoothed gap stays 0.5 at every width.
  std::vector<ClassPrediction> half;
  for (int i = 0; i < 1000; ++i) half.push_back(record(1.0, i % 2));
  CHECK(smece(half) == doctest::Approx(0.5).epsilon(0.04));
  CHECK(ece(half).value == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("smece is small on the calibrated oracle") {
  const auto preds = gen_classifier(50000, 1.0, 3.0, 13);
  CHECK(smece(preds) <= 0.01);
  std::vector<ClassPrediction> three = {record(0.5, 0)};
  three[0].probs = {0.2, 0.3, 0.5};
  CHECK_THROWS_AS(smece(three), ValidationError);
}

TEST_CASE("uce hand cases") {
  // Entropy 0.6 with error rate exactly 0.3 is perfectly calibrated under
  // the halved convention. Find p with normalized entropy 0.6 by bisection.
  double lo = 0.5, hi = 1.0;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    (normalized_entropy({mid, 1.0 - mid}) > 0.6 ? lo : hi) = mid;
  }
  const double p = 0.5 * (lo + hi);
  std::vector<ClassPrediction> preds;
  for (int i = 0; i < 10; ++i) preds.push_back(record(p, i < 7 ? 1 : 0));
  CHECK(uce(preds).value == doctest::Approx(0.0).epsilon(1e-6));

  std::vector<ClassPrediction> onehot;
  for (int i = 0; i < 4; ++i) onehot.push_back(record(1.0, 1));
  CHECK(uce(onehot).value == doctest::Approx(0.0).epsilon(1e-9));

  std::vector<ClassPrediction> uniform;
  for (int i = 0; i < 4; ++i) uniform.push_back(record(0.5, 1));
  for (auto& r : uniform) r.probs = {0.5, 0.5};
  // argmax lands on class 0, so every record is wrong.
  CHECK(uce(uniform).value == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("vce hand cases") {
  std::vector<ClassPrediction> uniform;
  for (int i = 0; i < 10; ++i) uniform.push_back(record(0.5, i % 2));
  CHECK(vce(uniform).value == doctest::Approx(0.0).epsilon(1e-9));

  // All records at [0.9, 0.1], 9 of 10 correct: observed entropy matches.
  std::vector<ClassPrediction> matched;
  for (int i = 0; i < 10; ++i) matched.push_back(record(0.1, i < 9 ? 0 : 1));
  CHECK(vce(matched).value == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("nll hand cases") {
  std::vector<ClassPrediction> confident;
  for (int i = 0; i < 3; ++i) confident.push_back(record(1.0, 1));
  CHECK(nll(confident) == doctest::Approx(0.0).epsilon(1e-6));

  std::vector<ClassPrediction> flat;
  for (int i = 0; i < 4; ++i) flat.push_back(record(0.5, i % 2));
  CHECK(nll(flat) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  for (auto& r : flat) r.label = 0;
  CHECK(nll(flat) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("auc hand cases and tie handling") {
  std::vector<ClassPrediction> separated = {record(0.9, 1), record(0.8, 1),
                                            record(0.2, 0), record(0.1, 0)};
  CHECK(auc(separated) == doctest::Approx(1.0));

  std::vector<ClassPrediction> ties = {record(0.5, 1), record(0.5, 0),
                                       record(0.5, 1), record(0.5, 0)};
  CHECK(auc(ties) == doctest::Approx(0.5));

  std::vector<ClassPrediction> mixed = {record(0.9, 1), record(0.4, 1),
                                        record(0.5, 0)};
  CHECK(auc(mixed) == doctest::Approx(0.5));

  std::vector<ClassPrediction> single = {record(0.9, 1), record(0.4, 1)};
  CHECK_THROWS_AS(auc(single), ComputationError);
}

TEST_CASE("auc is invariant under monotone score transforms") {
  const auto preds = gen_classifier(2000, 1.5, 3.0, 21);
  const double base = auc(preds);
  std::vector<ClassPrediction> warped = preds;
  for (auto& r : warped) {
    const double s = r.probs[1];
    const double w = s * s * s;  // strictly monotone on [0, 1]
    r.probs = {1.0 - w, w};
    r.logits.reset();
  }
  CHECK(auc(warped) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("threshold metrics hand cases") {
  std::vector<ClassPrediction> perfect = {record(0.9, 1), record(0.8, 1),
                                          record(0.1, 0), record(0.2, 0)};
  const ThresholdMetrics ok = threshold_metrics(perfect, 0.5);
  CHECK(ok.f1 == doctest::Approx(1.0));
  CHECK(ok.mcc == doctest::Approx(1.0));
  CHECK(ok.balanced_accuracy == doctest::Approx(1.0));

  const ThresholdMetrics all_pos = threshold_metrics(perfect, 0.0);
  CHECK(all_pos.sensitivity == doctest::Approx(1.0));
  CHECK(all_pos.specificity == doctest::Approx(0.0));
  CHECK(all_pos.balanced_accuracy == doctest::Approx(0.5));
  CHECK(all_pos.mcc_undefined);

  // TP=3 FP=1 FN=1 TN=5 at threshold 0.5.
  std::vector<ClassPrediction> confusion;
  for (int i = 0; i < 3; ++i) confusion.push_back(record(0.9, 1));
  confusion.push_back(record(0.9, 0));
  confusion.push_back(record(0.1, 1));
  for (int i = 0; i < 5; ++i) confusion.push_back(record(0.1, 0));
  const ThresholdMetrics m = threshold_metrics(confusion, 0.5);
  CHECK(m.f1 == doctest::Approx(0.75));
  CHECK(m.mcc == doctest::Approx(0.583).epsilon(1e-3));
}

TEST_CASE("sweep respects the constraint") {
  const auto preds = gen_classifier(5000, 1.0, 3.0, 23);
  const ThresholdMetrics sens_bound = sweep(preds, SweepConstraint::kSensitivityAbove, 0.8);
  CHECK(sens_bound.sensitivity > 0.8);
  const ThresholdMetrics spec_bound = sweep(preds, SweepConstraint::kSpecificityAbove, 0.8);
  CHECK(spec_bound.specificity > 0.8);
  CHECK_THROWS_AS(sweep(preds, SweepConstraint::kSensitivityAbove, 1.0),
                  ComputationError);
}

TEST_CASE("temperature scaling preserves the confusion matrix at matched quantiles") {
  const auto preds = gen_classifier(3000, 1.8, 3.0, 29);
  const TemperatureModel model{1.8};
  std::vector<ClassPrediction> scaled;
  scaled.reserve(preds.size());
  for (const auto& r : preds) scaled.push_back(apply_temperature(model, r));

  // The matched threshold is the scaled image of the original one.
  const double thr = 0.62;
  const double logit = std::log(thr / (1.0 - thr));
  const double scaled_thr = 1.0 / (1.0 + std::exp(-logit / model.t));
  const ThresholdMetrics before = threshold_metrics(preds, thr);
  const ThresholdMetrics after = threshold_metrics(scaled, scaled_thr);
  CHECK(before.sensitivity == doctest::Approx(after.sensitivity).epsilon(1e-12));
  CHECK(before.specificity == doctest::Approx(after.specificity).epsilon(1e-12));
  CHECK(before.f1 == doctest::Approx(after.f1).epsilon(1e-12));
}

TEST_CASE("error metrics stay within [0, 1] on the miscalibrated oracle") {
  const auto preds = gen_classifier(20000, 2.5, 3.0, 31);
  for (const double v : {ece(preds).value, ace(preds).value, smece(preds),
                         uce(preds).value, vce(preds).value}) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}
