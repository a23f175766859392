#include "uqbench/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace uqbench {

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace

double clamp_prob(double p) {
  return std::clamp(p, kProbFloor, 1.0 - kProbFloor);
}

std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) throw ValidationError("softmax: empty logit vector");
  if (!all_finite(logits)) throw ValidationError("softmax: non-finite logit");
  const double zmax = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - zmax);
    sum += out[i];
  }
  bool clamped = false;
  for (double& p : out) {
    p /= sum;
    if (p < kProbFloor) {
      p = kProbFloor;
      clamped = true;
    }
  }
  if (clamped) {
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    for (double& p : out) p /= total;
  }
  return out;
}

double entropy(const std::vector<double>& probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double normalized_entropy(const std::vector<double>& probs) {
  if (probs.size() < 2) {
    throw ValidationError("normalized_entropy: need at least two classes");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("normalized_entropy: probability outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("normalized_entropy: probabilities do not sum to 1");
  }
  return entropy(probs) / std::log(static_cast<double>(probs.size()));
}

double std_normal_pdf(double x) {
  static const double kInvSqrt2Pi = 0.3989422804014327;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) {
  static const double kInvSqrt2 = 0.7071067811865476;
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ValidationError("std_normal_quantile: p must lie strictly in (0, 1)");
  }
  // Acklam's rational approximation (~1.2e-9 relative error).
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  static const double plow = 0.02425;

  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Newton step on the CDF.
  const double err = std_normal_cdf(x) - p;
  const double pdf = std_normal_pdf(x);
  if (pdf > 0.0) x -= err / pdf;
  return x;
}

// --- ClassPrediction ---------------------------------------------------------

int ClassPrediction::predicted_class() const {
  return static_cast<int>(std::distance(
      probs.begin(), std::max_element(probs.begin(), probs.end())));
}

double ClassPrediction::confidence() const {
  return *std::max_element(probs.begin(), probs.end());
}

void ClassPrediction::validate() const {
  if (probs.size() < 2) {
    throw ValidationError("record '" + id + "': needs at least two classes");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw ValidationError("record '" + id + "': probability outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("record '" + id +
                          "': probabilities do not sum to 1");
  }
  if (logits) {
    if (logits->size() != probs.size()) {
      throw ValidationError("record '" + id + "': logit/probs length mismatch");
    }
    const std::vector<double> sm = softmax(*logits);
    for (std::size_t i = 0; i < sm.size(); ++i) {
      if (std::abs(sm[i] - probs[i]) > 1e-9) {
        throw ValidationError("record '" + id +
                              "': softmax(logits) does not match probs");
      }
    }
  }
  if (label) {
    if (*label < 0 || *label >= num_classes()) {
      throw ValidationError("record '" + id + "': label out of range");
    }
  }
}

// --- GaussianPrediction ------------------------------------------------------

double GaussianPrediction::sigma() const { return std::sqrt(variance); }

void GaussianPrediction::validate() const {
  if (!std::isfinite(mean)) {
    throw ValidationError("record '" + id + "': non-finite mean");
  }
  if (!std::isfinite(variance) || variance < 0.0) {
    throw ValidationError("record '" + id + "': variance must be >= 0");
  }
  if (truth && !std::isfinite(*truth)) {
    throw ValidationError("record '" + id + "': non-finite truth");
  }
}

// --- QuantileSet -------------------------------------------------------------

double QuantileSet::value_at(double level) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (std::abs(levels[i] - level) < 1e-12) return values[i];
  }
  throw ValidationError("record '" + id + "': quantile level " +
                        std::to_string(level) + " not present");
}

void QuantileSet::validate() const {
  if (levels.empty() || levels.size() != values.size()) {
    throw ValidationError("record '" + id +
                          "': levels/values must be non-empty and equal length");
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0)) {
      throw ValidationError("record '" + id + "': level outside (0, 1)");
    }
    if (!std::isfinite(values[i])) {
      throw ValidationError("record '" + id + "': non-finite quantile value");
    }
    if (i > 0 && levels[i] <= levels[i - 1]) {
      throw ValidationError("record '" + id +
                            "': levels must be strictly increasing");
    }
    if (i > 0 && values[i] < values[i - 1]) {
      throw ValidationError("record '" + id +
                            "': quantile values must be non-decreasing");
    }
  }
  if (truth && !std::isfinite(*truth)) {
    throw ValidationError("record '" + id + "': non-finite truth");
  }
}

// --- Interval ----------------------------------------------------------------

void Interval::validate() const {
  if (!(lo <= hi)) throw ValidationError("interval: lo must be <= hi");
  if (!(level > 0.0 && level < 1.0)) {
    throw ValidationError("interval: level outside (0, 1)");
  }
}

// --- LabeledSplit ------------------------------------------------------------

std::string to_string(SplitRole role) {
  switch (role) {
    case SplitRole::kTrainBaseline: return "train-baseline";
    case SplitRole::kCalibration: return "calibration";
    case SplitRole::kTest: return "test";
  }
  return "test";
}

std::string to_string(PredictionKind kind) {
  switch (kind) {
    case PredictionKind::kClassification: return "classification";
    case PredictionKind::kGaussian: return "gaussian";
    case PredictionKind::kQuantile: return "quantile";
  }
  return "classification";
}

std::size_t LabeledSplit::size() const {
  switch (kind) {
    case PredictionKind::kClassification: return classification.size();
    case PredictionKind::kGaussian: return gaussian.size();
    case PredictionKind::kQuantile: return quantiles.size();
  }
  return 0;
}

void LabeledSplit::validate() const {
  for (const auto& r : classification) r.validate();
  for (const auto& r : gaussian) r.validate();
  for (const auto& r : quantiles) r.validate();
  if (!classification.empty()) {
    const int k = classification.front().num_classes();
    for (const auto& r : classification) {
      if (r.num_classes() != k) {
        throw ValidationError("record '" + r.id +
                              "': class count differs within split");
      }
    }
  }
}

}  // namespace uqbench
