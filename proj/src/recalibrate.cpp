#include "uqbench/recalibrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace uqbench {

namespace {

// Shared PAVA core over weighted points. Block values are prefix-sum weighted
// means over the original indices.
std::vector<double> pava_impl(const std::vector<double>& y,
                              const std::vector<double>& w) {
  const std::size_t n = y.size();
  std::vector<double> swy(n + 1, 0.0), sw(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    swy[i + 1] = swy[i] + w[i] * y[i];
    sw[i + 1] = sw[i] + w[i];
  }
  const auto block_value = [&](std::size_t start, std::size_t end) {
    return (swy[end + 1] - swy[start]) / (sw[end + 1] - sw[start]);
  };

  std::vector<std::pair<std::size_t, std::size_t>> blocks;  // [start, end]
  blocks.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    blocks.emplace_back(i, i);
    while (blocks.size() >= 2) {
      const auto& cur = blocks[blocks.size() - 1];
      const auto& prev = blocks[blocks.size() - 2];
      if (block_value(prev.first, prev.second) <=
          block_value(cur.first, cur.second)) {
        break;
      }
      const std::size_t start = prev.first;
      const std::size_t end = cur.second;
      blocks.pop_back();
      blocks.back() = {start, end};
    }
  }

  std::vector<double> out(n);
  for (const auto& [start, end] : blocks) {
    const double v = block_value(start, end);
    for (std::size_t i = start; i <= end; ++i) out[i] = v;
  }
  return out;
}

}  // namespace

std::vector<double> pava(const std::vector<double>& y,
                         const std::vector<double>& w) {
  if (y.empty() || y.size() != w.size()) {
    throw ValidationError("pava: y and w must be non-empty and equal length");
  }
  for (double wi : w) {
    if (!(wi > 0.0) || !std::isfinite(wi)) {
      throw ValidationError("pava: weights must be positive");
    }
  }
  for (double yi : y) {
    if (!std::isfinite(yi)) throw ValidationError("pava: non-finite value");
  }
  return pava_impl(y, w);
}

std::vector<double> pava(const std::vector<double>& y) {
  return pava(y, std::vector<double>(y.size(), 1.0));
}

// --- IsotonicModel -------------------------------------------------------------

double IsotonicModel::eval(double x) const {
  if (breakpoints.empty()) {
    throw ComputationError("isotonic model is empty");
  }
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  if (it == breakpoints.begin()) return values.front();
  return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

double IsotonicModel::pseudo_inverse(double v) const {
  if (breakpoints.empty()) {
    throw ComputationError("isotonic model is empty");
  }
  auto it = std::lower_bound(values.begin(), values.end(), v);
  if (it == values.end()) return breakpoints.back();
  return breakpoints[static_cast<std::size_t>(it - values.begin())];
}

IsotonicModel fit_isotonic(std::vector<double> x, std::vector<double> y,
                           std::vector<double> w) {
  if (x.empty() || x.size() != y.size() || x.size() != w.size()) {
    throw ValidationError("fit_isotonic: inputs must be non-empty and equal length");
  }
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  // Pool exact ties in x so tied scores share one fitted value.
  IsotonicModel model;
  std::vector<double> py, pw;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    double wy = 0.0, wsum = 0.0;
    while (j < order.size() && x[order[j]] == x[order[i]]) {
      wy += w[order[j]] * y[order[j]];
      wsum += w[order[j]];
      ++j;
    }
    model.breakpoints.push_back(x[order[i]]);
    py.push_back(wy / wsum);
    pw.push_back(wsum);
    i = j;
  }
  model.values = pava(py, pw);
  return model;
}

// --- Temperature scaling --------------------------------------------------------

namespace {

double temperature_nll(const std::vector<ClassPrediction>& cal, double t) {
  double total = 0.0;
  std::vector<double> scaled;
  for (const auto& r : cal) {
    scaled = *r.logits;
    for (double& z : scaled) z /= t;
    const std::vector<double> p = softmax(scaled);
    total -= std::log(clamp_prob(p[static_cast<std::size_t>(*r.label)]));
  }
  return total / static_cast<double>(cal.size());
}

}  // namespace

TemperatureFit fit_temperature(const std::vector<ClassPrediction>& cal) {
  if (cal.empty()) throw ValidationError("fit_temperature: empty calibration split");
  for (const auto& r : cal) {
    if (!r.logits) {
      throw ValidationError("fit_temperature: record '" + r.id +
                            "' has no logits");
    }
    if (!r.label) {
      throw ValidationError("fit_temperature: record '" + r.id +
                            "' has no label");
    }
  }
  if (cal.size() >= 2) {
    const int first = *cal.front().label;
    const bool one_class = std::all_of(
        cal.begin(), cal.end(), [&](const auto& r) { return *r.label == first; });
    if (one_class) {
      return {TemperatureModel{1.0},
              "calibration split contains a single class; returning T = 1"};
    }
  }

  // Golden-section search on log T; the NLL is unimodal in T for fixed logits.
  static const double kGolden = 0.6180339887498949;
  double lo = -4.0, hi = 4.0;
  double x1 = hi - kGolden * (hi - lo);
  double x2 = lo + kGolden * (hi - lo);
  double f1 = temperature_nll(cal, std::exp(x1));
  double f2 = temperature_nll(cal, std::exp(x2));
  while (hi - lo > 1e-6) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = temperature_nll(cal, std::exp(x1));
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = temperature_nll(cal, std::exp(x2));
    }
  }
  return {TemperatureModel{std::exp(0.5 * (lo + hi))}, std::nullopt};
}

ClassPrediction apply_temperature(const TemperatureModel& model,
                                  const ClassPrediction& pred) {
  if (!pred.logits) {
    throw ValidationError("apply_temperature: record '" + pred.id +
                          "' has no logits");
  }
  if (!(model.t > 0.0) || !std::isfinite(model.t)) {
    throw ValidationError("apply_temperature: temperature must be positive");
  }
  ClassPrediction out = pred;
  std::vector<double> scaled = *pred.logits;
  for (double& z : scaled) z /= model.t;
  out.probs = softmax(scaled);
  out.logits = std::move(scaled);
  out.probs_explicit = true;
  return out;
}

// --- Variance scaling -------------------------------------------------------------

VarianceScaleFit fit_variance_scale(const std::vector<GaussianPrediction>& cal) {
  if (cal.empty()) {
    throw ValidationError("fit_variance_scale: empty calibration split");
  }
  double sum = 0.0;
  for (const auto& r : cal) {
    if (!r.truth) {
      throw ValidationError("fit_variance_scale: record '" + r.id +
                            "' has no truth");
    }
    if (!(r.variance > 0.0)) {
      throw ValidationError("fit_variance_scale: record '" + r.id +
                            "' has zero variance");
    }
    const double resid = *r.truth - r.mean;
    sum += resid * resid / r.variance;
  }
  double s = std::sqrt(sum / static_cast<double>(cal.size()));
  std::optional<std::string> warning;
  if (s < 1e-6) {
    s = 1e-6;
    warning = "all residuals vanish; scale floored at 1e-6";
  }
  return {VarianceScaleModel{s}, warning};
}

GaussianPrediction apply_variance_scale(const VarianceScaleModel& model,
                                        const GaussianPrediction& pred) {
  GaussianPrediction out = pred;
  out.variance = pred.variance * model.s * model.s;
  return out;
}

// --- Isotonic classifier -------------------------------------------------------------

IsotonicClassifierModel fit_isotonic_classifier(
    const std::vector<ClassPrediction>& cal) {
  if (cal.empty()) {
    throw ValidationError("isotonic_classifier: empty calibration split");
  }
  const int k = cal.front().num_classes();
  for (const auto& r : cal) {
    if (!r.label) {
      throw ValidationError("isotonic_classifier: record '" + r.id +
                            "' has no label");
    }
    if (r.num_classes() != k) {
      throw ValidationError("isotonic_classifier: inconsistent class count");
    }
  }
  IsotonicClassifierModel model;
  model.per_class.reserve(static_cast<std::size_t>(k));
  std::vector<double> x(cal.size()), y(cal.size()), w(cal.size(), 1.0);
  for (int c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < cal.size(); ++i) {
      x[i] = cal[i].probs[static_cast<std::size_t>(c)];
      y[i] = (*cal[i].label == c) ? 1.0 : 0.0;
    }
    model.per_class.push_back(fit_isotonic(x, y, w));
  }
  return model;
}

ClassPrediction apply_isotonic_classifier(const IsotonicClassifierModel& model,
                                          const ClassPrediction& pred) {
  const std::size_t k = model.per_class.size();
  if (pred.probs.size() != k) {
    throw ValidationError("isotonic_classifier: record '" + pred.id +
                          "' class count does not match the fitted model");
  }
  ClassPrediction out;
  out.id = pred.id;
  out.label = pred.label;
  out.group = pred.group;
  out.probs.resize(k);
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    out.probs[c] = model.per_class[c].eval(pred.probs[c]);
    total += out.probs[c];
  }
  if (total > 0.0) {
    for (double& p : out.probs) p = clamp_prob(p / total);
  } else {
    for (double& p : out.probs) p = 1.0 / static_cast<double>(k);
  }
  // Renormalize residual drift from clamping.
  const double norm = std::accumulate(out.probs.begin(), out.probs.end(), 0.0);
  for (double& p : out.probs) p /= norm;
  return out;
}

std::vector<ClassPrediction> isotonic_classifier(
    const std::vector<ClassPrediction>& cal,
    const std::vector<ClassPrediction>& test) {
  const IsotonicClassifierModel model = fit_isotonic_classifier(cal);
  std::vector<ClassPrediction> out;
  out.reserve(test.size());
  for (const auto& r : test) out.push_back(apply_isotonic_classifier(model, r));
  return out;
}

// --- PIT-isotonic regression recalibration ------------------------------------------

PitRecalibration fit_pit_recalibration(
    const std::vector<GaussianPrediction>& cal) {
  if (cal.empty()) {
    throw ValidationError("isotonic recalibration: empty calibration split");
  }
  std::vector<double> pits;
  pits.reserve(cal.size());
  for (const auto& r : cal) {
    if (!r.truth) {
      throw ValidationError("isotonic recalibration: record '" + r.id +
                            "' has no truth");
    }
    pits.push_back(pit(r));
  }
  std::sort(pits.begin(), pits.end());

  PitRecalibration out;
  if (pits.size() < 2 || pits.front() == pits.back()) {
    out.degenerate = true;
    out.warning = "degenerate PIT distribution; records returned unchanged";
    return out;
  }

  // Empirical frequency of PIT <= x at each distinct observed PIT value.
  const double n = static_cast<double>(pits.size());
  std::vector<double> x, freq, w;
  std::size_t i = 0;
  while (i < pits.size()) {
    std::size_t j = i;
    while (j < pits.size() && pits[j] == pits[i]) ++j;
    x.push_back(pits[i]);
    freq.push_back(static_cast<double>(j) / n);
    w.push_back(static_cast<double>(j - i));
    i = j;
  }
  out.map = fit_isotonic(x, freq, w);
  return out;
}

GaussianPrediction apply_pit_recalibration(const PitRecalibration& model,
                                           const GaussianPrediction& pred) {
  if (model.degenerate) return pred;
  const double sigma = pred.sigma();
  const auto adjusted_quantile = [&](double level) {
    const double nominal = model.map.pseudo_inverse(level);
    return pred.mean + sigma * std_normal_quantile(clamp_prob(nominal));
  };
  const double q_lo = adjusted_quantile(kOneSigmaPair.lo);
  const double q_hi = adjusted_quantile(kOneSigmaPair.hi);
  const auto [mean, variance] =
      interval_to_gaussian(std::min(q_lo, q_hi), std::max(q_lo, q_hi),
                           kOneSigmaPair.lo, kOneSigmaPair.hi);
  GaussianPrediction out = pred;
  out.mean = mean;
  out.variance = variance;
  return out;
}

std::vector<GaussianPrediction> isotonic_regression_recalibrate(
    const std::vector<GaussianPrediction>& cal,
    const std::vector<GaussianPrediction>& test) {
  const PitRecalibration model = fit_pit_recalibration(cal);
  std::vector<GaussianPrediction> out;
  out.reserve(test.size());
  for (const auto& r : test) out.push_back(apply_pit_recalibration(model, r));
  return out;
}

// --- Conformal methods -----------------------------------------------------------------

double conformal_score(double q_lo, double q_hi, double y) {
  return std::max(q_lo - y, y - q_hi);
}

double conformal_quantile(std::vector<double> scores, double alpha) {
  const std::size_t n = scores.size();
  if (n == 0) throw ValidationError("conformal fit: empty calibration split");
  const double target = (static_cast<double>(n) + 1.0) * (1.0 - alpha);
  const auto rank = static_cast<std::size_t>(std::ceil(target - 1e-9));
  if (rank > n) {
    throw ComputationError(
        "conformal fit: insufficient calibration data for alpha = " +
        std::to_string(alpha) + " (need at least " + std::to_string(rank) +
        " records)");
  }
  std::nth_element(scores.begin(), scores.begin() + (rank - 1), scores.end());
  return scores[rank - 1];
}

ConformalOffset cqr_fit(const std::vector<QuantileSet>& cal, LevelPair pair) {
  std::vector<double> scores;
  scores.reserve(cal.size());
  for (const auto& r : cal) {
    if (!r.truth) {
      throw ValidationError("cqr_fit: record '" + r.id + "' has no truth");
    }
    scores.push_back(
        conformal_score(r.value_at(pair.lo), r.value_at(pair.hi), *r.truth));
  }
  const double coverage = pair.central_coverage();
  return {coverage, conformal_quantile(std::move(scores), 1.0 - coverage)};
}

Interval cqr_apply(const ConformalOffset& offset, const QuantileSet& q,
                   LevelPair pair) {
  double lo = q.value_at(pair.lo) - offset.q_hat;
  double hi = q.value_at(pair.hi) + offset.q_hat;
  if (lo > hi) lo = hi = 0.5 * (lo + hi);  // fully shrunk interval
  return Interval{lo, hi, offset.level};
}

ConformalOffset cmap_fit(const std::vector<GaussianPrediction>& cal,
                         double level) {
  std::vector<double> scores;
  scores.reserve(cal.size());
  for (const auto& r : cal) {
    if (!r.truth) {
      throw ValidationError("cmap_fit: record '" + r.id + "' has no truth");
    }
    const Interval iv = gaussian_to_interval(r.mean, r.variance, level);
    scores.push_back(conformal_score(iv.lo, iv.hi, *r.truth));
  }
  return {level, conformal_quantile(std::move(scores), 1.0 - level)};
}

Interval cmap_apply(const ConformalOffset& offset,
                    const GaussianPrediction& pred) {
  const Interval iv = gaussian_to_interval(pred.mean, pred.variance, offset.level);
  double lo = iv.lo - offset.q_hat;
  double hi = iv.hi + offset.q_hat;
  if (lo > hi) lo = hi = 0.5 * (lo + hi);
  return Interval{lo, hi, offset.level};
}

std::vector<Interval> cmap(const std::vector<GaussianPrediction>& cal,
                           const std::vector<GaussianPrediction>& test,
                           double level) {
  const ConformalOffset offset = cmap_fit(cal, level);
  std::vector<Interval> out;
  out.reserve(test.size());
  for (const auto& r : test) out.push_back(cmap_apply(offset, r));
  return out;
}

// --- Venn-ABERS -------------------------------------------------------------------------

namespace {

// Isotonic fit over pre-sorted (x, y) points plus one augmented point, then
// evaluated at the augmented point's x. Exact ties in x are pooled.
double augmented_isotonic_at(const std::vector<double>& xs,
                             const std::vector<double>& ys, double s,
                             double s_label) {
  const std::size_t n = xs.size() + 1;
  std::vector<double> wy, w;
  std::vector<double> bx;
  wy.reserve(n);
  w.reserve(n);
  bx.reserve(n);

  std::size_t i = 0;
  bool inserted = false;
  while (i < xs.size() || !inserted) {
    double x;
    if (!inserted && (i == xs.size() || s <= xs[i])) {
      x = s;
    } else {
      x = xs[i];
    }
    double sum = 0.0, count = 0.0;
    if (!inserted && s == x) {
      sum += s_label;
      count += 1.0;
      inserted = true;
    }
    while (i < xs.size() && xs[i] == x) {
      sum += ys[i];
      count += 1.0;
      ++i;
    }
    bx.push_back(x);
    wy.push_back(sum / count);
    w.push_back(count);
  }

  const std::vector<double> fitted = pava_impl(wy, w);
  for (std::size_t j = 0; j < bx.size(); ++j) {
    if (bx[j] == s) return fitted[j];
  }
  return fitted.back();  // unreachable
}

}  // namespace

std::vector<VennAbersOutput> venn_abers(const std::vector<ClassPrediction>& cal,
                                        const std::vector<double>& test_scores) {
  if (cal.empty()) throw ValidationError("venn_abers: empty calibration split");
  std::vector<std::pair<double, double>> points;
  points.reserve(cal.size());
  for (const auto& r : cal) {
    if (r.num_classes() != 2) {
      throw ValidationError("venn_abers: binary task required");
    }
    if (!r.label) {
      throw ValidationError("venn_abers: record '" + r.id + "' has no label");
    }
    points.emplace_back(r.probs[1], *r.label == 1 ? 1.0 : 0.0);
  }
  std::sort(points.begin(), points.end());
  std::vector<double> xs(points.size()), ys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    xs[i] = points[i].first;
    ys[i] = points[i].second;
  }

  std::vector<VennAbersOutput> out;
  out.reserve(test_scores.size());
  for (double s : test_scores) {
    VennAbersOutput v;
    v.p0 = augmented_isotonic_at(xs, ys, s, 0.0);
    v.p1 = augmented_isotonic_at(xs, ys, s, 1.0);
    v.p = jaccard_mean(std::min(v.p0, v.p1), std::max(v.p0, v.p1));
    out.push_back(v);
  }
  return out;
}

}  // namespace uqbench
