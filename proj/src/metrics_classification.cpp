#include "uqbench/metrics_classification.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uqbench/stratify.hpp"

namespace uqbench {

namespace {

void require_labels(const std::vector<ClassPrediction>& preds,
                    const char* metric) {
  if (preds.empty()) {
    throw ValidationError(std::string(metric) + ": empty input");
  }
  for (const auto& r : preds) {
    if (!r.label) {
      throw ValidationError(std::string(metric) + ": record '" + r.id +
                            "' has no label");
    }
  }
}

void require_binary(const std::vector<ClassPrediction>& preds,
                    const char* metric) {
  for (const auto& r : preds) {
    if (r.num_classes() != 2) {
      throw ValidationError(std::string(metric) + ": binary task required");
    }
  }
}

double binary_normalized_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
  return h / std::log(2.0);
}

std::vector<BinStat> collect_bins(const std::vector<ClassPrediction>& preds,
                                  const std::vector<int>& assignment, int m) {
  std::vector<BinStat> bins(static_cast<std::size_t>(m));
  std::vector<double> conf_sum(m, 0.0), uncert_sum(m, 0.0);
  std::vector<std::size_t> correct(m, 0);
  for (int b = 0; b < m; ++b) bins[b].bin = b;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int b = assignment[i];
    ++bins[b].count;
    conf_sum[b] += preds[i].confidence();
    uncert_sum[b] += normalized_entropy(preds[i].probs);
    if (preds[i].predicted_class() == *preds[i].label) ++correct[b];
  }
  for (int b = 0; b < m; ++b) {
    if (bins[b].count == 0) continue;
    const double n = static_cast<double>(bins[b].count);
    bins[b].conf = conf_sum[b] / n;
    bins[b].uncert = uncert_sum[b] / n;
    bins[b].acc = static_cast<double>(correct[b]) / n;
    bins[b].err = 1.0 - bins[b].acc;
    bins[b].obs_entropy = binary_normalized_entropy(bins[b].acc);
  }
  return bins;
}

}  // namespace

BinnedMetric ece(const std::vector<ClassPrediction>& preds, int bins) {
  require_labels(preds, "ece");
  std::vector<double> conf(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) conf[i] = preds[i].confidence();
  const std::vector<int> assignment = equal_width_bins(conf, bins, 0.0, 1.0);

  BinnedMetric out;
  out.bins = collect_bins(preds, assignment, bins);
  const double n = static_cast<double>(preds.size());
  for (const BinStat& b : out.bins) {
    if (b.count == 0) continue;
    out.value += static_cast<double>(b.count) / n * std::abs(b.acc - b.conf);
  }
  return out;
}

AceResult ace(const std::vector<ClassPrediction>& preds, int ranges) {
  require_labels(preds, "ace");
  if (ranges < 1) throw ValidationError("ace: need at least one range");
  const int k = preds.front().num_classes();

  AceResult out;
  std::vector<double> scores(preds.size());
  double total = 0.0;
  for (int c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < preds.size(); ++i) {
      scores[i] = preds[i].probs[static_cast<std::size_t>(c)];
    }
    FrequencyBins fb = equal_frequency_bins(scores, ranges);
    if (fb.warning && !out.warning) out.warning = fb.warning;
    out.ranges_used = fb.bins_used;

    std::vector<double> conf_sum(fb.bins_used, 0.0);
    std::vector<std::size_t> count(fb.bins_used, 0), hits(fb.bins_used, 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const int b = fb.assignment[i];
      ++count[b];
      conf_sum[b] += scores[i];
      if (*preds[i].label == c) ++hits[b];
    }
    for (int b = 0; b < fb.bins_used; ++b) {
      if (count[b] == 0) continue;
      const double n = static_cast<double>(count[b]);
      total += std::abs(static_cast<double>(hits[b]) / n - conf_sum[b] / n);
    }
  }
  out.value = total / static_cast<double>(k * out.ranges_used);
  return out;
}

// --- smECE ---------------------------------------------------------------------

namespace {

constexpr int kSmeceGrid = 2048;

// Integral of |smoothed residual| over [0, 1] for one kernel width. The
// residual mass is binned to the grid once by the caller; the reflected
// Gaussian kernel becomes an even periodic extension with period 2.
double smece_at_sigma(const std::vector<double>& mass, double sigma,
                      double n_records) {
  const int g = kSmeceGrid;
  const int period = 2 * (g - 1);
  const double h = 1.0 / static_cast<double>(g - 1);

  // Periodic kernel table over circular grid distances.
  const int half = period / 2;
  std::vector<double> kernel(static_cast<std::size_t>(half) + 1, 0.0);
  const double inv_norm = 1.0 / (sigma * std::sqrt(2.0 * 3.14159265358979324));
  for (int d = 0; d <= half; ++d) {
    double sum = 0.0;
    for (int n = -5; n <= 5; ++n) {
      const double u = (static_cast<double>(d) + n * period) * h;
      if (std::abs(u) > 8.0 * sigma) continue;
      sum += std::exp(-0.5 * u * u / (sigma * sigma));
    }
    kernel[static_cast<std::size_t>(d)] = inv_norm * sum;
  }
  int reach = static_cast<int>(std::ceil(8.0 * sigma / h));
  reach = std::min(reach, half);

  // Even periodic extension of the residual mass.
  std::vector<double> extended(static_cast<std::size_t>(period), 0.0);
  extended[0] = 2.0 * mass[0];
  extended[static_cast<std::size_t>(g - 1)] = 2.0 * mass[static_cast<std::size_t>(g - 1)];
  for (int m = 1; m < g - 1; ++m) {
    extended[static_cast<std::size_t>(m)] = mass[static_cast<std::size_t>(m)];
    extended[static_cast<std::size_t>(period - m)] = mass[static_cast<std::size_t>(m)];
  }

  double integral = 0.0;
  for (int t = 0; t < g; ++t) {
    double rho = 0.0;
    for (int d = -reach; d <= reach; ++d) {
      int m = (t + d) % period;
      if (m < 0) m += period;
      const int dist = std::abs(d);
      rho += extended[static_cast<std::size_t>(m)] *
             kernel[static_cast<std::size_t>(std::min(dist, half))];
    }
    const double weight = (t == 0 || t == g - 1) ? 0.5 : 1.0;
    integral += weight * std::abs(rho);
  }
  return integral * h / n_records;
}

}  // namespace

double smece(const std::vector<ClassPrediction>& preds) {
  require_labels(preds, "smece");
  require_binary(preds, "smece");

  std::vector<double> mass(kSmeceGrid, 0.0);
  for (const auto& r : preds) {
    const double f = r.probs[1];
    const double y = (*r.label == 1) ? 1.0 : 0.0;
    const auto cell = static_cast<std::size_t>(
        std::lround(f * static_cast<double>(kSmeceGrid - 1)));
    mass[cell] += y - f;
  }
  const double n = static_cast<double>(preds.size());

  // Fixed point sigma* = smece_{sigma*}; smece_sigma is non-increasing in
  // sigma, so bisection on smece_sigma - sigma converges. Sigma is floored at
  // the grid resolution.
  double lo = 1.0 / static_cast<double>(kSmeceGrid - 1);
  double hi = 1.0;
  const double f_lo = smece_at_sigma(mass, lo, n);
  if (f_lo <= lo) return f_lo;
  for (int it = 0; it < 100 && hi - lo > 1e-4; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = smece_at_sigma(mass, mid, n);
    if (v > mid) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return smece_at_sigma(mass, 0.5 * (lo + hi), n);
}

BinnedMetric uce(const std::vector<ClassPrediction>& preds, int bins) {
  require_labels(preds, "uce");
  std::vector<double> entropies(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    entropies[i] = normalized_entropy(preds[i].probs);
  }
  const std::vector<int> assignment = equal_width_bins(entropies, bins, 0.0, 1.0);

  // Binary-only adjustment: a maximally uncertain binary prediction has
  // normalized entropy 1 but error rate 0.5, so uncert is halved.
  const bool binary = preds.front().num_classes() == 2;
  BinnedMetric out;
  out.bins = collect_bins(preds, assignment, bins);
  const double n = static_cast<double>(preds.size());
  for (const BinStat& b : out.bins) {
    if (b.count == 0) continue;
    const double uncert = binary ? 0.5 * b.uncert : b.uncert;
    out.value += static_cast<double>(b.count) / n * std::abs(b.err - uncert);
  }
  return out;
}

BinnedMetric vce(const std::vector<ClassPrediction>& preds, int bins) {
  require_labels(preds, "vce");
  require_binary(preds, "vce");
  std::vector<double> entropies(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    entropies[i] = normalized_entropy(preds[i].probs);
  }
  const std::vector<int> assignment = equal_width_bins(entropies, bins, 0.0, 1.0);

  BinnedMetric out;
  out.bins = collect_bins(preds, assignment, bins);
  const double n = static_cast<double>(preds.size());
  for (const BinStat& b : out.bins) {
    if (b.count == 0) continue;
    out.value +=
        static_cast<double>(b.count) / n * std::abs(b.uncert - b.obs_entropy);
  }
  return out;
}

double nll(const std::vector<ClassPrediction>& preds) {
  require_labels(preds, "nll");
  double total = 0.0;
  for (const auto& r : preds) {
    total -= std::log(clamp_prob(r.probs[static_cast<std::size_t>(*r.label)]));
  }
  return total / static_cast<double>(preds.size());
}

double auc(const std::vector<ClassPrediction>& preds) {
  require_labels(preds, "auc");
  require_binary(preds, "auc");
  std::vector<std::pair<double, int>> scored;
  scored.reserve(preds.size());
  std::size_t n_pos = 0;
  for (const auto& r : preds) {
    scored.emplace_back(r.probs[1], *r.label);
    if (*r.label == 1) ++n_pos;
  }
  const std::size_t n_neg = scored.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw ComputationError("auc: undefined with a single class present");
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Midranks for ties.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < scored.size()) {
    std::size_t j = i;
    while (j < scored.size() && scored[j].first == scored[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t t = i; t < j; ++t) {
      if (scored[t].second == 1) rank_sum_pos += midrank;
    }
    i = j;
  }
  const double u = rank_sum_pos -
                   static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

ThresholdMetrics threshold_metrics(const std::vector<ClassPrediction>& preds,
                                   double threshold) {
  require_labels(preds, "threshold_metrics");
  require_binary(preds, "threshold_metrics");
  double tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto& r : preds) {
    const bool predicted = r.probs[1] >= threshold;
    const bool actual = *r.label == 1;
    if (predicted && actual) ++tp;
    else if (predicted && !actual) ++fp;
    else if (!predicted && !actual) ++tn;
    else ++fn;
  }
  ThresholdMetrics m;
  m.threshold = threshold;
  m.sensitivity = (tp + fn) > 0 ? tp / (tp + fn) : 0.0;
  m.specificity = (tn + fp) > 0 ? tn / (tn + fp) : 0.0;
  m.balanced_accuracy = 0.5 * (m.sensitivity + m.specificity);
  m.f1 = (2 * tp + fp + fn) > 0 ? 2 * tp / (2 * tp + fp + fn) : 0.0;
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom > 0.0) {
    m.mcc = (tp * tn - fp * fn) / std::sqrt(denom);
  } else {
    m.mcc = 0.0;
    m.mcc_undefined = true;
  }
  return m;
}

ThresholdMetrics sweep(const std::vector<ClassPrediction>& preds,
                       SweepConstraint constraint, double bound) {
  require_labels(preds, "sweep");
  require_binary(preds, "sweep");
  std::vector<double> cuts;
  cuts.reserve(preds.size() + 1);
  for (const auto& r : preds) cuts.push_back(r.probs[1]);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(std::nextafter(cuts.back(), 2.0));  // everything negative

  std::optional<ThresholdMetrics> best;
  for (double thr : cuts) {
    const ThresholdMetrics m = threshold_metrics(preds, thr);
    const bool feasible = constraint == SweepConstraint::kSensitivityAbove
                              ? m.sensitivity > bound
                              : m.specificity > bound;
    if (!feasible) continue;
    const double objective = constraint == SweepConstraint::kSensitivityAbove
                                 ? m.specificity
                                 : m.sensitivity;
    const double best_objective =
        !best ? -1.0
              : (constraint == SweepConstraint::kSensitivityAbove
                     ? best->specificity
                     : best->sensitivity);
    if (objective > best_objective) best = m;
  }
  if (!best) {
    throw ComputationError("sweep: no threshold satisfies the constraint");
  }
  return *best;
}

}  // namespace uqbench
