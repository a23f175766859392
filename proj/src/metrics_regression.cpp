#include "uqbench/metrics_regression.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "uqbench/convert.hpp"
#include "uqbench/stratify.hpp"

namespace uqbench {

namespace {

void require_truths(const std::vector<GaussianPrediction>& preds,
                    const char* metric) {
  if (preds.empty()) {
    throw ValidationError(std::string(metric) + ": empty input");
  }
  for (const auto& r : preds) {
    if (!r.truth) {
      throw ValidationError(std::string(metric) + ": record '" + r.id +
                            "' has no truth");
    }
  }
}

}  // namespace

EnceResult ence(const std::vector<GaussianPrediction>& preds, int bins) {
  require_truths(preds, "ence");
  std::vector<double> sigmas(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!(preds[i].variance > 0.0)) {
      throw ValidationError("ence: record '" + preds[i].id +
                            "' has zero variance");
    }
    sigmas[i] = preds[i].sigma();
  }
  FrequencyBins fb = equal_frequency_bins(sigmas, bins);

  EnceResult out;
  out.warning = fb.warning;
  std::vector<double> var_sum(fb.bins_used, 0.0), sq_sum(fb.bins_used, 0.0);
  std::vector<std::size_t> count(fb.bins_used, 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int b = fb.assignment[i];
    const double resid = *preds[i].truth - preds[i].mean;
    var_sum[b] += preds[i].variance;
    sq_sum[b] += resid * resid;
    ++count[b];
  }
  double total = 0.0;
  for (int b = 0; b < fb.bins_used; ++b) {
    RegressionBinStat stat;
    stat.bin = b;
    stat.count = count[b];
    if (count[b] > 0) {
      const double n = static_cast<double>(count[b]);
      stat.rmv = std::sqrt(var_sum[b] / n);
      stat.rmse = std::sqrt(sq_sum[b] / n);
      total += std::abs(stat.rmv - stat.rmse) / stat.rmv;
    }
    out.bins.push_back(stat);
  }
  out.value = total / static_cast<double>(fb.bins_used);
  return out;
}

double crps_gaussian(double mean, double variance, double truth) {
  if (!(variance >= 0.0)) {
    throw ValidationError("crps: variance must be >= 0");
  }
  const double sigma = std::sqrt(variance);
  if (sigma == 0.0) return std::abs(truth - mean);
  const double d = (truth - mean) / sigma;
  static const double kInvSqrtPi = 0.5641895835477563;
  return sigma * (2.0 * std_normal_pdf(d) + d * (2.0 * std_normal_cdf(d) - 1.0) -
                  kInvSqrtPi);
}

double crps_gaussian(const GaussianPrediction& pred) {
  if (!pred.truth) {
    throw ValidationError("crps: record '" + pred.id + "' has no truth");
  }
  return crps_gaussian(pred.mean, pred.variance, *pred.truth);
}

double crps_mean(const std::vector<GaussianPrediction>& preds) {
  require_truths(preds, "crps");
  double total = 0.0;
  for (const auto& r : preds) total += crps_gaussian(r);
  return total / static_cast<double>(preds.size());
}

double picp(const std::vector<GaussianPrediction>& preds, double level) {
  require_truths(preds, "picp");
  if (!(level > 0.0 && level < 1.0)) {
    throw ValidationError("picp: level outside (0, 1)");
  }
  std::size_t inside = 0;
  for (const auto& r : preds) {
    if (gaussian_to_interval(r.mean, r.variance, level).contains(*r.truth)) {
      ++inside;
    }
  }
  return static_cast<double>(inside) / static_cast<double>(preds.size()) / level;
}

std::vector<double> default_cce_grid() {
  std::vector<double> grid;
  grid.reserve(19);
  for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
  return grid;
}

double cce(const std::vector<GaussianPrediction>& preds,
           const std::vector<double>& levels) {
  require_truths(preds, "cce");
  if (levels.empty()) throw ValidationError("cce: empty level grid");
  std::vector<double> pits;
  pits.reserve(preds.size());
  for (const auto& r : preds) pits.push_back(pit(r));
  std::sort(pits.begin(), pits.end());

  const double n = static_cast<double>(pits.size());
  double total = 0.0;
  for (double p : levels) {
    const auto below = static_cast<double>(
        std::upper_bound(pits.begin(), pits.end(), p) - pits.begin());
    const double gap = p - below / n;
    total += gap * gap;
  }
  return total;
}

double mae(const std::vector<GaussianPrediction>& preds) {
  require_truths(preds, "mae");
  double total = 0.0;
  for (const auto& r : preds) total += std::abs(*r.truth - r.mean);
  return total / static_cast<double>(preds.size());
}

double mase(const std::vector<GaussianPrediction>& preds, double baseline_mae) {
  if (!(baseline_mae > 0.0)) {
    throw ValidationError("mase: baseline MAE must be positive");
  }
  return mae(preds) / baseline_mae;
}

double gnll_loss(const std::vector<GaussianPrediction>& preds) {
  require_truths(preds, "gnll");
  static const double kLogSqrt2Pi = 0.9189385332046727;
  double total = 0.0;
  for (const auto& r : preds) {
    if (!(r.variance > 0.0)) {
      throw ValidationError("gnll: record '" + r.id + "' has sigma <= 0");
    }
    const double resid = *r.truth - r.mean;
    total += 0.5 * std::log(r.variance) + resid * resid / (2.0 * r.variance) +
             kLogSqrt2Pi;
  }
  return total / static_cast<double>(preds.size());
}

double bp_loss(const std::vector<GaussianPrediction>& preds) {
  require_truths(preds, "bp_loss");
  std::map<std::string, double> per_id;
  for (const auto& r : preds) {
    if (!(r.variance > 0.0)) {
      throw ValidationError("bp_loss: record '" + r.id + "' has sigma <= 0");
    }
    const double resid = r.mean - *r.truth;
    per_id[r.id] += std::log(r.sigma() / 2.0) +
                    resid * resid / (2.0 * r.variance);
  }
  double total = 0.0;
  for (const auto& [id, loss] : per_id) total += loss;
  return total / static_cast<double>(per_id.size());
}

double pinball_loss(const std::vector<QuantileSet>& preds) {
  if (preds.empty()) throw ValidationError("pinball: empty input");
  double total = 0.0;
  std::size_t terms = 0;
  for (const auto& r : preds) {
    if (!r.truth) {
      throw ValidationError("pinball: record '" + r.id + "' has no truth");
    }
    for (std::size_t i = 0; i < r.levels.size(); ++i) {
      const double e = *r.truth - r.values[i];
      total += std::max(r.levels[i] * e, (r.levels[i] - 1.0) * e);
      ++terms;
    }
  }
  return total / static_cast<double>(terms);
}

BivariateHistogram bivariate_histogram(const std::vector<GaussianPrediction>& preds,
                                       int err_bins, int sigma_bins) {
  require_truths(preds, "bivariate_histogram");
  if (err_bins < 1 || sigma_bins < 1) {
    throw ValidationError("bivariate_histogram: need at least one bin per axis");
  }
  std::vector<double> errs(preds.size()), sigmas(preds.size());
  double err_max = 0.0, sigma_max = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    errs[i] = std::abs(*preds[i].truth - preds[i].mean);
    sigmas[i] = preds[i].sigma();
    err_max = std::max(err_max, errs[i]);
    sigma_max = std::max(sigma_max, sigmas[i]);
  }
  if (err_max == 0.0) err_max = 1.0;
  if (sigma_max == 0.0) sigma_max = 1.0;

  BivariateHistogram out;
  for (int b = 0; b <= err_bins; ++b) {
    out.err_edges.push_back(err_max * static_cast<double>(b) / err_bins);
  }
  for (int b = 0; b <= sigma_bins; ++b) {
    out.sigma_edges.push_back(sigma_max * static_cast<double>(b) / sigma_bins);
  }
  out.counts.assign(static_cast<std::size_t>(err_bins),
                    std::vector<std::size_t>(static_cast<std::size_t>(sigma_bins), 0));
  const std::vector<int> err_idx = equal_width_bins(errs, err_bins, 0.0, err_max);
  const std::vector<int> sigma_idx =
      equal_width_bins(sigmas, sigma_bins, 0.0, sigma_max);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    ++out.counts[static_cast<std::size_t>(err_idx[i])]
                [static_cast<std::size_t>(sigma_idx[i])];
  }
  return out;
}

}  // namespace uqbench
