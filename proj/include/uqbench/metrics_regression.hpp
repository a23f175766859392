#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uqbench/core.hpp"

namespace uqbench {

struct RegressionBinStat {
  int bin = 0;
  std::size_t count = 0;
  double rmv = 0.0;   // root mean predicted variance
  double rmse = 0.0;  // root mean squared error
};

struct EnceResult {
  double value = 0.0;
  std::vector<RegressionBinStat> bins;
  std::optional<std::string> warning;
};

inline constexpr int kDefaultRegressionBins = 15;

// Sort by predicted sigma into equal-count bins; mean of |RMV - RMSE| / RMV.
EnceResult ence(const std::vector<GaussianPrediction>& preds,
                int bins = kDefaultRegressionBins);

// Closed-form CRPS of a Gaussian forecast. sigma = 0 degrades to |y - mean|.
double crps_gaussian(double mean, double variance, double truth);
double crps_gaussian(const GaussianPrediction& pred);
double crps_mean(const std::vector<GaussianPrediction>& preds);

// Achieved central-interval coverage divided by the target level.
double picp(const std::vector<GaussianPrediction>& preds, double level);

// Default grid 0.05, 0.10, ..., 0.95.
std::vector<double> default_cce_grid();

// Sum over grid levels of (level - empirical PIT frequency)^2, unit weights.
double cce(const std::vector<GaussianPrediction>& preds,
           const std::vector<double>& levels = default_cce_grid());

double mae(const std::vector<GaussianPrediction>& preds);
double mase(const std::vector<GaussianPrediction>& preds, double baseline_mae);

// Per-record Gaussian negative log-likelihood, mean over records, including
// the log(2 pi) constant.
double gnll_loss(const std::vector<GaussianPrediction>& preds);

// log(sigma / 2) + (mean - truth)^2 / (2 sigma^2), summed over the measurands
// sharing a record id and averaged over ids.
double bp_loss(const std::vector<GaussianPrediction>& preds);

inline const std::vector<double> kPinballLevels = {0.0228, 0.1587, 0.5, 0.8413,
                                                   0.9772};

// Mean pinball loss over every (record, level) pair.
double pinball_loss(const std::vector<QuantileSet>& preds);

struct BivariateHistogram {
  std::vector<double> err_edges;    // err_bins + 1 edges, starting at 0
  std::vector<double> sigma_edges;  // sigma_bins + 1 edges, starting at 0
  std::vector<std::vector<std::size_t>> counts;  // [err_bin][sigma_bin]
};

BivariateHistogram bivariate_histogram(const std::vector<GaussianPrediction>& preds,
                                       int err_bins, int sigma_bins);

}  // namespace uqbench
