#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uqbench/core.hpp"

namespace uqbench {

// Per-bin reliability-diagram data. Count-weighted recombination of the bins
// reproduces the global means.
struct BinStat {
  int bin = 0;
  std::size_t count = 0;
  double conf = 0.0;         // mean confidence (max probability)
  double acc = 0.0;          // fraction correct
  double uncert = 0.0;       // mean normalized entropy
  double err = 0.0;          // 1 - acc
  double obs_entropy = 0.0;  // normalized entropy of (acc, 1 - acc)
};

struct BinnedMetric {
  double value = 0.0;
  std::vector<BinStat> bins;
};

inline constexpr int kDefaultBins = 15;

// Equal-width bins over confidence; weighted mean |acc - conf|.
BinnedMetric ece(const std::vector<ClassPrediction>& preds,
                 int bins = kDefaultBins);

struct AceResult {
  double value = 0.0;
  int ranges_used = 0;
  std::optional<std::string> warning;
};

// Per-class equal-frequency ranges; mean |acc - conf| over all class/range
// cells.
AceResult ace(const std::vector<ClassPrediction>& preds,
              int ranges = kDefaultBins);

// Kernel-smoothed calibration error of the residuals y - f on [0, 1] with a
// reflected Gaussian kernel; bandwidth picked at the fixed point
// sigma = smece_sigma. Binary only.
double smece(const std::vector<ClassPrediction>& preds);

// Equal-width bins over normalized entropy; weighted mean |err - uncert| with
// the binary-only halving of uncert.
BinnedMetric uce(const std::vector<ClassPrediction>& preds,
                 int bins = kDefaultBins);

// Equal-width bins over normalized entropy; weighted mean absolute gap
// between mean predicted entropy and the entropy of the observed
// correct/incorrect proportions. Binary only.
BinnedMetric vce(const std::vector<ClassPrediction>& preds,
                 int bins = kDefaultBins);

// Mean negative log probability of the true class.
double nll(const std::vector<ClassPrediction>& preds);

// Mann-Whitney AUC with midranks; requires both classes present.
double auc(const std::vector<ClassPrediction>& preds);

struct ThresholdMetrics {
  double threshold = 0.5;
  double f1 = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double mcc = 0.0;
  double balanced_accuracy = 0.0;
  bool mcc_undefined = false;  // zero denominator, reported as 0
};

// Confusion-matrix metrics with "positive iff probs[1] >= threshold".
ThresholdMetrics threshold_metrics(const std::vector<ClassPrediction>& preds,
                                   double threshold);

enum class SweepConstraint { kSensitivityAbove, kSpecificityAbove };

// Scans unique score cut-points and maximizes the free quantity subject to
// the constrained one exceeding `bound`.
ThresholdMetrics sweep(const std::vector<ClassPrediction>& preds,
                       SweepConstraint constraint, double bound = 0.8);

}  // namespace uqbench
