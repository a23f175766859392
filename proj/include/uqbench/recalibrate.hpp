#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uqbench/convert.hpp"
#include "uqbench/core.hpp"

namespace uqbench {

// Weighted least-squares monotone (non-decreasing) fit via pool-adjacent
// violators. Block values are computed from prefix sums, so a block's fitted
// value equals the plain weighted mean of its members.
std::vector<double> pava(const std::vector<double>& y,
                         const std::vector<double>& w);
std::vector<double> pava(const std::vector<double>& y);

// Piecewise-constant non-decreasing step function with clamp-to-end
// extrapolation.
struct IsotonicModel {
  std::vector<double> breakpoints;  // increasing
  std::vector<double> values;       // non-decreasing

  double eval(double x) const;
  // Generalized inverse: smallest breakpoint whose value reaches v.
  double pseudo_inverse(double v) const;
};

// Fits an isotonic step function to (x, y, weight) points. Exact ties in x
// are pooled into one weighted point before the monotone fit.
IsotonicModel fit_isotonic(std::vector<double> x, std::vector<double> y,
                           std::vector<double> w);

// --- Temperature scaling -----------------------------------------------------

struct TemperatureModel {
  double t = 1.0;
};

struct TemperatureFit {
  TemperatureModel model;
  std::optional<std::string> warning;
};

// Minimizes calibration NLL of softmax(z / T) by golden-section search on
// log T over [-4, 4]. Requires logits and labels on every record.
TemperatureFit fit_temperature(const std::vector<ClassPrediction>& cal);

ClassPrediction apply_temperature(const TemperatureModel& model,
                                  const ClassPrediction& pred);

// --- Variance scaling --------------------------------------------------------

struct VarianceScaleModel {
  double s = 1.0;  // multiplier on the predicted standard deviation
};

struct VarianceScaleFit {
  VarianceScaleModel model;
  std::optional<std::string> warning;
};

// Closed-form MLE: s^2 = mean((truth - mean)^2 / variance). Requires truths
// and strictly positive variances.
VarianceScaleFit fit_variance_scale(const std::vector<GaussianPrediction>& cal);

GaussianPrediction apply_variance_scale(const VarianceScaleModel& model,
                                        const GaussianPrediction& pred);

// --- Isotonic regression, classifier form ------------------------------------

struct IsotonicClassifierModel {
  std::vector<IsotonicModel> per_class;  // one-vs-all, indexed by class
};

IsotonicClassifierModel fit_isotonic_classifier(
    const std::vector<ClassPrediction>& cal);

// Maps each class score through its step function and renormalizes.
ClassPrediction apply_isotonic_classifier(const IsotonicClassifierModel& model,
                                          const ClassPrediction& pred);

std::vector<ClassPrediction> isotonic_classifier(
    const std::vector<ClassPrediction>& cal,
    const std::vector<ClassPrediction>& test);

// --- Isotonic regression, PIT form --------------------------------------------

// Isotonic map from nominal PIT level to empirical frequency, fitted on a
// calibration split. Applying composes each record's quantile function with
// the pseudo-inverse of the map and re-fits a Gaussian through the 1-sigma
// level pair.
struct PitRecalibration {
  IsotonicModel map;
  bool degenerate = false;
  std::optional<std::string> warning;
};

PitRecalibration fit_pit_recalibration(const std::vector<GaussianPrediction>& cal);

GaussianPrediction apply_pit_recalibration(const PitRecalibration& model,
                                           const GaussianPrediction& pred);

std::vector<GaussianPrediction> isotonic_regression_recalibrate(
    const std::vector<GaussianPrediction>& cal,
    const std::vector<GaussianPrediction>& test);

// --- Conformal methods --------------------------------------------------------

struct ConformalOffset {
  double level = 0.0;  // nominal central coverage
  double q_hat = 0.0;  // calibration score quantile
};

// Nonconformity score max(q_lo - y, y - q_hi) of an interval against a truth.
double conformal_score(double q_lo, double q_hi, double y);

// Finite-sample quantile: the ceil((n+1)(1-alpha))-th smallest score
// (1-based). Throws ComputationError when the index exceeds n.
double conformal_quantile(std::vector<double> scores, double alpha);

ConformalOffset cqr_fit(const std::vector<QuantileSet>& cal, LevelPair pair);
Interval cqr_apply(const ConformalOffset& offset, const QuantileSet& q,
                   LevelPair pair);

ConformalOffset cmap_fit(const std::vector<GaussianPrediction>& cal,
                         double level);
Interval cmap_apply(const ConformalOffset& offset,
                    const GaussianPrediction& pred);
std::vector<Interval> cmap(const std::vector<GaussianPrediction>& cal,
                           const std::vector<GaussianPrediction>& test,
                           double level);

// --- Venn-ABERS ----------------------------------------------------------------

struct VennAbersOutput {
  double p0 = 0.0;
  double p1 = 0.0;
  double p = 0.0;  // Jaccard point probability
};

// Binary only. For each test score s, fits one isotonic model over the
// calibration points plus (s, 0) and one over the points plus (s, 1), and
// evaluates both at s.
std::vector<VennAbersOutput> venn_abers(const std::vector<ClassPrediction>& cal,
                                        const std::vector<double>& test_scores);

}  // namespace uqbench
