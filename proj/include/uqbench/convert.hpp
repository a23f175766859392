#pragma once

#include <utility>

#include "uqbench/core.hpp"

namespace uqbench {

// Quantile-level pair used to parameterize a Gaussian from interval-style
// outputs. The named pairs match the central coverages used throughout:
// 1 sigma -> (0.1587, 0.8413) covering 0.6826, 2 sigma -> (0.0228, 0.9772)
// covering 0.9544.
struct LevelPair {
  double lo = 0.0;
  double hi = 0.0;

  double central_coverage() const { return hi - lo; }
};

inline constexpr LevelPair kOneSigmaPair{0.1587, 0.8413};
inline constexpr LevelPair kTwoSigmaPair{0.0228, 0.9772};
inline constexpr double kOneSigmaCoverage = 0.6826;
inline constexpr double kTwoSigmaCoverage = 0.9544;

// Solves mean + sigma * z(level_lo) = q_lo and mean + sigma * z(level_hi) =
// q_hi. Returns (mean, variance). A degenerate interval (q_lo == q_hi) gives
// variance 0.
std::pair<double, double> interval_to_gaussian(double q_lo, double q_hi,
                                               double level_lo,
                                               double level_hi);

// Central interval [mean - z*sigma, mean + z*sigma] with
// z = std_normal_quantile((1 + level) / 2).
Interval gaussian_to_interval(double mean, double variance, double level);

// Fits a Gaussian through the two quantiles of `q` at the pair's levels. Both
// levels must be present in q.levels.
GaussianPrediction quantiles_to_gaussian(const QuantileSet& q, LevelPair pair);

// p1 / (1 - p0 + p1); the log-loss-optimal point inside a probability
// interval [p0, p1].
double jaccard_mean(double p0, double p1);

// Probability integral transform Phi((truth - mean) / sigma). Requires truth
// present and variance > 0.
double pit(const GaussianPrediction& pred);
double pit(double mean, double variance, double truth);

}  // namespace uqbench
