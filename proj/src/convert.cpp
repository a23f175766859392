#include "uqbench/convert.hpp"

#include <cmath>

namespace uqbench {

std::pair<double, double> interval_to_gaussian(double q_lo, double q_hi,
                                               double level_lo,
                                               double level_hi) {
  if (!(level_lo > 0.0 && level_lo < level_hi && level_hi < 1.0)) {
    throw ValidationError("interval_to_gaussian: need 0 < level_lo < level_hi < 1");
  }
  if (!(q_lo <= q_hi)) {
    throw ValidationError("interval_to_gaussian: q_lo must be <= q_hi");
  }
  const double z_lo = std_normal_quantile(level_lo);
  const double z_hi = std_normal_quantile(level_hi);
  const double sigma = (q_hi - q_lo) / (z_hi - z_lo);
  const double mean = q_lo - sigma * z_lo;
  return {mean, sigma * sigma};
}

Interval gaussian_to_interval(double mean, double variance, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ValidationError("gaussian_to_interval: level outside (0, 1)");
  }
  if (!(variance >= 0.0)) {
    throw ValidationError("gaussian_to_interval: variance must be >= 0");
  }
  const double z = std_normal_quantile((1.0 + level) / 2.0);
  const double half = z * std::sqrt(variance);
  return Interval{mean - half, mean + half, level};
}

GaussianPrediction quantiles_to_gaussian(const QuantileSet& q, LevelPair pair) {
  const double q_lo = q.value_at(pair.lo);
  const double q_hi = q.value_at(pair.hi);
  const auto [mean, variance] =
      interval_to_gaussian(q_lo, q_hi, pair.lo, pair.hi);
  GaussianPrediction out;
  out.id = q.id;
  out.measurand = q.measurand;
  out.mean = mean;
  out.variance = variance;
  out.truth = q.truth;
  out.group = q.group;
  return out;
}

double jaccard_mean(double p0, double p1) {
  if (!(p0 >= 0.0 && p1 <= 1.0 && p0 <= p1)) {
    throw ValidationError("jaccard_mean: need 0 <= p0 <= p1 <= 1");
  }
  return p1 / (1.0 - p0 + p1);
}

double pit(double mean, double variance, double truth) {
  if (!(variance > 0.0)) {
    throw ComputationError("pit: degenerate distribution (variance must be > 0)");
  }
  return std_normal_cdf((truth - mean) / std::sqrt(variance));
}

double pit(const GaussianPrediction& pred) {
  if (!pred.truth) {
    throw ValidationError("pit: record '" + pred.id + "' has no truth");
  }
  return pit(pred.mean, pred.variance, *pred.truth);
}

}  // namespace uqbench
