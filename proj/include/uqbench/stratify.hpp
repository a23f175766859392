#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "uqbench/core.hpp"
#include "uqbench/rng.hpp"

namespace uqbench {

// Equal-width bin assignment over [lo, hi]. Interior edges belong to the
// upper bin; the right endpoint belongs to the final bin.
std::vector<int> equal_width_bins(const std::vector<double>& values, int m,
                                  double lo, double hi);

struct FrequencyBins {
  std::vector<int> assignment;
  int bins_used = 0;
  std::optional<std::string> warning;  // set when m was reduced to n
};

// Rank-ordered equal-count bins with stable ties. Sizes differ by at most
// one; remainder records go to the trailing bins.
FrequencyBins equal_frequency_bins(const std::vector<double>& values, int m);

enum class StratifyKey { kTrueClass, kPredictedClass, kMeasurand, kGroup };

std::optional<StratifyKey> parse_stratify_key(const std::string& name);
std::string to_string(StratifyKey key);

std::string group_of(const ClassPrediction& r, StratifyKey key);
std::string group_of(const GaussianPrediction& r, StratifyKey key);
std::string group_of(const QuantileSet& r, StratifyKey key);

template <typename Rec>
std::map<std::string, std::vector<Rec>> stratify(const std::vector<Rec>& records,
                                                 StratifyKey key) {
  std::map<std::string, std::vector<Rec>> groups;
  for (const auto& r : records) groups[group_of(r, key)].push_back(r);
  return groups;
}

// Runs fn(i) for i in [0, n). Results must be written to preallocated slots;
// the partitioning carries no ordering guarantees.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

struct BootstrapReport {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  int b = 0;
  std::uint64_t seed = 0;
  // Paired comparison only.
  std::optional<double> p_value;
  std::optional<std::pair<double, double>> diff_ci;
};

// Linear-interpolation percentile of a sample (classic type-7 rule).
double percentile(std::vector<double> values, double q);

namespace detail {

template <typename Rec, typename MetricFn>
std::vector<double> bootstrap_values(const std::vector<Rec>& records,
                                     const MetricFn& metric, int b,
                                     std::uint64_t seed, int threads,
                                     std::uint64_t stream) {
  const std::size_t n = records.size();
  if (n == 0) throw ValidationError("bootstrap: empty record set");
  const CounterRng rng{seed};
  std::vector<double> values(static_cast<std::size_t>(b));
  std::atomic<long> redraws{0};
  const long budget = 10L * b;

  parallel_for(static_cast<std::size_t>(b), threads, [&](std::size_t bi) {
    std::vector<Rec> sample(n);
    for (std::uint64_t attempt = 0;; ++attempt) {
      for (std::size_t j = 0; j < n; ++j) {
        sample[j] = records[rng.bits(stream, bi, attempt, j) % n];
      }
      try {
        values[bi] = metric(sample);
        return;
      } catch (const ComputationError&) {
        if (redraws.fetch_add(1) + 1 > budget) {
          throw ComputationError(
              "bootstrap: metric undefined on too many resamples");
        }
      }
    }
  });
  return values;
}

}  // namespace detail

// Percentile bootstrap CI: resample records with replacement, evaluate the
// metric on each resample. Resamples on which the metric is undefined are
// redrawn, with the total redraw count capped at 10 * b.
template <typename Rec, typename MetricFn>
BootstrapReport bootstrap_ci(const std::vector<Rec>& records,
                             const MetricFn& metric, int b = 1000,
                             double level = 0.95, std::uint64_t seed = 0,
                             int threads = 1) {
  if (b < 100) throw ValidationError("bootstrap_ci: b must be >= 100");
  BootstrapReport report;
  report.point = metric(records);
  report.b = b;
  report.seed = seed;
  const std::vector<double> values =
      detail::bootstrap_values(records, metric, b, seed, threads, /*stream=*/1);
  report.lower = percentile(values, (1.0 - level) / 2.0);
  report.upper = percentile(values, (1.0 + level) / 2.0);
  return report;
}

// Paired comparison: resampled record indices are shared across both methods.
// Two-sided p-value with +1 smoothing.
template <typename Rec, typename MetricFn>
BootstrapReport paired_compare(const std::vector<Rec>& method_a,
                               const std::vector<Rec>& method_b,
                               const MetricFn& metric, int b = 1000,
                               double level = 0.95, std::uint64_t seed = 0,
                               int threads = 1) {
  if (b < 100) throw ValidationError("paired_compare: b must be >= 100");
  if (method_a.size() != method_b.size() || method_a.empty()) {
    throw ValidationError("paired_compare: record sets must be paired");
  }
  const std::size_t n = method_a.size();
  const CounterRng rng{seed};
  std::vector<double> diffs(static_cast<std::size_t>(b));
  std::atomic<long> redraws{0};
  const long budget = 10L * b;

  parallel_for(static_cast<std::size_t>(b), threads, [&](std::size_t bi) {
    std::vector<Rec> sample_a(n), sample_b(n);
    for (std::uint64_t attempt = 0;; ++attempt) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t idx = rng.bits(2, bi, attempt, j) % n;
        sample_a[j] = method_a[idx];
        sample_b[j] = method_b[idx];
      }
      try {
        diffs[bi] = metric(sample_a) - metric(sample_b);
        return;
      } catch (const ComputationError&) {
        if (redraws.fetch_add(1) + 1 > budget) {
          throw ComputationError(
              "paired_compare: metric undefined on too many resamples");
        }
      }
    }
  });

  BootstrapReport report;
  report.point = metric(method_a) - metric(method_b);
  report.b = b;
  report.seed = seed;
  report.lower = percentile(diffs, (1.0 - level) / 2.0);
  report.upper = percentile(diffs, (1.0 + level) / 2.0);
  report.diff_ci = std::make_pair(report.lower, report.upper);

  long le = 0, ge = 0;
  for (double d : diffs) {
    if (d <= 0.0) ++le;
    if (d >= 0.0) ++ge;
  }
  const double denom = static_cast<double>(b) + 1.0;
  const double p = 2.0 * std::min((static_cast<double>(le) + 1.0) / denom,
                                  (static_cast<double>(ge) + 1.0) / denom);
  report.p_value = std::min(p, 1.0);
  return report;
}

}  // namespace uqbench
