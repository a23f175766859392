#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uqbench/core.hpp"
#include "uqbench/rng.hpp"

namespace uqbench {

// Raw per-pass / per-member model outputs prior to aggregation.

struct ClassificationMember {
  std::vector<double> logit_means;
  std::vector<double> logit_vars;
};

struct MemberOutputsClassification {
  std::string id;
  std::vector<ClassificationMember> members;  // T entries, K classes each
  std::optional<int> label;
  std::optional<std::string> group;

  void validate() const;
};

struct MemberOutputsRegression {
  std::string id;
  std::string measurand;
  std::vector<std::pair<double, double>> members;  // (mean, variance) per pass
  std::optional<double> truth;
  std::optional<std::string> group;

  void validate() const;
};

struct AggregatedClassification {
  std::string id;
  std::vector<double> total_probs;  // mean of per-pass probability vectors
  std::vector<std::vector<double>> per_pass_probs;
  double h_total = 0.0;  // entropy (nats) of total_probs
  double h_ale = 0.0;    // mean entropy (nats) of per-pass probs
  std::optional<int> label;
  std::optional<std::string> group;
};

struct AggregatedRegression {
  std::string id;
  std::string measurand;
  double mean = 0.0;
  double var_epistemic = 0.0;
  double var_aleatoric = 0.0;
  double var_total = 0.0;  // var_epistemic + var_aleatoric, exactly
  std::optional<double> truth;
  std::optional<std::string> group;
};

inline constexpr int kDefaultNoiseSamples = 100;

// Mean of softmax(means + sqrt(vars) * eps_k) over k_samples standard-normal
// draws. Draws are keyed by (record_key, member_index, sample, class), so the
// result is a pure function of the inputs. Exact (no draws consumed) when all
// variances are zero.
std::vector<double> sample_noisy_softmax(const std::vector<double>& means,
                                         const std::vector<double>& variances,
                                         int k_samples, const CounterRng& rng,
                                         std::uint64_t record_key,
                                         std::uint64_t member_index);

AggregatedClassification aggregate_classification(
    const MemberOutputsClassification& m,
    int k_samples = kDefaultNoiseSamples, const CounterRng& rng = {});

AggregatedRegression aggregate_regression(const MemberOutputsRegression& m);

}  // namespace uqbench
