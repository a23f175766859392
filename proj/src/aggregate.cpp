#include "uqbench/aggregate.hpp"

#include <algorithm>
#include <cmath>

namespace uqbench {

void MemberOutputsClassification::validate() const {
  if (members.empty()) {
    throw ValidationError("record '" + id + "': empty ensemble");
  }
  const std::size_t k = members.front().logit_means.size();
  if (k < 2) {
    throw ValidationError("record '" + id + "': needs at least two classes");
  }
  for (const auto& m : members) {
    if (m.logit_means.size() != k || m.logit_vars.size() != k) {
      throw ValidationError("record '" + id +
                            "': member logit vectors have inconsistent length");
    }
    for (double mu : m.logit_means) {
      if (!std::isfinite(mu)) {
        throw ValidationError("record '" + id + "': non-finite logit mean");
      }
    }
    for (double v : m.logit_vars) {
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError("record '" + id + "': logit variance must be >= 0");
      }
    }
  }
  if (label && (*label < 0 || *label >= static_cast<int>(k))) {
    throw ValidationError("record '" + id + "': label out of range");
  }
}

void MemberOutputsRegression::validate() const {
  if (members.empty()) {
    throw ValidationError("record '" + id + "': empty ensemble");
  }
  for (const auto& [mu, var] : members) {
    if (!std::isfinite(mu)) {
      throw ValidationError("record '" + id + "': non-finite member mean");
    }
    if (!std::isfinite(var) || var < 0.0) {
      throw ValidationError("record '" + id + "': member variance must be >= 0");
    }
  }
  if (truth && !std::isfinite(*truth)) {
    throw ValidationError("record '" + id + "': non-finite truth");
  }
}

std::vector<double> sample_noisy_softmax(const std::vector<double>& means,
                                         const std::vector<double>& variances,
                                         int k_samples, const CounterRng& rng,
                                         std::uint64_t record_key,
                                         std::uint64_t member_index) {
  if (means.size() != variances.size()) {
    throw ValidationError("sample_noisy_softmax: means/variances length mismatch");
  }
  if (k_samples < 1) {
    throw ValidationError("sample_noisy_softmax: k_samples must be >= 1");
  }
  for (double v : variances) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError("sample_noisy_softmax: negative variance");
    }
  }
  const bool noiseless = std::all_of(variances.begin(), variances.end(),
                                     [](double v) { return v == 0.0; });
  if (noiseless) return softmax(means);

  const std::size_t k = means.size();
  std::vector<double> sigma(k);
  for (std::size_t c = 0; c < k; ++c) sigma[c] = std::sqrt(variances[c]);

  std::vector<double> acc(k, 0.0);
  std::vector<double> z(k);
  for (int s = 0; s < k_samples; ++s) {
    for (std::size_t c = 0; c < k; ++c) {
      const double eps =
          sigma[c] == 0.0
              ? 0.0
              : rng.normal(record_key, member_index, static_cast<std::uint64_t>(s), c);
      z[c] = means[c] + sigma[c] * eps;
    }
    const std::vector<double> p = softmax(z);
    for (std::size_t c = 0; c < k; ++c) acc[c] += p[c];
  }
  for (double& a : acc) a /= static_cast<double>(k_samples);
  return acc;
}

AggregatedClassification aggregate_classification(
    const MemberOutputsClassification& m, int k_samples, const CounterRng& rng) {
  m.validate();
  const std::uint64_t key = hash_id(m.id);
  const std::size_t t_count = m.members.size();
  const std::size_t k = m.members.front().logit_means.size();

  AggregatedClassification out;
  out.id = m.id;
  out.label = m.label;
  out.group = m.group;
  out.per_pass_probs.reserve(t_count);

  std::vector<double> total(k, 0.0);
  double h_sum = 0.0;
  for (std::size_t t = 0; t < t_count; ++t) {
    std::vector<double> p = sample_noisy_softmax(
        m.members[t].logit_means, m.members[t].logit_vars, k_samples, rng, key, t);
    h_sum += entropy(p);
    for (std::size_t c = 0; c < k; ++c) total[c] += p[c];
    out.per_pass_probs.push_back(std::move(p));
  }
  for (double& p : total) p /= static_cast<double>(t_count);
  out.h_ale = h_sum / static_cast<double>(t_count);
  out.h_total = entropy(total);
  out.total_probs = std::move(total);
  return out;
}

AggregatedRegression aggregate_regression(const MemberOutputsRegression& m) {
  m.validate();
  const double t_count = static_cast<double>(m.members.size());

  AggregatedRegression out;
  out.id = m.id;
  out.measurand = m.measurand;
  out.truth = m.truth;
  out.group = m.group;

  double mean = 0.0;
  double var_ale = 0.0;
  for (const auto& [mu, var] : m.members) {
    mean += mu;
    var_ale += var;
  }
  mean /= t_count;
  var_ale /= t_count;

  // Population variance (divide by T) of the member means.
  double var_epi = 0.0;
  for (const auto& [mu, var] : m.members) {
    var_epi += (mu - mean) * (mu - mean);
  }
  var_epi /= t_count;

  out.mean = mean;
  out.var_epistemic = var_epi;
  out.var_aleatoric = var_ale;
  out.var_total = var_epi + var_ale;
  return out;
}

}  // namespace uqbench
