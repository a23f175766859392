#include "uqbench/synth.hpp"

#include <cmath>

#include "uqbench/rng.hpp"

namespace uqbench {

namespace {

// Stream tags keep draws from different generators disjoint under one seed.
enum Stream : std::uint64_t {
  kClassifier = 1,
  kRegression = 2,
  kMembersReg = 3,
  kMembersClass = 4,
};

std::string record_id(const std::string& group, std::size_t i) {
  return (group.empty() ? std::string("r") : group + "-") + std::to_string(i);
}

void set_group(std::optional<std::string>& field, const std::string& group) {
  if (!group.empty()) field = group;
}

}  // namespace

std::vector<ClassPrediction> gen_classifier(std::size_t n, double t_true,
                                            double logit_scale,
                                            std::uint64_t seed,
                                            const std::string& group) {
  if (n < 1) throw ValidationError("gen_classifier: n must be >= 1");
  if (!(t_true > 0.0)) throw ValidationError("gen_classifier: t_true must be > 0");
  const CounterRng rng{seed};
  std::vector<ClassPrediction> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = logit_scale * rng.normal(kClassifier, i, 0);
    ClassPrediction& r = out[i];
    r.id = record_id(group, i);
    r.logits = std::vector<double>{0.0, d};
    r.probs = softmax(*r.logits);
    const double p1 = softmax({0.0, d / t_true})[1];
    r.label = rng.uniform(kClassifier, i, 1) < p1 ? 1 : 0;
    set_group(r.group, group);
  }
  return out;
}

std::vector<GaussianPrediction> gen_regression(std::size_t n, double s_true,
                                               double sigma_lo, double sigma_hi,
                                               std::uint64_t seed,
                                               const std::string& group,
                                               const std::string& measurand) {
  if (n < 1) throw ValidationError("gen_regression: n must be >= 1");
  if (!(s_true > 0.0)) throw ValidationError("gen_regression: s_true must be > 0");
  if (!(sigma_lo > 0.0 && sigma_lo <= sigma_hi)) {
    throw ValidationError("gen_regression: need 0 < sigma_lo <= sigma_hi");
  }
  const CounterRng rng{seed};
  std::vector<GaussianPrediction> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    GaussianPrediction& r = out[i];
    r.id = record_id(group, i);
    r.measurand = measurand;
    r.mean = 100.0 + 15.0 * rng.normal(kRegression, i, 0);
    const double sigma =
        sigma_lo + (sigma_hi - sigma_lo) * rng.uniform(kRegression, i, 1);
    r.variance = sigma * sigma;
    r.truth = r.mean + s_true * sigma * rng.normal(kRegression, i, 2);
    set_group(r.group, group);
  }
  return out;
}

std::vector<MemberOutputsRegression> gen_members_regression(
    std::size_t n, int members, double v_epi, double v_ale, std::uint64_t seed,
    const std::string& group) {
  if (n < 1 || members < 1) {
    throw ValidationError("gen_members_regression: n and members must be >= 1");
  }
  const CounterRng rng{seed};
  std::vector<MemberOutputsRegression> out(n);
  const double epi_sd = std::sqrt(v_epi);
  for (std::size_t i = 0; i < n; ++i) {
    MemberOutputsRegression& r = out[i];
    r.id = record_id(group, i);
    r.measurand = "y";
    const double center = 100.0 + 10.0 * rng.normal(kMembersReg, i, 0);
    for (int t = 0; t < members; ++t) {
      const double mu =
          center + epi_sd * rng.normal(kMembersReg, i, 1, static_cast<std::uint64_t>(t));
      const double var =
          v_ale * (0.5 + rng.uniform(kMembersReg, i, 2, static_cast<std::uint64_t>(t)));
      r.members.emplace_back(mu, var);
    }
    r.truth = center + std::sqrt(v_ale + v_epi) * rng.normal(kMembersReg, i, 3);
    set_group(r.group, group);
  }
  return out;
}

std::vector<MemberOutputsClassification> gen_members_classification(
    std::size_t n, int members, double v_epi, double v_ale, std::uint64_t seed,
    const std::string& group) {
  if (n < 1 || members < 1) {
    throw ValidationError("gen_members_classification: n and members must be >= 1");
  }
  const CounterRng rng{seed};
  std::vector<MemberOutputsClassification> out(n);
  const double epi_sd = std::sqrt(v_epi);
  for (std::size_t i = 0; i < n; ++i) {
    MemberOutputsClassification& r = out[i];
    r.id = record_id(group, i);
    const double d = 3.0 * rng.normal(kMembersClass, i, 0);
    for (int t = 0; t < members; ++t) {
      ClassificationMember m;
      const auto tu = static_cast<std::uint64_t>(t);
      m.logit_means = {0.0, d + epi_sd * rng.normal(kMembersClass, i, 1, tu)};
      m.logit_vars = {v_ale * (0.5 + rng.uniform(kMembersClass, i, 2, tu)),
                      v_ale * (0.5 + rng.uniform(kMembersClass, i, 3, tu))};
      r.members.push_back(std::move(m));
    }
    const double p1 = softmax({0.0, d})[1];
    r.label = rng.uniform(kMembersClass, i, 4) < p1 ? 1 : 0;
    set_group(r.group, group);
  }
  return out;
}

}  // namespace uqbench
