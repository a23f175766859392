#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uqbench/aggregate.hpp"
#include "uqbench/core.hpp"

namespace uqbench {

// Synthetic datasets with analytically known calibration properties. All
// generation is counter-based per record index, so output is deterministic
// given (seed, parameters) under any parallelization.

// Binary classifier: latent logit difference d ~ N(0, logit_scale^2),
// reported probs = softmax([0, d]), label sampled from softmax([0, d] /
// t_true). t_true = 1 gives perfectly calibrated predictions.
std::vector<ClassPrediction> gen_classifier(std::size_t n, double t_true,
                                            double logit_scale,
                                            std::uint64_t seed,
                                            const std::string& group = "");

// Gaussian regressor: sigma_i drawn uniformly from [sigma_lo, sigma_hi],
// truth = mean_i + s_true * sigma_i * eps. s_true = 1 gives uniform PIT.
std::vector<GaussianPrediction> gen_regression(std::size_t n, double s_true,
                                               double sigma_lo, double sigma_hi,
                                               std::uint64_t seed,
                                               const std::string& group = "",
                                               const std::string& measurand = "y");

// Regression member outputs with between-member mean spread v_epi and mean
// within-member variance v_ale.
std::vector<MemberOutputsRegression> gen_members_regression(
    std::size_t n, int members, double v_epi, double v_ale, std::uint64_t seed,
    const std::string& group = "");

// Classification analogue: per-member logit means disagree with spread v_epi
// and carry logit variances with mean v_ale.
std::vector<MemberOutputsClassification> gen_members_classification(
    std::size_t n, int members, double v_epi, double v_ale, std::uint64_t seed,
    const std::string& group = "");

}  // namespace uqbench
