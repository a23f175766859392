#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "uqbench/convert.hpp"
#include "uqbench/core.hpp"
#include "uqbench/metrics_classification.hpp"
#include "uqbench/metrics_regression.hpp"
#include "uqbench/recalibrate.hpp"
#include "uqbench/stratify.hpp"

namespace uqbench {

inline constexpr const char* kReportSchema = "uqbench/1";

struct EvalOptions {
  int bins = kDefaultBins;
  std::vector<std::string> metrics;  // empty selects the kind's defaults
  double threshold = 0.5;            // for confusion-matrix metrics
  std::optional<double> baseline_mae;
  std::optional<LevelPair> pair;  // quantile-to-Gaussian conversion pair
  std::vector<double> cce_grid = default_cce_grid();
};

std::vector<std::string> default_metrics(PredictionKind kind);
std::vector<std::string> valid_metrics(PredictionKind kind);

// Metric values plus the per-bin data behind the reliability diagrams.
// Metrics that are undefined on the records (for example AUC with a single
// class) are null-valued, with the reason under notes.
struct GroupEval {
  std::size_t n = 0;
  std::map<std::string, std::optional<double>> metrics;
  std::map<std::string, std::string> notes;
  std::vector<BinStat> reliability_bins;
  std::vector<BinStat> uce_bins;
  std::vector<BinStat> vce_bins;
  std::vector<RegressionBinStat> ence_bins;
  std::optional<BivariateHistogram> bivariate;
};

GroupEval evaluate_records(const LabeledSplit& split, const EvalOptions& opts);

// Evaluates one named metric; throws ComputationError when undefined.
double evaluate_metric(const LabeledSplit& split, const std::string& metric,
                       const EvalOptions& opts);

struct StratifiedEval {
  GroupEval global;
  std::map<std::string, GroupEval> groups;
  std::map<std::string, std::optional<double>> group_mean;
};

StratifiedEval stratified_evaluate(const LabeledSplit& split,
                                   std::optional<StratifyKey> key,
                                   const EvalOptions& opts);

struct BootstrapOptions {
  int b = 1000;
  double level = 0.95;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Full ReliabilityReport JSON, including bootstrap intervals when requested.
nlohmann::json build_report(const LabeledSplit& split,
                            std::optional<StratifyKey> key,
                            const EvalOptions& opts,
                            const std::optional<BootstrapOptions>& bootstrap);

// Plot-data rows for the diagram command.
nlohmann::json diagram_json(const LabeledSplit& split, const std::string& type,
                            const EvalOptions& opts);
std::string diagram_csv(const LabeledSplit& split, const std::string& type,
                        const EvalOptions& opts);

// Fitted-model JSON.
nlohmann::json model_json(const TemperatureModel& m);
nlohmann::json model_json(const VarianceScaleModel& m);
nlohmann::json model_json(const IsotonicModel& m);
nlohmann::json model_json(const IsotonicClassifierModel& m);
nlohmann::json model_json(const ConformalOffset& m);

}  // namespace uqbench
