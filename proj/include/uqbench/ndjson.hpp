#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "uqbench/aggregate.hpp"
#include "uqbench/core.hpp"

namespace uqbench {

enum class RecordKind {
  kClassification,
  kGaussian,
  kQuantile,
  kMemberClassification,
  kMemberRegression,
};

std::string to_string(RecordKind kind);

// One prediction record per line, UTF-8, LF endings, shortest round-trip float
// representation on output. Unknown fields are ignored on input.

std::string serialize(const ClassPrediction& r);
std::string serialize(const GaussianPrediction& r);
std::string serialize(const QuantileSet& r);
std::string serialize(const MemberOutputsClassification& r);
std::string serialize(const MemberOutputsRegression& r);
std::string serialize(const AggregatedClassification& r);
std::string serialize(const AggregatedRegression& r);

ClassPrediction parse_class_prediction(const std::string& line);
GaussianPrediction parse_gaussian_prediction(const std::string& line);
QuantileSet parse_quantile_set(const std::string& line);

// Reads an NDJSON stream of prediction records. The kind is detected from the
// first non-empty line unless `expected` is given; records of any other kind,
// malformed lines, and invariant breaches raise ValidationError naming the
// line number. Input order is preserved.
LabeledSplit ingest(std::istream& in,
                    std::optional<PredictionKind> expected = std::nullopt,
                    SplitRole role = SplitRole::kTest);

std::vector<MemberOutputsClassification> ingest_member_classification(
    std::istream& in);
std::vector<MemberOutputsRegression> ingest_member_regression(std::istream& in);

// Detected kind of a single record line (for CLI auto-detection).
RecordKind detect_kind(const std::string& line);

void write_split(std::ostream& out, const LabeledSplit& split);

}  // namespace uqbench
