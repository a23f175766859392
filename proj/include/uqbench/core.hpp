#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace uqbench {

// Input and schema problems (bad records, domain violations). Mapped to CLI
// exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data-dependent failures: insufficient data, degenerate fits, metrics that
// are undefined on the given records. Mapped to CLI exit code 1.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Probabilities are clamped to [kProbFloor, 1 - kProbFloor] before any log
// that could see a saturated softmax output.
inline constexpr double kProbFloor = 1e-12;

double clamp_prob(double p);

// Numerically stable softmax (max subtraction). Entries are clamped away from
// exact 0/1 and renormalized, so the result is a valid probability vector for
// any finite input.
std::vector<double> softmax(const std::vector<double>& logits);

// Shannon entropy in nats with the 0 log 0 = 0 convention.
double entropy(const std::vector<double>& probs);

// entropy / log K, in [0, 1]. Throws ValidationError if probs do not sum to 1.
double normalized_entropy(const std::vector<double>& probs);

double std_normal_pdf(double x);
double std_normal_cdf(double x);

// Inverse of std_normal_cdf on (0, 1). Rational approximation refined by one
// Newton step; |quantile(cdf(x)) - x| < 1e-10 over p in [1e-12, 1 - 1e-12].
double std_normal_quantile(double p);

// --- Domain records ---------------------------------------------------------

struct ClassPrediction {
  std::string id;
  std::vector<double> probs;
  std::optional<std::vector<double>> logits;
  std::optional<int> label;
  std::optional<std::string> group;
  // Whether probs came from the input record (as opposed to being derived
  // from logits); controls which fields serialization emits.
  bool probs_explicit = true;

  int num_classes() const { return static_cast<int>(probs.size()); }
  int predicted_class() const;
  double confidence() const;  // max probability
  void validate() const;
};

struct GaussianPrediction {
  std::string id;
  std::string measurand;
  double mean = 0.0;
  double variance = 0.0;
  std::optional<double> truth;
  std::optional<std::string> group;

  double sigma() const;
  void validate() const;
};

struct QuantileSet {
  std::string id;
  std::string measurand;
  std::vector<double> levels;  // strictly increasing, in (0, 1)
  std::vector<double> values;  // non-decreasing
  std::optional<double> truth;
  std::optional<std::string> group;

  // Value at an exactly matching level; throws ValidationError otherwise.
  double value_at(double level) const;
  void validate() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.0;  // nominal central coverage in (0, 1)

  bool contains(double y) const { return lo <= y && y <= hi; }
  void validate() const;
};

enum class SplitRole { kTrainBaseline, kCalibration, kTest };

enum class PredictionKind { kClassification, kGaussian, kQuantile };

std::string to_string(SplitRole role);
std::string to_string(PredictionKind kind);

// Homogeneous collection of one prediction type. Exactly one of the three
// record vectors is populated, according to `kind`.
struct LabeledSplit {
  SplitRole role = SplitRole::kTest;
  PredictionKind kind = PredictionKind::kClassification;
  std::vector<ClassPrediction> classification;
  std::vector<GaussianPrediction> gaussian;
  std::vector<QuantileSet> quantiles;

  std::size_t size() const;
  void validate() const;
};

}  // namespace uqbench
