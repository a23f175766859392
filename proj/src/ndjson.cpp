#include "uqbench/ndjson.hpp"

#include <cmath>

#include "json.hpp"

namespace uqbench {

using nlohmann::json;

namespace {

std::optional<std::string> opt_group(const json& j) {
  if (j.contains("group")) return j.at("group").get<std::string>();
  return std::nullopt;
}

json base_object(const std::string& id, const std::optional<std::string>& group) {
  json j;
  j["id"] = id;
  if (group) j["group"] = *group;
  return j;
}

double finite_number(const json& j, const char* field) {
  if (!j.is_number()) {
    throw ValidationError(std::string("field '") + field + "' must be a number");
  }
  const double x = j.get<double>();
  if (!std::isfinite(x)) {
    throw ValidationError(std::string("field '") + field + "' is not finite");
  }
  return x;
}

std::vector<double> number_array(const json& j, const char* field) {
  if (!j.is_array()) {
    throw ValidationError(std::string("field '") + field + "' must be an array");
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(finite_number(e, field));
  return out;
}

ClassPrediction class_from_json(const json& j) {
  ClassPrediction r;
  r.id = j.at("id").get<std::string>();
  r.group = opt_group(j);
  if (j.contains("label")) r.label = j.at("label").get<int>();
  if (j.contains("logits")) r.logits = number_array(j.at("logits"), "logits");
  if (j.contains("probs")) {
    r.probs = number_array(j.at("probs"), "probs");
    r.probs_explicit = true;
  } else if (r.logits) {
    r.probs = softmax(*r.logits);
    r.probs_explicit = false;
  } else {
    throw ValidationError("record '" + r.id + "': needs probs or logits");
  }
  r.validate();
  return r;
}

GaussianPrediction gaussian_from_json(const json& j) {
  GaussianPrediction r;
  r.id = j.at("id").get<std::string>();
  r.measurand = j.value("measurand", std::string());
  r.mean = finite_number(j.at("mean"), "mean");
  r.variance = j.at("variance").get<double>();
  if (j.contains("truth")) r.truth = finite_number(j.at("truth"), "truth");
  r.group = opt_group(j);
  r.validate();
  return r;
}

QuantileSet quantile_from_json(const json& j) {
  QuantileSet r;
  r.id = j.at("id").get<std::string>();
  r.measurand = j.value("measurand", std::string());
  r.levels = number_array(j.at("levels"), "levels");
  r.values = number_array(j.at("values"), "values");
  if (j.contains("truth")) r.truth = finite_number(j.at("truth"), "truth");
  r.group = opt_group(j);
  r.validate();
  return r;
}

MemberOutputsClassification member_class_from_json(const json& j) {
  MemberOutputsClassification r;
  r.id = j.at("id").get<std::string>();
  if (j.contains("label")) r.label = j.at("label").get<int>();
  r.group = opt_group(j);
  for (const auto& m : j.at("members")) {
    ClassificationMember cm;
    cm.logit_means = number_array(m.at("logit_means"), "logit_means");
    cm.logit_vars = number_array(m.at("logit_vars"), "logit_vars");
    r.members.push_back(std::move(cm));
  }
  r.validate();
  return r;
}

MemberOutputsRegression member_reg_from_json(const json& j) {
  MemberOutputsRegression r;
  r.id = j.at("id").get<std::string>();
  r.measurand = j.value("measurand", std::string());
  if (j.contains("truth")) r.truth = finite_number(j.at("truth"), "truth");
  r.group = opt_group(j);
  for (const auto& m : j.at("members")) {
    if (!m.is_array() || m.size() != 2) {
      throw ValidationError("record '" + r.id +
                            "': members must be [mean, variance] pairs");
    }
    r.members.emplace_back(finite_number(m[0], "members"), m[1].get<double>());
  }
  r.validate();
  return r;
}

RecordKind kind_of(const json& j) {
  if (j.contains("members")) {
    const auto& members = j.at("members");
    if (members.is_array() && !members.empty() && members[0].is_object()) {
      return RecordKind::kMemberClassification;
    }
    return RecordKind::kMemberRegression;
  }
  if (j.contains("probs") || j.contains("logits")) {
    return RecordKind::kClassification;
  }
  if (j.contains("mean") && j.contains("variance")) return RecordKind::kGaussian;
  if (j.contains("levels") && j.contains("values")) return RecordKind::kQuantile;
  throw ValidationError("record does not match any known schema");
}

json parse_line(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ValidationError("malformed JSON");
  }
  return j;
}

PredictionKind to_prediction_kind(RecordKind kind) {
  switch (kind) {
    case RecordKind::kClassification: return PredictionKind::kClassification;
    case RecordKind::kGaussian: return PredictionKind::kGaussian;
    case RecordKind::kQuantile: return PredictionKind::kQuantile;
    default:
      throw ValidationError("member-output record where a prediction was expected");
  }
}

[[noreturn]] void fail_at_line(std::size_t line_no, const std::string& what) {
  throw ValidationError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::string to_string(RecordKind kind) {
  switch (kind) {
    case RecordKind::kClassification: return "classification";
    case RecordKind::kGaussian: return "gaussian";
    case RecordKind::kQuantile: return "quantile";
    case RecordKind::kMemberClassification: return "member-classification";
    case RecordKind::kMemberRegression: return "member-regression";
  }
  return "unknown";
}

std::string serialize(const ClassPrediction& r) {
  json j = base_object(r.id, r.group);
  if (r.probs_explicit) j["probs"] = r.probs;
  if (r.logits) j["logits"] = *r.logits;
  if (r.label) j["label"] = *r.label;
  return j.dump();
}

std::string serialize(const GaussianPrediction& r) {
  json j = base_object(r.id, r.group);
  j["measurand"] = r.measurand;
  j["mean"] = r.mean;
  j["variance"] = r.variance;
  if (r.truth) j["truth"] = *r.truth;
  return j.dump();
}

std::string serialize(const QuantileSet& r) {
  json j = base_object(r.id, r.group);
  j["measurand"] = r.measurand;
  j["levels"] = r.levels;
  j["values"] = r.values;
  if (r.truth) j["truth"] = *r.truth;
  return j.dump();
}

std::string serialize(const MemberOutputsClassification& r) {
  json j = base_object(r.id, r.group);
  json members = json::array();
  for (const auto& m : r.members) {
    members.push_back({{"logit_means", m.logit_means}, {"logit_vars", m.logit_vars}});
  }
  j["members"] = std::move(members);
  if (r.label) j["label"] = *r.label;
  return j.dump();
}

std::string serialize(const MemberOutputsRegression& r) {
  json j = base_object(r.id, r.group);
  j["measurand"] = r.measurand;
  json members = json::array();
  for (const auto& [mu, var] : r.members) members.push_back({mu, var});
  j["members"] = std::move(members);
  if (r.truth) j["truth"] = *r.truth;
  return j.dump();
}

std::string serialize(const AggregatedClassification& r) {
  json j = base_object(r.id, r.group);
  j["probs"] = r.total_probs;
  j["h_total"] = r.h_total;
  j["h_ale"] = r.h_ale;
  if (r.label) j["label"] = *r.label;
  return j.dump();
}

std::string serialize(const AggregatedRegression& r) {
  json j = base_object(r.id, r.group);
  j["measurand"] = r.measurand;
  j["mean"] = r.mean;
  j["variance"] = r.var_total;
  j["var_epistemic"] = r.var_epistemic;
  j["var_aleatoric"] = r.var_aleatoric;
  if (r.truth) j["truth"] = *r.truth;
  return j.dump();
}

ClassPrediction parse_class_prediction(const std::string& line) {
  return class_from_json(parse_line(line));
}

GaussianPrediction parse_gaussian_prediction(const std::string& line) {
  return gaussian_from_json(parse_line(line));
}

QuantileSet parse_quantile_set(const std::string& line) {
  return quantile_from_json(parse_line(line));
}

RecordKind detect_kind(const std::string& line) {
  return kind_of(parse_line(line));
}

LabeledSplit ingest(std::istream& in, std::optional<PredictionKind> expected,
                    SplitRole role) {
  LabeledSplit split;
  split.role = role;
  bool kind_known = expected.has_value();
  if (expected) split.kind = *expected;

  std::string line;
  std::size_t line_no = 0;
  std::optional<int> class_count;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = parse_line(line);
      const PredictionKind kind = to_prediction_kind(kind_of(j));
      if (!kind_known) {
        split.kind = kind;
        kind_known = true;
      } else if (kind != split.kind) {
        throw ValidationError("record kind '" + to_string(kind) +
                              "' mixed into a " + to_string(split.kind) +
                              " stream");
      }
      switch (kind) {
        case PredictionKind::kClassification: {
          ClassPrediction r = class_from_json(j);
          if (class_count && r.num_classes() != *class_count) {
            throw ValidationError("record '" + r.id +
                                  "': class count differs from earlier records");
          }
          class_count = r.num_classes();
          split.classification.push_back(std::move(r));
          break;
        }
        case PredictionKind::kGaussian:
          split.gaussian.push_back(gaussian_from_json(j));
          break;
        case PredictionKind::kQuantile:
          split.quantiles.push_back(quantile_from_json(j));
          break;
      }
    } catch (const ValidationError& e) {
      fail_at_line(line_no, e.what());
    } catch (const json::exception& e) {
      fail_at_line(line_no, e.what());
    }
  }
  return split;
}

std::vector<MemberOutputsClassification> ingest_member_classification(
    std::istream& in) {
  std::vector<MemberOutputsClassification> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(member_class_from_json(parse_line(line)));
    } catch (const ValidationError& e) {
      fail_at_line(line_no, e.what());
    } catch (const json::exception& e) {
      fail_at_line(line_no, e.what());
    }
  }
  return out;
}

std::vector<MemberOutputsRegression> ingest_member_regression(std::istream& in) {
  std::vector<MemberOutputsRegression> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(member_reg_from_json(parse_line(line)));
    } catch (const ValidationError& e) {
      fail_at_line(line_no, e.what());
    } catch (const json::exception& e) {
      fail_at_line(line_no, e.what());
    }
  }
  return out;
}

void write_split(std::ostream& out, const LabeledSplit& split) {
  switch (split.kind) {
    case PredictionKind::kClassification:
      for (const auto& r : split.classification) out << serialize(r) << '\n';
      break;
    case PredictionKind::kGaussian:
      for (const auto& r : split.gaussian) out << serialize(r) << '\n';
      break;
    case PredictionKind::kQuantile:
      for (const auto& r : split.quantiles) out << serialize(r) << '\n';
      break;
  }
}

}  // namespace uqbench
