#include "uqbench/report.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace uqbench {

using nlohmann::json;

namespace {

const std::vector<std::string> kClassificationMetrics = {
    "ece", "ace", "smece", "uce", "vce", "nll", "auc"};
const std::vector<std::string> kClassificationExtra = {
    "f1", "sensitivity", "specificity", "mcc", "balanced_accuracy"};
const std::vector<std::string> kRegressionMetrics = {
    "ence", "crps", "picp1", "picp2", "cce", "mae", "gnll"};
const std::vector<std::string> kRegressionExtra = {"mase", "bp"};
const std::vector<std::string> kQuantileMetrics = {"pinball"};

// Quantile records are evaluated through the Gaussian fitted at the
// configured level pair; pinball is the only native quantile metric.
LabeledSplit quantiles_as_gaussian(const LabeledSplit& split, LevelPair pair) {
  LabeledSplit out;
  out.role = split.role;
  out.kind = PredictionKind::kGaussian;
  out.gaussian.reserve(split.quantiles.size());
  for (const auto& q : split.quantiles) {
    out.gaussian.push_back(quantiles_to_gaussian(q, pair));
  }
  return out;
}

double classification_metric(const std::vector<ClassPrediction>& preds,
                             const std::string& name, const EvalOptions& opts) {
  if (name == "ece") return ece(preds, opts.bins).value;
  if (name == "ace") return ace(preds, opts.bins).value;
  if (name == "smece") return smece(preds);
  if (name == "uce") return uce(preds, opts.bins).value;
  if (name == "vce") return vce(preds, opts.bins).value;
  if (name == "nll") return nll(preds);
  if (name == "auc") return auc(preds);
  if (name == "f1") return threshold_metrics(preds, opts.threshold).f1;
  if (name == "sensitivity") {
    return threshold_metrics(preds, opts.threshold).sensitivity;
  }
  if (name == "specificity") {
    return threshold_metrics(preds, opts.threshold).specificity;
  }
  if (name == "mcc") return threshold_metrics(preds, opts.threshold).mcc;
  if (name == "balanced_accuracy") {
    return threshold_metrics(preds, opts.threshold).balanced_accuracy;
  }
  throw ValidationError("unknown classification metric '" + name + "'");
}

double regression_metric(const std::vector<GaussianPrediction>& preds,
                         const std::string& name, const EvalOptions& opts) {
  if (name == "ence") return ence(preds, opts.bins).value;
  if (name == "crps") return crps_mean(preds);
  if (name == "picp1") return picp(preds, kOneSigmaCoverage);
  if (name == "picp2") return picp(preds, kTwoSigmaCoverage);
  if (name == "cce") return cce(preds, opts.cce_grid);
  if (name == "mae") return mae(preds);
  if (name == "gnll") return gnll_loss(preds);
  if (name == "bp") return bp_loss(preds);
  if (name == "mase") {
    if (!opts.baseline_mae) {
      throw ValidationError("mase requires --baseline-mae");
    }
    return mase(preds, *opts.baseline_mae);
  }
  throw ValidationError("unknown regression metric '" + name + "'");
}

std::string joined(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

std::vector<std::string> default_metrics(PredictionKind kind) {
  switch (kind) {
    case PredictionKind::kClassification: return kClassificationMetrics;
    case PredictionKind::kGaussian: return kRegressionMetrics;
    case PredictionKind::kQuantile: return kQuantileMetrics;
  }
  return {};
}

std::vector<std::string> valid_metrics(PredictionKind kind) {
  std::vector<std::string> out = default_metrics(kind);
  switch (kind) {
    case PredictionKind::kClassification:
      out.insert(out.end(), kClassificationExtra.begin(),
                 kClassificationExtra.end());
      break;
    case PredictionKind::kGaussian:
      out.insert(out.end(), kRegressionExtra.begin(), kRegressionExtra.end());
      break;
    case PredictionKind::kQuantile: {
      // Everything the Gaussian route supports, behind --pair.
      const auto reg = valid_metrics(PredictionKind::kGaussian);
      out.insert(out.end(), reg.begin(), reg.end());
      break;
    }
  }
  return out;
}

double evaluate_metric(const LabeledSplit& split, const std::string& metric,
                       const EvalOptions& opts) {
  const auto valid = valid_metrics(split.kind);
  if (std::find(valid.begin(), valid.end(), metric) == valid.end()) {
    throw ValidationError("unknown metric '" + metric + "' for " +
                          to_string(split.kind) + " records; valid: " +
                          joined(valid));
  }
  switch (split.kind) {
    case PredictionKind::kClassification:
      return classification_metric(split.classification, metric, opts);
    case PredictionKind::kGaussian:
      return regression_metric(split.gaussian, metric, opts);
    case PredictionKind::kQuantile: {
      if (metric == "pinball") return pinball_loss(split.quantiles);
      if (!opts.pair) {
        throw ValidationError("metric '" + metric +
                              "' on quantile records requires --pair");
      }
      const LabeledSplit converted = quantiles_as_gaussian(split, *opts.pair);
      return regression_metric(converted.gaussian, metric, opts);
    }
  }
  throw ValidationError("unknown prediction kind");
}

GroupEval evaluate_records(const LabeledSplit& split, const EvalOptions& opts) {
  GroupEval out;
  out.n = split.size();
  const std::vector<std::string> metrics =
      opts.metrics.empty() ? default_metrics(split.kind) : opts.metrics;
  for (const auto& name : metrics) {
    try {
      out.metrics[name] = evaluate_metric(split, name, opts);
    } catch (const ComputationError& e) {
      out.metrics[name] = std::nullopt;
      out.notes[name] = e.what();
    }
  }

  // Diagram data alongside the scalar values.
  if (split.kind == PredictionKind::kClassification) {
    out.reliability_bins = ece(split.classification, opts.bins).bins;
    out.uce_bins = uce(split.classification, opts.bins).bins;
    if (split.classification.front().num_classes() == 2) {
      out.vce_bins = vce(split.classification, opts.bins).bins;
    }
  } else {
    const LabeledSplit* regression = &split;
    LabeledSplit converted;
    if (split.kind == PredictionKind::kQuantile) {
      if (!opts.pair) return out;
      converted = quantiles_as_gaussian(split, *opts.pair);
      regression = &converted;
    }
    const auto& preds = regression->gaussian;
    const bool has_truths = std::all_of(preds.begin(), preds.end(),
                                        [](const auto& r) { return r.truth.has_value(); });
    if (has_truths && !preds.empty()) {
      try {
        out.ence_bins = ence(preds, opts.bins).bins;
      } catch (const ValidationError&) {
        // zero-variance records; diagram omitted
      }
      out.bivariate = bivariate_histogram(preds, opts.bins, opts.bins);
    }
  }
  return out;
}

StratifiedEval stratified_evaluate(const LabeledSplit& split,
                                   std::optional<StratifyKey> key,
                                   const EvalOptions& opts) {
  StratifiedEval out;
  out.global = evaluate_records(split, opts);
  if (!key) return out;

  const auto evaluate_group = [&](const std::string& name,
                                  LabeledSplit group_split) {
    group_split.role = split.role;
    group_split.kind = split.kind;
    out.groups.emplace(name, evaluate_records(group_split, opts));
  };

  switch (split.kind) {
    case PredictionKind::kClassification:
      for (auto& [name, records] : stratify(split.classification, *key)) {
        LabeledSplit g;
        g.classification = std::move(records);
        evaluate_group(name, std::move(g));
      }
      break;
    case PredictionKind::kGaussian:
      for (auto& [name, records] : stratify(split.gaussian, *key)) {
        LabeledSplit g;
        g.gaussian = std::move(records);
        evaluate_group(name, std::move(g));
      }
      break;
    case PredictionKind::kQuantile:
      for (auto& [name, records] : stratify(split.quantiles, *key)) {
        LabeledSplit g;
        g.quantiles = std::move(records);
        evaluate_group(name, std::move(g));
      }
      break;
  }

  // Group mean per metric over the groups where it is defined.
  for (const auto& [metric, value] : out.global.metrics) {
    double sum = 0.0;
    std::size_t defined = 0;
    for (const auto& [gname, geval] : out.groups) {
      const auto it = geval.metrics.find(metric);
      if (it != geval.metrics.end() && it->second) {
        sum += *it->second;
        ++defined;
      }
    }
    out.group_mean[metric] =
        defined > 0 ? std::optional<double>(sum / static_cast<double>(defined))
                    : std::nullopt;
  }
  return out;
}

namespace {

json bin_stats_json(const std::vector<BinStat>& bins) {
  json rows = json::array();
  for (const auto& b : bins) {
    rows.push_back({{"bin", b.bin},
                    {"count", b.count},
                    {"conf", b.conf},
                    {"acc", b.acc},
                    {"uncert", b.uncert},
                    {"err", b.err},
                    {"obs_entropy", b.obs_entropy}});
  }
  return rows;
}

json ence_bins_json(const std::vector<RegressionBinStat>& bins) {
  json rows = json::array();
  for (const auto& b : bins) {
    rows.push_back({{"bin", b.bin},
                    {"count", b.count},
                    {"rmv", b.rmv},
                    {"rmse", b.rmse}});
  }
  return rows;
}

json histogram_json(const BivariateHistogram& h) {
  return {{"err_edges", h.err_edges},
          {"sigma_edges", h.sigma_edges},
          {"counts", h.counts}};
}

json group_eval_json(const GroupEval& g) {
  json j;
  j["n"] = g.n;
  json metrics;
  for (const auto& [name, value] : g.metrics) {
    if (value) {
      metrics[name] = *value;
    } else {
      metrics[name] = nullptr;
    }
  }
  j["metrics"] = std::move(metrics);
  if (!g.notes.empty()) j["notes"] = g.notes;
  json diagrams;
  if (!g.reliability_bins.empty()) {
    diagrams["reliability"] = bin_stats_json(g.reliability_bins);
  }
  if (!g.uce_bins.empty()) diagrams["uce"] = bin_stats_json(g.uce_bins);
  if (!g.vce_bins.empty()) diagrams["vce"] = bin_stats_json(g.vce_bins);
  if (!g.ence_bins.empty()) diagrams["ence"] = ence_bins_json(g.ence_bins);
  if (g.bivariate) diagrams["bivariate"] = histogram_json(*g.bivariate);
  if (!diagrams.empty()) j["diagrams"] = std::move(diagrams);
  return j;
}

}  // namespace

json build_report(const LabeledSplit& split, std::optional<StratifyKey> key,
                  const EvalOptions& opts,
                  const std::optional<BootstrapOptions>& bootstrap) {
  const StratifiedEval eval = stratified_evaluate(split, key, opts);

  json report;
  report["schema"] = kReportSchema;
  report["kind"] = to_string(split.kind);
  report["n"] = split.size();
  report["bins"] = opts.bins;
  if (key) report["stratify"] = to_string(*key);
  report["global"] = group_eval_json(eval.global);
  if (!eval.groups.empty()) {
    json groups;
    for (const auto& [name, g] : eval.groups) groups[name] = group_eval_json(g);
    report["groups"] = std::move(groups);
    json mean;
    for (const auto& [metric, value] : eval.group_mean) {
      if (value) {
        mean[metric] = *value;
      } else {
        mean[metric] = nullptr;
      }
    }
    report["group_mean"] = std::move(mean);
  }

  if (bootstrap) {
    report["seed"] = bootstrap->seed;
    json entries = json::array();
    const auto add_entries = [&](const std::optional<std::string>& group,
                                 const LabeledSplit& subset,
                                 const GroupEval& evaluated) {
      for (const auto& [metric, value] : evaluated.metrics) {
        if (!value) continue;
        // Stable per-(metric, group) seed, independent of evaluation order.
        const std::uint64_t entry_seed = CounterRng{bootstrap->seed}.bits(
            hash_id(metric), hash_id(group.value_or("")));
        const auto metric_fn = [&](const LabeledSplit& s) {
          return evaluate_metric(s, metric, opts);
        };
        BootstrapReport br;
        switch (subset.kind) {
          case PredictionKind::kClassification:
            br = bootstrap_ci(
                subset.classification,
                [&](const std::vector<ClassPrediction>& recs) {
                  LabeledSplit s;
                  s.kind = subset.kind;
                  s.classification = recs;
                  return metric_fn(s);
                },
                bootstrap->b, bootstrap->level, entry_seed, bootstrap->threads);
            break;
          case PredictionKind::kGaussian:
            br = bootstrap_ci(
                subset.gaussian,
                [&](const std::vector<GaussianPrediction>& recs) {
                  LabeledSplit s;
                  s.kind = subset.kind;
                  s.gaussian = recs;
                  return metric_fn(s);
                },
                bootstrap->b, bootstrap->level, entry_seed, bootstrap->threads);
            break;
          case PredictionKind::kQuantile:
            br = bootstrap_ci(
                subset.quantiles,
                [&](const std::vector<QuantileSet>& recs) {
                  LabeledSplit s;
                  s.kind = subset.kind;
                  s.quantiles = recs;
                  return metric_fn(s);
                },
                bootstrap->b, bootstrap->level, entry_seed, bootstrap->threads);
            break;
        }
        json entry;
        entry["metric"] = metric;
        entry["group"] = group ? json(*group) : json(nullptr);
        entry["value"] = br.point;
        entry["ci"] = {br.lower, br.upper};
        entry["B"] = br.b;
        entry["seed"] = br.seed;
        entries.push_back(std::move(entry));
      }
    };
    add_entries(std::nullopt, split, eval.global);
    if (key) {
      switch (split.kind) {
        case PredictionKind::kClassification:
          for (auto& [name, records] : stratify(split.classification, *key)) {
            LabeledSplit g;
            g.kind = split.kind;
            g.classification = std::move(records);
            add_entries(name, g, eval.groups.at(name));
          }
          break;
        case PredictionKind::kGaussian:
          for (auto& [name, records] : stratify(split.gaussian, *key)) {
            LabeledSplit g;
            g.kind = split.kind;
            g.gaussian = std::move(records);
            add_entries(name, g, eval.groups.at(name));
          }
          break;
        case PredictionKind::kQuantile:
          for (auto& [name, records] : stratify(split.quantiles, *key)) {
            LabeledSplit g;
            g.kind = split.kind;
            g.quantiles = std::move(records);
            add_entries(name, g, eval.groups.at(name));
          }
          break;
      }
    }
    report["bootstrap"] = std::move(entries);
  }
  return report;
}

namespace {

json diagram_rows(const LabeledSplit& split, const std::string& type,
                  const EvalOptions& opts) {
  json rows = json::array();
  if (type == "reliability" || type == "uce" || type == "vce") {
    if (split.kind != PredictionKind::kClassification) {
      throw ValidationError("diagram type '" + type +
                            "' needs classification records");
    }
    std::vector<BinStat> bins;
    if (type == "reliability") bins = ece(split.classification, opts.bins).bins;
    if (type == "uce") bins = uce(split.classification, opts.bins).bins;
    if (type == "vce") bins = vce(split.classification, opts.bins).bins;
    for (const auto& b : bins) {
      if (type == "reliability") {
        rows.push_back({{"bin", b.bin}, {"conf", b.conf}, {"acc", b.acc},
                        {"count", b.count}});
      } else if (type == "uce") {
        rows.push_back({{"bin", b.bin}, {"uncert", b.uncert}, {"err", b.err},
                        {"count", b.count}});
      } else {
        rows.push_back({{"bin", b.bin}, {"uncert", b.uncert},
                        {"obs_entropy", b.obs_entropy}, {"count", b.count}});
      }
    }
    return rows;
  }

  const std::vector<GaussianPrediction>* preds = nullptr;
  LabeledSplit converted;
  if (split.kind == PredictionKind::kGaussian) {
    preds = &split.gaussian;
  } else if (split.kind == PredictionKind::kQuantile) {
    if (!opts.pair) {
      throw ValidationError("diagram on quantile records requires --pair");
    }
    converted = quantiles_as_gaussian(split, *opts.pair);
    preds = &converted.gaussian;
  } else {
    throw ValidationError("diagram type '" + type +
                          "' needs regression records");
  }

  if (type == "ence") {
    for (const auto& b : ence(*preds, opts.bins).bins) {
      rows.push_back({{"bin", b.bin}, {"rmv", b.rmv}, {"rmse", b.rmse},
                      {"count", b.count}});
    }
    return rows;
  }
  if (type == "bivariate") {
    return histogram_json(bivariate_histogram(*preds, opts.bins, opts.bins));
  }
  throw ValidationError("unknown diagram type '" + type + "'");
}

}  // namespace

json diagram_json(const LabeledSplit& split, const std::string& type,
                  const EvalOptions& opts) {
  json out;
  out["schema"] = kReportSchema;
  out["type"] = type;
  if (type == "bivariate") {
    out["histogram"] = diagram_rows(split, type, opts);
  } else {
    out["rows"] = diagram_rows(split, type, opts);
  }
  return out;
}

std::string diagram_csv(const LabeledSplit& split, const std::string& type,
                        const EvalOptions& opts) {
  const json data = diagram_rows(split, type, opts);
  std::ostringstream out;
  const auto number = [](const json& v) { return v.dump(); };
  if (type == "bivariate") {
    out << "err_lo,err_hi,sigma_lo,sigma_hi,count\n";
    const auto& err_edges = data.at("err_edges");
    const auto& sigma_edges = data.at("sigma_edges");
    const auto& counts = data.at("counts");
    for (std::size_t e = 0; e + 1 < err_edges.size(); ++e) {
      for (std::size_t s = 0; s + 1 < sigma_edges.size(); ++s) {
        out << number(err_edges[e]) << ',' << number(err_edges[e + 1]) << ','
            << number(sigma_edges[s]) << ',' << number(sigma_edges[s + 1])
            << ',' << counts[e][s].dump() << '\n';
      }
    }
    return out.str();
  }
  std::vector<std::string> columns;
  if (type == "reliability") columns = {"bin", "conf", "acc", "count"};
  if (type == "uce") columns = {"bin", "uncert", "err", "count"};
  if (type == "vce") columns = {"bin", "uncert", "obs_entropy", "count"};
  if (type == "ence") columns = {"bin", "rmv", "rmse", "count"};
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out << columns[i] << (i + 1 < columns.size() ? ',' : '\n');
  }
  for (const auto& row : data) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out << row.at(columns[i]).dump() << (i + 1 < columns.size() ? ',' : '\n');
    }
  }
  return out.str();
}

json model_json(const TemperatureModel& m) { return {{"T", m.t}}; }

json model_json(const VarianceScaleModel& m) { return {{"s", m.s}}; }

json model_json(const IsotonicModel& m) {
  return {{"breakpoints", m.breakpoints}, {"values", m.values}};
}

json model_json(const IsotonicClassifierModel& m) {
  json per_class = json::array();
  for (const auto& c : m.per_class) per_class.push_back(model_json(c));
  return {{"per_class", std::move(per_class)}};
}

json model_json(const ConformalOffset& m) {
  return {{"level", m.level}, {"q_hat", m.q_hat}};
}

}  // namespace uqbench
