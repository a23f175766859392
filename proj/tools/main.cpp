#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "uqbench/aggregate.hpp"
#include "uqbench/convert.hpp"
#include "uqbench/core.hpp"
#include "uqbench/ndjson.hpp"
#include "uqbench/recalibrate.hpp"
#include "uqbench/report.hpp"
#include "uqbench/stratify.hpp"
#include "uqbench/synth.hpp"

namespace {

using nlohmann::json;
using namespace uqbench;

constexpr int kExitOk = 0;
constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;

// Applies JSON config values to options the command line left untouched.
class ConfigBinder {
 public:
  void bind(CLI::Option* opt, std::function<void(const json&)> setter) {
    entries_.push_back({opt, std::move(setter)});
  }

  void apply(const std::string& config_path) const {
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw ValidationError("cannot open config file '" + config_path + "'");
    json cfg = json::parse(in, nullptr, false);
    if (cfg.is_discarded() || !cfg.is_object()) {
      throw ValidationError("config file '" + config_path +
                            "' is not a JSON object");
    }
    for (const auto& [opt, setter] : entries_) {
      const std::string key = opt->get_lnames().front();
      if (opt->count() == 0 && cfg.contains(key)) setter(cfg.at(key));
    }
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::function<void(const json&)> setter;
  };
  std::vector<Entry> entries_;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("UQBENCH_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 0;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file '" + path + "'");
  return in;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file '" + path + "'");
  out << content;
}

LevelPair parse_level_pair(const std::string& name) {
  if (name == "1sigma") return kOneSigmaPair;
  if (name == "2sigma") return kTwoSigmaPair;
  throw ValidationError("level must be 1sigma or 2sigma, got '" + name + "'");
}

double parse_level_coverage(const std::string& name) {
  if (name == "1sigma") return kOneSigmaCoverage;
  if (name == "2sigma") return kTwoSigmaCoverage;
  throw ValidationError("level must be 1sigma or 2sigma, got '" + name + "'");
}

void warn(const std::optional<std::string>& message) {
  if (message) std::cerr << "warning: " << *message << "\n";
}

// --- aggregate -----------------------------------------------------------------

struct AggregateArgs {
  std::string input;
  std::string kind;
  int k_samples = kDefaultNoiseSamples;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out;
  std::string config;
};

int run_aggregate(const AggregateArgs& args) {
  if (args.kind != "class" && args.kind != "reg") {
    throw ValidationError("--kind must be class or reg");
  }
  std::ifstream in = open_input(args.input);
  std::ostringstream body;
  const CounterRng rng{resolve_seed(args.seed)};
  if (args.kind == "class") {
    const auto members = ingest_member_classification(in);
    std::vector<AggregatedClassification> results(members.size());
    parallel_for(members.size(), args.threads, [&](std::size_t i) {
      results[i] = aggregate_classification(members[i], args.k_samples, rng);
    });
    for (const auto& r : results) body << serialize(r) << '\n';
  } else {
    const auto members = ingest_member_regression(in);
    std::vector<AggregatedRegression> results(members.size());
    parallel_for(members.size(), args.threads, [&](std::size_t i) {
      results[i] = aggregate_regression(members[i]);
    });
    for (const auto& r : results) body << serialize(r) << '\n';
  }
  write_output(args.out, body.str());
  return kExitOk;
}

// --- recalibrate -----------------------------------------------------------------

struct RecalibrateArgs {
  std::string input;
  std::string method;
  std::string cal;
  std::string level = "1sigma";
  std::string out;
  std::string model_out;
  std::string config;
};

json interval_record(const std::string& id, const std::string& measurand,
                     const Interval& iv, const std::optional<double>& truth,
                     const std::optional<std::string>& group) {
  const double margin = (1.0 - iv.level) / 2.0;
  const auto [mean, variance] =
      interval_to_gaussian(iv.lo, iv.hi, margin, 1.0 - margin);
  json j;
  j["id"] = id;
  j["measurand"] = measurand;
  j["lo"] = iv.lo;
  j["hi"] = iv.hi;
  j["level"] = iv.level;
  j["mean"] = mean;
  j["variance"] = variance;
  if (truth) j["truth"] = *truth;
  if (group) j["group"] = *group;
  return j;
}

int run_recalibrate(const RecalibrateArgs& args) {
  if (args.cal.empty()) throw ValidationError("--cal is required");
  if (args.model_out.empty()) throw ValidationError("--model-out is required");
  std::ifstream test_in = open_input(args.input);
  std::ifstream cal_in = open_input(args.cal);

  std::ostringstream body;
  json model;

  if (args.method == "ts") {
    const LabeledSplit test = ingest(test_in);
    if (test.kind != PredictionKind::kClassification) {
      throw ValidationError(
          "ts operates on classification logits; use vs for Gaussian records");
    }
    const LabeledSplit cal =
        ingest(cal_in, PredictionKind::kClassification, SplitRole::kCalibration);
    const TemperatureFit fit = fit_temperature(cal.classification);
    warn(fit.warning);
    for (const auto& r : test.classification) {
      body << serialize(apply_temperature(fit.model, r)) << '\n';
    }
    model = model_json(fit.model);
  } else if (args.method == "vs") {
    const LabeledSplit test = ingest(test_in);
    if (test.kind != PredictionKind::kGaussian) {
      throw ValidationError("vs operates on Gaussian records");
    }
    const LabeledSplit cal =
        ingest(cal_in, PredictionKind::kGaussian, SplitRole::kCalibration);
    const VarianceScaleFit fit = fit_variance_scale(cal.gaussian);
    warn(fit.warning);
    for (const auto& r : test.gaussian) {
      body << serialize(apply_variance_scale(fit.model, r)) << '\n';
    }
    model = model_json(fit.model);
  } else if (args.method == "ir") {
    const LabeledSplit test = ingest(test_in);
    if (test.kind == PredictionKind::kClassification) {
      const LabeledSplit cal = ingest(cal_in, PredictionKind::kClassification,
                                      SplitRole::kCalibration);
      const IsotonicClassifierModel m = fit_isotonic_classifier(cal.classification);
      for (const auto& r : test.classification) {
        body << serialize(apply_isotonic_classifier(m, r)) << '\n';
      }
      model = model_json(m);
    } else if (test.kind == PredictionKind::kGaussian) {
      const LabeledSplit cal =
          ingest(cal_in, PredictionKind::kGaussian, SplitRole::kCalibration);
      const PitRecalibration m = fit_pit_recalibration(cal.gaussian);
      warn(m.warning);
      for (const auto& r : test.gaussian) {
        body << serialize(apply_pit_recalibration(m, r)) << '\n';
      }
      model = m.degenerate ? json{{"degenerate", true}} : model_json(m.map);
    } else {
      throw ValidationError("ir operates on classification or Gaussian records");
    }
  } else if (args.method == "cqr") {
    const LabeledSplit test = ingest(test_in, PredictionKind::kQuantile);
    const LabeledSplit cal =
        ingest(cal_in, PredictionKind::kQuantile, SplitRole::kCalibration);
    const LevelPair pair = parse_level_pair(args.level);
    const ConformalOffset offset = cqr_fit(cal.quantiles, pair);
    for (const auto& r : test.quantiles) {
      const Interval iv = cqr_apply(offset, r, pair);
      body << interval_record(r.id, r.measurand, iv, r.truth, r.group).dump()
           << '\n';
    }
    model = model_json(offset);
  } else if (args.method == "cmap") {
    const LabeledSplit test = ingest(test_in, PredictionKind::kGaussian);
    const LabeledSplit cal =
        ingest(cal_in, PredictionKind::kGaussian, SplitRole::kCalibration);
    const double level = parse_level_coverage(args.level);
    const ConformalOffset offset = cmap_fit(cal.gaussian, level);
    for (const auto& r : test.gaussian) {
      const Interval iv = cmap_apply(offset, r);
      body << interval_record(r.id, r.measurand, iv, r.truth, r.group).dump()
           << '\n';
    }
    model = model_json(offset);
  } else if (args.method == "venn-abers") {
    const LabeledSplit test = ingest(test_in, PredictionKind::kClassification);
    const LabeledSplit cal = ingest(cal_in, PredictionKind::kClassification,
                                    SplitRole::kCalibration);
    std::vector<double> scores;
    scores.reserve(test.classification.size());
    for (const auto& r : test.classification) {
      if (r.num_classes() != 2) {
        throw ValidationError("venn-abers requires binary records");
      }
      scores.push_back(r.probs[1]);
    }
    const std::vector<VennAbersOutput> outputs =
        venn_abers(cal.classification, scores);
    json cal_model;
    for (const auto& r : cal.classification) {
      cal_model["scores"].push_back(r.probs[1]);
      cal_model["labels"].push_back(*r.label);
    }
    for (std::size_t i = 0; i < test.classification.size(); ++i) {
      const auto& r = test.classification[i];
      json j;
      j["id"] = r.id;
      j["probs"] = {1.0 - outputs[i].p, outputs[i].p};
      j["p0"] = outputs[i].p0;
      j["p1"] = outputs[i].p1;
      if (r.label) j["label"] = *r.label;
      if (r.group) j["group"] = *r.group;
      body << j.dump() << '\n';
    }
    model = std::move(cal_model);
  } else {
    throw ValidationError(
        "--method must be one of ts, vs, ir, cqr, cmap, venn-abers");
  }

  write_output(args.out, body.str());
  write_output(args.model_out, model.dump(2) + "\n");
  return kExitOk;
}

// --- evaluate -----------------------------------------------------------------

struct EvaluateArgs {
  std::string input;
  std::vector<std::string> metrics;
  int bins = kDefaultBins;
  std::string stratify;
  int bootstrap_b = 0;
  double ci_level = 0.95;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::optional<double> baseline_mae;
  double threshold = 0.5;
  std::string pair;
  std::string out;
  std::string config;
};

EvalOptions eval_options(const EvaluateArgs& args) {
  EvalOptions opts;
  opts.bins = args.bins;
  opts.metrics = args.metrics;
  opts.threshold = args.threshold;
  opts.baseline_mae = args.baseline_mae;
  if (!args.pair.empty()) opts.pair = parse_level_pair(args.pair);
  return opts;
}

int run_evaluate(const EvaluateArgs& args) {
  std::ifstream in = open_input(args.input);
  const LabeledSplit split = ingest(in);
  if (split.size() == 0) throw ValidationError("no records in input");

  std::optional<StratifyKey> key;
  if (!args.stratify.empty()) {
    key = parse_stratify_key(args.stratify);
    if (!key) {
      throw ValidationError(
          "--stratify must be one of true-class, predicted-class, measurand, "
          "group");
    }
  }
  std::optional<BootstrapOptions> bootstrap;
  if (args.bootstrap_b > 0) {
    bootstrap = BootstrapOptions{args.bootstrap_b, args.ci_level,
                                 resolve_seed(args.seed), args.threads};
  }
  const json report = build_report(split, key, eval_options(args), bootstrap);
  write_output(args.out, report.dump(2) + "\n");
  return kExitOk;
}

// --- diagram -----------------------------------------------------------------

struct DiagramArgs {
  std::string input;
  std::string type;
  int bins = kDefaultBins;
  std::string pair;
  std::string format = "json";
  std::string out;
  std::string config;
};

int run_diagram(const DiagramArgs& args) {
  if (args.type.empty()) throw ValidationError("--type is required");
  std::ifstream in = open_input(args.input);
  const LabeledSplit split = ingest(in);
  EvalOptions opts;
  opts.bins = args.bins;
  if (!args.pair.empty()) opts.pair = parse_level_pair(args.pair);
  if (args.format == "json") {
    write_output(args.out, diagram_json(split, args.type, opts).dump(2) + "\n");
  } else if (args.format == "csv") {
    write_output(args.out, diagram_csv(split, args.type, opts));
  } else {
    throw ValidationError("--format must be json or csv");
  }
  return kExitOk;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string kind;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
  double t_true = 1.0;
  double logit_scale = 3.0;
  double s_true = 1.0;
  double sigma_lo = 0.5;
  double sigma_hi = 2.0;
  int members = 5;
  double v_epi = 1.0;
  double v_ale = 1.0;
  std::string group;
  std::string measurand = "y";
  std::string out;
  std::string config;
};

int run_synth(const SynthArgs& args) {
  if (args.n == 0) throw ValidationError("--n is required and must be >= 1");
  const std::uint64_t seed = resolve_seed(args.seed);
  std::ostringstream body;
  if (args.kind == "class") {
    for (const auto& r :
         gen_classifier(args.n, args.t_true, args.logit_scale, seed, args.group)) {
      body << serialize(r) << '\n';
    }
  } else if (args.kind == "reg") {
    for (const auto& r : gen_regression(args.n, args.s_true, args.sigma_lo,
                                        args.sigma_hi, seed, args.group,
                                        args.measurand)) {
      body << serialize(r) << '\n';
    }
  } else if (args.kind == "members-class") {
    for (const auto& r : gen_members_classification(args.n, args.members,
                                                    args.v_epi, args.v_ale, seed,
                                                    args.group)) {
      body << serialize(r) << '\n';
    }
  } else if (args.kind == "members-reg") {
    for (const auto& r : gen_members_regression(args.n, args.members, args.v_epi,
                                                args.v_ale, seed, args.group)) {
      body << serialize(r) << '\n';
    }
  } else {
    throw ValidationError(
        "--kind must be one of class, reg, members-class, members-reg");
  }
  write_output(args.out, body.str());
  return kExitOk;
}

// --- compare -----------------------------------------------------------------

struct CompareArgs {
  std::string input_a;
  std::string input_b;
  std::string metric;
  int b = 1000;
  double ci_level = 0.95;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  int bins = kDefaultBins;
  std::optional<double> baseline_mae;
  double threshold = 0.5;
  std::string pair;
  std::string out;
  std::string config;
};

template <typename Rec>
std::vector<Rec> pair_records(const std::vector<Rec>& a, std::vector<Rec> b,
                              const std::function<std::string(const Rec&)>& key) {
  std::map<std::string, std::vector<Rec>> lookup;
  for (auto& r : b) lookup[key(r)].push_back(std::move(r));
  std::vector<Rec> paired;
  paired.reserve(a.size());
  for (const auto& r : a) {
    auto it = lookup.find(key(r));
    if (it == lookup.end() || it->second.empty()) {
      throw ValidationError("pairing error: record '" + key(r) +
                            "' missing from the second file");
    }
    paired.push_back(std::move(it->second.back()));
    it->second.pop_back();
  }
  for (const auto& [k, remaining] : lookup) {
    if (!remaining.empty()) {
      throw ValidationError("pairing error: record '" + k +
                            "' missing from the first file");
    }
  }
  return paired;
}

int run_compare(const CompareArgs& args) {
  if (args.metric.empty()) throw ValidationError("--metric is required");
  std::ifstream in_a = open_input(args.input_a);
  std::ifstream in_b = open_input(args.input_b);
  const LabeledSplit split_a = ingest(in_a);
  const LabeledSplit split_b = ingest(in_b, split_a.kind);
  if (split_a.size() != split_b.size()) {
    throw ValidationError("pairing error: files hold different record counts");
  }

  EvalOptions opts;
  opts.bins = args.bins;
  opts.threshold = args.threshold;
  opts.baseline_mae = args.baseline_mae;
  if (!args.pair.empty()) opts.pair = parse_level_pair(args.pair);

  const std::uint64_t seed = resolve_seed(args.seed);
  BootstrapReport report;
  switch (split_a.kind) {
    case PredictionKind::kClassification: {
      const auto paired = pair_records<ClassPrediction>(
          split_a.classification, split_b.classification,
          [](const ClassPrediction& r) { return r.id; });
      report = paired_compare(
          split_a.classification, paired,
          [&](const std::vector<ClassPrediction>& recs) {
            LabeledSplit s;
            s.kind = split_a.kind;
            s.classification = recs;
            return evaluate_metric(s, args.metric, opts);
          },
          args.b, args.ci_level, seed, args.threads);
      break;
    }
    case PredictionKind::kGaussian: {
      const auto paired = pair_records<GaussianPrediction>(
          split_a.gaussian, split_b.gaussian, [](const GaussianPrediction& r) {
            return r.id + "\x1f" + r.measurand;
          });
      report = paired_compare(
          split_a.gaussian, paired,
          [&](const std::vector<GaussianPrediction>& recs) {
            LabeledSplit s;
            s.kind = split_a.kind;
            s.gaussian = recs;
            return evaluate_metric(s, args.metric, opts);
          },
          args.b, args.ci_level, seed, args.threads);
      break;
    }
    case PredictionKind::kQuantile: {
      const auto paired = pair_records<QuantileSet>(
          split_a.quantiles, split_b.quantiles,
          [](const QuantileSet& r) { return r.id + "\x1f" + r.measurand; });
      report = paired_compare(
          split_a.quantiles, paired,
          [&](const std::vector<QuantileSet>& recs) {
            LabeledSplit s;
            s.kind = split_a.kind;
            s.quantiles = recs;
            return evaluate_metric(s, args.metric, opts);
          },
          args.b, args.ci_level, seed, args.threads);
      break;
    }
  }

  json out;
  out["schema"] = kReportSchema;
  out["metric"] = args.metric;
  out["diff"] = report.point;
  out["ci"] = {report.lower, report.upper};
  out["p_value"] = *report.p_value;
  out["B"] = report.b;
  out["seed"] = report.seed;
  write_output(args.out, out.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty aggregation, recalibration, and reliability evaluation"};
  app.require_subcommand(1);

  AggregateArgs agg;
  ConfigBinder agg_cfg;
  CLI::App* agg_cmd = app.add_subcommand(
      "aggregate", "Aggregate per-member outputs into predictive distributions");
  agg_cmd->add_option("input", agg.input, "member-output NDJSON file")->required();
  agg_cfg.bind(agg_cmd->add_option("--kind", agg.kind, "class or reg"),
               [&](const json& v) { agg.kind = v.get<std::string>(); });
  agg_cfg.bind(agg_cmd->add_option("--k-samples", agg.k_samples,
                                   "noise samples per pass"),
               [&](const json& v) { agg.k_samples = v.get<int>(); });
  agg_cfg.bind(agg_cmd->add_option("--seed", agg.seed, "rng seed"),
               [&](const json& v) { agg.seed = v.get<std::uint64_t>(); });
  agg_cfg.bind(agg_cmd->add_option("--threads", agg.threads, "worker threads"),
               [&](const json& v) { agg.threads = v.get<int>(); });
  agg_cfg.bind(agg_cmd->add_option("--out", agg.out, "output file (default stdout)"),
               [&](const json& v) { agg.out = v.get<std::string>(); });
  agg_cmd->add_option("--config", agg.config, "JSON config file");

  RecalibrateArgs rec;
  ConfigBinder rec_cfg;
  CLI::App* rec_cmd =
      app.add_subcommand("recalibrate", "Fit and apply a post-hoc recalibrator");
  rec_cmd->add_option("input", rec.input, "prediction NDJSON file")->required();
  rec_cfg.bind(rec_cmd->add_option("--method", rec.method,
                                   "ts, vs, ir, cqr, cmap, or venn-abers"),
               [&](const json& v) { rec.method = v.get<std::string>(); });
  rec_cfg.bind(rec_cmd->add_option("--cal", rec.cal, "calibration NDJSON file"),
               [&](const json& v) { rec.cal = v.get<std::string>(); });
  rec_cfg.bind(rec_cmd->add_option("--level", rec.level, "1sigma or 2sigma"),
               [&](const json& v) { rec.level = v.get<std::string>(); });
  rec_cfg.bind(rec_cmd->add_option("--out", rec.out, "output file (default stdout)"),
               [&](const json& v) { rec.out = v.get<std::string>(); });
  rec_cfg.bind(rec_cmd->add_option("--model-out", rec.model_out,
                                   "fitted-model JSON file"),
               [&](const json& v) { rec.model_out = v.get<std::string>(); });
  rec_cmd->add_option("--config", rec.config, "JSON config file");

  EvaluateArgs ev;
  ConfigBinder ev_cfg;
  CLI::App* ev_cmd =
      app.add_subcommand("evaluate", "Compute reliability metrics and diagrams");
  ev_cmd->add_option("input", ev.input, "prediction NDJSON file")->required();
  ev_cfg.bind(ev_cmd->add_option("--metrics", ev.metrics,
                                 "comma-separated metric names")
                  ->delimiter(','),
              [&](const json& v) {
                ev.metrics.clear();
                if (v.is_string()) {
                  std::stringstream ss(v.get<std::string>());
                  std::string item;
                  while (std::getline(ss, item, ',')) ev.metrics.push_back(item);
                } else {
                  for (const auto& m : v) ev.metrics.push_back(m.get<std::string>());
                }
              });
  ev_cfg.bind(ev_cmd->add_option("--bins", ev.bins, "bin count"),
              [&](const json& v) { ev.bins = v.get<int>(); });
  ev_cfg.bind(ev_cmd->add_option("--stratify", ev.stratify,
                                 "true-class, predicted-class, measurand, group"),
              [&](const json& v) { ev.stratify = v.get<std::string>(); });
  ev_cfg.bind(ev_cmd->add_option("--bootstrap", ev.bootstrap_b,
                                 "bootstrap resample count (0 = off)"),
              [&](const json& v) { ev.bootstrap_b = v.get<int>(); });
  ev_cfg.bind(ev_cmd->add_option("--ci-level", ev.ci_level, "CI level"),
              [&](const json& v) { ev.ci_level = v.get<double>(); });
  ev_cfg.bind(ev_cmd->add_option("--seed", ev.seed, "rng seed"),
              [&](const json& v) { ev.seed = v.get<std::uint64_t>(); });
  ev_cfg.bind(ev_cmd->add_option("--threads", ev.threads, "worker threads"),
              [&](const json& v) { ev.threads = v.get<int>(); });
  ev_cfg.bind(ev_cmd->add_option("--baseline-mae", ev.baseline_mae,
                                 "baseline MAE for MASE"),
              [&](const json& v) { ev.baseline_mae = v.get<double>(); });
  ev_cfg.bind(ev_cmd->add_option("--threshold", ev.threshold,
                                 "decision threshold for confusion metrics"),
              [&](const json& v) { ev.threshold = v.get<double>(); });
  ev_cfg.bind(ev_cmd->add_option("--pair", ev.pair,
                                 "quantile conversion pair: 1sigma or 2sigma"),
              [&](const json& v) { ev.pair = v.get<std::string>(); });
  ev_cfg.bind(ev_cmd->add_option("--out", ev.out, "output file (default stdout)"),
              [&](const json& v) { ev.out = v.get<std::string>(); });
  ev_cmd->add_option("--config", ev.config, "JSON config file");

  DiagramArgs dg;
  ConfigBinder dg_cfg;
  CLI::App* dg_cmd = app.add_subcommand("diagram", "Emit plot data");
  dg_cmd->add_option("input", dg.input, "prediction NDJSON file")->required();
  dg_cfg.bind(dg_cmd->add_option("--type", dg.type,
                                 "reliability, vce, uce, ence, or bivariate"),
              [&](const json& v) { dg.type = v.get<std::string>(); });
  dg_cfg.bind(dg_cmd->add_option("--bins", dg.bins, "bin count"),
              [&](const json& v) { dg.bins = v.get<int>(); });
  dg_cfg.bind(dg_cmd->add_option("--pair", dg.pair,
                                 "quantile conversion pair: 1sigma or 2sigma"),
              [&](const json& v) { dg.pair = v.get<std::string>(); });
  dg_cfg.bind(dg_cmd->add_option("--format", dg.format, "json or csv"),
              [&](const json& v) { dg.format = v.get<std::string>(); });
  dg_cfg.bind(dg_cmd->add_option("--out", dg.out, "output file (default stdout)"),
              [&](const json& v) { dg.out = v.get<std::string>(); });
  dg_cmd->add_option("--config", dg.config, "JSON config file");

  SynthArgs sy;
  ConfigBinder sy_cfg;
  CLI::App* sy_cmd =
      app.add_subcommand("synth", "Generate synthetic oracle datasets");
  sy_cfg.bind(sy_cmd->add_option("--kind", sy.kind,
                                 "class, reg, members-class, members-reg"),
              [&](const json& v) { sy.kind = v.get<std::string>(); });
  sy_cfg.bind(sy_cmd->add_option("--n", sy.n, "record count"),
              [&](const json& v) { sy.n = v.get<std::size_t>(); });
  sy_cfg.bind(sy_cmd->add_option("--seed", sy.seed, "rng seed"),
              [&](const json& v) { sy.seed = v.get<std::uint64_t>(); });
  sy_cfg.bind(sy_cmd->add_option("--t-true", sy.t_true, "generating temperature"),
              [&](const json& v) { sy.t_true = v.get<double>(); });
  sy_cfg.bind(sy_cmd->add_option("--logit-scale", sy.logit_scale,
                                 "latent logit spread"),
              [&](const json& v) { sy.logit_scale = v.get<double>(); });
  sy_cfg.bind(sy_cmd->add_option("--s-true", sy.s_true, "noise-to-sigma ratio"),
              [&](const json& v) { sy.s_true = v.get<double>(); });
  sy_cfg.bind(sy_cmd->add_option("--sigma-lo", sy.sigma_lo, "sigma range low"),
              [&](const json& v) { sy.sigma_lo = v.get<double>(); });
  sy_cfg.bind(sy_cmd->add_option("--sigma-hi", sy.sigma_hi, "sigma range high"),
              [&](const json& v) { sy.sigma_hi = v.get<double>(); });
  sy_cfg.bind(sy_cmd->add_option("--members", sy.members, "ensemble size"),
              [&](const json& v) { sy.members = v.get<int>(); });
  sy_cfg.bind(sy_cmd->add_option("--v-epi", sy.v_epi, "between-member spread"),
              [&](const json& v) { sy.v_epi = v.get<double>(); });
  sy_cfg.bind(sy_cmd->add_option("--v-ale", sy.v_ale, "within-member variance"),
              [&](const json& v) { sy.v_ale = v.get<double>(); });
  sy_cfg.bind(sy_cmd->add_option("--group", sy.group, "group tag for records"),
              [&](const json& v) { sy.group = v.get<std::string>(); });
  sy_cfg.bind(sy_cmd->add_option("--measurand", sy.measurand, "measurand name"),
              [&](const json& v) { sy.measurand = v.get<std::string>(); });
  sy_cfg.bind(sy_cmd->add_option("--out", sy.out, "output file (default stdout)"),
              [&](const json& v) { sy.out = v.get<std::string>(); });
  sy_cmd->add_option("--config", sy.config, "JSON config file");

  CompareArgs cp;
  ConfigBinder cp_cfg;
  CLI::App* cp_cmd = app.add_subcommand(
      "compare", "Paired bootstrap comparison of two prediction files");
  cp_cmd->add_option("a", cp.input_a, "first prediction NDJSON file")->required();
  cp_cmd->add_option("b", cp.input_b, "second prediction NDJSON file")->required();
  cp_cfg.bind(cp_cmd->add_option("--metric", cp.metric, "metric name"),
              [&](const json& v) { cp.metric = v.get<std::string>(); });
  cp_cfg.bind(cp_cmd->add_option("--B", cp.b, "bootstrap resample count"),
              [&](const json& v) { cp.b = v.get<int>(); });
  cp_cfg.bind(cp_cmd->add_option("--ci-level", cp.ci_level, "CI level"),
              [&](const json& v) { cp.ci_level = v.get<double>(); });
  cp_cfg.bind(cp_cmd->add_option("--seed", cp.seed, "rng seed"),
              [&](const json& v) { cp.seed = v.get<std::uint64_t>(); });
  cp_cfg.bind(cp_cmd->add_option("--threads", cp.threads, "worker threads"),
              [&](const json& v) { cp.threads = v.get<int>(); });
  cp_cfg.bind(cp_cmd->add_option("--bins", cp.bins, "bin count"),
              [&](const json& v) { cp.bins = v.get<int>(); });
  cp_cfg.bind(cp_cmd->add_option("--baseline-mae", cp.baseline_mae,
                                 "baseline MAE for MASE"),
              [&](const json& v) { cp.baseline_mae = v.get<double>(); });
  cp_cfg.bind(cp_cmd->add_option("--threshold", cp.threshold,
                                 "decision threshold for confusion metrics"),
              [&](const json& v) { cp.threshold = v.get<double>(); });
  cp_cfg.bind(cp_cmd->add_option("--pair", cp.pair,
                                 "quantile conversion pair: 1sigma or 2sigma"),
              [&](const json& v) { cp.pair = v.get<std::string>(); });
  cp_cfg.bind(cp_cmd->add_option("--out", cp.out, "output file (default stdout)"),
              [&](const json& v) { cp.out = v.get<std::string>(); });
  cp_cmd->add_option("--config", cp.config, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (agg_cmd->parsed()) {
      agg_cfg.apply(agg.config);
      return run_aggregate(agg);
    }
    if (rec_cmd->parsed()) {
      rec_cfg.apply(rec.config);
      return run_recalibrate(rec);
    }
    if (ev_cmd->parsed()) {
      ev_cfg.apply(ev.config);
      return run_evaluate(ev);
    }
    if (dg_cmd->parsed()) {
      dg_cfg.apply(dg.config);
      return run_diagram(dg);
    }
    if (sy_cmd->parsed()) {
      sy_cfg.apply(sy.config);
      return run_synth(sy);
    }
    if (cp_cmd->parsed()) {
      cp_cfg.apply(cp.config);
      return run_compare(cp);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ComputationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitComputation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitComputation;
  }
  return kExitUsage;
}
