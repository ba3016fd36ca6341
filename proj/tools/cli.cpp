//
// Copyright 2026 The vprisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vprisk/vprisk.hpp"

namespace vprisk::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedPath {
  std::string name;
  std::string path;
};

// "NAME=PATH", or a bare PATH named after its stem.
NamedPath ParseNamedPath(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) {
    if (spec.empty()) throw UsageError("empty input path");
    return {fs::path(spec).stem().string(), spec};
  }
  NamedPath np{spec.substr(0, eq), spec.substr(eq + 1)};
  if (np.name.empty() || np.path.empty()) {
    throw UsageError("expected NAME=PATH, got '" + spec + "'");
  }
  return np;
}

std::vector<NamedPath> ParseNamedPaths(const std::vector<std::string>& specs) {
  std::vector<NamedPath> out;
  std::set<std::string> names;
  for (const auto& s : specs) {
    out.push_back(ParseNamedPath(s));
    if (!names.insert(out.back().name).second) {
      throw UsageError("input name '" + out.back().name + "' used twice");
    }
  }
  return out;
}

std::vector<int> ParseThresholds(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int t = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(t);
    } catch (const std::exception&) {
      throw UsageError("bad threshold '" + item + "'");
    }
  }
  try {
    check_thresholds(out);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return out;
}

std::map<std::string, double> ParseAccuracies(const std::vector<std::string>& specs) {
  std::map<std::string, double> out;
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError("expected ATTRIBUTE=ACCURACY, got '" + s + "'");
    }
    try {
      std::size_t used = 0;
      const auto value = s.substr(eq + 1);
      const double acc = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      out[s.substr(0, eq)] = acc;
    } catch (const std::exception&) {
      throw UsageError("bad accuracy in '" + s + "'");
    }
  }
  return out;
}

// Every setting a command may use. Flags fill it first; a JSON config file
// fills whatever was not given on the command line.
struct Settings {
  std::string config;
  std::string schema;
  std::uint64_t seed = 0;
  int runs = 0;
  std::string thresholds = "3,5,10";
  std::string out = "out";
  std::string format = "all";

  std::vector<std::string> inputs;
  std::vector<std::string> targets;
  std::vector<std::string> references;
  std::vector<std::string> accuracy;
  std::string truth;
  std::string channel;
  std::string mode;
  std::string gt;
  std::string inferred;
  std::string pred;
  std::string baseline = "majority";
  std::string level = "utterance";
  std::uint64_t mc_trials = 0;
  unsigned threads = 0;
};

// Option -> config key binding, applied only when the flag was absent.
class ConfigBinder {
 public:
  template <class T>
  CLI::Option* bind(CLI::Option* opt, std::string key, T& target) {
    entries_.push_back({opt, std::move(key), [&target](const json& j) {
                          if constexpr (std::is_same_v<T, std::vector<std::string>>) {
                            target = j.is_array() ? j.get<T>() : T{j.get<std::string>()};
                          } else if constexpr (std::is_same_v<T, std::string>) {
                            // Thresholds may be given as an array of ints.
                            if (j.is_array()) {
                              std::string s;
                              for (const auto& v : j) {
                                s += (s.empty() ? "" : ",") + v.dump();
                              }
                              target = s;
                            } else {
                              target = j.get<std::string>();
                            }
                          } else {
                            target = j.get<T>();
                          }
                        }});
    return opt;
  }

  // A key shared by several subcommands counts as given if any of its
  // options was.
  void apply(const json& config) const {
    for (const auto& [opt, key, set] : entries_) {
      if (given_on_command_line(key) || !config.contains(key)) continue;
      try {
        set(config[key]);
      } catch (const json::exception&) {
        throw UsageError("config key '" + key + "' has the wrong type");
      }
    }
  }

  bool given_on_command_line(const std::string& key) const {
    for (const auto& [opt, k, set] : entries_) {
      if (k == key && opt->count() > 0) return true;
    }
    return false;
  }

  bool given(const std::string& key, const json& config) const {
    return given_on_command_line(key) || config.contains(key);
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::string key;
    std::function<void(const json&)> set;
  };
  std::vector<Entry> entries_;
};

struct Formats {
  bool json = true;
  bool csv = true;
};

Formats ParseFormat(const std::string& f) {
  if (f == "all") return {true, true};
  if (f == "json") return {true, false};
  if (f == "csv") return {false, true};
  throw UsageError("--format must be json, csv or all");
}

AttributeSchema LoadSchema(const Settings& s) {
  if (s.schema.empty()) throw UsageError("--schema is required");
  return load_schema(s.schema);
}

ProfileDataset Load(const NamedPath& np, const AttributeSchema& schema) {
  return load_dataset(np.path, schema, {np.name, Granularity::kUtterance});
}

// Speaker-level labels: posterior mean or majority vote per speaker.
ProfileDataset SpeakerLevel(const ProfileDataset& ds) { return aggregate_to_speaker(ds); }

// One utterance per speaker, read at speaker level.
ProfileDataset SingleUtteranceLevel(const ProfileDataset& run) {
  return as_speaker_level(to_labels(run));
}

json BaseConfig(const std::string& command, const Settings& s,
                const std::vector<int>& thresholds) {
  return {{"command", command},
          {"schema", s.schema},
          {"seed", s.seed},
          {"runs", s.runs},
          {"thresholds", thresholds},
          {"format", s.format}};
}

json NamedPathsJson(const std::vector<NamedPath>& v) {
  json out = json::array();
  for (const auto& np : v) out.push_back(np.name + "=" + np.path);
  return out;
}

void AddReport(OutputSet& outputs, const Settings& s, const Formats& formats,
               const std::string& file, const json& report) {
  if (formats.json) outputs.add(fs::path(s.out) / file, dump_report(report));
}

void AddCsv(OutputSet& outputs, const Settings& s, const Formats& formats,
            const std::string& file, std::string content) {
  if (formats.csv) outputs.add(fs::path(s.out) / file, std::move(content));
}

void Announce(std::ostream& out, const OutputSet& outputs) {
  for (const auto& [path, content] : outputs.files()) out << "wrote " << path.string() << "\n";
}

// --- validate -----------------------------------------------------------------

int CmdValidate(const Settings& s, std::ostream& out, std::ostream& err) {
  const auto schema = LoadSchema(s);
  const auto inputs = ParseNamedPaths(s.inputs);
  if (inputs.empty()) throw UsageError("validate needs at least one --input");

  json errors = json::array();
  json incomplete = json::object();
  json summaries = json::array();
  for (const auto& np : inputs) {
    const ScanResult scan = scan_dataset(np.path, schema);
    out << np.name << " (" << np.path << "): " << scan.speakers.size() << " speakers, "
        << scan.utterances << " utterances [" << to_string(scan.kind) << "]\n";
    json coverage = json::object();
    for (std::size_t a = 0; a < scan.coverage.size(); ++a) {
      const auto& def = schema.attributes[a];
      out << "  " << def.name << ":";
      json levels = json::object();
      std::size_t covered = 0;
      for (std::size_t l = 0; l < def.levels.size(); ++l) {
        out << " " << def.levels[l] << "=" << scan.coverage[a][l];
        levels[def.levels[l]] = scan.coverage[a][l];
        covered += scan.coverage[a][l] > 0;
      }
      out << " (" << covered << "/" << def.levels.size() << " levels seen)\n";
      coverage[def.name] = std::move(levels);
    }
    if (!scan.incomplete_speakers.empty()) {
      out << "  incomplete speakers (" << scan.incomplete_speakers.size() << "):";
      for (const auto& id : scan.incomplete_speakers) out << " " << id;
      out << "\n";
      incomplete[np.name] = scan.incomplete_speakers;
    }
    for (const auto& issue : scan.issues) {
      errors.push_back({{"input", np.name},
                        {"kind", issue.kind},
                        {"line", issue.line},
                        {"column", issue.column},
                        {"key", issue.key},
                        {"message", issue.message}});
    }
    summaries.push_back({{"name", np.name},
                         {"path", np.path},
                         {"kind", to_string(scan.kind)},
                         {"speakers", scan.speakers.size()},
                         {"utterances", scan.utterances},
                         {"valid_records", scan.records},
                         {"coverage", std::move(coverage)},
                         {"incomplete_speakers", scan.incomplete_speakers},
                         {"issues", scan.issues.size()}});
  }

  const bool ok = errors.empty();
  json config = BaseConfig("validate", s, ParseThresholds(s.thresholds));
  config["inputs"] = NamedPathsJson(inputs);
  OutputSet outputs;
  AddReport(outputs, s, ParseFormat(s.format), "validate.json",
            make_report("validate", config, {},
                        {{"valid", ok}, {"datasets", summaries}, {"errors", errors}}));
  outputs.commit();
  if (!ok) {
    err << json{{"errors", errors}, {"incomplete_speakers", incomplete}}.dump() << "\n";
    return kValidation;
  }
  out << "valid\n";
  return kOk;
}

// --- uniqueness ---------------------------------------------------------------

int CmdUniqueness(const Settings& s, std::ostream& out) {
  const auto schema = LoadSchema(s);
  const auto thresholds = ParseThresholds(s.thresholds);
  const auto formats = ParseFormat(s.format);
  const auto inputs = ParseNamedPaths(s.inputs);
  if (inputs.empty()) throw UsageError("uniqueness needs at least one --input");
  if (s.runs < 0) throw UsageError("--runs must be >= 0");

  std::vector<InputDigest> digests;
  json conditions = json::array();
  std::vector<std::pair<std::string, UniquenessReport>> table;
  std::vector<RunUniqueness> per_run;
  const ResamplePlan plan{s.runs, s.seed};

  for (const auto& np : inputs) {
    const auto ds = Load(np, schema);
    digests.push_back(digest(ds, np.name, np.path, "condition"));
    if (s.runs == 0) {
      const auto report = uniqueness_report(partition_speakers(SpeakerLevel(ds)), thresholds);
      conditions.push_back({{"name", np.name}, {"level", "speaker"}, {"report", to_json(report)}});
      table.emplace_back(np.name, report);
      continue;
    }
    json runs = json::array();
    const auto samples = resample_single(ds, plan);
    for (int i = 0; i < s.runs; ++i) {
      const auto report =
          uniqueness_report(partition_speakers(SingleUtteranceLevel(samples[i])), thresholds);
      runs.push_back({{"run", i},
                      {"seed", plan.run_seed(i)},
                      {"input_hash", content_hash(samples[i])},
                      {"report", to_json(report)}});
      per_run.push_back({np.name, i, report});
    }
    conditions.push_back({{"name", np.name}, {"level", "utterance"}, {"runs", std::move(runs)}});
  }

  json config = BaseConfig("uniqueness", s, thresholds);
  config["inputs"] = NamedPathsJson(inputs);
  OutputSet outputs;
  AddReport(outputs, s, formats, "uniqueness.json",
            make_report("uniqueness", config, digests, {{"conditions", conditions}}));
  if (s.runs == 0) {
    AddCsv(outputs, s, formats, "uniqueness_table.csv", uniqueness_table_csv(table));
  } else {
    AddCsv(outputs, s, formats, "uniqueness_runs.csv", uniqueness_runs_csv(per_run));
  }
  outputs.commit();
  if (s.runs == 0) out << uniqueness_table_csv(table);
  Announce(out, outputs);
  return kOk;
}

// --- attack -------------------------------------------------------------------

int CmdAttack(const Settings& s, std::ostream& out) {
  const auto schema = LoadSchema(s);
  const auto formats = ParseFormat(s.format);
  const auto targets = ParseNamedPaths(s.targets);
  const auto references = ParseNamedPaths(s.references);
  if (targets.empty() || references.empty()) {
    throw UsageError("attack needs at least one --target and one --reference");
  }
  if (s.runs < 0) throw UsageError("--runs must be >= 0");
  const auto truth = s.truth.empty() ? std::map<SpeakerId, SpeakerId>{}
                                     : load_truth_mapping(s.truth);

  std::vector<InputDigest> digests;
  std::vector<std::pair<std::string, ProfileDataset>> reference_sets;
  for (const auto& np : references) {
    const auto ds = Load(np, schema);
    digests.push_back(digest(ds, np.name, np.path, "reference"));
    reference_sets.emplace_back(np.name, SpeakerLevel(ds));
  }

  const ResamplePlan plan{s.runs, s.seed};
  json cells = json::array();
  std::vector<AttackCell> table;
  for (const auto& np : targets) {
    const auto ds = Load(np, schema);
    digests.push_back(digest(ds, np.name, np.path, "target"));
    std::vector<ProfileDataset> target_runs;
    if (s.runs == 0) {
      target_runs.push_back(SpeakerLevel(ds));
    } else {
      for (const auto& run : resample_single(ds, plan)) {
        target_runs.push_back(SingleUtteranceLevel(run));
      }
    }
    for (const auto& [ref_name, ref] : reference_sets) {
      std::vector<AttackInstance> instances;
      json runs = json::array();
      for (std::size_t i = 0; i < target_runs.size(); ++i) {
        instances.push_back(AttackInstance::Make(target_runs[i], ref, truth));
        json run = {{"run", i}, {"closed_form", to_json(attack_closed_form(instances.back()))}};
        if (s.mc_trials > 0) {
          const auto mc_seed = derive_seed(s.seed, SeedDomain::kAttackRun, i);
          run["monte_carlo"] =
              to_json(attack_monte_carlo(instances.back(), s.mc_trials, mc_seed, s.threads));
        }
        runs.push_back(std::move(run));
      }
      const RunSummary summary = attack_over_runs(instances);
      cells.push_back({{"target", np.name},
                       {"reference", ref_name},
                       {"summary", to_json(summary)},
                       {"runs", std::move(runs)}});
      table.push_back({np.name, ref_name, summary});
    }
  }

  json config = BaseConfig("attack", s, ParseThresholds(s.thresholds));
  config["targets"] = NamedPathsJson(targets);
  config["references"] = NamedPathsJson(references);
  config["truth"] = s.truth;
  config["mc_trials"] = s.mc_trials;
  OutputSet outputs;
  AddReport(outputs, s, formats, "attack.json",
            make_report("attack", config, digests, {{"cells", cells}}));
  AddCsv(outputs, s, formats, "attack_table.csv", attack_table_csv(table));
  outputs.commit();
  out << attack_table_csv(table);
  Announce(out, outputs);
  return kOk;
}

// --- resample -----------------------------------------------------------------

int CmdResample(const Settings& s, std::ostream& out) {
  const auto schema = LoadSchema(s);
  const auto inputs = ParseNamedPaths(s.inputs);
  if (inputs.empty()) throw UsageError("resample needs at least one --input");
  if (s.runs < 1) throw UsageError("--runs must be >= 1");

  const ResamplePlan plan{s.runs, s.seed};
  std::vector<InputDigest> digests;
  json files = json::array();
  OutputSet outputs;
  for (const auto& np : inputs) {
    const auto ds = Load(np, schema);
    digests.push_back(digest(ds, np.name, np.path, "source"));
    const auto samples = resample_single(ds, plan);
    for (int i = 0; i < s.runs; ++i) {
      const auto labels = to_labels(samples[i]);
      const std::string file = np.name + "_run" + std::to_string(i) + ".csv";
      outputs.add(fs::path(s.out) / file, write_labels_csv(labels));
      files.push_back({{"source", np.name},
                       {"run", i},
                       {"seed", plan.run_seed(i)},
                       {"file", file},
                       {"hash", content_hash(labels)}});
    }
  }
  json config = BaseConfig("resample", s, ParseThresholds(s.thresholds));
  config["inputs"] = NamedPathsJson(inputs);
  AddReport(outputs, s, ParseFormat(s.format), "resample.json",
            make_report("resample", config, digests, {{"files", files}}));
  outputs.commit();
  Announce(out, outputs);
  return kOk;
}

// --- channel ------------------------------------------------------------------

int CmdChannel(const Settings& s, std::ostream& out) {
  const auto schema = LoadSchema(s);
  const auto inputs = ParseNamedPaths(s.inputs);
  if (inputs.empty()) throw UsageError("channel needs at least one --input");
  if (s.channel.empty() == s.accuracy.empty()) {
    throw UsageError("give exactly one of --channel or --accuracy");
  }

  ConfusionChannel ch = [&] {
    if (!s.channel.empty()) {
      auto loaded = load_channel(s.channel, schema);
      if (s.mode.empty() || parse_channel_mode(s.mode) == loaded.mode()) return loaded;
      return ConfusionChannel::Make(schema, loaded.matrices(), parse_channel_mode(s.mode));
    }
    return channel_from_accuracy(schema, ParseAccuracies(s.accuracy),
                                 s.mode.empty() ? ChannelMode::kIndependent
                                                : parse_channel_mode(s.mode));
  }();

  std::vector<InputDigest> digests;
  json outputs_json = json::array();
  OutputSet outputs;
  for (const auto& np : inputs) {
    const auto ds = to_labels(Load(np, schema));
    digests.push_back(digest(ds, np.name, np.path, "clean"));
    const auto noisy = apply_channel(ds, ch, s.seed);
    json agreement = json::object();
    for (std::size_t a = 0; a < schema.size(); ++a) {
      std::size_t same = 0;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        same += ds.records()[i].labels()[a] == noisy.records()[i].labels()[a];
      }
      agreement[schema.attributes[a].name] =
          static_cast<double>(same) / static_cast<double>(ds.size());
    }
    const std::string file = np.name + "_noisy.csv";
    outputs.add(fs::path(s.out) / file, write_labels_csv(noisy));
    outputs_json.push_back({{"source", np.name},
                            {"file", file},
                            {"hash", content_hash(noisy)},
                            {"agreement", std::move(agreement)}});
  }
  json config = BaseConfig("channel", s, ParseThresholds(s.thresholds));
  config["inputs"] = NamedPathsJson(inputs);
  config["channel"] = s.channel;
  config["accuracy"] = s.accuracy;
  config["mode"] = to_string(ch.mode());
  AddReport(outputs, s, ParseFormat(s.format), "channel.json",
            make_report("channel", config, digests,
                        {{"channel", channel_to_json(ch, schema)}, {"outputs", outputs_json}}));
  outputs.commit();
  Announce(out, outputs);
  return kOk;
}

// --- kdelta -------------------------------------------------------------------

int CmdKDelta(const Settings& s, std::ostream& out) {
  const auto schema = LoadSchema(s);
  const auto thresholds = ParseThresholds(s.thresholds);
  const auto formats = ParseFormat(s.format);
  if (s.gt.empty() || s.inferred.empty()) throw UsageError("kdelta needs --gt and --inferred");
  KDeltaMode mode = KDeltaMode::kThresholdCrossing;
  if (s.mode == "raw") {
    mode = KDeltaMode::kRaw;
  } else if (!s.mode.empty() && s.mode != "threshold") {
    throw UsageError("--mode must be threshold or raw");
  }

  const NamedPath gt_path = ParseNamedPath(s.gt);
  const NamedPath inf_path = ParseNamedPath(s.inferred);
  const auto gt = Load(gt_path, schema);
  const auto inferred = Load(inf_path, schema);
  const auto report = k_delta(partition_speakers(SpeakerLevel(gt)),
                              partition_speakers(SpeakerLevel(inferred)), thresholds, mode);

  json config = BaseConfig("kdelta", s, thresholds);
  config["gt"] = s.gt;
  config["inferred"] = s.inferred;
  config["mode"] = mode == KDeltaMode::kRaw ? "raw" : "threshold";
  OutputSet outputs;
  AddReport(outputs, s, formats, "kdelta.json",
            make_report("kdelta", config,
                        {digest(gt, gt_path.name, gt_path.path, "ground_truth"),
                         digest(inferred, inf_path.name, inf_path.path, "inferred")},
                        to_json(report)));
  AddCsv(outputs, s, formats, "kdelta.csv", kdelta_csv(report));
  outputs.commit();
  out << kdelta_csv(report);
  Announce(out, outputs);
  return kOk;
}

// --- report -------------------------------------------------------------------

int CmdReport(const Settings& s, std::ostream& out) {
  const auto schema = LoadSchema(s);
  const auto formats = ParseFormat(s.format);
  if (s.pred.empty() || s.truth.empty()) throw UsageError("report needs --pred and --truth");
  if (s.level != "utterance" && s.level != "speaker") {
    throw UsageError("--level must be utterance or speaker");
  }
  const auto shown = parse_baseline_kind(s.baseline);

  const NamedPath pred_path = ParseNamedPath(s.pred);
  const NamedPath truth_path = ParseNamedPath(s.truth);
  auto pred = to_labels(Load(pred_path, schema));
  auto truth = to_labels(Load(truth_path, schema));
  std::vector<InputDigest> digests = {digest(pred, pred_path.name, pred_path.path, "predicted"),
                                      digest(truth, truth_path.name, truth_path.path, "truth")};
  if (s.level == "speaker") {
    pred = rekey_by_speaker(SpeakerLevel(pred));
    truth = rekey_by_speaker(SpeakerLevel(truth));
  }
  const auto table = classification_metrics(pred, truth);

  json config = BaseConfig("report", s, ParseThresholds(s.thresholds));
  config["pred"] = s.pred;
  config["truth"] = s.truth;
  config["level"] = s.level;
  config["baseline"] = to_string(shown);
  json results = to_json(table);
  results["baseline_shown"] = to_string(shown);
  OutputSet outputs;
  AddReport(outputs, s, formats, "metrics.json", make_report("report", config, digests, results));
  AddCsv(outputs, s, formats, "metrics.csv", metrics_csv(table, shown));
  outputs.commit();
  out << metrics_csv(table, shown);
  Announce(out, outputs);
  return kOk;
}

void PrintError(std::ostream& err, const std::string& kind, const std::string& message,
                int code) {
  err << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump()
      << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  ConfigBinder binder;
  CLI::App app{"Attribute-based voice privacy risk analysis"};
  app.name(args.empty() ? "vprisk" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--config", s.config, "JSON config file; flags override its keys");
  binder.bind(app.add_option("--schema", s.schema, "Attribute schema JSON"), "schema", s.schema);
  binder.bind(app.add_option("--seed", s.seed, "Master seed"), "seed", s.seed);
  binder.bind(app.add_option("--runs", s.runs, "Single-utterance resampling runs (0 = none)"),
              "runs", s.runs);
  binder.bind(app.add_option("--thresholds", s.thresholds, "Comma-separated k thresholds"),
              "thresholds", s.thresholds);
  binder.bind(app.add_option("--out", s.out, "Output directory"), "out", s.out);
  binder.bind(app.add_option("--format", s.format, "json, csv or all"), "format", s.format);

  auto* validate = app.add_subcommand("validate", "Check a schema and datasets");
  auto* uniqueness = app.add_subcommand("uniqueness", "Anonymity set sizes and uniqueness");
  auto* attack = app.add_subcommand("attack", "Exact-match re-identification attack");
  auto* resample = app.add_subcommand("resample", "Draw single-utterance runs");
  auto* channel = app.add_subcommand("channel", "Push labels through a confusion channel");
  auto* kdelta = app.add_subcommand("kdelta", "Per-speaker change of k between labelings");
  auto* report = app.add_subcommand("report", "Classification metrics and baselines");

  for (auto* sub : {validate, uniqueness, resample, channel}) {
    binder.bind(sub->add_option("--input", s.inputs, "[NAME=]PATH, repeatable"), "inputs",
                s.inputs);
  }
  binder.bind(attack->add_option("--target", s.targets, "[NAME=]PATH, repeatable"), "targets",
              s.targets);
  binder.bind(attack->add_option("--reference", s.references, "[NAME=]PATH, repeatable"),
              "references", s.references);
  binder.bind(attack->add_option("--truth", s.truth, "CSV target_speaker_id,reference_speaker_id"),
              "truth", s.truth);
  binder.bind(attack->add_option("--mc-trials", s.mc_trials, "Monte Carlo trials (0 = off)"),
              "mc_trials", s.mc_trials);
  attack->add_option("--threads", s.threads, "Monte Carlo worker threads (0 = all cores)");
  binder.bind(channel->add_option("--channel", s.channel, "Channel JSON file"), "channel",
              s.channel);
  binder.bind(channel->add_option("--accuracy", s.accuracy, "ATTRIBUTE=ACCURACY, repeatable"),
              "accuracy", s.accuracy);
  binder.bind(channel->add_option("--mode", s.mode, "independent or speaker_consistent"), "mode",
              s.mode);
  binder.bind(kdelta->add_option("--gt", s.gt, "Ground-truth labels"), "gt", s.gt);
  binder.bind(kdelta->add_option("--inferred", s.inferred, "Inferred labels or posteriors"),
              "inferred", s.inferred);
  binder.bind(kdelta->add_option("--mode", s.mode, "threshold or raw"), "mode", s.mode);
  binder.bind(report->add_option("--pred", s.pred, "Predicted labels or posteriors"), "pred",
              s.pred);
  binder.bind(report->add_option("--truth", s.truth, "Reference labels"), "truth", s.truth);
  binder.bind(report->add_option("--level", s.level, "utterance or speaker"), "level", s.level);
  binder.bind(report->add_option("--baseline", s.baseline, "majority or weighted_random"),
              "baseline", s.baseline);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    PrintError(err, "UsageError", e.what(), kUsage);
    return kUsage;
  }

  try {
    json config = json::object();
    if (!s.config.empty()) {
      std::ifstream in(s.config);
      if (!in) throw IOError("cannot open config file " + s.config);
      try {
        config = json::parse(in);
      } catch (const json::parse_error& e) {
        throw UsageError(std::string("config file is not valid JSON: ") + e.what());
      }
      if (!config.is_object()) throw UsageError("config file must hold a JSON object");
      binder.apply(config);
    }
    // resample defaults to ten runs when neither flag nor config sets it.
    if (resample->parsed() && !binder.given("runs", config)) s.runs = 10;

    if (validate->parsed()) return CmdValidate(s, out, err);
    if (uniqueness->parsed()) return CmdUniqueness(s, out);
    if (attack->parsed()) return CmdAttack(s, out);
    if (resample->parsed()) return CmdResample(s, out);
    if (channel->parsed()) return CmdChannel(s, out);
    if (kdelta->parsed()) return CmdKDelta(s, out);
    if (report->parsed()) return CmdReport(s, out);
    throw UsageError("no subcommand");
  } catch (const UsageError& e) {
    PrintError(err, "UsageError", e.what(), kUsage);
    return kUsage;
  } catch (const InvalidArgument& e) {
    PrintError(err, e.kind(), e.what(), kUsage);
    return kUsage;
  } catch (const ParseError& e) {
    err << json{{"error",
                 {{"kind", e.kind()},
                  {"message", e.what()},
                  {"line", e.line()},
                  {"column", e.column()},
                  {"exit_code", int{kValidation}}}}}
               .dump()
        << "\n";
    return kValidation;
  } catch (const ValidationError& e) {
    err << json{{"error",
                 {{"kind", e.kind()},
                  {"message", e.what()},
                  {"key", e.key()},
                  {"line", e.line()},
                  {"exit_code", int{kValidation}}}}}
               .dump()
        << "\n";
    return kValidation;
  } catch (const Error& e) {
    PrintError(err, e.kind(), e.what(), kValidation);
    return kValidation;
  } catch (const std::exception& e) {
    PrintError(err, "InternalError", e.what(), kInternal);
    return kInternal;
  }
}

}  // namespace vprisk::cli
