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

// JSON and CSV renderings of analysis results, and atomic file output.

#ifndef VPRISK_REPORT_HPP_
#define VPRISK_REPORT_HPP_

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vprisk/attack.hpp"
#include "vprisk/channel.hpp"
#include "vprisk/dataset.hpp"
#include "vprisk/errors.hpp"
#include "vprisk/metrics.hpp"
#include "vprisk/partition.hpp"

namespace vprisk {

inline constexpr int kReportVersion = 1;
inline constexpr const char* kToolName = "vprisk";
inline constexpr const char* kToolVersion = "0.1.0";

// Percentages are displayed with one decimal; JSON keeps full precision.
inline std::string format_pct(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", pct);
  return buf;
}

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// Whole medians print as integers, half-integers with one decimal.
inline std::string format_median(double m) {
  return m == std::floor(m) ? format_fixed(m, 0) : format_fixed(m, 1);
}

// --- JSON --------------------------------------------------------------------

inline nlohmann::json to_json(const UniquenessReport& r) {
  nlohmann::json below = nlohmann::json::array();
  for (const auto& b : r.below) {
    below.push_back({{"threshold", b.threshold}, {"count", b.count}, {"pct", b.pct}});
  }
  return {{"n_speakers", r.n_speakers},
          {"unique_count", r.unique_count},
          {"pct_unique", r.pct_unique},
          {"below", std::move(below)},
          {"median_k", r.median_k},
          {"per_speaker_k", r.per_speaker_k}};
}

inline nlohmann::json to_json(const KDeltaReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"threshold", row.threshold ? nlohmann::json(*row.threshold)
                                                : nlohmann::json(nullptr)},
                    {"worse", row.worse},
                    {"unchanged", row.unchanged},
                    {"better", row.better},
                    {"pct_worse", row.pct_worse},
                    {"pct_unchanged", row.pct_unchanged},
                    {"pct_better", row.pct_better}});
  }
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"speaker_id", p.speaker}, {"k_gt", p.k_gt}, {"k_inferred", p.k_inferred}});
  }
  return {{"mode", r.mode == KDeltaMode::kRaw ? "raw" : "threshold"},
          {"n_speakers", r.n_speakers},
          {"rows", std::move(rows)},
          {"pairs", std::move(pairs)}};
}

inline nlohmann::json to_json(const AttackReport& r) {
  nlohmann::json per_target = nlohmann::json::object();
  for (const auto& [id, o] : r.per_target) {
    per_target[id] = {{"match_set_size", o.match_set_size},
                      {"truth_in_matches", o.truth_in_matches},
                      {"success_prob", o.success_prob}};
  }
  nlohmann::json j = {{"mode", to_string(r.mode)},
                      {"error_rate", r.error_rate},
                      {"per_target", std::move(per_target)}};
  if (r.mode == AttackMode::kMonteCarlo) {
    j["trials"] = r.trials;
    j["seed"] = r.seed;
    j["std_error"] = r.std_error;
  }
  return j;
}

inline nlohmann::json to_json(const RunSummary& s) {
  return {{"mean", s.mean},
          {"std", s.std},
          {"runs", s.runs},
          {"std_defined", s.std_defined},
          {"formatted", format_mean_std(s)}};
}

inline nlohmann::json to_json(const MetricsTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    rows.push_back({{"attribute", row.attribute},
                    {"accuracy", row.accuracy},
                    {"weighted_f1", row.weighted_f1},
                    {"baseline_majority", row.baseline_majority},
                    {"baseline_weighted_random", row.baseline_weighted_random}});
  }
  return {{"granularity", to_string(t.granularity)},
          {"records", t.records},
          {"attributes", std::move(rows)}};
}

struct InputDigest {
  std::string name;
  std::string path;
  std::string role;
  std::string hash;
  std::size_t records = 0;
  std::size_t speakers = 0;
};

inline InputDigest digest(const ProfileDataset& ds, std::string name, std::string path,
                          std::string role) {
  return {std::move(name), std::move(path), std::move(role), content_hash(ds),
          ds.size(), ds.speakers().size()};
}

// Report envelope shared by every command. nlohmann::json keeps object keys
// sorted, which makes the dump canonical.
inline nlohmann::json make_report(const std::string& command, nlohmann::json config,
                                  const std::vector<InputDigest>& inputs,
                                  nlohmann::json results) {
  nlohmann::json in = nlohmann::json::array();
  for (const auto& d : inputs) {
    in.push_back({{"name", d.name},
                  {"path", d.path},
                  {"role", d.role},
                  {"hash", d.hash},
                  {"records", d.records},
                  {"speakers", d.speakers}});
  }
  return {{"report_version", kReportVersion},
          {"tool", kToolName},
          {"tool_version", kToolVersion},
          {"command", command},
          {"config", std::move(config)},
          {"inputs", std::move(in)},
          {"results", std::move(results)}};
}

inline std::string dump_report(const nlohmann::json& report) {
  return report.dump(2) + "\n";
}

// --- CSV tables ---------------------------------------------------------------

// Uniqueness table, one column per condition:
//   metric,<cond1>,...
//   k=1,38.9
//   k<3,55.6
//   ...
//   median,2
inline std::string uniqueness_table_csv(
    const std::vector<std::pair<std::string, UniquenessReport>>& columns) {
  std::string out = "metric";
  for (const auto& [name, r] : columns) out += "," + name;
  out += "\n";
  if (columns.empty()) return out;
  out += "k=1";
  for (const auto& [name, r] : columns) out += "," + format_pct(r.pct_unique);
  out += "\n";
  for (std::size_t i = 0; i < columns.front().second.below.size(); ++i) {
    out += "k<" + std::to_string(columns.front().second.below[i].threshold);
    for (const auto& [name, r] : columns) out += "," + format_pct(r.below.at(i).pct);
    out += "\n";
  }
  out += "median";
  for (const auto& [name, r] : columns) out += "," + format_median(r.median_k);
  out += "\n";
  return out;
}

struct RunUniqueness {
  std::string condition;
  int run = 0;
  UniquenessReport report;
};

// Per-run threshold percentages, one row per (condition, run, metric).
inline std::string uniqueness_runs_csv(const std::vector<RunUniqueness>& runs) {
  std::string out = "condition,run,metric,pct\n";
  for (const auto& r : runs) {
    const std::string prefix = r.condition + "," + std::to_string(r.run) + ",";
    out += prefix + "k=1," + format_pct(r.report.pct_unique) + "\n";
    for (const auto& b : r.report.below) {
      out += prefix + "k<" + std::to_string(b.threshold) + "," + format_pct(b.pct) + "\n";
    }
  }
  return out;
}

// threshold,worse,unchanged,better   e.g. "10,20.4,79.6,0.0"
inline std::string kdelta_csv(const KDeltaReport& r) {
  std::string out = "threshold,worse,unchanged,better\n";
  for (const auto& row : r.rows) {
    out += (row.threshold ? std::to_string(*row.threshold) : std::string("raw")) + "," +
           format_pct(row.pct_worse) + "," + format_pct(row.pct_unchanged) + "," +
           format_pct(row.pct_better) + "\n";
  }
  return out;
}

struct AttackCell {
  std::string target;
  std::string reference;
  RunSummary summary;
};

inline std::string attack_table_csv(const std::vector<AttackCell>& cells) {
  std::string out = "target,reference,mean,std,runs,formatted\n";
  for (const auto& c : cells) {
    out += c.target + "," + c.reference + "," + format_fixed(c.summary.mean, 4) + "," +
           format_fixed(c.summary.std, 4) + "," + std::to_string(c.summary.runs) + "," +
           format_mean_std(c.summary) + "\n";
  }
  return out;
}

inline std::string metrics_csv(const MetricsTable& t, BaselineKind shown) {
  std::string out = "attribute,baseline,accuracy,weighted_f1\n";
  for (const auto& row : t.rows) {
    const double b = shown == BaselineKind::kMajority ? row.baseline_majority
                                                      : row.baseline_weighted_random;
    out += row.attribute + "," + format_fixed(b, 4) + "," + format_fixed(row.accuracy, 4) +
           "," + format_fixed(row.weighted_f1, 4) + "\n";
  }
  return out;
}

// --- output -------------------------------------------------------------------

// Writes to a temporary sibling and renames it into place, so readers never
// see a partially written file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IOError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IOError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IOError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IOError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

// Collects every output of a command and writes them only once all of them
// have been computed.
class OutputSet {
 public:
  void add(std::filesystem::path path, std::string content) {
    files_.emplace_back(std::move(path), std::move(content));
  }
  void commit() const {
    for (const auto& [path, content] : files_) atomic_write(path, content);
  }
  const std::vector<std::pair<std::filesystem::path, std::string>>& files() const {
    return files_;
  }

 private:
  std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

}  // namespace vprisk

#endif  // VPRISK_REPORT_HPP_
