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

// Loading label CSV / JSONL and posterior JSONL files into datasets.

#ifndef VPRISK_INGEST_HPP_
#define VPRISK_INGEST_HPP_

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vprisk/dataset.hpp"
#include "vprisk/errors.hpp"
#include "vprisk/schema.hpp"

namespace vprisk {

// Accepted deviation of a posterior vector's sum from one on input. Vectors
// inside it are rescaled to sum to one.
inline constexpr double kInputSumTolerance = 1e-6;

enum class FileFormat { kCsv, kJsonl };

inline FileFormat detect_format(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") return FileFormat::kJsonl;
  return FileFormat::kCsv;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

struct Line {
  std::size_t number;  // 1-based
  std::string_view text;
};

// Splits on LF, strips CR and a leading UTF-8 BOM, drops blank lines.
inline std::vector<Line> SplitLines(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<Line> lines;
  std::size_t number = 0;
  while (!text.empty()) {
    ++number;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (line.ends_with('\r')) line.remove_suffix(1);
    if (!line.empty()) lines.push_back({number, line});
  }
  return lines;
}

inline std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

// Called with each record-level problem. In strict mode it rethrows.
using IssueSink = std::function<void(const Error&)>;

inline void CheckCsvHeader(const Line& header, const AttributeSchema& schema) {
  const auto fields = SplitFields(header.text);
  std::vector<std::string> expected = {"speaker_id", "utterance_id"};
  for (const auto& def : schema.attributes) expected.push_back(def.name);
  for (std::size_t i = 0; i < std::max(fields.size(), expected.size()); ++i) {
    if (i >= fields.size()) {
      throw ParseError(header.number, i + 1, "header is missing column '" + expected[i] + "'");
    }
    if (i >= expected.size()) {
      throw ParseError(header.number, i + 1,
                       "unexpected header column '" + std::string(fields[i]) + "'");
    }
    if (fields[i] != expected[i]) {
      throw ParseError(header.number, i + 1,
                       "header column '" + std::string(fields[i]) + "', expected '" +
                           expected[i] + "'");
    }
  }
}

inline LevelIndex ResolveLevel(const AttributeSchema& schema, std::size_t attr,
                               std::string_view cell, const std::string& key,
                               std::size_t line) {
  if (cell.empty()) {
    throw ValidationError(key, "missing value for attribute '" +
                                   schema.attributes[attr].name + "'",
                          line);
  }
  auto level = schema.level_index(attr, cell);
  if (!level) {
    throw ValidationError(key, "unknown level '" + std::string(cell) +
                                   "' for attribute '" +
                                   schema.attributes[attr].name + "'",
                          line);
  }
  return *level;
}

struct ParsedRows {
  std::vector<ProfileRecord> records;
  std::vector<std::size_t> lines;
};

inline ParsedRows ParseLabelsCsv(std::string_view text,
                                 const AttributeSchema& schema,
                                 const IssueSink& sink) {
  const auto lines = SplitLines(text);
  if (lines.empty()) throw ParseError(1, 0, "file is empty");
  CheckCsvHeader(lines.front(), schema);
  ParsedRows out;
  const std::size_t width = 2 + schema.size();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    try {
      const auto fields = SplitFields(line.text);
      if (fields.size() != width) {
        throw ParseError(line.number, std::min(fields.size(), width) + 1,
                         "expected " + std::to_string(width) + " fields, found " +
                             std::to_string(fields.size()));
      }
      ProfileRecord r{std::string(fields[0]), std::string(fields[1]), Profile{}};
      std::vector<LevelIndex> values(schema.size());
      for (std::size_t a = 0; a < schema.size(); ++a) {
        values[a] = ResolveLevel(schema, a, fields[2 + a], r.key(), line.number);
      }
      r.payload = Profile(std::move(values));
      out.records.push_back(std::move(r));
      out.lines.push_back(line.number);
    } catch (const Error& e) {
      sink(e);
    }
  }
  return out;
}

inline nlohmann::json ParseJsonLine(const Line& line) {
  try {
    auto j = nlohmann::json::parse(line.text);
    if (!j.is_object()) throw ParseError(line.number, 1, "line is not a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line.number, e.byte, "invalid JSON");
  }
}

inline std::string RequireId(const nlohmann::json& j, const char* field,
                             std::size_t line) {
  if (!j.contains(field) || !j[field].is_string()) {
    throw ParseError(line, 0, std::string("missing string field '") + field + "'");
  }
  return j[field].get<std::string>();
}

inline ParsedRows ParseLabelsJsonl(std::string_view text,
                                   const AttributeSchema& schema,
                                   const IssueSink& sink) {
  ParsedRows out;
  for (const auto& line : SplitLines(text)) {
    try {
      const auto j = ParseJsonLine(line);
      ProfileRecord r{RequireId(j, "speaker_id", line.number),
                      RequireId(j, "utterance_id", line.number), Profile{}};
      for (const auto& [field, value] : j.items()) {
        if (field != "speaker_id" && field != "utterance_id" &&
            !schema.attribute_index(field)) {
          throw ParseError(line.number, 0, "unknown field '" + field + "'");
        }
      }
      std::vector<LevelIndex> values(schema.size());
      for (std::size_t a = 0; a < schema.size(); ++a) {
        const auto& name = schema.attributes[a].name;
        std::string cell;
        if (j.contains(name) && !j[name].is_null()) {
          if (!j[name].is_string()) {
            throw ParseError(line.number, 0, "field '" + name + "' must be a string");
          }
          cell = j[name].get<std::string>();
        }
        values[a] = ResolveLevel(schema, a, cell, r.key(), line.number);
      }
      r.payload = Profile(std::move(values));
      out.records.push_back(std::move(r));
      out.lines.push_back(line.number);
    } catch (const Error& e) {
      sink(e);
    }
  }
  if (out.records.empty() && SplitLines(text).empty()) {
    throw ParseError(1, 0, "file is empty");
  }
  return out;
}

inline ParsedRows ParsePosteriorsJsonl(std::string_view text,
                                       const AttributeSchema& schema,
                                       const IssueSink& sink) {
  ParsedRows out;
  const auto lines = SplitLines(text);
  if (lines.empty()) throw ParseError(1, 0, "file is empty");
  for (const auto& line : lines) {
    try {
      const auto j = ParseJsonLine(line);
      ProfileRecord r{RequireId(j, "speaker_id", line.number),
                      RequireId(j, "utterance_id", line.number), Profile{}};
      if (!j.contains("posteriors") || !j["posteriors"].is_array()) {
        throw ParseError(line.number, 0, "missing array field 'posteriors'");
      }
      std::vector<std::vector<double>> dists;
      for (const auto& vec : j["posteriors"]) {
        if (!vec.is_array()) {
          throw ParseError(line.number, 0, "'posteriors' must be an array of arrays");
        }
        std::vector<double> v;
        for (const auto& x : vec) {
          if (!x.is_number()) {
            throw ParseError(line.number, 0, "posterior entries must be numbers");
          }
          v.push_back(x.get<double>());
        }
        dists.push_back(std::move(v));
      }
      try {
        r.payload = PosteriorProfile::Make(std::move(dists), schema,
                                           kInputSumTolerance, r.key(), line.number);
      } catch (const DimensionMismatch& e) {
        throw ValidationError(r.key(), e.what(), line.number);
      }
      out.records.push_back(std::move(r));
      out.lines.push_back(line.number);
    } catch (const Error& e) {
      sink(e);
    }
  }
  return out;
}

// Strict-mode sink: sinks run inside the row's catch block, so a bare
// rethrow keeps the dynamic error type.
inline void Rethrow(const Error&) { throw; }

}  // namespace detail

// --- parsing from text (the file loaders below wrap these) -----------------

inline ProfileDataset parse_labels(std::string_view text, FileFormat format,
                                   const AttributeSchema& schema,
                                   DatasetMeta meta = {}) {
  auto rows = format == FileFormat::kCsv
                  ? detail::ParseLabelsCsv(text, schema, detail::Rethrow)
                  : detail::ParseLabelsJsonl(text, schema, detail::Rethrow);
  return ProfileDataset::Make(schema, std::move(rows.records), std::move(meta),
                              rows.lines);
}

inline ProfileDataset parse_posteriors(std::string_view text,
                                       const AttributeSchema& schema,
                                       DatasetMeta meta = {}) {
  auto rows = detail::ParsePosteriorsJsonl(text, schema, detail::Rethrow);
  return ProfileDataset::Make(schema, std::move(rows.records), std::move(meta),
                              rows.lines);
}

// Label file: CSV with header speaker_id,utterance_id,<attributes in schema
// order>, or JSONL objects with the same fields. Unknown levels, missing
// values and duplicate keys are errors.
inline ProfileDataset load_labels(const std::filesystem::path& path,
                                  const AttributeSchema& schema,
                                  DatasetMeta meta = {}) {
  return parse_labels(read_file(path), detect_format(path), schema, std::move(meta));
}

// Posterior JSONL: {"speaker_id", "utterance_id", "posteriors": [[...], ...]}
// with one vector per attribute in schema order.
inline ProfileDataset load_posteriors(const std::filesystem::path& path,
                                      const AttributeSchema& schema,
                                      DatasetMeta meta = {}) {
  if (detect_format(path) != FileFormat::kJsonl) {
    throw InvalidArgument("posterior files must be JSONL: " + path.string());
  }
  return parse_posteriors(read_file(path), schema, std::move(meta));
}

// True if the first record of a JSONL file carries a "posteriors" field.
inline bool looks_like_posteriors(const std::filesystem::path& path) {
  if (detect_format(path) != FileFormat::kJsonl) return false;
  const auto text = read_file(path);
  for (const auto& line : detail::SplitLines(text)) {
    try {
      return nlohmann::json::parse(line.text).contains("posteriors");
    } catch (const nlohmann::json::parse_error&) {
      return false;
    }
  }
  return false;
}

// Loads either payload kind, choosing by content.
inline ProfileDataset load_dataset(const std::filesystem::path& path,
                                   const AttributeSchema& schema,
                                   DatasetMeta meta = {}) {
  return looks_like_posteriors(path) ? load_posteriors(path, schema, std::move(meta))
                                     : load_labels(path, schema, std::move(meta));
}

// --- lenient scan for diagnostics -------------------------------------------

struct ScanIssue {
  std::string kind;
  std::size_t line = 0;
  std::size_t column = 0;
  std::string key;
  std::string message;
};

struct ScanResult {
  std::size_t records = 0;  // rows that parsed cleanly
  std::vector<SpeakerId> speakers;     // every speaker id seen, sorted
  std::vector<SpeakerId> incomplete_speakers;  // some row missing a value
  std::size_t utterances = 0;          // all data rows, valid or not
  // coverage[attr][level] = number of valid rows carrying that level.
  std::vector<std::vector<std::size_t>> coverage;
  std::vector<ScanIssue> issues;
  PayloadKind kind = PayloadKind::kLabels;

  bool ok() const { return issues.empty(); }
};

// Parses everything it can and records every problem instead of stopping at
// the first one.
inline ScanResult scan_dataset(const std::filesystem::path& path,
                               const AttributeSchema& schema) {
  ScanResult result;
  auto to_issue = [](const Error& e) {
    ScanIssue issue{e.kind(), 0, 0, "", e.what()};
    if (auto* p = dynamic_cast<const ParseError*>(&e)) {
      issue.line = p->line();
      issue.column = p->column();
    } else if (auto* v = dynamic_cast<const ValidationError*>(&e)) {
      issue.line = v->line();
      issue.key = v->key();
    }
    return issue;
  };
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    result.issues.push_back(to_issue(e));
    return result;
  }

  const FileFormat format = detect_format(path);
  const bool posteriors = looks_like_posteriors(path);
  result.kind = posteriors ? PayloadKind::kPosteriors : PayloadKind::kLabels;

  // Speaker ids and missing cells, independent of row validity.
  std::set<SpeakerId> speakers;
  std::set<SpeakerId> incomplete;
  const auto lines = detail::SplitLines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (format == FileFormat::kCsv) {
      if (i == 0) continue;
      const auto fields = detail::SplitFields(lines[i].text);
      if (fields.empty() || fields[0].empty()) continue;
      speakers.emplace(fields[0]);
      const bool short_row = fields.size() < 2 + schema.size();
      const bool empty_cell =
          std::any_of(fields.begin() + std::min<std::size_t>(2, fields.size()),
                      fields.end(), [](std::string_view f) { return f.empty(); });
      if (short_row || empty_cell) incomplete.emplace(fields[0]);
    } else {
      try {
        const auto j = nlohmann::json::parse(lines[i].text);
        if (!j.is_object() || !j.contains("speaker_id") || !j["speaker_id"].is_string()) {
          continue;
        }
        const auto id = j["speaker_id"].get<std::string>();
        speakers.insert(id);
        if (!posteriors) {
          for (const auto& def : schema.attributes) {
            if (!j.contains(def.name) || j[def.name].is_null() ||
                (j[def.name].is_string() && j[def.name].get<std::string>().empty())) {
              incomplete.insert(id);
            }
          }
        }
      } catch (const nlohmann::json::parse_error&) {
      }
    }
  }
  result.utterances = format == FileFormat::kCsv && !lines.empty() ? lines.size() - 1
                                                                   : lines.size();
  result.speakers.assign(speakers.begin(), speakers.end());
  result.incomplete_speakers.assign(incomplete.begin(), incomplete.end());

  detail::ParsedRows rows;
  auto sink = [&](const Error& e) { result.issues.push_back(to_issue(e)); };
  try {
    if (posteriors) {
      rows = detail::ParsePosteriorsJsonl(text, schema, sink);
    } else if (format == FileFormat::kCsv) {
      rows = detail::ParseLabelsCsv(text, schema, sink);
    } else {
      rows = detail::ParseLabelsJsonl(text, schema, sink);
    }
  } catch (const Error& e) {
    // Header or empty-file problems end the scan.
    result.issues.push_back(to_issue(e));
    return result;
  }

  // Duplicate keys among rows that parsed.
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  for (std::size_t i = 0; i < rows.records.size(); ++i) {
    const auto& r = rows.records[i];
    auto [it, inserted] = seen.emplace(std::pair{r.speaker_id, r.utterance_id},
                                       rows.lines[i]);
    if (!inserted) {
      result.issues.push_back({"ValidationError", rows.lines[i], 0, r.key(),
                               "line " + std::to_string(rows.lines[i]) + ", record " +
                                   r.key() + ": duplicate (speaker, utterance) key"});
    }
  }

  result.records = rows.records.size();
  result.coverage.resize(schema.size());
  for (std::size_t a = 0; a < schema.size(); ++a) {
    result.coverage[a].assign(schema.level_count(a), 0);
  }
  for (const auto& r : rows.records) {
    const Profile p = posteriors ? argmax_profile(r.posteriors(), schema) : r.labels();
    for (std::size_t a = 0; a < p.size(); ++a) ++result.coverage[a][p[a]];
  }
  return result;
}

// --- transformations ---------------------------------------------------------

// Keeps the records of `ids`. Every id must be present in `ds`.
inline ProfileDataset restrict_to_speakers(const ProfileDataset& ds,
                                           const std::set<SpeakerId>& ids) {
  if (ids.empty()) throw InvalidArgument("speaker id set is empty");
  std::vector<SpeakerId> missing;
  std::vector<ProfileRecord> kept;
  for (const auto& id : ids) {
    const auto records = ds.records_of(id);
    if (records.empty()) missing.push_back(id);
    kept.insert(kept.end(), records.begin(), records.end());
  }
  if (!missing.empty()) throw UnknownSpeakerError(std::move(missing));
  return ProfileDataset::Make(ds.schema(), std::move(kept), ds.meta());
}

// Target-to-reference identity mapping: CSV with header
// target_speaker_id,reference_speaker_id.
inline std::map<SpeakerId, SpeakerId> parse_truth_mapping(std::string_view text) {
  const auto lines = detail::SplitLines(text);
  if (lines.empty()) throw ParseError(1, 0, "file is empty");
  if (lines.front().text != "target_speaker_id,reference_speaker_id") {
    throw ParseError(lines.front().number, 1,
                     "header must be target_speaker_id,reference_speaker_id");
  }
  std::map<SpeakerId, SpeakerId> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = detail::SplitFields(lines[i].text);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw ParseError(lines[i].number, 0, "expected two non-empty fields");
    }
    if (!out.emplace(std::string(fields[0]), std::string(fields[1])).second) {
      throw ValidationError(std::string(fields[0]), "target mapped twice", lines[i].number);
    }
  }
  return out;
}

inline std::map<SpeakerId, SpeakerId> load_truth_mapping(const std::filesystem::path& path) {
  return parse_truth_mapping(read_file(path));
}

}  // namespace vprisk

#endif  // VPRISK_INGEST_HPP_
