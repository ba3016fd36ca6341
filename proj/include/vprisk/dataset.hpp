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

// Immutable profile datasets and their canonical serialization.

#ifndef VPRISK_DATASET_HPP_
#define VPRISK_DATASET_HPP_

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "vprisk/errors.hpp"
#include "vprisk/schema.hpp"

namespace vprisk {

using SpeakerId = std::string;
using UtteranceId = std::string;

enum class Granularity { kUtterance, kSpeaker };
enum class PayloadKind { kLabels, kPosteriors };

inline const char* to_string(Granularity g) {
  return g == Granularity::kSpeaker ? "speaker" : "utterance";
}
inline const char* to_string(PayloadKind k) {
  return k == PayloadKind::kLabels ? "labels" : "posteriors";
}

struct ProfileRecord {
  SpeakerId speaker_id;
  UtteranceId utterance_id;
  std::variant<Profile, PosteriorProfile> payload;

  std::string key() const { return speaker_id + "/" + utterance_id; }
  const Profile& labels() const { return std::get<Profile>(payload); }
  const PosteriorProfile& posteriors() const {
    return std::get<PosteriorProfile>(payload);
  }

  bool operator==(const ProfileRecord&) const = default;
};

struct DatasetMeta {
  // Free-form condition tag, e.g. ground_truth, original, mcadams.
  std::string source_label = "dataset";
  Granularity granularity = Granularity::kUtterance;

  bool operator==(const DatasetMeta&) const = default;
};

namespace detail {

inline bool IsValidId(std::string_view id) {
  return !id.empty() && id.find_first_of(",\"\r\n") == std::string_view::npos;
}

}  // namespace detail

// Records sorted by (speaker_id, utterance_id), all of one payload kind and
// valid against one schema. Never modified after construction; every
// transformation builds a new dataset.
class ProfileDataset {
 public:
  // Validates and canonicalizes. `lines` optionally carries the source line of
  // each record (same order as `records`) for error messages.
  static ProfileDataset Make(AttributeSchema schema,
                             std::vector<ProfileRecord> records,
                             DatasetMeta meta,
                             std::span<const std::size_t> lines = {}) {
    if (records.empty()) throw EmptyDataset("dataset has no records");
    auto line_of = [&](std::size_t i) {
      return i < lines.size() ? lines[i] : std::size_t{0};
    };
    const PayloadKind kind = records.front().payload.index() == 0
                                 ? PayloadKind::kLabels
                                 : PayloadKind::kPosteriors;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      if (!detail::IsValidId(r.speaker_id) || !detail::IsValidId(r.utterance_id)) {
        throw ValidationError(r.key(), "ids must be non-empty and free of commas, quotes and newlines",
                              line_of(i));
      }
      const PayloadKind k = r.payload.index() == 0 ? PayloadKind::kLabels
                                                   : PayloadKind::kPosteriors;
      if (k != kind) {
        throw ValidationError(r.key(), "mixed label and posterior payloads",
                              line_of(i));
      }
      try {
        if (k == PayloadKind::kLabels) {
          check_profile(r.labels(), schema);
        } else {
          // Re-validation of an already built posterior is cheap.
          PosteriorProfile::Make(r.posteriors().distributions(), schema,
                                 kPosteriorTolerance, r.key(), line_of(i));
        }
      } catch (const DimensionMismatch& e) {
        throw ValidationError(r.key(), e.what(), line_of(i));
      }
    }

    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(records[a].speaker_id, records[a].utterance_id) <
             std::tie(records[b].speaker_id, records[b].utterance_id);
    });
    std::vector<ProfileRecord> sorted;
    sorted.reserve(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i > 0) {
        const auto& prev = sorted.back();
        const auto& cur = records[order[i]];
        if (prev.speaker_id == cur.speaker_id &&
            prev.utterance_id == cur.utterance_id) {
          throw ValidationError(cur.key(), "duplicate (speaker, utterance) key",
                                std::max(line_of(order[i - 1]), line_of(order[i])));
        }
        if (meta.granularity == Granularity::kSpeaker &&
            prev.speaker_id == cur.speaker_id) {
          throw GranularityError("speaker-level dataset has several records for speaker " +
                                 cur.speaker_id);
        }
      }
      sorted.push_back(std::move(records[order[i]]));
    }

    ProfileDataset ds;
    ds.schema_ = std::move(schema);
    ds.records_ = std::move(sorted);
    ds.meta_ = std::move(meta);
    ds.kind_ = kind;
    return ds;
  }

  const AttributeSchema& schema() const noexcept { return schema_; }
  const std::vector<ProfileRecord>& records() const noexcept { return records_; }
  const DatasetMeta& meta() const noexcept { return meta_; }
  PayloadKind kind() const noexcept { return kind_; }
  Granularity granularity() const noexcept { return meta_.granularity; }
  std::size_t size() const noexcept { return records_.size(); }

  // Sorted distinct speaker ids.
  std::vector<SpeakerId> speakers() const {
    std::vector<SpeakerId> out;
    for (const auto& r : records_) {
      if (out.empty() || out.back() != r.speaker_id) out.push_back(r.speaker_id);
    }
    return out;
  }

  // Records of one speaker, in utterance order. Empty if absent.
  std::span<const ProfileRecord> records_of(std::string_view speaker) const {
    auto lo = std::lower_bound(
        records_.begin(), records_.end(), speaker,
        [](const ProfileRecord& r, std::string_view s) { return r.speaker_id < s; });
    auto hi = lo;
    while (hi != records_.end() && hi->speaker_id == speaker) ++hi;
    return {lo, hi};
  }

  // Consecutive runs of records sharing a speaker id, in speaker order.
  std::vector<std::span<const ProfileRecord>> by_speaker() const {
    std::vector<std::span<const ProfileRecord>> out;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= records_.size(); ++i) {
      if (i == records_.size() ||
          records_[i].speaker_id != records_[start].speaker_id) {
        out.emplace_back(records_.data() + start, i - start);
        start = i;
      }
    }
    return out;
  }

  ProfileDataset with_meta(DatasetMeta meta) const {
    ProfileDataset copy = *this;
    if (meta.granularity == Granularity::kSpeaker &&
        copy.speakers().size() != copy.size()) {
      throw GranularityError("dataset '" + meta_.source_label +
                             "' has several utterances for some speaker");
    }
    copy.meta_ = std::move(meta);
    return copy;
  }

  bool operator==(const ProfileDataset&) const = default;

 private:
  ProfileDataset() = default;

  AttributeSchema schema_;
  std::vector<ProfileRecord> records_;
  DatasetMeta meta_;
  PayloadKind kind_ = PayloadKind::kLabels;
};

// Reinterprets a one-record-per-speaker dataset at speaker granularity.
inline ProfileDataset as_speaker_level(const ProfileDataset& ds) {
  if (ds.granularity() == Granularity::kSpeaker) return ds;
  DatasetMeta meta = ds.meta();
  meta.granularity = Granularity::kSpeaker;
  return ds.with_meta(std::move(meta));
}

// --- canonical writers ------------------------------------------------------

// Label CSV: header speaker_id,utterance_id,<attributes>; records in
// canonical order; LF line endings.
inline std::string write_labels_csv(const ProfileDataset& ds) {
  if (ds.kind() != PayloadKind::kLabels) {
    throw InvalidArgument("label CSV needs a label dataset");
  }
  const auto& schema = ds.schema();
  std::string out = "speaker_id,utterance_id";
  for (const auto& def : schema.attributes) out += "," + def.name;
  out += "\n";
  for (const auto& r : ds.records()) {
    out += r.speaker_id;
    out += ",";
    out += r.utterance_id;
    const Profile& p = r.labels();
    for (std::size_t a = 0; a < p.size(); ++a) {
      out += ",";
      out += schema.attributes[a].levels[p[a]];
    }
    out += "\n";
  }
  return out;
}

// Posterior JSONL: {"speaker_id":...,"utterance_id":...,"posteriors":[[...]]}
// per line, numbers in shortest round-trip form.
inline std::string write_posteriors_jsonl(const ProfileDataset& ds) {
  if (ds.kind() != PayloadKind::kPosteriors) {
    throw InvalidArgument("posterior JSONL needs a posterior dataset");
  }
  std::string out;
  for (const auto& r : ds.records()) {
    nlohmann::ordered_json line;
    line["speaker_id"] = r.speaker_id;
    line["utterance_id"] = r.utterance_id;
    line["posteriors"] = r.posteriors().distributions();
    out += line.dump();
    out += "\n";
  }
  return out;
}

inline std::string write_canonical(const ProfileDataset& ds) {
  return ds.kind() == PayloadKind::kLabels ? write_labels_csv(ds)
                                           : write_posteriors_jsonl(ds);
}

inline std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Content hash over the schema and the canonical serialization, so that two
// files differing only in row order hash equally.
inline std::string content_hash(const ProfileDataset& ds) {
  return "fnv1a64:" +
         fnv1a64_hex(schema_to_json(ds.schema()).dump() + "\n" + write_canonical(ds));
}

}  // namespace vprisk

#endif  // VPRISK_DATASET_HPP_
