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

// Equivalence classes of identical profiles, anonymity set sizes and the
// uniqueness statistics derived from them.

#ifndef VPRISK_PARTITION_HPP_
#define VPRISK_PARTITION_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vprisk/dataset.hpp"
#include "vprisk/errors.hpp"
#include "vprisk/schema.hpp"

namespace vprisk {

struct EquivalenceClass {
  Profile profile;
  std::vector<SpeakerId> members;  // sorted

  bool operator==(const EquivalenceClass&) const = default;
};

// k(speaker) is the size of the speaker's class, the speaker included, so
// k = 1 means unique.
struct AnonymityAssignment {
  std::vector<EquivalenceClass> classes;  // sorted by profile
  std::map<SpeakerId, std::size_t> k;

  std::size_t n_speakers() const noexcept { return k.size(); }

  bool operator==(const AnonymityAssignment&) const = default;
};

using SpeakerProfile = std::pair<SpeakerId, Profile>;

// Groups speakers by exact profile equality. Speaker ids must be distinct.
inline AnonymityAssignment partition_profiles(std::span<const SpeakerProfile> speakers) {
  std::unordered_map<Profile, std::vector<SpeakerId>, ProfileHash> groups;
  for (const auto& [id, profile] : speakers) groups[profile].push_back(id);

  AnonymityAssignment out;
  out.classes.reserve(groups.size());
  for (auto& [profile, members] : groups) {
    std::sort(members.begin(), members.end());
    for (const auto& id : members) {
      if (!out.k.emplace(id, members.size()).second) {
        throw InvalidArgument("speaker " + id + " appears twice");
      }
    }
    out.classes.push_back({profile, std::move(members)});
  }
  std::sort(out.classes.begin(), out.classes.end(),
            [](const EquivalenceClass& a, const EquivalenceClass& b) {
              return a.profile < b.profile;
            });
  return out;
}

inline std::vector<SpeakerProfile> speaker_profiles(const ProfileDataset& ds) {
  if (ds.granularity() != Granularity::kSpeaker) {
    throw GranularityError("dataset '" + ds.meta().source_label +
                           "' is utterance-level; aggregate or resample it first");
  }
  if (ds.kind() != PayloadKind::kLabels) {
    throw GranularityError("dataset '" + ds.meta().source_label +
                           "' carries posteriors; convert to labels first");
  }
  std::vector<SpeakerProfile> out;
  out.reserve(ds.size());
  for (const auto& r : ds.records()) out.emplace_back(r.speaker_id, r.labels());
  return out;
}

inline AnonymityAssignment partition_speakers(const ProfileDataset& ds) {
  const auto profiles = speaker_profiles(ds);
  return partition_profiles(profiles);
}

inline double percent(std::size_t count, std::size_t n) {
  return n == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(n);
}

inline const std::vector<int>& default_thresholds() {
  static const std::vector<int> kDefault = {3, 5, 10};
  return kDefault;
}

struct ThresholdShare {
  int threshold = 0;
  std::size_t count = 0;  // speakers with k < threshold
  double pct = 0.0;

  bool operator==(const ThresholdShare&) const = default;
};

struct UniquenessReport {
  std::size_t n_speakers = 0;
  std::size_t unique_count = 0;
  double pct_unique = 0.0;
  std::vector<ThresholdShare> below;  // ascending thresholds
  double median_k = 0.0;              // a half-integer, exactly representable
  std::map<SpeakerId, std::size_t> per_speaker_k;

  bool operator==(const UniquenessReport&) const = default;
};

// Throws InvalidArgument unless thresholds are >= 2 and strictly increasing.
inline void check_thresholds(const std::vector<int>& thresholds) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (thresholds[i] < 2) {
      throw InvalidArgument("thresholds must be >= 2 (k = 1 is always reported)");
    }
    if (i > 0 && thresholds[i] <= thresholds[i - 1]) {
      throw InvalidArgument("thresholds must be strictly increasing");
    }
  }
}

inline UniquenessReport uniqueness_report(
    const AnonymityAssignment& a,
    const std::vector<int>& thresholds = default_thresholds()) {
  check_thresholds(thresholds);
  if (a.k.empty()) throw EmptyDataset("no speakers to report on");

  UniquenessReport r;
  r.n_speakers = a.k.size();
  r.per_speaker_k = a.k;

  std::vector<std::size_t> ks;
  ks.reserve(a.k.size());
  for (const auto& [id, k] : a.k) ks.push_back(k);
  std::sort(ks.begin(), ks.end());

  r.unique_count = static_cast<std::size_t>(std::count(ks.begin(), ks.end(), 1u));
  r.pct_unique = percent(r.unique_count, r.n_speakers);
  for (int t : thresholds) {
    const auto count = static_cast<std::size_t>(
        std::lower_bound(ks.begin(), ks.end(), static_cast<std::size_t>(t)) - ks.begin());
    r.below.push_back({t, count, percent(count, r.n_speakers)});
  }
  const std::size_t n = ks.size();
  r.median_k = n % 2 == 1 ? static_cast<double>(ks[n / 2])
                          : (static_cast<double>(ks[n / 2 - 1]) +
                             static_cast<double>(ks[n / 2])) / 2.0;
  return r;
}

// --- per-speaker change of k between two labelings ---------------------------

enum class KDeltaMode {
  // worse: k_gt >= t and k_inf < t; better: k_gt < t and k_inf >= t.
  kThresholdCrossing,
  // sign of k_inf - k_gt, independent of any threshold.
  kRaw,
};

struct KDeltaRow {
  std::optional<int> threshold;  // empty in raw mode
  std::size_t worse = 0, unchanged = 0, better = 0;
  double pct_worse = 0.0, pct_unchanged = 0.0, pct_better = 0.0;

  bool operator==(const KDeltaRow&) const = default;
};

struct KPair {
  SpeakerId speaker;
  std::size_t k_gt = 0;
  std::size_t k_inferred = 0;

  bool operator==(const KPair&) const = default;
};

struct KDeltaReport {
  KDeltaMode mode = KDeltaMode::kThresholdCrossing;
  std::size_t n_speakers = 0;
  std::vector<KDeltaRow> rows;  // one per threshold; a single row in raw mode
  std::vector<KPair> pairs;     // speaker order

  bool operator==(const KDeltaReport&) const = default;
};

inline KDeltaReport k_delta(const AnonymityAssignment& gt,
                            const AnonymityAssignment& inferred,
                            const std::vector<int>& thresholds = default_thresholds(),
                            KDeltaMode mode = KDeltaMode::kThresholdCrossing) {
  if (gt.k.size() != inferred.k.size() ||
      !std::equal(gt.k.begin(), gt.k.end(), inferred.k.begin(),
                  [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw SpeakerSetMismatch("ground-truth and inferred assignments cover different speakers");
  }
  check_thresholds(thresholds);

  KDeltaReport r;
  r.mode = mode;
  r.n_speakers = gt.k.size();
  auto inf = inferred.k.begin();
  for (const auto& [id, k_gt] : gt.k) {
    r.pairs.push_back({id, k_gt, inf->second});
    ++inf;
  }

  auto finish = [&](KDeltaRow row) {
    row.pct_worse = percent(row.worse, r.n_speakers);
    row.pct_unchanged = percent(row.unchanged, r.n_speakers);
    row.pct_better = percent(row.better, r.n_speakers);
    r.rows.push_back(row);
  };

  if (mode == KDeltaMode::kRaw) {
    KDeltaRow row;
    for (const auto& p : r.pairs) {
      if (p.k_inferred < p.k_gt) {
        ++row.worse;
      } else if (p.k_inferred > p.k_gt) {
        ++row.better;
      } else {
        ++row.unchanged;
      }
    }
    finish(row);
    return r;
  }

  for (int t : thresholds) {
    const auto ut = static_cast<std::size_t>(t);
    KDeltaRow row;
    row.threshold = t;
    for (const auto& p : r.pairs) {
      if (p.k_gt >= ut && p.k_inferred < ut) {
        ++row.worse;
      } else if (p.k_gt < ut && p.k_inferred >= ut) {
        ++row.better;
      } else {
        ++row.unchanged;
      }
    }
    finish(row);
  }
  return r;
}

}  // namespace vprisk

#endif  // VPRISK_PARTITION_HPP_
