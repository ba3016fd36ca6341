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

// Speaker-level profiles from utterance-level data, and the
// single-utterance resampling protocol.

#ifndef VPRISK_PROFILE_BUILD_HPP_
#define VPRISK_PROFILE_BUILD_HPP_

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "vprisk/dataset.hpp"
#include "vprisk/errors.hpp"
#include "vprisk/random.hpp"
#include "vprisk/schema.hpp"

namespace vprisk {

namespace detail {

inline DatasetMeta SpeakerMeta(const ProfileDataset& ds) {
  DatasetMeta meta = ds.meta();
  meta.granularity = Granularity::kSpeaker;
  return meta;
}

inline std::uint64_t HashId(std::string_view id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Averages each speaker's posterior vectors per attribute and takes the
// argmax. The speaker's single output record keeps the first utterance id.
inline ProfileDataset aggregate_posterior_mean(const ProfileDataset& ds) {
  if (ds.kind() != PayloadKind::kPosteriors) {
    throw GranularityError("posterior averaging needs a posterior dataset");
  }
  const auto& schema = ds.schema();
  std::vector<ProfileRecord> out;
  for (auto group : ds.by_speaker()) {
    std::vector<LevelIndex> values(schema.size());
    for (std::size_t a = 0; a < schema.size(); ++a) {
      std::vector<double> mean(schema.level_count(a), 0.0);
      for (const auto& r : group) {
        const auto& v = r.posteriors()[a];
        for (std::size_t l = 0; l < mean.size(); ++l) mean[l] += v[l];
      }
      for (double& x : mean) x /= static_cast<double>(group.size());
      values[a] = argmax_index(mean);
    }
    out.push_back({group.front().speaker_id, group.front().utterance_id,
                   Profile(std::move(values))});
  }
  return ProfileDataset::Make(schema, std::move(out), detail::SpeakerMeta(ds));
}

// Most frequent level per attribute; lowest level index wins ties.
inline ProfileDataset aggregate_majority(const ProfileDataset& ds) {
  if (ds.kind() != PayloadKind::kLabels) {
    throw GranularityError("majority vote needs a label dataset");
  }
  const auto& schema = ds.schema();
  std::vector<ProfileRecord> out;
  for (auto group : ds.by_speaker()) {
    std::vector<LevelIndex> values(schema.size());
    for (std::size_t a = 0; a < schema.size(); ++a) {
      std::vector<std::size_t> counts(schema.level_count(a), 0);
      for (const auto& r : group) ++counts[r.labels()[a]];
      LevelIndex best = 0;
      for (std::size_t l = 1; l < counts.size(); ++l) {
        if (counts[l] > counts[best]) best = static_cast<LevelIndex>(l);
      }
      values[a] = best;
    }
    out.push_back({group.front().speaker_id, group.front().utterance_id,
                   Profile(std::move(values))});
  }
  return ProfileDataset::Make(schema, std::move(out), detail::SpeakerMeta(ds));
}

// Posterior mean for posterior datasets, majority vote for label datasets.
inline ProfileDataset aggregate_to_speaker(const ProfileDataset& ds) {
  if (ds.granularity() == Granularity::kSpeaker && ds.kind() == PayloadKind::kLabels) {
    return ds;
  }
  return ds.kind() == PayloadKind::kPosteriors ? aggregate_posterior_mean(ds)
                                               : aggregate_majority(ds);
}

// Per-record argmax of a posterior dataset; label datasets pass through.
inline ProfileDataset to_labels(const ProfileDataset& ds) {
  if (ds.kind() == PayloadKind::kLabels) return ds;
  std::vector<ProfileRecord> out;
  out.reserve(ds.size());
  for (const auto& r : ds.records()) {
    out.push_back({r.speaker_id, r.utterance_id, argmax_profile(r.posteriors(), ds.schema())});
  }
  return ProfileDataset::Make(ds.schema(), std::move(out), ds.meta());
}

// Speaker-level copy keyed by speaker alone (utterance id "*"), so that
// speaker-level labelings built from different utterances line up.
inline ProfileDataset rekey_by_speaker(const ProfileDataset& ds) {
  if (ds.granularity() != Granularity::kSpeaker) {
    throw GranularityError("rekeying needs a speaker-level dataset");
  }
  std::vector<ProfileRecord> out = ds.records();
  for (auto& r : out) r.utterance_id = "*";
  return ProfileDataset::Make(ds.schema(), std::move(out), ds.meta());
}

struct ResamplePlan {
  int runs = 10;
  std::uint64_t master_seed = 0;

  std::uint64_t run_seed(int run) const {
    return derive_seed(master_seed, SeedDomain::kResampleRun,
                       static_cast<std::uint64_t>(run));
  }
  std::vector<std::uint64_t> per_run_seeds() const {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < runs; ++i) seeds.push_back(run_seed(i));
    return seeds;
  }
};

// Each run keeps one uniformly drawn utterance per speaker. Runs are
// independent. The draw for a speaker depends only on the run seed, the
// speaker id and its utterance count, so reusing one plan across conditions
// with the same utterance inventory yields paired samples.
inline std::vector<ProfileDataset> resample_single(const ProfileDataset& ds,
                                                   const ResamplePlan& plan) {
  if (plan.runs < 1) throw InvalidArgument("resampling needs at least one run");
  if (ds.granularity() == Granularity::kSpeaker) {
    throw GranularityError("resampling needs an utterance-level dataset");
  }
  const auto groups = ds.by_speaker();
  std::vector<ProfileDataset> runs;
  runs.reserve(static_cast<std::size_t>(plan.runs));
  for (int run = 0; run < plan.runs; ++run) {
    const std::uint64_t seed = plan.run_seed(run);
    std::vector<ProfileRecord> picked;
    picked.reserve(groups.size());
    for (auto group : groups) {
      SplitMix64 rng(mix64(seed ^ detail::HashId(group.front().speaker_id)));
      picked.push_back(group[uniform_index(rng, group.size())]);
    }
    runs.push_back(ProfileDataset::Make(ds.schema(), std::move(picked), ds.meta()));
  }
  return runs;
}

}  // namespace vprisk

#endif  // VPRISK_PROFILE_BUILD_HPP_
