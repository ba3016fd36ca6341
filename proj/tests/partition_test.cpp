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

#include "vprisk/partition.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "test_util.hpp"

namespace vprisk {
namespace {

using testing::SpeakerDataset;
using testing::SpeakerName;

std::vector<std::size_t> KValues(const AnonymityAssignment& a, std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(a.k.at(SpeakerName(i)));
  return out;
}

TEST(PartitionSpeakersTest, IdenticalProfilesFormOneClass) {
  const auto schema = testing::MakeSchema({2, 3});
  const Profile p({1, 2});
  const auto a = partition_speakers(SpeakerDataset(schema, {p, p, p}));
  ASSERT_EQ(a.classes.size(), 1u);
  EXPECT_EQ(a.classes[0].members.size(), 3u);
  EXPECT_EQ(KValues(a, 3), (std::vector<std::size_t>{3, 3, 3}));
}

TEST(PartitionSpeakersTest, MixedClassSizes) {
  const auto schema = testing::MakeSchema({3});
  const Profile a({0}), b({1}), c({2});
  const auto result = partition_speakers(SpeakerDataset(schema, {a, a, b, b, b, c}));
  EXPECT_EQ(KValues(result, 6), (std::vector<std::size_t>{2, 2, 3, 3, 3, 1}));
}

TEST(PartitionSpeakersTest, RejectsUtteranceLevelAndPosteriors) {
  const auto schema = testing::MakeSchema({2});
  std::vector<ProfileRecord> records = {{"s1", "u1", Profile({0})}, {"s1", "u2", Profile({1})}};
  const auto utt = ProfileDataset::Make(schema, records, {"x", Granularity::kUtterance});
  EXPECT_THROW(partition_speakers(utt), GranularityError);

  std::vector<ProfileRecord> post = {
      {"s1", "u1", PosteriorProfile::Make({{0.5, 0.5}}, schema)}};
  const auto pds = ProfileDataset::Make(schema, post, {"x", Granularity::kSpeaker});
  EXPECT_THROW(partition_speakers(pds), GranularityError);
}

TEST(PartitionSpeakersTest, MatchesAllPairsOracle) {
  std::mt19937_64 rng(20240601);
  for (int iter = 0; iter < 100; ++iter) {
    const auto schema = testing::RandomSchema(rng, 4, 29);
    const std::size_t n = 1 + rng() % 200;
    std::vector<Profile> profiles;
    for (std::size_t i = 0; i < n; ++i) profiles.push_back(testing::RandomProfile(rng, schema));
    const auto a = partition_speakers(SpeakerDataset(schema, profiles));
    EXPECT_EQ(KValues(a, n), testing::BruteForceK(profiles));

    const auto oracle = testing::BruteForceClasses(profiles);
    ASSERT_EQ(a.classes.size(), oracle.size());
    std::size_t total = 0, squares = 0, k_sum = 0;
    for (const auto& cls : oracle) {
      const auto& rep = a.classes;
      auto it = std::find_if(rep.begin(), rep.end(), [&](const EquivalenceClass& c) {
        return c.profile == profiles[cls.front()];
      });
      ASSERT_NE(it, rep.end());
      std::vector<SpeakerId> members;
      for (auto i : cls) members.push_back(SpeakerName(i));
      EXPECT_EQ(it->members, members);
      total += cls.size();
      squares += cls.size() * cls.size();
    }
    for (const auto& [id, k] : a.k) k_sum += k;
    EXPECT_EQ(total, n);
    EXPECT_EQ(squares, k_sum);
  }
}

TEST(PartitionSpeakersTest, AppendingAnAttributeNeverIncreasesK) {
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 200; ++iter) {
    const auto schema = testing::RandomSchema(rng, 3, 8);
    const std::size_t n = 1 + rng() % 150;
    std::vector<Profile> profiles;
    for (std::size_t i = 0; i < n; ++i) profiles.push_back(testing::RandomProfile(rng, schema));
    auto wider = schema;
    const std::size_t extra_levels = 2 + rng() % 5;
    wider.attributes.push_back({"extra", {}});
    for (std::size_t l = 0; l < extra_levels; ++l) {
      wider.attributes.back().levels.push_back("E" + std::to_string(l));
    }
    std::vector<Profile> extended;
    for (const auto& p : profiles) {
      extended.push_back(p.extended(static_cast<LevelIndex>(rng() % extra_levels)));
    }
    const auto before = partition_speakers(SpeakerDataset(schema, profiles));
    const auto after = partition_speakers(SpeakerDataset(wider, extended));
    for (const auto& [id, k] : after.k) EXPECT_LE(k, before.k.at(id));
  }
}

TEST(PartitionSpeakersTest, InvariantUnderLevelRelabelingAndRecordOrder) {
  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 50; ++iter) {
    const auto schema = testing::RandomSchema(rng, 4, 10);
    const std::size_t n = 1 + rng() % 100;
    std::vector<Profile> profiles;
    for (std::size_t i = 0; i < n; ++i) profiles.push_back(testing::RandomProfile(rng, schema));
    const auto base = partition_speakers(SpeakerDataset(schema, profiles));

    // Permute the level order of every attribute and remap indices.
    std::vector<std::vector<LevelIndex>> perm(schema.size());
    auto relabeled_schema = schema;
    for (std::size_t a = 0; a < schema.size(); ++a) {
      perm[a].resize(schema.level_count(a));
      for (std::size_t l = 0; l < perm[a].size(); ++l) perm[a][l] = static_cast<LevelIndex>(l);
      std::shuffle(perm[a].begin(), perm[a].end(), rng);
      for (std::size_t l = 0; l < perm[a].size(); ++l) {
        relabeled_schema.attributes[a].levels[perm[a][l]] = schema.attributes[a].levels[l];
      }
    }
    std::vector<ProfileRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<LevelIndex> v;
      for (std::size_t a = 0; a < schema.size(); ++a) v.push_back(perm[a][profiles[i][a]]);
      records.push_back({SpeakerName(i), "u0", Profile(v)});
    }
    std::shuffle(records.begin(), records.end(), rng);
    const auto relabeled = partition_speakers(ProfileDataset::Make(
        relabeled_schema, std::move(records), {"x", Granularity::kSpeaker}));
    EXPECT_EQ(relabeled.k, base.k);
  }
}

TEST(UniquenessReportTest, ClassSpectrumFixture) {
  const auto schema = testing::VoxSchema();
  const auto a = partition_speakers(SpeakerDataset(schema, testing::SpectrumProfiles()));
  const auto r = uniqueness_report(a, {3, 5, 10});
  EXPECT_EQ(r.n_speakers, 72u);
  EXPECT_EQ(r.unique_count, 28u);
  ASSERT_EQ(r.below.size(), 3u);
  EXPECT_EQ(r.below[0].count, 40u);
  EXPECT_EQ(r.below[1].count, 47u);
  EXPECT_EQ(r.below[2].count, 52u);
  EXPECT_NEAR(r.pct_unique, 38.9, 0.05);
  EXPECT_NEAR(r.below[0].pct, 55.6, 0.05);
  EXPECT_NEAR(r.below[1].pct, 65.3, 0.05);
  EXPECT_NEAR(r.below[2].pct, 72.2, 0.05);
  EXPECT_EQ(r.median_k, 2.0);
}

TEST(UniquenessReportTest, AllDistinctAndAllIdentical) {
  const auto schema = testing::MakeSchema({80});
  std::vector<Profile> distinct, same;
  for (LevelIndex i = 0; i < 72; ++i) {
    distinct.push_back(Profile({i}));
    same.push_back(Profile({0}));
  }
  const auto d = uniqueness_report(partition_speakers(SpeakerDataset(schema, distinct)));
  EXPECT_EQ(d.pct_unique, 100.0);
  EXPECT_EQ(d.median_k, 1.0);

  const auto s = uniqueness_report(partition_speakers(SpeakerDataset(schema, same)));
  EXPECT_EQ(s.pct_unique, 0.0);
  for (const auto& b : s.below) EXPECT_EQ(b.pct, 0.0);
  EXPECT_EQ(s.median_k, 72.0);
}

TEST(UniquenessReportTest, EvenCountMedianAveragesMiddleValues) {
  const auto schema = testing::MakeSchema({4});
  // k values {1, 2, 2, 3, 3, 3}: middle pair (2, 3) -> 2.5
  const auto r = uniqueness_report(partition_speakers(SpeakerDataset(
      schema, {Profile({0}), Profile({1}), Profile({1}), Profile({2}), Profile({2}),
               Profile({2})})));
  EXPECT_EQ(r.median_k, 2.5);
}

TEST(UniquenessReportTest, RejectsBadThresholds) {
  AnonymityAssignment a;
  a.k["s"] = 1;
  EXPECT_THROW(uniqueness_report(a, {1, 3}), InvalidArgument);
  EXPECT_THROW(uniqueness_report(a, {5, 3}), InvalidArgument);
}

TEST(UniquenessReportTest, PercentagesAreMultiplesOfHundredOverN) {
  std::mt19937_64 rng(42);
  for (int iter = 0; iter < 200; ++iter) {
    const auto schema = testing::RandomSchema(rng, 3, 6);
    const std::size_t n = 1 + rng() % 200;
    std::vector<Profile> profiles;
    for (std::size_t i = 0; i < n; ++i) profiles.push_back(testing::RandomProfile(rng, schema));
    const auto r = uniqueness_report(partition_speakers(SpeakerDataset(schema, profiles)),
                                     {2, 3, 5, 10, 20});
    auto check = [&](double pct, std::size_t count) {
      const double units = pct * static_cast<double>(n) / 100.0;
      EXPECT_NEAR(units, std::round(units), 1e-9);
      EXPECT_EQ(static_cast<std::size_t>(std::llround(units)), count);
    };
    check(r.pct_unique, r.unique_count);
    for (std::size_t i = 0; i < r.below.size(); ++i) {
      check(r.below[i].pct, r.below[i].count);
      if (i > 0) {
        EXPECT_GE(r.below[i].pct, r.below[i - 1].pct);
      }
    }
    // k = 1 is the k < 2 row.
    EXPECT_EQ(r.below[0].count, r.unique_count);
  }
}

AnonymityAssignment Assign(std::vector<std::size_t> ks) {
  AnonymityAssignment a;
  for (std::size_t i = 0; i < ks.size(); ++i) a.k[SpeakerName(i)] = ks[i];
  return a;
}

TEST(KDeltaTest, IdenticalAssignmentsAreUnchanged) {
  const auto a = Assign({1, 3, 5, 12});
  const auto r = k_delta(a, a);
  for (const auto& row : r.rows) EXPECT_EQ(row.pct_unchanged, 100.0);
}

TEST(KDeltaTest, ThresholdCrossing) {
  const auto r = k_delta(Assign({12, 12, 3}), Assign({4, 12, 3}), {10});
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_NEAR(r.rows[0].pct_worse, 100.0 / 3, 1e-12);
  EXPECT_NEAR(r.rows[0].pct_unchanged, 200.0 / 3, 1e-12);
  EXPECT_EQ(r.rows[0].pct_better, 0.0);
  EXPECT_EQ(r.pairs[0].k_gt, 12u);
  EXPECT_EQ(r.pairs[0].k_inferred, 4u);
}

TEST(KDeltaTest, RawModeUsesSignOfChange) {
  const auto r = k_delta(Assign({2}), Assign({5}), {3}, KDeltaMode::kRaw);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_FALSE(r.rows[0].threshold.has_value());
  EXPECT_EQ(r.rows[0].pct_better, 100.0);
}

TEST(KDeltaTest, PercentagesSumToHundred) {
  std::mt19937_64 rng(8);
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t n = 1 + rng() % 50;
    std::vector<std::size_t> g(n), f(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = 1 + rng() % 15;
      f[i] = 1 + rng() % 15;
    }
    for (auto mode : {KDeltaMode::kThresholdCrossing, KDeltaMode::kRaw}) {
      for (const auto& row : k_delta(Assign(g), Assign(f), {3, 5, 10}, mode).rows) {
        EXPECT_EQ(row.worse + row.unchanged + row.better, n);
        EXPECT_NEAR(row.pct_worse + row.pct_unchanged + row.pct_better, 100.0, 1e-9);
      }
    }
  }
}

TEST(KDeltaTest, SpeakerSetMismatch) {
  AnonymityAssignment other;
  other.k["zzz"] = 1;
  EXPECT_THROW(k_delta(Assign({1}), other), SpeakerSetMismatch);
}

}  // namespace
}  // namespace vprisk
