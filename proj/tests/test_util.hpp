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

// Generators and brute-force oracles shared by the test suites. The oracles
// deliberately avoid the library's hashing, sorting and matching code.

#ifndef VPRISK_TESTS_TEST_UTIL_HPP_
#define VPRISK_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "vprisk/vprisk.hpp"

namespace vprisk::testing {

inline std::string SpeakerName(std::size_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return "spk" + digits;
}

inline AttributeSchema MakeSchema(const std::vector<std::size_t>& level_counts) {
  AttributeSchema schema;
  for (std::size_t a = 0; a < level_counts.size(); ++a) {
    AttributeDef def{"attr" + std::to_string(a), {}};
    for (std::size_t l = 0; l < level_counts[a]; ++l) {
      def.levels.push_back("L" + std::to_string(l));
    }
    schema.attributes.push_back(std::move(def));
  }
  return schema;
}

// Gender 2, age 3, accent 29, profession 6 levels.
inline AttributeSchema VoxSchema() {
  AttributeSchema schema;
  schema.attributes.push_back({"gender", {"female", "male"}});
  schema.attributes.push_back({"age", {"young", "middle", "old"}});
  AttributeDef accent{"accent", {}};
  for (int i = 0; i < 29; ++i) accent.levels.push_back("accent_" + std::to_string(i));
  schema.attributes.push_back(std::move(accent));
  schema.attributes.push_back(
      {"profession", {"actor", "athlete", "journalist", "musician", "politician", "other"}});
  return schema;
}

// Random schema: 1..max_attrs attributes with 2..max_levels levels each.
inline AttributeSchema RandomSchema(std::mt19937_64& rng, std::size_t max_attrs,
                                    std::size_t max_levels) {
  std::uniform_int_distribution<std::size_t> attrs(1, max_attrs);
  std::uniform_int_distribution<std::size_t> levels(2, max_levels);
  std::vector<std::size_t> counts(attrs(rng));
  for (auto& c : counts) c = levels(rng);
  return MakeSchema(counts);
}

// Levels drawn from a skewed distribution so that collisions are common.
inline Profile RandomProfile(std::mt19937_64& rng, const AttributeSchema& schema) {
  std::vector<LevelIndex> values;
  for (std::size_t a = 0; a < schema.size(); ++a) {
    const std::size_t n = schema.level_count(a);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_int_distribution<std::size_t> cap(0, n - 1);
    values.push_back(static_cast<LevelIndex>(std::min(pick(rng), cap(rng))));
  }
  return Profile(std::move(values));
}

inline ProfileDataset SpeakerDataset(const AttributeSchema& schema,
                                     const std::vector<Profile>& profiles,
                                     const std::string& label = "test") {
  std::vector<ProfileRecord> records;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    records.push_back({SpeakerName(i), "u0", profiles[i]});
  }
  return ProfileDataset::Make(schema, std::move(records), {label, Granularity::kSpeaker});
}

// k per speaker by comparing every pair of raw value vectors.
inline std::vector<std::size_t> BruteForceK(const std::vector<Profile>& profiles) {
  std::vector<std::size_t> k(profiles.size(), 0);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    for (std::size_t j = 0; j < profiles.size(); ++j) {
      const auto a = profiles[i].values();
      const auto b = profiles[j].values();
      bool same = a.size() == b.size();
      for (std::size_t x = 0; same && x < a.size(); ++x) same = a[x] == b[x];
      k[i] += same;
    }
  }
  return k;
}

// Classes as sets of speaker indices: each speaker's class is the set of all
// speakers equal to it.
inline std::vector<std::vector<std::size_t>> BruteForceClasses(
    const std::vector<Profile>& profiles) {
  std::vector<std::vector<std::size_t>> classes;
  std::vector<bool> assigned(profiles.size(), false);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (assigned[i]) continue;
    std::vector<std::size_t> members;
    for (std::size_t j = i; j < profiles.size(); ++j) {
      const auto a = profiles[i].values();
      const auto b = profiles[j].values();
      bool same = true;
      for (std::size_t x = 0; same && x < a.size(); ++x) same = a[x] == b[x];
      if (same) {
        members.push_back(j);
        assigned[j] = true;
      }
    }
    classes.push_back(std::move(members));
  }
  return classes;
}

struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Expected attack error by walking every joint outcome of the attacker's
// choices. Targets and references are index-aligned with `truth_ref[i]` the
// index of target i's true reference.
inline Rational ExhaustiveAttackError(const std::vector<Profile>& targets,
                                      const std::vector<Profile>& references,
                                      const std::vector<std::size_t>& truth_ref) {
  std::vector<std::vector<std::size_t>> matches(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    for (std::size_t r = 0; r < references.size(); ++r) {
      if (targets[t] == references[r]) matches[t].push_back(r);
    }
  }
  std::uint64_t outcomes = 1;
  for (const auto& m : matches) outcomes *= std::max<std::size_t>(1, m.size());

  std::uint64_t total_failures = 0;
  std::vector<std::size_t> choice(targets.size(), 0);
  for (std::uint64_t o = 0; o < outcomes; ++o) {
    std::uint64_t rest = o;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const std::size_t m = std::max<std::size_t>(1, matches[t].size());
      choice[t] = rest % m;
      rest /= m;
    }
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const bool success =
          !matches[t].empty() && matches[t][choice[t]] == truth_ref[t];
      total_failures += !success;
    }
  }
  return {total_failures, outcomes * targets.size()};
}

// 72 speakers with class sizes 28x1, 6x2, 1x3, 1x4, 1x5, 2x10 over the
// four-attribute schema. Class c gets a distinct profile.
inline std::vector<Profile> SpectrumProfiles() {
  std::vector<std::size_t> sizes;
  for (int i = 0; i < 28; ++i) sizes.push_back(1);
  for (int i = 0; i < 6; ++i) sizes.push_back(2);
  sizes.insert(sizes.end(), {3, 4, 5, 10, 10});
  std::vector<Profile> profiles;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    const Profile p({static_cast<LevelIndex>(c % 2), static_cast<LevelIndex>(c % 3),
                     static_cast<LevelIndex>(c % 29), static_cast<LevelIndex>(c / 29)});
    for (std::size_t i = 0; i < sizes[c]; ++i) profiles.push_back(p);
  }
  return profiles;
}

inline std::vector<SpeakerProfile> Named(const std::vector<Profile>& profiles,
                                  const std::string& prefix = "") {
  std::vector<SpeakerProfile> out;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    out.emplace_back(prefix + SpeakerName(i), profiles[i]);
  }
  return out;
}

struct RandomInstance {
  std::vector<Profile> targets;
  std::vector<Profile> references;
  std::vector<std::size_t> truth;  // target i -> reference index
  AttributeSchema schema;
};

// Small instances: up to 8 targets, references drawn so match sets stay
// within 4; some targets get a perturbed profile so they can miss.
inline RandomInstance MakeSmallInstance(std::mt19937_64& rng) {
  RandomInstance ri;
  ri.schema = MakeSchema({3, 2});
  const std::size_t n_refs = 2 + rng() % 8;
  std::vector<std::size_t> per_profile(6, 0);
  while (ri.references.size() < n_refs) {
    const Profile p({static_cast<LevelIndex>(rng() % 3), static_cast<LevelIndex>(rng() % 2)});
    auto& count = per_profile[p[0] * 2 + p[1]];
    if (count == 4) continue;
    ++count;
    ri.references.push_back(p);
  }
  std::vector<std::size_t> refs(n_refs);
  for (std::size_t i = 0; i < n_refs; ++i) refs[i] = i;
  std::shuffle(refs.begin(), refs.end(), rng);
  const std::size_t n_targets = 1 + rng() % std::min<std::size_t>(8, n_refs);
  for (std::size_t t = 0; t < n_targets; ++t) {
    ri.truth.push_back(refs[t]);
    Profile p = ri.references[refs[t]];
    if (rng() % 4 == 0) {
      p = Profile({static_cast<LevelIndex>((p[0] + 1) % 3), p[1]});
    }
    ri.targets.push_back(p);
  }
  return ri;
}

inline AttackInstance ToInstance(const RandomInstance& ri) {
  std::map<SpeakerId, SpeakerId> truth;
  for (std::size_t t = 0; t < ri.targets.size(); ++t) {
    truth["t" + SpeakerName(t)] = "r" + SpeakerName(ri.truth[t]);
  }
  return AttackInstance::FromProfiles(Named(ri.targets, "t"), Named(ri.references, "r"), truth,
                                      ri.schema);
}

}  // namespace vprisk::testing

#endif  // VPRISK_TESTS_TEST_UTIL_HPP_
