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

// Synthetic attribute-classifier error: labels pushed through per-attribute
// confusion matrices.

#ifndef VPRISK_CHANNEL_HPP_
#define VPRISK_CHANNEL_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vprisk/dataset.hpp"
#include "vprisk/errors.hpp"
#include "vprisk/profile_build.hpp"
#include "vprisk/random.hpp"
#include "vprisk/schema.hpp"

namespace vprisk {

enum class ChannelMode {
  kIndependent,        // a fresh draw for every record and attribute
  kSpeakerConsistent,  // one draw per (speaker, attribute), reused
};

inline const char* to_string(ChannelMode m) {
  return m == ChannelMode::kIndependent ? "independent" : "speaker_consistent";
}

inline ChannelMode parse_channel_mode(const std::string& s) {
  if (s == "independent") return ChannelMode::kIndependent;
  if (s == "speaker_consistent") return ChannelMode::kSpeakerConsistent;
  throw InvalidArgument("unknown channel mode '" + s + "'");
}

using ConfusionMatrix = std::vector<std::vector<double>>;

// matrices[a][true][pred] = P(pred | true) for attribute a, rows stochastic.
class ConfusionChannel {
 public:
  static ConfusionChannel Make(const AttributeSchema& schema,
                               std::vector<ConfusionMatrix> matrices,
                               ChannelMode mode) {
    if (matrices.size() != schema.size()) {
      throw DimensionMismatch("channel has " + std::to_string(matrices.size()) +
                              " matrices, schema has " + std::to_string(schema.size()) +
                              " attributes");
    }
    for (std::size_t a = 0; a < matrices.size(); ++a) {
      const auto& name = schema.attributes[a].name;
      const std::size_t levels = schema.level_count(a);
      if (matrices[a].size() != levels) {
        throw DimensionMismatch("matrix for '" + name + "' must have " +
                                std::to_string(levels) + " rows");
      }
      for (std::size_t row = 0; row < levels; ++row) {
        if (matrices[a][row].size() != levels) {
          throw DimensionMismatch("matrix for '" + name + "' must be square");
        }
        matrices[a][row] = normalize_distribution(
            std::move(matrices[a][row]), kPosteriorTolerance,
            name + "[" + std::to_string(row) + "]");
      }
    }
    ConfusionChannel ch;
    ch.matrices_ = std::move(matrices);
    ch.mode_ = mode;
    return ch;
  }

  static ConfusionMatrix Identity(std::size_t levels) {
    ConfusionMatrix m(levels, std::vector<double>(levels, 0.0));
    for (std::size_t i = 0; i < levels; ++i) m[i][i] = 1.0;
    return m;
  }

  const std::vector<ConfusionMatrix>& matrices() const noexcept { return matrices_; }
  ChannelMode mode() const noexcept { return mode_; }

 private:
  ConfusionChannel() = default;

  std::vector<ConfusionMatrix> matrices_;
  ChannelMode mode_ = ChannelMode::kIndependent;
};

// Diagonal = accuracy, the remaining mass spread evenly over wrong levels.
// Attributes absent from `accuracy` get the identity matrix.
inline ConfusionChannel channel_from_accuracy(const AttributeSchema& schema,
                                              const std::map<std::string, double>& accuracy,
                                              ChannelMode mode = ChannelMode::kIndependent) {
  for (const auto& [name, acc] : accuracy) {
    if (!schema.attribute_index(name)) {
      throw InvalidArgument("accuracy given for unknown attribute '" + name + "'");
    }
  }
  std::vector<ConfusionMatrix> matrices;
  for (const auto& def : schema.attributes) {
    const std::size_t levels = def.levels.size();
    auto it = accuracy.find(def.name);
    if (it == accuracy.end()) {
      matrices.push_back(ConfusionChannel::Identity(levels));
      continue;
    }
    const double acc = it->second;
    const double chance = 1.0 / static_cast<double>(levels);
    if (!(acc >= chance - 1e-12 && acc <= 1.0)) {
      throw AccuracyOutOfRange("accuracy " + std::to_string(acc) + " for '" + def.name +
                               "' is outside [1/" + std::to_string(levels) + ", 1]");
    }
    const double off = (1.0 - acc) / static_cast<double>(levels - 1);
    ConfusionMatrix m(levels, std::vector<double>(levels, off));
    for (std::size_t i = 0; i < levels; ++i) m[i][i] = acc;
    matrices.push_back(std::move(m));
  }
  return ConfusionChannel::Make(schema, std::move(matrices), mode);
}

// Channel file: {"mode": "independent" | "speaker_consistent",
//                "matrices": {"<attribute>": [[...], ...], ...}}
// Attributes without a matrix pass through unchanged.
inline ConfusionChannel channel_from_json(const nlohmann::json& doc,
                                          const AttributeSchema& schema) {
  if (!doc.is_object()) throw InvalidArgument("channel document must be an object");
  const ChannelMode mode = parse_channel_mode(doc.value("mode", std::string("independent")));
  std::map<std::string, ConfusionMatrix> given;
  if (doc.contains("matrices")) {
    if (!doc["matrices"].is_object()) {
      throw InvalidArgument("'matrices' must map attribute names to matrices");
    }
    for (const auto& [name, m] : doc["matrices"].items()) {
      if (!schema.attribute_index(name)) {
        throw InvalidArgument("matrix given for unknown attribute '" + name + "'");
      }
      try {
        given[name] = m.get<ConfusionMatrix>();
      } catch (const nlohmann::json::exception&) {
        throw InvalidArgument("matrix for '" + name + "' must be an array of number arrays");
      }
    }
  }
  std::vector<ConfusionMatrix> matrices;
  for (const auto& def : schema.attributes) {
    auto it = given.find(def.name);
    matrices.push_back(it != given.end() ? it->second
                                         : ConfusionChannel::Identity(def.levels.size()));
  }
  return ConfusionChannel::Make(schema, std::move(matrices), mode);
}

inline ConfusionChannel load_channel(const std::filesystem::path& path,
                                     const AttributeSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open channel file " + path.string());
  try {
    return channel_from_json(nlohmann::json::parse(in), schema);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("channel file " + path.string() + " is not valid JSON: " + e.what());
  }
}

inline nlohmann::json channel_to_json(const ConfusionChannel& ch,
                                      const AttributeSchema& schema) {
  nlohmann::json matrices = nlohmann::json::object();
  for (std::size_t a = 0; a < schema.size(); ++a) {
    matrices[schema.attributes[a].name] = ch.matrices()[a];
  }
  return {{"mode", to_string(ch.mode())}, {"matrices", std::move(matrices)}};
}

// Noisy copy of a label dataset. In independent mode the generator of a
// record is seeded from (seed, speaker/utterance key); in speaker-consistent
// mode from (seed, speaker), and the one predicted level per attribute is
// drawn from the confusion row of the speaker's majority true level, so
// every utterance of a speaker carries the same noisy label.
inline ProfileDataset apply_channel(const ProfileDataset& ds, const ConfusionChannel& ch,
                                    std::uint64_t seed) {
  if (ds.kind() != PayloadKind::kLabels) {
    throw InvalidArgument("the channel applies to label datasets");
  }
  const auto& schema = ds.schema();
  if (ch.matrices().size() != schema.size()) {
    throw DimensionMismatch("channel does not match the dataset schema");
  }
  for (std::size_t a = 0; a < schema.size(); ++a) {
    if (ch.matrices()[a].size() != schema.level_count(a)) {
      throw DimensionMismatch("channel matrix for '" + schema.attributes[a].name +
                              "' does not match its level count");
    }
  }

  std::vector<ProfileRecord> out;
  out.reserve(ds.size());
  if (ch.mode() == ChannelMode::kIndependent) {
    for (const auto& r : ds.records()) {
      SplitMix64 rng(derive_seed(seed, SeedDomain::kChannelRecord, detail::HashId(r.key())));
      std::vector<LevelIndex> values(schema.size());
      for (std::size_t a = 0; a < schema.size(); ++a) {
        values[a] = static_cast<LevelIndex>(
            sample_categorical(rng, ch.matrices()[a][r.labels()[a]]));
      }
      out.push_back({r.speaker_id, r.utterance_id, Profile(std::move(values))});
    }
  } else {
    const auto majority = aggregate_majority(ds);
    for (auto group : ds.by_speaker()) {
      const auto& speaker = group.front().speaker_id;
      const Profile& truth = majority.records_of(speaker).front().labels();
      SplitMix64 rng(derive_seed(seed, SeedDomain::kChannelSpeaker, detail::HashId(speaker)));
      std::vector<LevelIndex> values(schema.size());
      for (std::size_t a = 0; a < schema.size(); ++a) {
        values[a] = static_cast<LevelIndex>(
            sample_categorical(rng, ch.matrices()[a][truth[a]]));
      }
      const Profile noisy(std::move(values));
      for (const auto& r : group) out.push_back({r.speaker_id, r.utterance_id, noisy});
    }
  }
  return ProfileDataset::Make(schema, std::move(out), ds.meta());
}

}  // namespace vprisk

#endif  // VPRISK_CHANNEL_HPP_
