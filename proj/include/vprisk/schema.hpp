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

// Attribute schemas and the two profile payloads (hard labels and
// per-attribute posteriors) that every other module operates on.

#ifndef VPRISK_SCHEMA_HPP_
#define VPRISK_SCHEMA_HPP_

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vprisk/errors.hpp"

namespace vprisk {

using LevelIndex = std::uint32_t;

struct AttributeDef {
  std::string name;
  std::vector<std::string> levels;

  bool operator==(const AttributeDef&) const = default;
};

// Ordered categorical attributes. Attribute order and level order are part of
// the schema's identity: they fix column order in files and tie-breaking.
struct AttributeSchema {
  std::vector<AttributeDef> attributes;

  std::size_t size() const noexcept { return attributes.size(); }
  std::size_t level_count(std::size_t attr) const {
    return attributes.at(attr).levels.size();
  }

  std::optional<std::size_t> attribute_index(std::string_view name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i) {
      if (attributes[i].name == name) return i;
    }
    return std::nullopt;
  }

  std::optional<LevelIndex> level_index(std::size_t attr,
                                        std::string_view level) const {
    const auto& levels = attributes.at(attr).levels;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (levels[i] == level) return static_cast<LevelIndex>(i);
    }
    return std::nullopt;
  }

  bool operator==(const AttributeSchema&) const = default;
};

namespace detail {

inline bool IsNameChar(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
         (c >= '0' && c <= '9') || c == '_' || c == ' ' || c == '-';
}

inline bool IsValidName(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), IsNameChar);
}

}  // namespace detail

// Throws SchemaError naming the first violated rule.
inline void validate_schema(const AttributeSchema& schema) {
  if (schema.attributes.empty()) {
    throw SchemaError("schema has no attributes");
  }
  std::set<std::string, std::less<>> names;
  for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
    const auto& def = schema.attributes[a];
    const std::string where = "attribute #" + std::to_string(a + 1);
    if (def.name.empty()) throw SchemaError(where + " has an empty name");
    if (!detail::IsValidName(def.name)) {
      throw SchemaError("attribute '" + def.name +
                        "' has characters outside [A-Za-z0-9_ -]");
    }
    if (def.name == "speaker_id" || def.name == "utterance_id") {
      throw SchemaError("attribute name '" + def.name + "' is reserved");
    }
    if (!names.insert(def.name).second) {
      throw SchemaError("duplicate attribute name '" + def.name + "'");
    }
    if (def.levels.empty()) {
      throw SchemaError("attribute '" + def.name + "' has an empty level set");
    }
    if (def.levels.size() < 2) {
      throw SchemaError("attribute '" + def.name + "' has fewer than 2 levels");
    }
    std::set<std::string, std::less<>> seen;
    for (const auto& level : def.levels) {
      if (level.empty()) {
        throw SchemaError("attribute '" + def.name + "' has an empty level name");
      }
      if (!detail::IsValidName(level)) {
        throw SchemaError("level '" + level + "' of attribute '" + def.name +
                          "' has characters outside [A-Za-z0-9_ -]");
      }
      if (!seen.insert(level).second) {
        throw SchemaError("duplicate level '" + level + "' in attribute '" +
                          def.name + "'");
      }
    }
  }
}

inline AttributeSchema schema_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("attributes") ||
      !doc["attributes"].is_array()) {
    throw SchemaError("schema document must be an object with an 'attributes' array");
  }
  AttributeSchema schema;
  for (const auto& entry : doc["attributes"]) {
    if (!entry.is_object() || !entry.contains("name") ||
        !entry["name"].is_string() || !entry.contains("levels") ||
        !entry["levels"].is_array()) {
      throw SchemaError("each attribute needs a string 'name' and a 'levels' array");
    }
    AttributeDef def;
    def.name = entry["name"].get<std::string>();
    for (const auto& level : entry["levels"]) {
      if (!level.is_string()) {
        throw SchemaError("levels of '" + def.name + "' must be strings");
      }
      def.levels.push_back(level.get<std::string>());
    }
    schema.attributes.push_back(std::move(def));
  }
  validate_schema(schema);
  return schema;
}

inline nlohmann::json schema_to_json(const AttributeSchema& schema) {
  nlohmann::json attrs = nlohmann::json::array();
  for (const auto& def : schema.attributes) {
    attrs.push_back({{"name", def.name}, {"levels", def.levels}});
  }
  return {{"attributes", std::move(attrs)}};
}

inline AttributeSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open schema file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("schema file " + path.string() + " is not valid JSON: " +
                      e.what());
  }
  return schema_from_json(doc);
}

// One level index per schema attribute. Equality is exact match on every
// attribute; the ordering is lexicographic over indices.
class Profile {
 public:
  Profile() = default;
  explicit Profile(std::vector<LevelIndex> values) : values_(std::move(values)) {}

  std::span<const LevelIndex> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  LevelIndex operator[](std::size_t i) const { return values_[i]; }

  // Copy with one more attribute appended.
  Profile extended(LevelIndex value) const {
    auto values = values_;
    values.push_back(value);
    return Profile(std::move(values));
  }

  bool operator==(const Profile&) const = default;
  auto operator<=>(const Profile&) const = default;

 private:
  std::vector<LevelIndex> values_;
};

struct ProfileHash {
  std::size_t operator()(const Profile& p) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (LevelIndex v : p.values()) {
      h ^= v;
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

// Throws DimensionMismatch if `p` does not fit `schema`.
inline void check_profile(const Profile& p, const AttributeSchema& schema) {
  if (p.size() != schema.size()) {
    throw DimensionMismatch("profile has " + std::to_string(p.size()) +
                            " values, schema has " +
                            std::to_string(schema.size()) + " attributes");
  }
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p[a] >= schema.level_count(a)) {
      throw DimensionMismatch("level index " + std::to_string(p[a]) +
                              " out of range for attribute '" +
                              schema.attributes[a].name + "'");
    }
  }
}

inline constexpr double kPosteriorTolerance = 1e-9;

// Checks one probability vector and rescales it to sum to exactly one (up to
// floating point). Throws DistributionError when an entry is negative or not
// finite, or when the sum is further than `tolerance` from one.
inline std::vector<double> normalize_distribution(std::vector<double> v,
                                                  double tolerance,
                                                  const std::string& key = "",
                                                  std::size_t line = 0) {
  if (v.empty()) throw DistributionError(key, "empty probability vector", line);
  double sum = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw DistributionError(key, "non-finite probability", line);
    }
    if (x < 0.0) throw DistributionError(key, "negative probability", line);
    sum += x;
  }
  if (std::fabs(sum - 1.0) > tolerance) {
    throw DistributionError(
        key, "probabilities sum to " + std::to_string(sum) + ", not 1", line);
  }
  for (double& x : v) x /= sum;
  return v;
}

// One probability vector per attribute, each summing to one.
class PosteriorProfile {
 public:
  PosteriorProfile() = default;

  // Validates against `schema` and renormalizes vectors within `tolerance`.
  static PosteriorProfile Make(std::vector<std::vector<double>> dists,
                               const AttributeSchema& schema,
                               double tolerance = kPosteriorTolerance,
                               const std::string& key = "",
                               std::size_t line = 0) {
    if (dists.size() != schema.size()) {
      throw DimensionMismatch("posterior has " + std::to_string(dists.size()) +
                              " vectors, schema has " +
                              std::to_string(schema.size()) + " attributes");
    }
    for (std::size_t a = 0; a < dists.size(); ++a) {
      if (dists[a].size() != schema.level_count(a)) {
        throw DimensionMismatch("posterior for '" + schema.attributes[a].name +
                                "' has " + std::to_string(dists[a].size()) +
                                " entries, expected " +
                                std::to_string(schema.level_count(a)));
      }
      dists[a] = normalize_distribution(std::move(dists[a]), tolerance, key, line);
    }
    PosteriorProfile p;
    p.dists_ = std::move(dists);
    return p;
  }

  const std::vector<std::vector<double>>& distributions() const noexcept {
    return dists_;
  }
  std::size_t size() const noexcept { return dists_.size(); }
  const std::vector<double>& operator[](std::size_t a) const { return dists_[a]; }

  bool operator==(const PosteriorProfile&) const = default;

 private:
  std::vector<std::vector<double>> dists_;
};

// Index of the largest entry; the lowest index wins ties.
inline LevelIndex argmax_index(std::span<const double> v) {
  LevelIndex best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<LevelIndex>(i);
  }
  return best;
}

inline Profile argmax_profile(const PosteriorProfile& p,
                              const AttributeSchema& schema) {
  if (p.size() != schema.size()) {
    throw DimensionMismatch("posterior/schema attribute count mismatch");
  }
  std::vector<LevelIndex> values;
  values.reserve(p.size());
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p[a].size() != schema.level_count(a)) {
      throw DimensionMismatch("posterior for '" + schema.attributes[a].name +
                              "' does not match its level count");
    }
    values.push_back(argmax_index(p[a]));
  }
  return Profile(std::move(values));
}

}  // namespace vprisk

template <>
struct std::hash<vprisk::Profile> : vprisk::ProfileHash {};

#endif  // VPRISK_SCHEMA_HPP_
