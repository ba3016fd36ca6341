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

// Classifier-style metrics on label datasets.

#ifndef VPRISK_METRICS_HPP_
#define VPRISK_METRICS_HPP_

#include <algorithm>
#include <string>
#include <vector>

#include "vprisk/dataset.hpp"
#include "vprisk/errors.hpp"

namespace vprisk {

enum class BaselineKind {
  kMajority,        // prior of the most frequent level
  kWeightedRandom,  // sum of squared priors
};

inline const char* to_string(BaselineKind k) {
  return k == BaselineKind::kMajority ? "majority" : "weighted_random";
}

inline BaselineKind parse_baseline_kind(const std::string& s) {
  if (s == "majority") return BaselineKind::kMajority;
  if (s == "weighted_random") return BaselineKind::kWeightedRandom;
  throw InvalidArgument("unknown baseline '" + s + "'");
}

// Level priors of one attribute over all records.
inline std::vector<double> level_priors(const ProfileDataset& ds, std::size_t attr) {
  if (ds.kind() != PayloadKind::kLabels) {
    throw InvalidArgument("priors need a label dataset");
  }
  std::vector<double> priors(ds.schema().level_count(attr), 0.0);
  for (const auto& r : ds.records()) priors[r.labels()[attr]] += 1.0;
  for (double& p : priors) p /= static_cast<double>(ds.size());
  return priors;
}

inline double baseline_from_priors(const std::vector<double>& priors, BaselineKind kind) {
  if (kind == BaselineKind::kMajority) {
    return *std::max_element(priors.begin(), priors.end());
  }
  double sum = 0.0;
  for (double p : priors) sum += p * p;
  return sum;
}

// One value per schema attribute.
inline std::vector<double> baseline(const ProfileDataset& truth, BaselineKind kind) {
  std::vector<double> out;
  for (std::size_t a = 0; a < truth.schema().size(); ++a) {
    out.push_back(baseline_from_priors(level_priors(truth, a), kind));
  }
  return out;
}

struct AttributeMetrics {
  std::string attribute;
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
  double baseline_majority = 0.0;
  double baseline_weighted_random = 0.0;

  bool operator==(const AttributeMetrics&) const = default;
};

struct MetricsTable {
  Granularity granularity = Granularity::kUtterance;
  std::size_t records = 0;
  std::vector<AttributeMetrics> rows;

  bool operator==(const MetricsTable&) const = default;
};

// Accuracy and support-weighted F1 for a predicted labeling against a
// reference labeling sharing the same record keys. Baselines come from the
// reference priors.
inline MetricsTable classification_metrics(const ProfileDataset& pred,
                                           const ProfileDataset& truth) {
  if (pred.kind() != PayloadKind::kLabels || truth.kind() != PayloadKind::kLabels) {
    throw InvalidArgument("metrics need label datasets");
  }
  if (!(pred.schema() == truth.schema())) {
    throw SchemaMismatch("predictions and truth use different schemas");
  }
  if (pred.size() != truth.size()) {
    throw KeyMismatch("predictions have " + std::to_string(pred.size()) +
                      " records, truth has " + std::to_string(truth.size()));
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto& p = pred.records()[i];
    const auto& t = truth.records()[i];
    if (p.speaker_id != t.speaker_id || p.utterance_id != t.utterance_id) {
      throw KeyMismatch("record " + p.key() + " has no counterpart " + t.key());
    }
  }

  const auto& schema = truth.schema();
  const double n = static_cast<double>(truth.size());
  MetricsTable table;
  table.granularity = truth.granularity();
  table.records = truth.size();
  for (std::size_t a = 0; a < schema.size(); ++a) {
    const std::size_t levels = schema.level_count(a);
    std::vector<double> tp(levels, 0.0), predicted(levels, 0.0), support(levels, 0.0);
    double correct = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const LevelIndex y = truth.records()[i].labels()[a];
      const LevelIndex y_hat = pred.records()[i].labels()[a];
      support[y] += 1.0;
      predicted[y_hat] += 1.0;
      if (y == y_hat) {
        tp[y] += 1.0;
        correct += 1.0;
      }
    }
    double f1 = 0.0;
    for (std::size_t l = 0; l < levels; ++l) {
      if (support[l] == 0.0) continue;
      const double precision = predicted[l] > 0.0 ? tp[l] / predicted[l] : 0.0;
      const double recall = tp[l] / support[l];
      const double f = precision + recall > 0.0
                           ? 2.0 * precision * recall / (precision + recall)
                           : 0.0;
      f1 += support[l] / n * f;
    }
    const auto priors = level_priors(truth, a);
    table.rows.push_back({schema.attributes[a].name, correct / n, f1,
                          baseline_from_priors(priors, BaselineKind::kMajority),
                          baseline_from_priors(priors, BaselineKind::kWeightedRandom)});
  }
  return table;
}

}  // namespace vprisk

#endif  // VPRISK_METRICS_HPP_
