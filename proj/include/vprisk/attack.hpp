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

// Exact-match re-identification attack: each target profile is matched
// against all reference profiles and the attacker picks uniformly among the
// matches. Computed in closed form (expected error) or by Monte Carlo.

#ifndef VPRISK_ATTACK_HPP_
#define VPRISK_ATTACK_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vprisk/dataset.hpp"
#include "vprisk/errors.hpp"
#include "vprisk/partition.hpp"
#include "vprisk/random.hpp"
#include "vprisk/schema.hpp"

namespace vprisk {

// Targets and references at speaker level, plus which reference identity is
// the correct answer for each target.
class AttackInstance {
 public:
  // An empty `truth` means identity: each target's answer is the reference
  // speaker with the same id.
  static AttackInstance Make(ProfileDataset targets, ProfileDataset references,
                             std::map<SpeakerId, SpeakerId> truth = {}) {
    const auto target_profiles = speaker_profiles(targets);
    const auto reference_profiles = speaker_profiles(references);
    if (!(targets.schema() == references.schema())) {
      throw SchemaMismatch("targets and references use different schemas");
    }
    std::set<SpeakerId> reference_ids;
    for (const auto& [id, p] : reference_profiles) reference_ids.insert(id);

    if (truth.empty()) {
      for (const auto& [id, p] : target_profiles) truth.emplace(id, id);
    }
    std::set<SpeakerId> used;
    for (const auto& [id, p] : target_profiles) {
      auto it = truth.find(id);
      if (it == truth.end()) {
        throw ValidationError(id, "target has no truth mapping");
      }
      if (!reference_ids.count(it->second)) {
        throw ValidationError(id, "true reference '" + it->second +
                                      "' is not among the references");
      }
      if (!used.insert(it->second).second) {
        throw ValidationError(id, "truth mapping is not injective ('" +
                                      it->second + "' used twice)");
      }
    }
    if (truth.size() != target_profiles.size()) {
      throw ValidationError("truth", "mapping names speakers that are not targets");
    }

    AttackInstance inst;
    inst.targets_ = target_profiles;
    inst.references_ = reference_profiles;
    inst.truth_ = std::move(truth);
    return inst;
  }

  // Convenience for in-memory instances.
  static AttackInstance FromProfiles(std::vector<SpeakerProfile> targets,
                                     std::vector<SpeakerProfile> references,
                                     std::map<SpeakerId, SpeakerId> truth,
                                     const AttributeSchema& schema) {
    auto to_dataset = [&](std::vector<SpeakerProfile> v, const char* label) {
      std::vector<ProfileRecord> records;
      for (auto& [id, p] : v) records.push_back({id, "0", std::move(p)});
      return ProfileDataset::Make(schema, std::move(records),
                                  {label, Granularity::kSpeaker});
    };
    return Make(to_dataset(std::move(targets), "targets"),
                to_dataset(std::move(references), "references"), std::move(truth));
  }

  const std::vector<SpeakerProfile>& targets() const noexcept { return targets_; }
  const std::vector<SpeakerProfile>& references() const noexcept { return references_; }
  const std::map<SpeakerId, SpeakerId>& truth() const noexcept { return truth_; }

 private:
  AttackInstance() = default;

  std::vector<SpeakerProfile> targets_;
  std::vector<SpeakerProfile> references_;
  std::map<SpeakerId, SpeakerId> truth_;
};

enum class AttackMode { kClosedForm, kMonteCarlo };

inline const char* to_string(AttackMode m) {
  return m == AttackMode::kClosedForm ? "closed_form" : "monte_carlo";
}

struct TargetOutcome {
  std::size_t match_set_size = 0;
  bool truth_in_matches = false;
  double success_prob = 0.0;  // 1/match_set_size or 0

  bool operator==(const TargetOutcome&) const = default;
};

struct AttackReport {
  AttackMode mode = AttackMode::kClosedForm;
  double error_rate = 0.0;
  std::map<SpeakerId, TargetOutcome> per_target;
  std::uint64_t trials = 0;   // Monte Carlo only
  std::uint64_t seed = 0;     // Monte Carlo only
  double std_error = 0.0;     // Monte Carlo only

  bool operator==(const AttackReport&) const = default;
};

namespace detail {

inline std::map<SpeakerId, TargetOutcome> MatchTargets(const AttackInstance& inst) {
  std::unordered_map<Profile, std::vector<SpeakerId>, ProfileHash> by_profile;
  for (const auto& [id, p] : inst.references()) by_profile[p].push_back(id);

  std::map<SpeakerId, TargetOutcome> out;
  for (const auto& [id, p] : inst.targets()) {
    TargetOutcome o;
    auto it = by_profile.find(p);
    if (it != by_profile.end()) {
      const auto& matches = it->second;
      o.match_set_size = matches.size();
      o.truth_in_matches = std::find(matches.begin(), matches.end(),
                                     inst.truth().at(id)) != matches.end();
      if (o.truth_in_matches) o.success_prob = 1.0 / static_cast<double>(matches.size());
    }
    out.emplace(id, o);
  }
  return out;
}

}  // namespace detail

// Expected error over the attacker's random choice: a target with match set
// M succeeds with probability 1/|M| when its true reference is in M and
// never otherwise (including |M| = 0).
inline AttackReport attack_closed_form(const AttackInstance& inst) {
  if (inst.targets().empty()) throw EmptyDataset("attack has no targets");
  AttackReport r;
  r.mode = AttackMode::kClosedForm;
  r.per_target = detail::MatchTargets(inst);
  double success = 0.0;
  for (const auto& [id, o] : r.per_target) success += o.success_prob;
  r.error_rate = 1.0 - success / static_cast<double>(r.per_target.size());
  return r;
}

// Simulates `trials` attacks. Trial t uses its own generator seeded with
// derive_seed(seed, kAttackTrial, t) and draws one match per ambiguous
// target in target-id order. Per-trial failure counts are combined with
// integer sums, so the result does not depend on `threads`.
inline AttackReport attack_monte_carlo(const AttackInstance& inst,
                                       std::uint64_t trials, std::uint64_t seed,
                                       unsigned threads = 0) {
  if (trials < 1) throw InvalidArgument("Monte Carlo needs at least one trial");
  if (inst.targets().empty()) throw EmptyDataset("attack has no targets");

  AttackReport r;
  r.mode = AttackMode::kMonteCarlo;
  r.trials = trials;
  r.seed = seed;
  r.per_target = detail::MatchTargets(inst);

  // Targets whose outcome is random: truth among >= 2 matches. Drawing a
  // match uniformly and comparing it with the truth is a uniform draw of a
  // position compared with the truth's position; position 0 is used.
  std::uint64_t always_fail = 0;
  std::vector<std::uint64_t> ambiguous;
  for (const auto& [id, o] : r.per_target) {
    if (!o.truth_in_matches) {
      ++always_fail;
    } else if (o.match_set_size > 1) {
      ambiguous.push_back(o.match_set_size);
    }
  }

  struct Sums {
    unsigned __int128 fails = 0;
    unsigned __int128 fails_sq = 0;
  };
  auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
    Sums s;
    for (std::uint64_t t = begin; t < end; ++t) {
      SplitMix64 rng(derive_seed(seed, SeedDomain::kAttackTrial, t));
      std::uint64_t fails = always_fail;
      for (std::uint64_t m : ambiguous) fails += uniform_index(rng, m) != 0;
      s.fails += fails;
      s.fails_sq += static_cast<unsigned __int128>(fails) * fails;
    }
    return s;
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, trials));
  Sums total;
  if (threads <= 1 || ambiguous.empty()) {
    total = run_range(0, trials);
  } else {
    std::vector<Sums> partial(threads);
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) {
      const std::uint64_t begin = trials * i / threads;
      const std::uint64_t end = trials * (i + 1) / threads;
      pool.emplace_back([&, i, begin, end] { partial[i] = run_range(begin, end); });
    }
    for (auto& th : pool) th.join();
    for (const auto& s : partial) {
      total.fails += s.fails;
      total.fails_sq += s.fails_sq;
    }
  }

  const auto n = static_cast<double>(r.per_target.size());
  const auto t = static_cast<double>(trials);
  const double sum = static_cast<double>(total.fails);
  r.error_rate = sum / (n * t);
  if (trials > 1) {
    // Sample variance of per-trial failure counts, from exact integer sums.
    const unsigned __int128 centered =
        total.fails_sq * trials - total.fails * total.fails;  // T*sum(f^2) - (sum f)^2
    const double var_counts =
        static_cast<double>(centered) / (t * (t - 1.0));
    r.std_error = std::sqrt(std::max(0.0, var_counts)) / n / std::sqrt(t);
  }
  return r;
}

// Mean and sample standard deviation (n - 1) of error rates across runs.
struct RunSummary {
  double mean = 0.0;
  double std = 0.0;
  std::size_t runs = 0;
  // False for a single run: std is reported as 0 but is undefined.
  bool std_defined = false;

  bool operator==(const RunSummary&) const = default;
};

inline RunSummary summarize_runs(const std::vector<double>& error_rates) {
  if (error_rates.empty()) throw InvalidArgument("no runs to summarize");
  RunSummary s;
  s.runs = error_rates.size();
  for (double e : error_rates) s.mean += e;
  s.mean /= static_cast<double>(s.runs);
  if (s.runs > 1) {
    const auto [lo, hi] = std::minmax_element(error_rates.begin(), error_rates.end());
    if (*lo == *hi) s.mean = *lo;  // exact, no rounding drift
    double ss = 0.0;
    for (double e : error_rates) ss += (e - s.mean) * (e - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.runs - 1));
    s.std_defined = true;
  }
  return s;
}

inline RunSummary attack_over_runs(const std::vector<AttackInstance>& instances) {
  std::vector<double> errors;
  errors.reserve(instances.size());
  for (const auto& inst : instances) errors.push_back(attack_closed_form(inst).error_rate);
  return summarize_runs(errors);
}

// "0.72 ± 0.04"
inline std::string format_mean_std(const RunSummary& s, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f \xC2\xB1 %.*f", decimals, s.mean, decimals, s.std);
  return buf;
}

}  // namespace vprisk

#endif  // VPRISK_ATTACK_HPP_
