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

// Library walkthrough on the bundled sample data: speaker-level uniqueness,
// the exact-match attack with a pseudonymized target set, and a simulated
// classifier channel.
//
//   vprisk_api_example samples/

#include <cstdio>
#include <filesystem>

#include "vprisk/vprisk.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path dir = argc > 1 ? argv[1] : "samples";
  try {
    const auto schema = vprisk::load_schema(dir / "schema.json");
    const auto gt = vprisk::load_labels(dir / "ground_truth.csv", schema,
                                        {"ground_truth", vprisk::Granularity::kSpeaker});

    const auto classes = vprisk::partition_speakers(gt);
    const auto report = vprisk::uniqueness_report(classes, vprisk::default_thresholds());
    std::printf("%zu speakers, %zu classes, %s%% unique, median k %s\n", report.n_speakers,
                classes.classes.size(), vprisk::format_pct(report.pct_unique).c_str(),
                vprisk::format_median(report.median_k).c_str());

    const auto targets = vprisk::load_labels(dir / "pseudonymized.csv", schema);
    const auto truth = vprisk::load_truth_mapping(dir / "truth.csv");
    const auto attack = vprisk::AttackInstance::Make(vprisk::as_speaker_level(targets), gt, truth);
    const auto exact = vprisk::attack_closed_form(attack);
    const auto mc = vprisk::attack_monte_carlo(attack, 100000, /*seed=*/1);
    std::printf("attack error %.4f (Monte Carlo %.4f +- %.4f)\n", exact.error_rate, mc.error_rate,
                mc.std_error);

    const auto channel = vprisk::channel_from_accuracy(schema, {{"accent", 0.7}});
    const auto noisy = vprisk::apply_channel(gt, channel, /*seed=*/7);
    const auto delta = vprisk::k_delta(classes, vprisk::partition_speakers(noisy),
                                       vprisk::default_thresholds(),
                                       vprisk::KDeltaMode::kThresholdCrossing);
    for (const auto& row : delta.rows) {
      std::printf("k<%d: %s%% worse, %s%% unchanged, %s%% better\n", *row.threshold,
                  vprisk::format_pct(row.pct_worse).c_str(),
                  vprisk::format_pct(row.pct_unchanged).c_str(),
                  vprisk::format_pct(row.pct_better).c_str());
    }
  } catch (const vprisk::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
