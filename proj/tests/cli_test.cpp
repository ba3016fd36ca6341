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

#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "json.hpp"
#include "test_util.hpp"
#include "vprisk/vprisk.hpp"

namespace vprisk {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "vprisk");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void Write(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << content;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("vprisk_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    schema_ = testing::VoxSchema();
    Write(dir_ / "schema.json", schema_to_json(schema_).dump(2));
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  // Speaker-level label file with the Table 3 class spectrum.
  void WriteSpectrum(const std::string& name) {
    Write(dir_ / name, write_labels_csv(testing::SpeakerDataset(schema_, testing::SpectrumProfiles())));
  }

  // Utterance-level posteriors: `speakers` x `utts`, peaked on a random profile.
  void WritePosteriors(const std::string& name, int speakers, int utts, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::string text;
    for (int s = 0; s < speakers; ++s) {
      const auto p = testing::RandomProfile(rng, schema_);
      for (int k = 0; k < utts; ++k) {
        json line = {{"speaker_id", testing::SpeakerName(s)}, {"utterance_id", "u" + std::to_string(k)}};
        json post = json::array();
        for (std::size_t a = 0; a < schema_.size(); ++a) {
          std::vector<double> v(schema_.level_count(a));
          double sum = 0;
          for (std::size_t l = 0; l < v.size(); ++l) {
            v[l] = u(rng) + (l == p[a] ? 1.5 : 0.0);
            sum += v[l];
          }
          for (double& x : v) x /= sum;
          post.push_back(v);
        }
        line["posteriors"] = post;
        text += line.dump() + "\n";
      }
    }
    Write(dir_ / name, text);
  }

  fs::path dir_;
  AttributeSchema schema_;
};

TEST_F(CliTest, ValidateSummarizesValidFile) {
  WriteSpectrum("gt.csv");
  const auto r = Invoke({"validate", "--schema", P("schema.json"), "--input", "gt=" + P("gt.csv"),
                      "--out", P("out")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("72 speakers, 72 utterances"), std::string::npos) << r.out;
  const auto report = json::parse(Slurp(dir_ / "out" / "validate.json"));
  EXPECT_EQ(report["results"]["valid"], true);
}

TEST_F(CliTest, ValidateUnknownLevelCitesLine) {
  Write(dir_ / "bad.csv",
        "speaker_id,utterance_id,gender,age,accent,profession\n"
        "s1,u1,male,young,accent_1,actor\n"
        "s2,u1,male,young,Atlantis,actor\n");
  const auto r = Invoke({"validate", "--schema", P("schema.json"), "--input", P("bad.csv"), "--out",
                      P("out")});
  EXPECT_EQ(r.code, 1);
  const auto err = json::parse(r.err);
  ASSERT_EQ(err["errors"].size(), 1u);
  EXPECT_EQ(err["errors"][0]["line"], 3);
  EXPECT_EQ(err["errors"][0]["kind"], "ValidationError");
}

TEST_F(CliTest, ValidateFindsIncompleteSpeakers) {
  // 118 speakers; 46 of them lack at least one attribute.
  std::mt19937_64 rng(118);
  std::string csv = "speaker_id,utterance_id,gender,age,accent,profession\n";
  std::set<std::string> incomplete;
  for (int s = 0; s < 118; ++s) {
    const auto p = testing::RandomProfile(rng, schema_);
    std::vector<std::string> cells;
    for (std::size_t a = 0; a < p.size(); ++a) cells.push_back(schema_.attributes[a].levels[p[a]]);
    if (s % 118 < 46) {
      cells[rng() % cells.size()] = "";
      incomplete.insert(testing::SpeakerName(s));
    }
    csv += testing::SpeakerName(s) + ",u0";
    for (const auto& c : cells) csv += "," + c;
    csv += "\n";
  }
  Write(dir_ / "all.csv", csv);
  const auto r = Invoke({"validate", "--schema", P("schema.json"), "--input", "all=" + P("all.csv"),
                      "--out", P("out")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("118 speakers"), std::string::npos);
  EXPECT_NE(r.out.find("incomplete speakers (46)"), std::string::npos);
  const auto err = json::parse(r.err);
  const auto listed = err["incomplete_speakers"]["all"].get<std::vector<std::string>>();
  EXPECT_EQ(std::set<std::string>(listed.begin(), listed.end()), incomplete);
  EXPECT_EQ(err["errors"].size(), 46u);
}

TEST_F(CliTest, UniquenessClassSpectrum) {
  WriteSpectrum("gt.csv");
  const auto r = Invoke({"uniqueness", "--schema", P("schema.json"), "--input",
                      "ground_truth=" + P("gt.csv"), "--out", P("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Slurp(dir_ / "out" / "uniqueness_table.csv"),
            "metric,ground_truth\nk=1,38.9\nk<3,55.6\nk<5,65.3\nk<10,72.2\nmedian,2\n");
  const auto report = json::parse(Slurp(dir_ / "out" / "uniqueness.json"));
  EXPECT_EQ(report["command"], "uniqueness");
  EXPECT_EQ(report["inputs"][0]["records"], 72);
  EXPECT_TRUE(report["inputs"][0]["hash"].get<std::string>().starts_with("fnv1a64:"));
}

TEST_F(CliTest, UniquenessResampledRunsAreDeterministic) {
  WritePosteriors("orig.jsonl", 30, 5, 1);
  std::vector<std::string> args = {"uniqueness", "--schema", P("schema.json"), "--input",
                                   "original=" + P("orig.jsonl"), "--runs", "10", "--seed", "7"};
  auto a = args, b = args;
  a.insert(a.end(), {"--out", P("a")});
  b.insert(b.end(), {"--out", P("b")});
  ASSERT_EQ(Invoke(a).code, 0);
  ASSERT_EQ(Invoke(b).code, 0);
  EXPECT_EQ(Slurp(dir_ / "a" / "uniqueness.json"), Slurp(dir_ / "b" / "uniqueness.json"));
  EXPECT_EQ(Slurp(dir_ / "a" / "uniqueness_runs.csv"), Slurp(dir_ / "b" / "uniqueness_runs.csv"));
  const auto report = json::parse(Slurp(dir_ / "a" / "uniqueness.json"));
  EXPECT_EQ(report["results"]["conditions"][0]["runs"].size(), 10u);
}

TEST_F(CliTest, AttackWithResamplingAndMonteCarlo) {
  WritePosteriors("orig.jsonl", 40, 4, 2);
  const auto r = Invoke({"attack", "--schema", P("schema.json"), "--target", "original=" + P("orig.jsonl"),
                      "--reference", "inferred=" + P("orig.jsonl"), "--runs", "3", "--seed", "5",
                      "--mc-trials", "2000", "--out", P("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = json::parse(Slurp(dir_ / "out" / "attack.json"));
  const auto& cell = report["results"]["cells"][0];
  EXPECT_EQ(cell["runs"].size(), 3u);
  EXPECT_EQ(cell["summary"]["runs"], 3);
  EXPECT_EQ(cell["runs"][0]["monte_carlo"]["trials"], 2000);
  const std::string csv = Slurp(dir_ / "out" / "attack_table.csv");
  EXPECT_TRUE(csv.starts_with("target,reference,mean,std,runs,formatted\noriginal,inferred,"));
}

TEST_F(CliTest, AttackWithTruthMapping) {
  Write(dir_ / "t.csv",
        "speaker_id,utterance_id,gender,age,accent,profession\n"
        "t1,u,male,young,accent_1,actor\nt2,u,male,young,accent_1,actor\n");
  Write(dir_ / "r.csv",
        "speaker_id,utterance_id,gender,age,accent,profession\n"
        "r1,u,male,young,accent_1,actor\nr2,u,male,young,accent_1,actor\nr3,u,female,old,accent_2,other\n");
  Write(dir_ / "truth.csv", "target_speaker_id,reference_speaker_id\nt1,r1\nt2,r3\n");
  const auto r = Invoke({"attack", "--schema", P("schema.json"), "--target", P("t.csv"), "--reference",
                      P("r.csv"), "--truth", P("truth.csv"), "--out", P("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = json::parse(Slurp(dir_ / "out" / "attack.json"));
  // t1: 1/2 chance, t2: true reference has another profile.
  EXPECT_DOUBLE_EQ(report["results"]["cells"][0]["summary"]["mean"].get<double>(), 0.75);
}

TEST_F(CliTest, ResampleWritesRunFiles) {
  WritePosteriors("orig.jsonl", 10, 3, 3);
  const auto r = Invoke({"resample", "--schema", P("schema.json"), "--input", "original=" + P("orig.jsonl"),
                      "--seed", "1", "--out", P("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  for (int i = 0; i < 10; ++i) {
    const auto path = dir_ / "out" / ("original_run" + std::to_string(i) + ".csv");
    ASSERT_TRUE(fs::exists(path));
    const auto ds = load_labels(path, schema_);
    EXPECT_EQ(ds.size(), 10u);
    EXPECT_EQ(ds.speakers().size(), 10u);
  }
  const auto manifest = json::parse(Slurp(dir_ / "out" / "resample.json"));
  EXPECT_EQ(manifest["config"]["runs"], 10);
}

TEST_F(CliTest, ChannelIdentityAndSpeakerConsistent) {
  WritePosteriors("orig.jsonl", 20, 4, 4);
  const auto r = Invoke({"channel", "--schema", P("schema.json"), "--input", "gt=" + P("orig.jsonl"),
                      "--accuracy", "gender=1", "--out", P("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto clean = to_labels(load_dataset(P("orig.jsonl"), schema_));
  EXPECT_EQ(Slurp(dir_ / "out" / "gt_noisy.csv"), write_labels_csv(clean));

  Write(dir_ / "channel.json",
        R"({"mode": "speaker_consistent", "matrices": {"accent": )" +
            json(channel_from_accuracy(schema_, {{"accent", 0.2}}).matrices()[2]).dump() + "}}");
  const auto r2 = Invoke({"channel", "--schema", P("schema.json"), "--input", "gt=" + P("orig.jsonl"),
                       "--channel", P("channel.json"), "--seed", "3", "--out", P("out2")});
  ASSERT_EQ(r2.code, 0) << r2.err;
  const auto noisy = load_labels(dir_ / "out2" / "gt_noisy.csv", schema_);
  for (auto group : noisy.by_speaker()) {
    for (const auto& rec : group) EXPECT_EQ(rec.labels(), group.front().labels());
  }
  const auto report = json::parse(Slurp(dir_ / "out2" / "channel.json"));
  EXPECT_EQ(report["config"]["mode"], "speaker_consistent");
}

TEST_F(CliTest, KDeltaPlotData) {
  WriteSpectrum("gt.csv");
  const auto ds = testing::SpeakerDataset(schema_, testing::SpectrumProfiles());
  const auto noisy = apply_channel(ds, channel_from_accuracy(schema_, {{"accent", 0.5}}), 3);
  Write(dir_ / "inf.csv", write_labels_csv(noisy));
  const auto r = Invoke({"kdelta", "--schema", P("schema.json"), "--gt", P("gt.csv"), "--inferred",
                      P("inf.csv"), "--out", P("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = Slurp(dir_ / "out" / "kdelta.csv");
  EXPECT_TRUE(csv.starts_with("threshold,worse,unchanged,better\n3,"));
  const auto raw = Invoke({"kdelta", "--schema", P("schema.json"), "--gt", P("gt.csv"), "--inferred",
                        P("inf.csv"), "--mode", "raw", "--out", P("raw")});
  ASSERT_EQ(raw.code, 0) << raw.err;
  EXPECT_NE(Slurp(dir_ / "raw" / "kdelta.csv").find("\nraw,"), std::string::npos);
}

TEST_F(CliTest, ReportMetrics) {
  Write(dir_ / "truth.csv",
        "speaker_id,utterance_id,gender,age,accent,profession\n"
        "a,1,female,young,accent_1,actor\nb,1,female,young,accent_1,actor\n"
        "c,1,male,young,accent_1,actor\nd,1,male,young,accent_1,actor\n");
  Write(dir_ / "pred.csv",
        "speaker_id,utterance_id,gender,age,accent,profession\n"
        "a,1,female,young,accent_1,actor\nb,1,male,young,accent_1,actor\n"
        "c,1,male,young,accent_1,actor\nd,1,male,young,accent_1,actor\n");
  const auto r = Invoke({"report", "--schema", P("schema.json"), "--pred", P("pred.csv"), "--truth",
                      P("truth.csv"), "--out", P("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = json::parse(Slurp(dir_ / "out" / "metrics.json"));
  const auto& g = report["results"]["attributes"][0];
  EXPECT_EQ(g["attribute"], "gender");
  EXPECT_DOUBLE_EQ(g["accuracy"].get<double>(), 0.75);
  EXPECT_NEAR(g["weighted_f1"].get<double>(), 11.0 / 15.0, 1e-12);
  EXPECT_TRUE(Slurp(dir_ / "out" / "metrics.csv")
                  .starts_with("attribute,baseline,accuracy,weighted_f1\ngender,0.5000,0.7500,0.7333\n"));
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  WriteSpectrum("gt.csv");
  Write(dir_ / "config.json", json{{"schema", P("schema.json")},
                                   {"inputs", {"gt=" + P("gt.csv")}},
                                   {"thresholds", {3, 5}},
                                   {"out", P("from_config")}}
                                  .dump());
  ASSERT_EQ(Invoke({"uniqueness", "--config", P("config.json")}).code, 0);
  EXPECT_EQ(Slurp(dir_ / "from_config" / "uniqueness_table.csv"),
            "metric,gt\nk=1,38.9\nk<3,55.6\nk<5,65.3\nmedian,2\n");
  ASSERT_EQ(Invoke({"uniqueness", "--config", P("config.json"), "--thresholds", "10", "--out",
                 P("flags")})
                .code,
            0);
  EXPECT_EQ(Slurp(dir_ / "flags" / "uniqueness_table.csv"),
            "metric,gt\nk=1,38.9\nk<10,72.2\nmedian,2\n");
  EXPECT_FALSE(fs::exists(dir_ / "from_config" / "uniqueness_table.csv.tmp"));
}

TEST_F(CliTest, ErrorsAreStructuredAndLeaveNoOutputs) {
  WriteSpectrum("gt.csv");
  Write(dir_ / "bad.csv", "speaker_id,utterance_id,gender,age,accent,profession\ns,u,x,y,z,w\n");
  const auto r = Invoke({"uniqueness", "--schema", P("schema.json"), "--input", P("gt.csv"),
                      "--input", P("bad.csv"), "--out", P("out")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json::parse(r.err)["error"]["kind"], "ValidationError");
  EXPECT_FALSE(fs::exists(dir_ / "out"));

  const auto usage = Invoke({"uniqueness", "--bogus"});
  EXPECT_EQ(usage.code, 2);
  EXPECT_EQ(json::parse(usage.err)["error"]["exit_code"], 2);
  EXPECT_EQ(Invoke({}).code, 2);
  EXPECT_EQ(Invoke({"uniqueness", "--schema", P("schema.json"), "--input", P("gt.csv"), "--thresholds",
                 "1,3"})
                .code,
            2);
  EXPECT_EQ(Invoke({"uniqueness", "--schema", P("missing.json"), "--input", P("gt.csv")}).code, 1);
}

}  // namespace
}  // namespace vprisk
