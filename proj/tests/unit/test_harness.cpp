/*
 * Copyright 2026 The vtoff Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "test_util.hpp"
#include "vtoff/distribution.hpp"
#include "vtoff/harness.hpp"
#include "vtoff/log.hpp"
#include "vtoff/metrics.hpp"
#include "vtoff/report.hpp"

namespace vtoff {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

TEST(Metrics, NamesScalesAndLists) {
  EXPECT_EQ(metric_from_name("ssim"), Metric::kSsim);
  EXPECT_EQ(metric_from_name("fd_clip"), Metric::kFdClip);
  EXPECT_FALSE(metric_from_name("psnr").has_value());
  EXPECT_DOUBLE_EQ(metric_scale(Metric::kDists), 100.0);
  EXPECT_DOUBLE_EQ(metric_scale(Metric::kKid), 1000.0);
  EXPECT_DOUBLE_EQ(metric_scale(Metric::kFid), 1.0);
  EXPECT_EQ(parse_metric_list("ssim,dists"), (std::vector<Metric>{Metric::kSsim, Metric::kDists}));
  EXPECT_ERRC(parse_metric_list("ssim,ssim"), Errc::kInvalidParams);
  EXPECT_ERRC(parse_metric_list("ssim,foo"), Errc::kInvalidParams);
  EXPECT_EQ(default_pair_metrics().size(), 5u);
  EXPECT_TRUE(is_deep_metric(Metric::kLpips));
  EXPECT_FALSE(is_pair_metric(Metric::kKid));
}

TEST(Metrics, ScorerPoliciesAndWeights) {
  EXPECT_ERRC(PairScorer({Metric::kDists}, nullptr), Errc::kMissingWeights);
  EXPECT_ERRC(PairScorer({Metric::kFid}, nullptr), Errc::kInvalidParams);
  const Image ref = testutil::blob_image(96, 96, 1);
  const Image cand = testutil::blob_image(80, 80, 2);
  PairMetricOptions strict;
  strict.resolution = ResolutionPolicy::kStrict;
  EXPECT_ERRC(PairScorer({Metric::kSsim}, nullptr, strict).score(ref, cand), Errc::kDimensionMismatch);
  const PairScorer lenient({Metric::kSsim}, nullptr);
  const double v = lenient.score(ref, cand)[0];
  EXPECT_DOUBLE_EQ(v, lenient.score(ref, resize(cand, 96, 96))[0]);
}

TEST(Report, FormatDoubleRoundTrips) {
  SplitMix64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.next() % 40) - 20);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Report, AggregateIsMeanScaledOnce) {
  MetricReport r;
  r.metrics = {Metric::kSsim, Metric::kKid};
  r.rows = {{"a", {0.5, 0.001}}, {"b", {0.7, 0.003}}};
  r.compute_aggregate();
  EXPECT_NEAR(r.aggregate[0], 0.6, 1e-15);
  EXPECT_NEAR(r.aggregate[1], 0.002, 1e-15);
  const auto scaled = r.scaled_aggregate();
  EXPECT_NEAR(scaled[0], 60.0, 1e-12);
  EXPECT_NEAR(scaled[1], 2.0, 1e-12);
}

TEST(Report, JsonAndCsvCarryTheSameValues) {
  MetricReport r;
  r.command = "score";
  r.metrics = {Metric::kSsim, Metric::kLpips, Metric::kDists};
  SplitMix64 rng(3);
  for (int i = 0; i < 7; ++i) r.rows.push_back({"id" + std::to_string(i), {rng.uniform(), rng.uniform() * 1e-3, rng.uniform() / 3}});
  r.compute_aggregate();
  r.config_hash = "abc";
  const json j = json::parse(render_json(r));
  const auto csv = parse_csv(render_csv(r));
  ASSERT_EQ(csv.size(), r.rows.size() + 3);
  EXPECT_EQ(csv[0], (std::vector<std::string>{"id", "ssim", "lpips", "dists"}));
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& cells = csv[i + 1];
    const json& row = j["rows"][i];
    EXPECT_EQ(cells[0], row["id"].get<std::string>());
    for (std::size_t m = 0; m < 3; ++m) {
      const std::string name(metric_name(r.metrics[m]));
      EXPECT_EQ(std::stod(cells[m + 1]), row[name].get<double>());
      EXPECT_EQ(std::stod(cells[m + 1]), r.rows[i].values[m]);
    }
  }
  EXPECT_EQ(j["metadata"]["config_hash"], "abc");
  EXPECT_EQ(j["metadata"]["engine_version"], engine_version());
}

TEST(Report, AtomicWriteCreatesParents) {
  testutil::TempDir dir("rep");
  write_file_atomic(dir / "a" / "b" / "r.json", "hello");
  EXPECT_EQ(slurp(dir / "a" / "b" / "r.json"), "hello");
  write_file_atomic(dir / "a" / "b" / "r.json", "again");
  EXPECT_EQ(slurp(dir / "a" / "b" / "r.json"), "again");
  EXPECT_FALSE(fs::exists(dir / "a" / "b" / "r.json.tmp"));
}

TEST(Config, MergeAndCanonical) {
  RunConfig c;
  c.merge_json(R"({"metrics": "ssim,cwssim", "threads": 4, "resolution": "strict", "ssim_auto_downsample": false})");
  EXPECT_EQ(c.metrics, (std::vector<Metric>{Metric::kSsim, Metric::kCwSsim}));
  EXPECT_EQ(c.threads, 4);
  EXPECT_EQ(c.metric_options.resolution, ResolutionPolicy::kStrict);
  EXPECT_FALSE(c.metric_options.ssim.auto_downsample);
  RunConfig d = c;
  d.threads = 1;
  d.out_json = "/tmp/x.json";
  EXPECT_EQ(c.canonical_json(), d.canonical_json());
  d.metric_options.perceptual.dists_resize = false;
  EXPECT_NE(c.canonical_json(), d.canonical_json());
  EXPECT_ERRC(c.merge_json(R"({"metricz": "ssim"})"), Errc::kInvalidParams);
  EXPECT_ERRC(c.merge_json(R"({"threads": 0})"), Errc::kInvalidParams);
  EXPECT_ERRC(c.merge_json("[]"), Errc::kInvalidParams);
}

TEST(Config, PairsFileFormats) {
  testutil::TempDir dir("cfg");
  std::ofstream(dir / "p.txt") << "# comment\na.png b.jpg\nc,d\n\n";
  const auto pairs = read_pairs_file(dir / "p.txt");
  EXPECT_EQ(pairs, (std::vector<std::pair<std::string, std::string>>{{"a", "b"}, {"c", "d"}}));
  std::ofstream(dir / "bad.txt") << "only\n";
  EXPECT_ERRC(read_pairs_file(dir / "bad.txt"), Errc::kInvalidParams);
}

class ScoreDirs : public ::testing::Test {
 protected:
  void SetUp() override {
    fs::create_directories(dir_ / "pred");
    fs::create_directories(dir_ / "gt");
    for (int i = 0; i < 5; ++i) {
      const std::string stem = "s" + std::to_string(i);
      const Image gt = testutil::blob_image(184, 200, 40 + i);
      save_png(gt, dir_ / "gt" / (stem + ".png"));
      Image pred = gt;
      for (int k = 0; k < 40; ++k) pred.pixel((k * 7 + i) % 184, (k * 13) % 200)[k % 3] ^= 0x55;
      save_png(pred, dir_ / "pred" / (stem + ".png"));
    }
    cfg_.metrics = {Metric::kSsim, Metric::kMsSsim, Metric::kCwSsim};
  }
  testutil::TempDir dir_{"score"};
  RunConfig cfg_;
};

TEST_F(ScoreDirs, ThreadCountAndRepeatDoNotChangeBytes) {
  RunConfig one = cfg_, many = cfg_;
  one.out_json = dir_ / "one.json";
  one.out_csv = dir_ / "one.csv";
  many.threads = 8;
  many.out_json = dir_ / "many.json";
  many.out_csv = dir_ / "many.csv";
  const MetricReport a = cmd_score(dir_ / "pred", dir_ / "gt", one);
  const MetricReport b = cmd_score(dir_ / "pred", dir_ / "gt", many);
  EXPECT_EQ(a.config_hash, b.config_hash);
  EXPECT_EQ(slurp(dir_ / "one.json"), slurp(dir_ / "many.json"));
  EXPECT_EQ(slurp(dir_ / "one.csv"), slurp(dir_ / "many.csv"));
  cmd_score(dir_ / "pred", dir_ / "gt", one);
  EXPECT_EQ(slurp(dir_ / "one.json"), slurp(dir_ / "many.json"));
  ASSERT_EQ(a.rows.size(), 5u);
  EXPECT_EQ(a.rows[0].id, "s0");
}

TEST_F(ScoreDirs, AggregateEqualsMeanOfRows) {
  const MetricReport r = cmd_score(dir_ / "pred", dir_ / "gt", cfg_);
  for (std::size_t m = 0; m < r.metrics.size(); ++m) {
    double s = 0.0;
    for (const auto& row : r.rows) s += row.values[m];
    EXPECT_NEAR(r.aggregate[m], s / r.rows.size(), 1e-15);
  }
}

TEST_F(ScoreDirs, ConfigHashTracksContentNotPaths) {
  const MetricReport a = cmd_score(dir_ / "pred", dir_ / "gt", cfg_);
  fs::copy(dir_ / "pred", dir_ / "pred2");
  EXPECT_EQ(cmd_score(dir_ / "pred2", dir_ / "gt", cfg_).config_hash, a.config_hash);
  save_png(testutil::random_image(72, 88, 1), dir_ / "pred2" / "s3.png");
  EXPECT_NE(cmd_score(dir_ / "pred2", dir_ / "gt", cfg_).config_hash, a.config_hash);
}

TEST_F(ScoreDirs, MissingGroundTruthListsStems) {
  fs::remove(dir_ / "gt" / "s2.png");
  fs::remove(dir_ / "gt" / "s4.png");
  try {
    cmd_score(dir_ / "pred", dir_ / "gt", cfg_);
    ADD_FAILURE() << "expected UnpairedFiles";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnpairedFiles);
    EXPECT_NE(std::string(e.what()).find("s2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("s4"), std::string::npos);
    EXPECT_EQ(exit_code_for(e.code()), 2);
  }
}

TEST_F(ScoreDirs, DeepMetricsNeedWeights) {
  RunConfig c = cfg_;
  c.metrics = {Metric::kLpips};
  ::unsetenv(kWeightsDirEnv);
  try {
    cmd_score(dir_ / "pred", dir_ / "gt", c);
    ADD_FAILURE() << "expected MissingWeights";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMissingWeights);
    EXPECT_EQ(exit_code_for(e.code()), 3);
  }
}

TEST_F(ScoreDirs, PairsFileOverridesStems) {
  fs::rename(dir_ / "gt" / "s1.png", dir_ / "gt" / "other.png");
  std::ofstream(dir_ / "pairs.txt") << "s1 other\ns0 s0\n";
  RunConfig c = cfg_;
  c.pairs_file = dir_ / "pairs.txt";
  const MetricReport r = cmd_score(dir_ / "pred", dir_ / "gt", c);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[1].id, "s1");
}

TEST(Score, EmptyDirectoryIsInputError) {
  testutil::TempDir dir("score");
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "b");
  EXPECT_ERRC(cmd_score(dir / "a", dir / "b", RunConfig{}), Errc::kEmptyDirectory);
  EXPECT_ERRC(cmd_bench(dir / "a", RunConfig{}), Errc::kEmptyDirectory);
}

TEST(Dist, FeatureArchivesAndTags) {
  testutil::TempDir dir("dist");
  SplitMix64 rng(4);
  auto make = [&](int n, const std::string& tag, double shift) {
    FeatureSet f;
    f.count = n;
    f.dim = 8;
    f.extractor = tag;
    for (int i = 0; i < n * 8; ++i) f.data.push_back(static_cast<float>(rng.normal() + shift));
    return f;
  };
  const FeatureSet a = make(30, "inception-pool3", 0.0), b = make(25, "inception-pool3", 0.4);
  save_features(a, dir / "a.st");
  save_features(b, dir / "b.st");
  const MetricReport r = cmd_dist(dir / "a.st", dir / "b.st", RunConfig{});
  ASSERT_EQ(r.metrics, (std::vector<Metric>{Metric::kFid, Metric::kKid}));
  const FeatureSet la = load_features(dir / "a.st"), lb = load_features(dir / "b.st");
  EXPECT_DOUBLE_EQ(r.rows[0].values[0], frechet_distance(gaussian_stats(la), gaussian_stats(lb)));
  EXPECT_DOUBLE_EQ(r.rows[0].values[1], kid(la, lb));
  EXPECT_DOUBLE_EQ(r.scaled_aggregate()[1], 1000.0 * kid(la, lb));

  save_features(make(20, "clip", 0.0), dir / "c.st");
  save_features(make(20, "clip", 0.1), dir / "d.st");
  EXPECT_EQ(cmd_dist(dir / "c.st", dir / "d.st", RunConfig{}).metrics[0], Metric::kFdClip);
  EXPECT_ERRC(cmd_dist(dir / "a.st", dir / "c.st", RunConfig{}), Errc::kExtractorMismatch);
  save_features(make(1, "clip", 0.0), dir / "one.st");
  EXPECT_ERRC(cmd_dist(dir / "one.st", dir / "d.st", RunConfig{}), Errc::kTooFewSamples);
}

TEST(Bench, ReportsCpuAndIdenticalValues) {
  testutil::TempDir dir("bench");
  for (int i = 0; i < 3; ++i) save_png(testutil::blob_image(96, 96, i), dir / ("b" + std::to_string(i) + ".png"));
  RunConfig c;
  c.metrics = {Metric::kSsim, Metric::kCwSsim};
  c.threads = 3;
  const BenchResult r = cmd_bench(dir.path(), c);
  EXPECT_EQ(r.pairs, 3u);
  EXPECT_FALSE(r.cpu.empty());
  ASSERT_EQ(r.entries.size(), 4u);
  for (const auto& e : r.entries) EXPECT_TRUE(e.identical);
  const json j = json::parse(bench_to_json(r));
  EXPECT_TRUE(j.contains("cpu"));
}

}  // namespace
}  // namespace vtoff
