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
#include <cmath>

#include <json.hpp>

#include "test_util.hpp"
#include "vtoff/dataset.hpp"
#include "vtoff/distortion.hpp"

namespace vtoff {
namespace {

namespace fs = std::filesystem;

DistortionSpec spec_of(DistortionKind k) {
  DistortionSpec s;
  s.kind = k;
  s.label = std::string(distortion_name(k));
  return s;
}

double mean_abs_error(const Image& a, const Image& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += std::abs(int(a.data()[i]) - int(b.data()[i]));
  return s / a.data().size();
}

TEST(Distortion, PosterizeEightBitsIsIdentity) {
  const Image img = testutil::random_image(33, 21, 1);
  DistortionSpec s = spec_of(DistortionKind::kPosterize);
  s.bits = 8;
  EXPECT_EQ(apply(img, s), img);
}

TEST(Distortion, PosterizeErrorGrowsAsBitsDrop) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Image img = seed == 3 ? testutil::blob_image(40, 40, seed) : testutil::random_image(40, 40, seed);
    DistortionSpec s = spec_of(DistortionKind::kPosterize);
    double prev = -1.0;
    for (int bits = 8; bits >= 1; --bits) {
      s.bits = bits;
      const double e = mean_abs_error(img, apply(img, s));
      EXPECT_GE(e, prev) << "bits " << bits;
      prev = e;
    }
  }
}

TEST(Distortion, PosterizeMasksLowBits) {
  Image img(1, 1);
  img.pixel(0, 0)[0] = 0xB7;
  DistortionSpec s = spec_of(DistortionKind::kPosterize);
  s.bits = 2;
  EXPECT_EQ(apply(img, s).pixel(0, 0)[0], 0x80);
}

TEST(Distortion, ZeroRotationIsIdentity) {
  const Image img = testutil::random_image(30, 20, 4);
  DistortionSpec s = spec_of(DistortionKind::kRotate);
  s.angle = 0.0;
  EXPECT_EQ(apply(img, s), img);
}

TEST(Distortion, RotationFillsCornersWhite) {
  const Image img(64, 64, 0);
  DistortionSpec s = spec_of(DistortionKind::kRotate);
  s.angle = 30.0;
  const Image out = apply(img, s);
  EXPECT_EQ(out.pixel(0, 0)[0], 255);
  EXPECT_EQ(out.pixel(32, 32)[0], 0);
}

TEST(Distortion, PlainWhite) {
  const Image out = apply(testutil::random_image(10, 12, 5), spec_of(DistortionKind::kPlainWhite));
  EXPECT_EQ(out, Image(10, 12, 255));
}

TEST(Distortion, HueFullTurnIsNearIdentityAndGreysStay) {
  const Image img = testutil::random_image(20, 20, 6);
  DistortionSpec s = spec_of(DistortionKind::kHueJitter);
  s.hue_shift = 360.0;
  EXPECT_LE(mean_abs_error(img, apply(img, s)), 0.5);
  const Image grey(8, 8, 77);
  s.hue_shift = 72.0;
  EXPECT_EQ(apply(grey, s), grey);
  EXPECT_GT(mean_abs_error(img, apply(img, s)), 5.0);
}

TEST(Distortion, HueShiftOfPureRed) {
  Image red(1, 1);
  red.pixel(0, 0)[0] = 255;
  DistortionSpec s = spec_of(DistortionKind::kHueJitter);
  s.hue_shift = 120.0;
  const Image out = apply(red, s);
  EXPECT_EQ(out.pixel(0, 0)[0], 0);
  EXPECT_EQ(out.pixel(0, 0)[1], 255);
  EXPECT_EQ(out.pixel(0, 0)[2], 0);
}

TEST(Distortion, PatchJitterKeyedByItem) {
  const Image img(100, 70, 128);
  DistortionSpec s = spec_of(DistortionKind::kPatchColorJitter);
  s.seed = 9;
  s.patch = 32;
  const Image a = apply(img, s, {.item = 3});
  EXPECT_EQ(a, apply(img, s, {.item = 3}));
  EXPECT_NE(a, apply(img, s, {.item = 4}));
  for (int y = 0; y < 70; ++y)
    for (int x = 0; x < 100; ++x)
      for (int c = 0; c < 3; ++c) {
        ASSERT_LE(std::abs(int(a.pixel(x, y)[c]) - 128), s.strength);
        // Constant within a patch, including the ragged border patches.
        ASSERT_EQ(a.pixel(x, y)[c], a.pixel(x / 32 * 32, y / 32 * 32)[c]);
      }
}

TEST(Distortion, MaskFallbackCoversFortyPercent) {
  const Image img(100, 80, 0);
  const Image out = apply(img, spec_of(DistortionKind::kMaskGarment));
  int white = 0;
  for (int y = 0; y < 80; ++y)
    for (int x = 0; x < 100; ++x) white += out.pixel(x, y)[0] == 255;
  EXPECT_NEAR(white / 8000.0, 0.4, 0.01);
  EXPECT_EQ(out.pixel(50, 40)[0], 255);
  EXPECT_EQ(out.pixel(0, 0)[0], 0);
}

TEST(Distortion, MaskImageAndColourKey) {
  const Image img(4, 2, 10);
  Image mask(4, 2, 0);
  mask.pixel(1, 0)[0] = 255;
  mask.pixel(2, 1)[1] = 7;
  const Image out = apply(img, spec_of(DistortionKind::kMaskGarment), {.mask = &mask});
  EXPECT_EQ(out.pixel(1, 0)[2], 255);
  EXPECT_EQ(out.pixel(2, 1)[2], 255);
  EXPECT_EQ(out.pixel(0, 0)[2], 10);
  DistortionSpec keyed = spec_of(DistortionKind::kMaskGarment);
  keyed.mask_rgb = std::array<std::uint8_t, 3>{0, 7, 0};
  const Image only = apply(img, keyed, {.mask = &mask});
  EXPECT_EQ(only.pixel(1, 0)[2], 10);
  EXPECT_EQ(only.pixel(2, 1)[2], 255);
  const Image wrong(3, 2, 0);
  EXPECT_ERRC(apply(img, spec_of(DistortionKind::kMaskGarment), {.mask = &wrong}), Errc::kMaskSizeMismatch);
}

TEST(Distortion, ParameterValidation) {
  const Image img(8, 8, 0);
  DistortionSpec s = spec_of(DistortionKind::kPosterize);
  s.bits = 0;
  EXPECT_ERRC(apply(img, s), Errc::kInvalidParams);
  s = spec_of(DistortionKind::kRotate);
  s.angle = 46.0;
  EXPECT_ERRC(apply(img, s), Errc::kInvalidParams);
  s = spec_of(DistortionKind::kPatchColorJitter);
  s.patch = 0;
  EXPECT_ERRC(apply(img, s), Errc::kInvalidParams);
}

TEST(StudySpecTest, DefaultsCoverSixCases) {
  const auto cases = default_study_cases(5);
  ASSERT_EQ(cases.size(), 6u);
  const char* labels[] = {"a", "b", "c", "d", "e", "f"};
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(cases[i].label, labels[i]);
    EXPECT_EQ(cases[i].target(), i < 3 ? StudyTarget::kPerson : StudyTarget::kGarment);
  }
  EXPECT_EQ(cases[3].kind, DistortionKind::kPlainWhite);
  EXPECT_EQ(cases[4].kind, DistortionKind::kRotate);
  EXPECT_DOUBLE_EQ(cases[4].angle, 2.0);
}

TEST(StudySpecTest, JsonRoundTrip) {
  const std::string text = R"({"seed": 11, "metrics": ["ssim", "cwssim"],
    "cases": [{"label": "p", "kind": "posterize", "params": {"bits": 3}},
              {"label": "r", "kind": "rotate", "params": {"angle": -5.5}, "seed": 4}]})";
  const StudySpec s = parse_study_spec(text);
  ASSERT_EQ(s.cases.size(), 2u);
  EXPECT_EQ(s.seed, 11u);
  EXPECT_EQ(s.cases[0].bits, 3);
  EXPECT_DOUBLE_EQ(s.cases[1].angle, -5.5);
  const StudySpec again = parse_study_spec(study_spec_to_json(s));
  EXPECT_EQ(study_spec_to_json(again), study_spec_to_json(s));
  EXPECT_ERRC(parse_study_spec(R"({"cases":[{"label":"x","kind":"blur"}]})"), Errc::kInvalidParams);
  EXPECT_ERRC(parse_study_spec("[1,2"), Errc::kInvalidParams);
}

class StudyRun : public ::testing::Test {
 protected:
  void SetUp() override {
    fs::create_directories(dir_ / "person");
    fs::create_directories(dir_ / "garment");
    for (int i = 0; i < 4; ++i) {
      save_png(testutil::blob_image(64, 80, 10 + i), dir_ / "person" / ("p" + std::to_string(i) + ".png"));
      save_png(testutil::blob_image(64, 80, 20 + i), dir_ / "garment" / ("p" + std::to_string(i) + ".png"));
    }
    manifest_ = build_manifest(dir_ / "person", dir_ / "garment", "test");
  }
  testutil::TempDir dir_{"study"};
  DatasetManifest manifest_;
};

TEST_F(StudyRun, IdentityDistortionScoresPerfect) {
  StudySpec spec;
  DistortionSpec p8 = spec_of(DistortionKind::kPosterize);
  p8.bits = 8;
  spec.cases = {p8};
  spec.metrics = {Metric::kSsim, Metric::kDists};
  DatasetManifest one = manifest_;
  one.entries.resize(1);
  const StudyResult r = run_study(one, spec, &testutil::synthetic_weights());
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].count, 1u);
  EXPECT_NEAR(r.rows[0].values[0], 1.0, 1e-12);
  EXPECT_NEAR(r.rows[0].values[1], 0.0, 1e-6);
}

TEST_F(StudyRun, ThreadCountAndRepeatInvariant) {
  StudySpec spec;
  spec.cases = default_study_cases(3);
  spec.metrics = {Metric::kSsim, Metric::kMsSsim, Metric::kCwSsim};
  const StudyResult a = run_study(manifest_, spec, nullptr, {.threads = 1});
  const StudyResult b = run_study(manifest_, spec, nullptr, {.threads = 4});
  const StudyResult c = run_study(manifest_, spec, nullptr, {.threads = 4});
  EXPECT_EQ(study_to_json(a), study_to_json(b));
  EXPECT_EQ(study_to_json(b), study_to_json(c));
  EXPECT_EQ(study_to_csv(a), study_to_csv(b));
  ASSERT_EQ(a.rows.size(), 6u);
}

TEST_F(StudyRun, BadItemsAreSkippedAndRecorded) {
  DatasetManifest m = manifest_;
  m.entries[1].garment = dir_ / "garment" / "missing.png";
  StudySpec spec;
  spec.cases = {spec_of(DistortionKind::kPlainWhite)};
  spec.metrics = {Metric::kSsim};
  const StudyResult r = run_study(m, spec, nullptr);
  EXPECT_EQ(r.rows[0].count, 3u);
  ASSERT_EQ(r.rows[0].skipped.size(), 1u);
  EXPECT_NE(r.rows[0].skipped[0].find("p1"), std::string::npos);
}

TEST_F(StudyRun, DeepMetricWithoutWeightsFails) {
  StudySpec spec;
  spec.cases = {spec_of(DistortionKind::kPlainWhite)};
  spec.metrics = {Metric::kLpips};
  EXPECT_ERRC(run_study(manifest_, spec, nullptr), Errc::kMissingWeights);
}

TEST_F(StudyRun, MaterializedImagesMatchApply) {
  StudySpec spec;
  DistortionSpec rot = spec_of(DistortionKind::kRotate);
  rot.label = "e";
  spec.cases = {rot};
  spec.metrics = {Metric::kSsim};
  StudyOptions opts;
  opts.materialize_dir = dir_ / "out";
  run_study(manifest_, spec, nullptr, opts);
  const Image written = load_image(dir_ / "out" / "e" / "p2.png");
  EXPECT_EQ(written, apply(load_image(dir_ / "garment" / "p2.png"), rot));
}

}  // namespace
}  // namespace vtoff
