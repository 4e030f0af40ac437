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
#include <cstring>
#include <limits>

#include "oracles.hpp"
#include "test_util.hpp"
#include "vtoff/archive.hpp"
#include "vtoff/tensor.hpp"

namespace vtoff {
namespace {

Tensor random_tensor(int n, int c, int h, int w, SplitMix64& rng, double scale = 1.0) {
  Tensor t(n, c, h, w);
  for (float& v : t.data()) v = static_cast<float>(scale * (rng.uniform() * 2.0 - 1.0));
  return t;
}

using oracle::conv_loops;

TEST(ConvOracle, MatchesSixDeepLoop) {
  SplitMix64 rng(77);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + static_cast<int>(rng.next() % 2);
    const int cin = 1 + static_cast<int>(rng.next() % 24);
    const int cout = 1 + static_cast<int>(rng.next() % 40);
    const int k = 1 + 2 * static_cast<int>(rng.next() % 3);
    const int stride = 1 + static_cast<int>(rng.next() % 2);
    const int pad = static_cast<int>(rng.next() % 3);
    const int h = k + static_cast<int>(rng.next() % 20), w = k + static_cast<int>(rng.next() % 20);
    const Tensor x = random_tensor(n, cin, h, w, rng);
    // Fan-in scaled like trained layers, so outputs stay O(1).
    const Tensor wt = random_tensor(cout, cin, k, k, rng, std::sqrt(3.0 / (cin * k * k)));
    std::vector<float> bias;
    if (t % 3 != 0) {
      bias.resize(cout);
      for (float& b : bias) b = static_cast<float>(rng.uniform() - 0.5);
    }
    const ConvParams p{.stride = stride, .pad = pad};
    const Tensor fast = conv2d(x, wt, bias, p);
    const Tensor slow = conv_loops(x, wt, bias, stride, pad);
    const Tensor ref = conv2d_reference(x, wt, bias, p);
    ASSERT_EQ(fast.shape(), slow.shape()) << "shape " << t;
    for (std::size_t i = 0; i < slow.size(); ++i) {
      ASSERT_NEAR(fast.data()[i], slow.data()[i], 1e-5) << "case " << t << " index " << i;
      ASSERT_NEAR(ref.data()[i], slow.data()[i], 1e-5) << "case " << t << " index " << i;
    }
  }
}

TEST(Conv, ShapeErrors) {
  SplitMix64 rng(1);
  const Tensor x = random_tensor(1, 3, 8, 8, rng);
  const Tensor wt = random_tensor(4, 2, 3, 3, rng);
  EXPECT_ERRC(conv2d(x, wt, {}), Errc::kShapeMismatch);
  const Tensor w3 = random_tensor(4, 3, 3, 3, rng);
  std::vector<float> short_bias(3);
  EXPECT_ERRC(conv2d(x, w3, short_bias), Errc::kShapeMismatch);
  EXPECT_ERRC(conv2d(x, w3, {}, {.stride = 0, .pad = 1}), Errc::kInvalidParams);
  EXPECT_ERRC(Tensor(0, 1, 1, 1), Errc::kShapeMismatch);
}

TEST(Gemm, AccumulatesIntoOutput) {
  const float a[6] = {1, 2, 3, 4, 5, 6};     // 2x3
  const float b[6] = {1, 0, 0, 1, 1, 1};     // 3x2
  float c[4] = {10, 10, 10, 10};
  gemm_accumulate(2, 2, 3, a, b, c);
  EXPECT_FLOAT_EQ(c[0], 14);
  EXPECT_FLOAT_EQ(c[1], 15);
  EXPECT_FLOAT_EQ(c[2], 20);
  EXPECT_FLOAT_EQ(c[3], 21);
}

TEST(Pool, MaxTakesBlockMaxAndDropsOddEdge) {
  Tensor x(1, 1, 5, 4);
  for (int y = 0; y < 5; ++y)
    for (int xx = 0; xx < 4; ++xx) x.at(0, 0, y, xx) = static_cast<float>(y * 4 + xx);
  const Tensor p = pool(x, PoolMode::kMax);
  ASSERT_EQ(p.h(), 2);
  ASSERT_EQ(p.w(), 2);
  EXPECT_FLOAT_EQ(p.at(0, 0, 0, 0), 5);
  EXPECT_FLOAT_EQ(p.at(0, 0, 1, 1), 15);
}

TEST(Pool, L2OfConstantIsConstant) {
  Tensor x(1, 2, 9, 6, 3.0f);
  const Tensor p = pool(x, PoolMode::kL2);
  ASSERT_EQ(p.h(), 4);
  ASSERT_EQ(p.w(), 3);
  for (float v : p.data()) EXPECT_NEAR(v, 3.0f, 1e-5);
}

TEST(Pool, L2InteriorUsesHannWeights) {
  Tensor x(1, 1, 6, 6, 0.0f);
  x.at(0, 0, 2, 2) = 4.0f;  // centre tap of output (1,1)
  x.at(0, 0, 2, 3) = 4.0f;  // side tap
  const Tensor p = pool(x, PoolMode::kL2);
  const double expected = std::sqrt((16.0 * 1.0 + 16.0 * 0.5) / 4.0);
  EXPECT_NEAR(p.at(0, 0, 1, 1), expected, 1e-5);
}

TEST(Relu, ClampsNegatives) {
  Tensor x(1, 1, 1, 3);
  x.at(0, 0, 0, 0) = -1;
  x.at(0, 0, 0, 1) = 0;
  x.at(0, 0, 0, 2) = 2;
  relu_inplace(x);
  EXPECT_EQ(x.at(0, 0, 0, 0), 0.0f);
  EXPECT_EQ(x.at(0, 0, 0, 2), 2.0f);
}

std::vector<std::uint8_t> raw_archive(const std::string& header, const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> out(8);
  const std::uint64_t n = header.size();
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(n >> (8 * i));
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

TEST(Archive, RoundTripIsBitExact) {
  WeightArchive a;
  std::vector<float> v = {1.0f, -0.0f, std::numeric_limits<float>::denorm_min(), 3.4e38f, 1e-20f, 0.1f};
  a.add("t.weight", {2, 3}, v);
  a.add("scalarish", {1}, {42.0f});
  a.set_metadata("extractor", "clip");
  const auto bytes = a.serialize();
  const WeightArchive b = WeightArchive::parse(bytes);
  EXPECT_EQ(b.names(), (std::vector<std::string>{"scalarish", "t.weight"}));
  const auto& rec = b.get("t.weight");
  EXPECT_EQ(rec.shape, (std::vector<std::int64_t>{2, 3}));
  ASSERT_EQ(rec.values.size(), v.size());
  EXPECT_EQ(std::memcmp(rec.values.data(), v.data(), v.size() * sizeof(float)), 0);
  EXPECT_EQ(b.metadata().at("extractor"), "clip");
  EXPECT_EQ(b.serialize(), bytes);
}

TEST(Archive, WriteAndLoad) {
  testutil::TempDir dir("arc");
  WeightArchive a;
  a.add("x", {1, 1, 2, 2}, {1, 2, 3, 4});
  a.write(dir / "a.safetensors");
  const WeightArchive b = load_archive(dir / "a.safetensors");
  const Tensor t = b.tensor4("x");
  EXPECT_EQ(t.at(0, 0, 1, 1), 4.0f);
  EXPECT_ERRC(load_archive(dir / "missing.safetensors"), Errc::kIo);
}

TEST(Archive, MalformedInputs) {
  const std::vector<std::uint8_t> eight(8, 0);
  EXPECT_ERRC(WeightArchive::parse(std::vector<std::uint8_t>{1, 2, 3}), Errc::kBadHeader);
  EXPECT_ERRC(WeightArchive::parse(raw_archive("{not json", {})), Errc::kBadHeader);
  auto too_long = raw_archive("{}", {});
  too_long[0] = 200;
  EXPECT_ERRC(WeightArchive::parse(too_long), Errc::kBadHeader);
  EXPECT_ERRC(WeightArchive::parse(raw_archive(R"({"a":{"dtype":"F16","shape":[2],"data_offsets":[0,4]}})", eight)),
              Errc::kDtypeUnsupported);
  EXPECT_ERRC(WeightArchive::parse(raw_archive(R"({"a":{"dtype":"F32","shape":[4],"data_offsets":[0,16]}})", eight)),
              Errc::kTruncatedPayload);
  EXPECT_ERRC(WeightArchive::parse(raw_archive(
                  R"({"a":{"dtype":"F32","shape":[2],"data_offsets":[0,8]},"b":{"dtype":"F32","shape":[1],"data_offsets":[4,8]}})",
                  eight)),
              Errc::kOffsetOverlap);
  EXPECT_ERRC(WeightArchive::parse(raw_archive(R"({"a":{"dtype":"F32","shape":[3],"data_offsets":[0,8]}})", eight)),
              Errc::kBadHeader);
  const WeightArchive ok =
      WeightArchive::parse(raw_archive(R"({"a":{"dtype":"F32","shape":[2],"data_offsets":[0,8]}})", eight));
  EXPECT_ERRC(ok.get("b"), Errc::kMissingTensor);
}

}  // namespace
}  // namespace vtoff
