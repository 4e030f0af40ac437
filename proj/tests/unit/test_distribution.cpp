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

#include "oracles.hpp"
#include "test_util.hpp"
#include "vtoff/distribution.hpp"
#include "vtoff/log.hpp"

namespace vtoff {
namespace {

FeatureSet random_features(int n, int d, std::uint64_t seed, double shift = 0.0) {
  SplitMix64 rng(seed);
  FeatureSet f;
  f.count = n;
  f.dim = d;
  f.data.resize(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) f.data[static_cast<std::size_t>(i) * d + j] = static_cast<float>(rng.normal() * (1.0 + 0.1 * j) + shift);
  return f;
}

SymMatrix random_spd(int n, std::uint64_t seed, double ridge) {
  SplitMix64 rng(seed);
  std::vector<double> a(static_cast<std::size_t>(n) * n);
  for (double& v : a) v = rng.normal();
  SymMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += a[i * n + k] * a[j * n + k];
      m.at(i, j) = s / n + (i == j ? ridge : 0.0);
    }
  return m;
}

using oracle::kid_double_loop;

TEST(KidOracle, MatchesDoubleLoop) {
  for (int t = 0; t < 6; ++t) {
    const FeatureSet a = random_features(20 + 7 * t, 3 + 5 * t, 100 + t);
    const FeatureSet b = random_features(15 + 11 * t, 3 + 5 * t, 200 + t, 0.3 * t);
    const double want = kid_double_loop(a, b);
    EXPECT_NEAR(kid(a, b), want, 1e-9 * std::max(1.0, std::abs(want))) << t;
  }
}

TEST(Kid, Errors) {
  EXPECT_ERRC(kid(random_features(1, 4, 1), random_features(5, 4, 2)), Errc::kTooFewSamples);
  EXPECT_ERRC(kid(random_features(5, 4, 1), random_features(5, 3, 2)), Errc::kDimensionMismatch);
}

TEST(FrechetOracle, OneDimensionalClosedForm) {
  for (double mu1 : {-2.0, 0.0, 1.5})
    for (double mu2 : {-1.0, 0.0, 3.0})
      for (double s1 : {0.1, 1.0, 2.5})
        for (double s2 : {0.2, 1.0, 4.0}) {
          GaussianStats a{{mu1}, SymMatrix(1)}, b{{mu2}, SymMatrix(1)};
          a.cov.at(0, 0) = s1 * s1;
          b.cov.at(0, 0) = s2 * s2;
          const double want = oracle::frechet_1d(mu1, s1, mu2, s2);
          EXPECT_NEAR(frechet_distance(a, b), want, 1e-9) << mu1 << " " << mu2 << " " << s1 << " " << s2;
        }
}

TEST(Frechet, IdentityAndSymmetry) {
  const GaussianStats a = gaussian_stats(random_features(80, 12, 1));
  const GaussianStats b = gaussian_stats(random_features(60, 12, 2, 0.5));
  EXPECT_NEAR(frechet_distance(a, a), 0.0, 1e-6);
  EXPECT_NEAR(frechet_distance(a, b), frechet_distance(b, a), 1e-6);
  EXPECT_GT(frechet_distance(a, b), 0.0);
}

TEST(Frechet, InvariantToCommonRotation) {
  const int d = 6;
  FeatureSet a = random_features(50, d, 3), b = random_features(40, d, 4, 0.7);
  // Orthogonal matrix from the eigenvectors of a random symmetric matrix.
  const SymMatrix q = jacobi_eigen(random_spd(d, 5, 0.0)).vectors;
  auto rotate = [&](FeatureSet f) {
    for (int i = 0; i < f.count; ++i) {
      std::vector<double> r(d, 0.0);
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) r[j] += q.at(k, j) * f.row(i)[k];
      for (int j = 0; j < d; ++j) f.data[static_cast<std::size_t>(i) * d + j] = static_cast<float>(r[j]);
    }
    return f;
  };
  const double base = frechet_distance(gaussian_stats(a), gaussian_stats(b));
  const double rot = frechet_distance(gaussian_stats(rotate(a)), gaussian_stats(rotate(b)));
  EXPECT_NEAR(base, rot, 1e-4);
}

TEST(Frechet, SingularCovariancesStayFinite) {
  // Fewer samples than dimensions gives rank-deficient covariances.
  const GaussianStats a = gaussian_stats(random_features(4, 10, 6));
  const GaussianStats b = gaussian_stats(random_features(5, 10, 7));
  const double d = frechet_distance(a, b);
  EXPECT_TRUE(std::isfinite(d));
  EXPECT_GT(d, 0.0);
  GaussianStats c = b;
  c.mean.pop_back();
  EXPECT_ERRC(frechet_distance(a, c), Errc::kDimensionMismatch);
}

TEST(GaussianStatsTest, UnbiasedCovariance) {
  FeatureSet f;
  f.count = 3;
  f.dim = 2;
  f.data = {1, 2, 3, 4, 5, 9};
  const GaussianStats s = gaussian_stats(f);
  EXPECT_DOUBLE_EQ(s.mean[0], 3.0);
  EXPECT_DOUBLE_EQ(s.mean[1], 5.0);
  EXPECT_NEAR(s.cov.at(0, 0), 4.0, 1e-12);
  EXPECT_NEAR(s.cov.at(0, 1), 7.0, 1e-12);
  EXPECT_NEAR(s.cov.at(1, 0), 7.0, 1e-12);
  EXPECT_NEAR(s.cov.at(1, 1), 13.0, 1e-12);
  f.count = 1;
  f.data.resize(2);
  EXPECT_ERRC(gaussian_stats(f), Errc::kTooFewSamples);
}

TEST(Jacobi, KnownSpectrum) {
  SymMatrix m(2);
  m.at(0, 0) = 2;
  m.at(0, 1) = m.at(1, 0) = 1;
  m.at(1, 1) = 2;
  EigenDecomposition e = jacobi_eigen(m);
  std::sort(e.values.begin(), e.values.end());
  EXPECT_NEAR(e.values[0], 1.0, 1e-12);
  EXPECT_NEAR(e.values[1], 3.0, 1e-12);
}

TEST(Jacobi, ReconstructsAndOrthonormal) {
  for (int n : {3, 10, 33}) {
    const SymMatrix m = random_spd(n, 40 + n, 0.1);
    const EigenDecomposition e = jacobi_eigen(m);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double r = 0.0, g = 0.0;
        for (int k = 0; k < n; ++k) {
          r += e.vectors.at(i, k) * e.values[k] * e.vectors.at(j, k);
          g += e.vectors.at(k, i) * e.vectors.at(k, j);
        }
        worst = std::max(worst, std::abs(r - m.at(i, j)));
        ASSERT_NEAR(g, i == j ? 1.0 : 0.0, 1e-10);
      }
    EXPECT_LT(worst, 1e-9);
  }
}

TEST(Jacobi, SweepLimitRaises) { EXPECT_ERRC(jacobi_eigen(random_spd(12, 9, 0.1), 1), Errc::kEigFailure); }

TEST(SqrtmOracle, SquareReproducesInput) {
  for (int n : {1, 2, 5, 16, 48}) {
    for (double ridge : {1e-3, 1.0}) {
      const SymMatrix m = random_spd(n, 300 + n, ridge);
      EXPECT_LT(oracle::sqrtm_residual(m, sqrtm_psd(m)), 1e-5) << n;
    }
  }
}

TEST(Features, ArchiveRoundTripAndTags) {
  testutil::TempDir dir("feat");
  FeatureSet f = random_features(10, 7, 1);
  f.extractor = "clip";
  save_features(f, dir / "f.safetensors");
  const FeatureSet g = load_features(dir / "f.safetensors");
  EXPECT_EQ(g.count, 10);
  EXPECT_EQ(g.dim, 7);
  EXPECT_EQ(g.extractor, "clip");
  EXPECT_EQ(g.data, f.data);
}

TEST(Features, MissingTagWarnsAndDefaults) {
  testutil::TempDir dir("feat");
  WeightArchive a;
  a.add("features", {3, 2}, {1, 2, 3, 4, 5, 6});
  a.write(dir / "f.safetensors");
  std::vector<std::string> warnings;
  auto prev = set_log_sink([&](LogLevel lvl, const std::string& m) {
    if (lvl == LogLevel::kWarning) warnings.push_back(m);
  });
  const FeatureSet g = load_features(dir / "f.safetensors");
  set_log_sink(prev);
  EXPECT_EQ(g.extractor, "unknown");
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Features, BadArchives) {
  testutil::TempDir dir("feat");
  WeightArchive nan;
  nan.add("features", {2, 2}, {1, std::nanf(""), 3, 4});
  nan.write(dir / "nan.safetensors");
  EXPECT_ERRC(load_features(dir / "nan.safetensors"), Errc::kNonFinite);
  WeightArchive other;
  other.add("pool3", {2, 2}, {1, 2, 3, 4});
  other.write(dir / "o.safetensors");
  EXPECT_ERRC(load_features(dir / "o.safetensors"), Errc::kMissingTensor);
  WeightArchive flat;
  flat.add("features", {4}, {1, 2, 3, 4});
  flat.write(dir / "f.safetensors");
  EXPECT_ERRC(load_features(dir / "f.safetensors"), Errc::kBadHeader);
}

}  // namespace
}  // namespace vtoff
