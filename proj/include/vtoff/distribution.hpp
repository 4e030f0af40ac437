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
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vtoff/archive.hpp"

namespace vtoff {

// N feature vectors of dimension D, row-major, with the extractor that
// produced them ("inception-pool3", "clip", "vgg-native", ...).
struct FeatureSet {
  int count = 0;
  int dim = 0;
  std::vector<float> data;
  std::string extractor = "unknown";

  const float* row(int i) const { return data.data() + static_cast<std::size_t>(i) * dim; }
};

// Dense symmetric matrix in double precision.
struct SymMatrix {
  int n = 0;
  std::vector<double> v;

  SymMatrix() = default;
  explicit SymMatrix(int size) : n(size), v(static_cast<std::size_t>(size) * size, 0.0) {}
  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return v[static_cast<std::size_t>(i) * n + j]; }
};

struct GaussianStats {
  std::vector<double> mean;
  SymMatrix cov;
};

struct EigenDecomposition {
  std::vector<double> values;
  SymMatrix vectors;  // column j is the eigenvector of values[j]
  int sweeps = 0;
};

// Cyclic Jacobi; throws EigFailure when 100 sweeps do not converge.
EigenDecomposition jacobi_eigen(const SymMatrix& m, int max_sweeps = 100);

// Principal square root of a symmetric PSD matrix, eigenvalues clamped at 0.
SymMatrix sqrtm_psd(const SymMatrix& m);

GaussianStats gaussian_stats(const FeatureSet& f);

// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)), evaluated through
// the symmetric product S_a^(1/2) S_b S_a^(1/2).
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

// Unbiased squared MMD with the cubic polynomial kernel (x.y / D + 1)^3.
double kid(const FeatureSet& a, const FeatureSet& b);

FeatureSet load_features(const std::filesystem::path& path);
WeightArchive features_to_archive(const FeatureSet& f);
void save_features(const FeatureSet& f, const std::filesystem::path& path);

}  // namespace vtoff
