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
#include "vtoff/distribution.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "vtoff/error.hpp"
#include "vtoff/log.hpp"

namespace vtoff {

namespace {

constexpr double kSingularJitter = 1e-6;

double trace(const SymMatrix& m) {
  double t = 0.0;
  for (int i = 0; i < m.n; ++i) t += m.at(i, i);
  return t;
}

// V diag(f(lambda)) V^T
SymMatrix compose(const EigenDecomposition& e, const std::vector<double>& diag) {
  const int n = e.vectors.n;
  SymMatrix out(n);
  std::vector<double> scaled(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) scaled[static_cast<std::size_t>(i) * n + k] = e.vectors.at(i, k) * diag[k];
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      const double* si = &scaled[static_cast<std::size_t>(i) * n];
      for (int k = 0; k < n; ++k) s += si[k] * e.vectors.at(j, k);
      out.at(i, j) = s;
      out.at(j, i) = s;
    }
  return out;
}

SymMatrix multiply_sym(const SymMatrix& a, const SymMatrix& b) {
  // Plain row-major product; the result is generally not symmetric, so
  // callers symmetrize.
  const int n = a.n;
  SymMatrix out(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      const double* brow = &b.v[static_cast<std::size_t>(k) * n];
      double* orow = &out.v[static_cast<std::size_t>(i) * n];
      for (int j = 0; j < n; ++j) orow[j] += aik * brow[j];
    }
  return out;
}

void symmetrize(SymMatrix& m) {
  for (int i = 0; i < m.n; ++i)
    for (int j = i + 1; j < m.n; ++j) {
      const double s = 0.5 * (m.at(i, j) + m.at(j, i));
      m.at(i, j) = s;
      m.at(j, i) = s;
    }
}

SymMatrix transpose(const SymMatrix& m) {
  SymMatrix out(m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) out.at(j, i) = m.at(i, j);
  return out;
}

// Cholesky with a relative pivot floor; a pivot at or below it means the
// matrix is singular to working precision.
bool is_singular(const SymMatrix& m) {
  const int n = m.n;
  double max_diag = 0.0;
  for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(m.at(i, i)));
  if (max_diag == 0.0) return true;
  const double floor = 1e-12 * max_diag;
  std::vector<double> l(static_cast<std::size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j) {
    const double* lj = &l[static_cast<std::size_t>(j) * n];
    double pivot = m.at(j, j);
    for (int k = 0; k < j; ++k) pivot -= lj[k] * lj[k];
    if (!(pivot > floor)) return true;
    const double root = std::sqrt(pivot);
    l[static_cast<std::size_t>(j) * n + j] = root;
    for (int i = j + 1; i < n; ++i) {
      double* li = &l[static_cast<std::size_t>(i) * n];
      double v = m.at(i, j);
      for (int k = 0; k < j; ++k) v -= li[k] * lj[k];
      li[j] = v / root;
    }
  }
  return false;
}

void add_diagonal(SymMatrix& m, double d) {
  for (int i = 0; i < m.n; ++i) m.at(i, i) += d;
}

void check_finite(const FeatureSet& f, const std::string& where) {
  for (float v : f.data)
    if (!std::isfinite(v)) fail(Errc::kNonFinite, where + ": feature set contains non-finite values");
}

}  // namespace

EigenDecomposition jacobi_eigen(const SymMatrix& input, int max_sweeps) {
  const int n = input.n;
  SymMatrix a = input;
  // Eigenvectors are accumulated as rows and transposed on return, so every
  // rotation touches contiguous memory except the mirrored column writes.
  SymMatrix vt(n);
  for (int i = 0; i < n; ++i) vt.at(i, i) = 1.0;
  EigenDecomposition e;
  const auto finish = [&](int sweeps) {
    e.sweeps = sweeps;
    e.values.resize(n);
    for (int i = 0; i < n; ++i) e.values[i] = a.at(i, i);
    e.vectors = SymMatrix(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) e.vectors.at(j, i) = vt.at(i, j);
    return e;
  };

  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += std::abs(a.at(p, q));
    if (off == 0.0) return finish(sweep - 1);
    const double threshold = sweep < 4 ? 0.2 * off / (static_cast<double>(n) * n) : 0.0;
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        const double g = 100.0 * std::abs(apq);
        const double app = a.at(p, p), aqq = a.at(q, q);
        // Drop off-diagonal entries that no longer affect either diagonal.
        if (sweep > 4 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq)) {
          a.at(p, q) = 0.0;
          a.at(q, p) = 0.0;
          continue;
        }
        if (std::abs(apq) <= threshold || apq == 0.0) continue;
        rotated = true;
        const double h = aqq - app;
        double t;
        if (std::abs(h) + g == std::abs(h)) {
          t = apq / h;
        } else {
          const double theta = 0.5 * h / apq;
          t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        double* rp = &a.v[static_cast<std::size_t>(p) * n];
        double* rq = &a.v[static_cast<std::size_t>(q) * n];
        for (int r = 0; r < n; ++r) {
          const double arp = rp[r], arq = rq[r];
          rp[r] = arp - s * (arq + tau * arp);
          rq[r] = arq + s * (arp - tau * arq);
        }
        rp[p] = app - t * apq;
        rq[q] = aqq + t * apq;
        rp[q] = 0.0;
        rq[p] = 0.0;
        for (int r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          a.at(r, p) = rp[r];
          a.at(r, q) = rq[r];
        }
        double* vp = &vt.v[static_cast<std::size_t>(p) * n];
        double* vq = &vt.v[static_cast<std::size_t>(q) * n];
        for (int r = 0; r < n; ++r) {
          const double vrp = vp[r], vrq = vq[r];
          vp[r] = vrp - s * (vrq + tau * vrp);
          vq[r] = vrq + s * (vrp - tau * vrq);
        }
      }
    }
    if (!rotated && sweep > 4) return finish(sweep);
  }
  fail(Errc::kEigFailure, "Jacobi eigensolver did not converge in " + std::to_string(max_sweeps) + " sweeps");
}

SymMatrix sqrtm_psd(const SymMatrix& m) {
  const EigenDecomposition e = jacobi_eigen(m);
  std::vector<double> roots(e.values.size());
  for (std::size_t i = 0; i < roots.size(); ++i) roots[i] = std::sqrt(std::max(e.values[i], 0.0));
  SymMatrix r = compose(e, roots);
#ifndef NDEBUG
  {
    SymMatrix sq = multiply_sym(r, r);
    double err = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < sq.v.size(); ++i) {
      err += (sq.v[i] - m.v[i]) * (sq.v[i] - m.v[i]);
      norm += m.v[i] * m.v[i];
    }
    bool psd = true;
    for (double v : e.values) psd = psd && v >= -1e-9 * std::sqrt(norm);
    assert(!psd || std::sqrt(err) <= 1e-5 * std::max(std::sqrt(norm), 1e-300));
  }
#endif
  return r;
}

GaussianStats gaussian_stats(const FeatureSet& f) {
  if (f.count < 2) fail(Errc::kTooFewSamples, "Gaussian statistics need at least two samples");
  const int d = f.dim;
  GaussianStats st;
  st.mean.assign(d, 0.0);
  for (int i = 0; i < f.count; ++i) {
    const float* r = f.row(i);
    for (int j = 0; j < d; ++j) st.mean[j] += r[j];
  }
  for (double& m : st.mean) m /= f.count;
  st.cov = SymMatrix(d);
  std::vector<double> centered(d);
  for (int i = 0; i < f.count; ++i) {
    const float* r = f.row(i);
    for (int j = 0; j < d; ++j) centered[j] = r[j] - st.mean[j];
    for (int j = 0; j < d; ++j) {
      const double cj = centered[j];
      double* row = &st.cov.v[static_cast<std::size_t>(j) * d];
      for (int k = j; k < d; ++k) row[k] += cj * centered[k];
    }
  }
  const double denom = f.count - 1.0;
  for (int j = 0; j < d; ++j)
    for (int k = j; k < d; ++k) {
      const double v = st.cov.at(j, k) / denom;
      st.cov.at(j, k) = v;
      st.cov.at(k, j) = v;
    }
  return st;
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  const int d = static_cast<int>(a.mean.size());
  if (static_cast<int>(b.mean.size()) != d || a.cov.n != d || b.cov.n != d)
    fail(Errc::kDimensionMismatch, "Frechet distance needs statistics of the same dimension");

  double mean_term = 0.0;
  for (int i = 0; i < d; ++i) mean_term += (a.mean[i] - b.mean[i]) * (a.mean[i] - b.mean[i]);

  SymMatrix sa = a.cov, sb = b.cov;
  if (is_singular(sa) || is_singular(sb)) {
    add_diagonal(sa, kSingularJitter);
    add_diagonal(sb, kSingularJitter);
  }
  const EigenDecomposition ea = jacobi_eigen(sa);
  std::vector<double> roots(d);
  for (int i = 0; i < d; ++i) roots[i] = std::sqrt(std::max(ea.values[i], 0.0));
  // Sa^(1/2) Sb Sa^(1/2) is V R (V^T Sb V) R V^T. The outer V does not change
  // the spectrum, so the graded middle factor is decomposed directly; it keeps
  // the small eigenvalues that rounding would swamp in the composed product.
  SymMatrix inner = multiply_sym(transpose(ea.vectors), multiply_sym(sb, ea.vectors));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) inner.at(i, j) *= roots[i] * roots[j];
  symmetrize(inner);
  const EigenDecomposition ei = jacobi_eigen(inner);
  double trace_sqrt = 0.0;
  for (double v : ei.values) trace_sqrt += std::sqrt(std::max(v, 0.0));
  return mean_term + trace(sa) + trace(sb) - 2.0 * trace_sqrt;
}

double kid(const FeatureSet& a, const FeatureSet& b) {
  if (a.count < 2 || b.count < 2) fail(Errc::kTooFewSamples, "KID needs at least two samples per set");
  if (a.dim != b.dim) fail(Errc::kDimensionMismatch, "KID feature sets differ in dimension");
  const int d = a.dim;
  const auto kernel = [d](const float* x, const float* y) {
    double dot = 0.0;
    for (int i = 0; i < d; ++i) dot += static_cast<double>(x[i]) * y[i];
    const double base = dot / d + 1.0;
    return base * base * base;
  };
  double kxx = 0.0, kyy = 0.0, kxy = 0.0;
  for (int i = 0; i < a.count; ++i)
    for (int j = 0; j < a.count; ++j)
      if (i != j) kxx += kernel(a.row(i), a.row(j));
  for (int i = 0; i < b.count; ++i)
    for (int j = 0; j < b.count; ++j)
      if (i != j) kyy += kernel(b.row(i), b.row(j));
  for (int i = 0; i < a.count; ++i)
    for (int j = 0; j < b.count; ++j) kxy += kernel(a.row(i), b.row(j));
  const double m = a.count, n = b.count;
  return kxx / (m * (m - 1.0)) + kyy / (n * (n - 1.0)) - 2.0 * kxy / (m * n);
}

FeatureSet load_features(const std::filesystem::path& path) {
  const WeightArchive ar = load_archive(path);
  if (!ar.contains("features")) fail(Errc::kMissingTensor, path.string() + ": no 'features' tensor");
  const TensorRecord& rec = ar.get("features");
  if (rec.shape.size() != 2 || rec.shape[0] < 1 || rec.shape[1] < 1)
    fail(Errc::kBadHeader, path.string() + ": 'features' must be a non-empty [N, D] tensor");
  FeatureSet f;
  f.count = static_cast<int>(rec.shape[0]);
  f.dim = static_cast<int>(rec.shape[1]);
  f.data = rec.values;
  const auto it = ar.metadata().find("extractor");
  if (it == ar.metadata().end()) {
    log_warning(path.string() + ": no 'extractor' metadata; tagging features as 'unknown'");
    f.extractor = "unknown";
  } else {
    f.extractor = it->second;
  }
  check_finite(f, path.string());
  return f;
}

WeightArchive features_to_archive(const FeatureSet& f) {
  WeightArchive ar;
  ar.add("features", {f.count, f.dim}, f.data);
  ar.set_metadata("extractor", f.extractor);
  return ar;
}

void save_features(const FeatureSet& f, const std::filesystem::path& path) { features_to_archive(f).write(path); }

}  // namespace vtoff
