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
#include "vtoff/metrics.hpp"

#include <array>
#include <sstream>

#include "vtoff/error.hpp"

namespace vtoff {

namespace {

struct MetricInfo {
  Metric metric;
  std::string_view name;
  double scale;
};

constexpr std::array<MetricInfo, 8> kMetrics = {{
    {Metric::kSsim, "ssim", 100.0},
    {Metric::kMsSsim, "msssim", 100.0},
    {Metric::kCwSsim, "cwssim", 100.0},
    {Metric::kLpips, "lpips", 100.0},
    {Metric::kDists, "dists", 100.0},
    {Metric::kFid, "fid", 1.0},
    {Metric::kFdClip, "fd_clip", 1.0},
    {Metric::kKid, "kid", 1000.0},
}};

const MetricInfo& info(Metric m) {
  for (const auto& i : kMetrics)
    if (i.metric == m) return i;
  fail(Errc::kInternal, "unknown metric");
}

}  // namespace

std::string_view metric_name(Metric m) { return info(m).name; }

std::optional<Metric> metric_from_name(std::string_view name) {
  for (const auto& i : kMetrics)
    if (i.name == name) return i.metric;
  if (name == "ms-ssim" || name == "ms_ssim") return Metric::kMsSsim;
  if (name == "cw-ssim" || name == "cw_ssim") return Metric::kCwSsim;
  if (name == "clip_fid" || name == "clip-fid") return Metric::kFdClip;
  return std::nullopt;
}

double metric_scale(Metric m) { return info(m).scale; }

bool is_pair_metric(Metric m) { return m != Metric::kFid && m != Metric::kFdClip && m != Metric::kKid; }

bool is_deep_metric(Metric m) { return m == Metric::kLpips || m == Metric::kDists; }

std::vector<Metric> parse_metric_list(const std::string& csv) {
  std::vector<Metric> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto m = metric_from_name(item);
    if (!m) fail(Errc::kInvalidParams, "unknown metric '" + item + "'");
    for (Metric seen : out)
      if (seen == *m) fail(Errc::kInvalidParams, "metric '" + item + "' listed twice");
    out.push_back(*m);
  }
  return out;
}

const std::vector<Metric>& default_pair_metrics() {
  static const std::vector<Metric> m = {Metric::kSsim, Metric::kMsSsim, Metric::kCwSsim, Metric::kLpips, Metric::kDists};
  return m;
}

std::string_view resolution_policy_name(ResolutionPolicy p) { return p == ResolutionPolicy::kStrict ? "strict" : "match-gt"; }

std::optional<ResolutionPolicy> resolution_policy_from_name(std::string_view name) {
  if (name == "strict") return ResolutionPolicy::kStrict;
  if (name == "match-gt") return ResolutionPolicy::kMatchGt;
  return std::nullopt;
}

PairScorer::PairScorer(std::vector<Metric> metrics, const WeightArchive* weights, PairMetricOptions opts)
    : metrics_(std::move(metrics)), opts_(std::move(opts)) {
  bool deep = false;
  for (Metric m : metrics_) {
    if (!is_pair_metric(m))
      fail(Errc::kInvalidParams, std::string(metric_name(m)) + " is a distribution metric, not a per-pair one");
    deep = deep || is_deep_metric(m);
  }
  if (deep) {
    if (!weights) fail(Errc::kMissingWeights, "LPIPS/DISTS need a weight archive");
    model_ = std::make_shared<PerceptualModel>(*weights, opts_.perceptual);
  }
}

std::vector<double> PairScorer::score(const Image& reference, const Image& candidate) const {
  const Image* cand = &candidate;
  Image resized;
  if (reference.width() != candidate.width() || reference.height() != candidate.height()) {
    if (opts_.resolution == ResolutionPolicy::kStrict)
      fail(Errc::kDimensionMismatch, "image sizes differ: " + std::to_string(reference.width()) + "x" +
                                         std::to_string(reference.height()) + " vs " +
                                         std::to_string(candidate.width()) + "x" + std::to_string(candidate.height()));
    resized = resize(candidate, reference.width(), reference.height());
    cand = &resized;
  }
  std::optional<Plane> lx, ly;
  auto luma = [&] {
    if (!lx) {
      lx = to_luma(reference);
      ly = to_luma(*cand);
    }
  };
  std::vector<double> out;
  out.reserve(metrics_.size());
  for (Metric m : metrics_) {
    switch (m) {
      case Metric::kSsim:
        luma();
        out.push_back(ssim(*lx, *ly, opts_.ssim).mean);
        break;
      case Metric::kMsSsim:
        luma();
        out.push_back(ms_ssim(*lx, *ly, opts_.ms_ssim));
        break;
      case Metric::kCwSsim:
        luma();
        out.push_back(cw_ssim(*lx, *ly, opts_.cw_ssim));
        break;
      case Metric::kLpips:
        out.push_back(model_->lpips(reference, *cand));
        break;
      case Metric::kDists:
        out.push_back(model_->dists(reference, *cand));
        break;
      default:
        fail(Errc::kInternal, "not a pair metric");
    }
  }
  return out;
}

}  // namespace vtoff
