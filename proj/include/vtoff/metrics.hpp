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

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vtoff/archive.hpp"
#include "vtoff/image.hpp"
#include "vtoff/perceptual.hpp"
#include "vtoff/pyramid.hpp"
#include "vtoff/ssim.hpp"

namespace vtoff {

enum class Metric { kSsim, kMsSsim, kCwSsim, kLpips, kDists, kFid, kFdClip, kKid };

std::string_view metric_name(Metric m);
std::optional<Metric> metric_from_name(std::string_view name);
// Factor applied when a unit-scale value is rendered in a table.
double metric_scale(Metric m);
bool is_pair_metric(Metric m);
bool is_deep_metric(Metric m);

std::vector<Metric> parse_metric_list(const std::string& csv);
const std::vector<Metric>& default_pair_metrics();

enum class ResolutionPolicy {
  kStrict,   // sizes must match
  kMatchGt,  // the candidate is resized to the reference size
};

std::string_view resolution_policy_name(ResolutionPolicy p);
std::optional<ResolutionPolicy> resolution_policy_from_name(std::string_view name);

struct PairMetricOptions {
  SsimParams ssim;
  MsSsimParams ms_ssim;
  CwSsimParams cw_ssim;
  PerceptualOptions perceptual;
  ResolutionPolicy resolution = ResolutionPolicy::kMatchGt;
};

// Scores (reference, candidate) image pairs on a fixed list of per-pair
// metrics. Immutable after construction and safe to share across threads.
class PairScorer {
 public:
  PairScorer(std::vector<Metric> metrics, const WeightArchive* weights, PairMetricOptions opts = {});

  // Values in the order of metrics(), unit scale.
  std::vector<double> score(const Image& reference, const Image& candidate) const;

  const std::vector<Metric>& metrics() const noexcept { return metrics_; }
  const PairMetricOptions& options() const noexcept { return opts_; }

 private:
  std::vector<Metric> metrics_;
  PairMetricOptions opts_;
  std::shared_ptr<const PerceptualModel> model_;
};

}  // namespace vtoff
