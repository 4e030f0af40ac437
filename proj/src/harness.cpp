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
#include "vtoff/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vtoff/error.hpp"
#include "vtoff/log.hpp"
#include "vtoff/parallel.hpp"
#include "vtoff/vgg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vtoff {

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kIo, path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string file_sha256(const fs::path& path) { return sha256_hex(read_text(path)); }

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::map<std::string, fs::path> images_by_stem(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(Errc::kEmptyDirectory, dir.string() + ": not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::map<std::string, fs::path> out;
  for (const auto& f : files)
    if (!out.emplace(f.stem().string(), f).second) log_warning(f.string() + ": stem already seen, ignored");
  if (out.empty()) fail(Errc::kEmptyDirectory, dir.string() + ": no images");
  return out;
}

std::optional<WeightArchive> load_weights_if(const RunConfig& cfg, bool needed, std::string* hash) {
  if (!needed) return std::nullopt;
  const auto path = resolve_weights(cfg);
  if (!path) fail(Errc::kMissingWeights, std::string("no weight archive; pass --weights or set ") + kWeightsDirEnv);
  if (!fs::exists(*path)) fail(Errc::kMissingWeights, path->string() + ": weight archive not found");
  const std::string bytes = read_text(*path);
  if (hash) *hash = sha256_hex(bytes);
  return WeightArchive::parse(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

bool any_deep(const std::vector<Metric>& ms) {
  return std::any_of(ms.begin(), ms.end(), [](Metric m) { return is_deep_metric(m); });
}

json metric_list_json(const std::vector<Metric>& ms) {
  json a = json::array();
  for (Metric m : ms) a.push_back(metric_name(m));
  return a;
}

std::string with_inputs(const RunConfig& cfg, const std::string& command, const json& inputs) {
  json j = json::parse(cfg.canonical_json());
  j["command"] = command;
  j["inputs"] = inputs;
  return j.dump();
}

void write_outputs(const RunConfig& cfg, const std::string& json_text, const std::string& csv_text) {
  if (cfg.out_json) write_file_atomic(*cfg.out_json, json_text);
  if (cfg.out_csv) write_file_atomic(*cfg.out_csv, csv_text);
}

}  // namespace

void RunConfig::merge_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::kInvalidParams, std::string("config: ") + e.what());
  }
  if (!j.is_object()) fail(Errc::kInvalidParams, "config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "metrics") {
        std::string joined;
        if (v.is_string()) {
          joined = v.get<std::string>();
        } else {
          for (const auto& m : v) joined += m.get<std::string>() + ",";
        }
        metrics = parse_metric_list(joined);
      } else if (key == "weights") {
        weights = fs::path(v.get<std::string>());
      } else if (key == "threads") {
        threads = v.get<int>();
      } else if (key == "resolution") {
        const auto p = resolution_policy_from_name(v.get<std::string>());
        if (!p) fail(Errc::kInvalidParams, "config: unknown resolution policy '" + v.get<std::string>() + "'");
        metric_options.resolution = *p;
      } else if (key == "dists_resize") {
        metric_options.perceptual.dists_resize = v.get<bool>();
      } else if (key == "ssim_auto_downsample") {
        metric_options.ssim.auto_downsample = v.get<bool>();
      } else if (key == "cwssim_levels") {
        metric_options.cw_ssim.pooled_levels = v.get<std::vector<int>>();
      } else if (key == "pairs") {
        pairs_file = fs::path(v.get<std::string>());
      } else if (key == "native_features") {
        native_features = v.get<bool>();
      } else if (key == "near_duplicates") {
        near_duplicates = v.get<bool>();
      } else if (key == "materialize_dir") {
        materialize_dir = fs::path(v.get<std::string>());
      } else if (key == "out_json") {
        out_json = fs::path(v.get<std::string>());
      } else if (key == "out_csv") {
        out_csv = fs::path(v.get<std::string>());
      } else {
        fail(Errc::kInvalidParams, "config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    fail(Errc::kInvalidParams, std::string("config: ") + e.what());
  }
  if (threads < 1) fail(Errc::kInvalidParams, "config: threads must be >= 1");
}

std::string RunConfig::canonical_json() const {
  json j;
  j["metrics"] = metric_list_json(metrics);
  j["resolution"] = resolution_policy_name(metric_options.resolution);
  j["dists_resize"] = metric_options.perceptual.dists_resize;
  j["dists_short_side"] = metric_options.perceptual.dists_short_side;
  j["ssim_auto_downsample"] = metric_options.ssim.auto_downsample;
  j["msssim_weights"] = metric_options.ms_ssim.scale_weights;
  j["cwssim_levels"] = metric_options.cw_ssim.pooled_levels;
  j["cwssim_orientations"] = metric_options.cw_ssim.pyramid.orientations;
  j["cwssim_window"] = metric_options.cw_ssim.window;
  j["native_features"] = native_features;
  j["near_duplicates"] = near_duplicates;
  return j.dump();
}

std::optional<fs::path> resolve_weights(const RunConfig& cfg) {
  if (cfg.weights) return cfg.weights;
  if (const char* dir = std::getenv(kWeightsDirEnv); dir && *dir) {
    fs::path p = fs::path(dir) / kWeightsFileName;
    if (fs::exists(p)) return p;
  }
  return std::nullopt;
}

std::vector<std::pair<std::string, std::string>> read_pairs_file(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a)) continue;
    if (a[0] == '#') continue;
    if (!(ls >> b) || (ls >> extra))
      fail(Errc::kInvalidParams, path.string() + ":" + std::to_string(lineno) + ": expected two columns");
    out.emplace_back(fs::path(a).stem().string(), fs::path(b).stem().string());
  }
  if (out.empty()) fail(Errc::kInvalidParams, path.string() + ": no pairs");
  return out;
}

MetricReport cmd_score(const fs::path& pred_dir, const fs::path& gt_dir, const RunConfig& cfg) {
  const auto preds = images_by_stem(pred_dir);
  const auto gts = images_by_stem(gt_dir);

  std::vector<std::pair<std::string, std::string>> pairs;
  if (cfg.pairs_file) {
    pairs = read_pairs_file(*cfg.pairs_file);
  } else {
    for (const auto& [stem, p] : preds) pairs.emplace_back(stem, stem);
  }
  std::vector<std::string> missing;
  std::set<std::string> ids;
  for (const auto& [p, g] : pairs) {
    if (!preds.count(p)) missing.push_back(p + " (prediction)");
    if (!gts.count(g)) missing.push_back(g);
    if (!ids.insert(p).second) fail(Errc::kInvalidParams, "prediction '" + p + "' paired twice");
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    fail(Errc::kUnpairedFiles, "unpaired stems: " + list);
  }
  if (!cfg.pairs_file)
    for (const auto& [stem, g] : gts)
      if (!preds.count(stem)) log_warning("ground truth '" + stem + "' has no prediction");
  std::sort(pairs.begin(), pairs.end());

  const std::vector<Metric> metrics = cfg.metrics.empty() ? default_pair_metrics() : cfg.metrics;
  std::string weights_hash;
  const auto weights = load_weights_if(cfg, any_deep(metrics), &weights_hash);
  const PairScorer scorer(metrics, weights ? &*weights : nullptr, cfg.metric_options);

  MetricReport r;
  r.command = "score";
  r.metrics = metrics;
  r.rows.resize(pairs.size());
  std::vector<std::string> hashes(pairs.size() * 2);
  parallel_for(pairs.size(), cfg.threads, [&](std::size_t i) {
    const fs::path& pp = preds.at(pairs[i].first);
    const fs::path& gp = gts.at(pairs[i].second);
    hashes[2 * i] = file_sha256(pp);
    hashes[2 * i + 1] = file_sha256(gp);
    r.rows[i].id = pairs[i].first;
    r.rows[i].values = scorer.score(load_image(gp), load_image(pp));
  });
  r.compute_aggregate();

  json inputs = json::object();
  for (std::size_t i = 0; i < pairs.size(); ++i)
    inputs[pairs[i].first] = {pairs[i].second, hashes[2 * i], hashes[2 * i + 1]};
  json in = {{"pairs", inputs}, {"weights", weights_hash}};
  r.config_json = with_inputs(cfg, "score", in);
  r.config_hash = sha256_hex(r.config_json);
  r.metadata["pairs"] = std::to_string(pairs.size());
  write_outputs(cfg, render_json(r), render_csv(r));
  return r;
}

FeatureSet native_features(const fs::path& image_dir, const WeightArchive& archive, int threads) {
  const auto images = images_by_stem(image_dir);
  std::vector<fs::path> paths;
  for (const auto& [stem, p] : images) paths.push_back(p);
  const Vgg16Weights weights(archive);
  FeatureSet f;
  f.count = static_cast<int>(paths.size());
  f.dim = kVggStageChannels[5];
  f.extractor = "vgg-native";
  f.data.assign(static_cast<std::size_t>(f.count) * f.dim, 0.0f);
  parallel_for(paths.size(), threads, [&](std::size_t i) {
    const VggFeatures feats = vgg16_features(load_image(paths[i]), VggConfig{}, weights);
    const Tensor& t = feats.stages[5];
    const std::size_t hw = static_cast<std::size_t>(t.h()) * t.w();
    for (int c = 0; c < t.c(); ++c) {
      const float* p = t.plane(0, c);
      double s = 0.0;
      for (std::size_t k = 0; k < hw; ++k) s += p[k];
      f.data[i * f.dim + c] = static_cast<float>(s / static_cast<double>(hw));
    }
  });
  return f;
}

MetricReport cmd_dist(const fs::path& pred, const fs::path& gt, const RunConfig& cfg) {
  FeatureSet a, b;
  json in;
  if (cfg.native_features) {
    std::string wh;
    const auto weights = load_weights_if(cfg, true, &wh);
    a = native_features(pred, *weights, cfg.threads);
    b = native_features(gt, *weights, cfg.threads);
    in["weights"] = wh;
    in["pred"] = sha256_hex(std::string_view(reinterpret_cast<const char*>(a.data.data()), a.data.size() * sizeof(float)));
    in["gt"] = sha256_hex(std::string_view(reinterpret_cast<const char*>(b.data.data()), b.data.size() * sizeof(float)));
  } else {
    a = load_features(pred);
    b = load_features(gt);
    in["pred"] = file_sha256(pred);
    in["gt"] = file_sha256(gt);
  }
  if (a.extractor != b.extractor)
    fail(Errc::kExtractorMismatch, "feature extractors differ: '" + a.extractor + "' vs '" + b.extractor + "'");
  if (a.dim != b.dim) fail(Errc::kDimensionMismatch, "feature dimensions differ");

  const Metric fd = a.extractor == "clip" ? Metric::kFdClip : Metric::kFid;
  std::vector<Metric> metrics;
  if (cfg.metrics.empty()) {
    metrics = {fd, Metric::kKid};
  } else {
    for (Metric m : cfg.metrics) {
      if (m == Metric::kFid || m == Metric::kFdClip) {
        if (m != fd)
          fail(Errc::kExtractorMismatch, std::string(metric_name(m)) + " requested for '" + a.extractor + "' features");
        metrics.push_back(fd);
      } else if (m == Metric::kKid) {
        metrics.push_back(m);
      } else {
        fail(Errc::kInvalidParams, std::string(metric_name(m)) + " is not a distribution metric");
      }
    }
  }

  MetricReport r;
  r.command = "dist";
  r.metrics = metrics;
  ReportRow row;
  row.id = "pred_vs_gt";
  std::optional<double> fd_value;
  for (Metric m : metrics) {
    if (m == Metric::kKid) {
      row.values.push_back(kid(a, b));
    } else {
      if (!fd_value) fd_value = frechet_distance(gaussian_stats(a), gaussian_stats(b));
      row.values.push_back(*fd_value);
    }
  }
  r.rows.push_back(std::move(row));
  r.compute_aggregate();
  r.metadata["extractor"] = a.extractor;
  r.metadata["pred_count"] = std::to_string(a.count);
  r.metadata["gt_count"] = std::to_string(b.count);
  r.metadata["dim"] = std::to_string(a.dim);
  r.config_json = with_inputs(cfg, "dist", in);
  r.config_hash = sha256_hex(r.config_json);
  write_outputs(cfg, render_json(r), render_csv(r));
  return r;
}

StudyResult cmd_distort(const fs::path& manifest_path, const std::optional<fs::path>& spec_path, const RunConfig& cfg) {
  const DatasetManifest manifest = read_manifest(manifest_path);
  StudySpec spec;
  if (spec_path) {
    spec = parse_study_spec(read_text(*spec_path));
  } else {
    spec.cases = default_study_cases(0);
    spec.metrics = default_pair_metrics();
  }
  if (!cfg.metrics.empty()) {
    for (Metric m : cfg.metrics)
      if (!is_pair_metric(m)) fail(Errc::kInvalidParams, std::string(metric_name(m)) + " is not a per-pair metric");
    spec.metrics = cfg.metrics;
  }
  std::string wh;
  const auto weights = load_weights_if(cfg, !spec.cases.empty() && any_deep(spec.metrics), &wh);
  StudyOptions opts;
  opts.threads = cfg.threads;
  opts.metric_options = cfg.metric_options;
  opts.materialize_dir = cfg.materialize_dir;
  StudyResult r = run_study(manifest, spec, weights ? &*weights : nullptr, opts);

  json items = json::array();
  for (const auto& e : manifest.entries)
    items.push_back({e.id, to_hex(e.person_hash), to_hex(e.garment_hash)});
  json in = {{"manifest", file_sha256(manifest_path)}, {"study", json::parse(study_spec_to_json(spec))},
             {"weights", wh}};
  r.config_hash = sha256_hex(with_inputs(cfg, "distort", in));
  write_outputs(cfg, study_to_json(r), study_to_csv(r));
  return r;
}

DatasetManifest cmd_manifest(const fs::path& person_dir, const fs::path& garment_dir, const std::string& split,
                             const std::optional<fs::path>& mask_dir, const RunConfig& cfg) {
  ManifestOptions opts;
  opts.threads = cfg.threads;
  opts.mask_dir = mask_dir;
  if (cfg.pairs_file) opts.pairs = read_pairs_file(*cfg.pairs_file);
  DatasetManifest m = build_manifest(person_dir, garment_dir, split, opts);
  if (cfg.out_json) write_file_atomic(*cfg.out_json, manifest_to_jsonl(m));
  return m;
}

DuplicateReport cmd_dedup(const fs::path& manifest, const RunConfig& cfg) {
  DedupOptions opts;
  opts.near_duplicates = cfg.near_duplicates;
  DuplicateReport r = find_duplicates(read_manifest(manifest), opts);
  if (cfg.out_json) write_file_atomic(*cfg.out_json, report_to_json(r, "dedup"));
  return r;
}

LeakResult cmd_leak(const fs::path& train_manifest, const fs::path& test_manifest) {
  const DatasetManifest train = read_manifest(train_manifest);
  const DatasetManifest test = read_manifest(test_manifest);
  return {find_leakage(train, test), cleaned_counts(train, test)};
}

std::string leak_to_json(const LeakResult& r) {
  json j = json::parse(report_to_json(r.report, "leak"));
  j["cleaned"] = {{"train", r.cleaned.train}, {"test", r.cleaned.test}};
  return j.dump(2) + "\n";
}

std::string cpu_description() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) return line.substr(line.find_first_not_of(" \t", colon + 1));
    }
  }
  return "unknown";
}

BenchResult cmd_bench(const fs::path& fixture_dir, const RunConfig& cfg) {
  const auto images = images_by_stem(fixture_dir);
  std::vector<Image> refs, cands;
  DistortionSpec rot;
  rot.kind = DistortionKind::kRotate;
  for (const auto& [stem, p] : images) {
    refs.push_back(load_image(p));
    cands.push_back(apply(refs.back(), rot));
  }
  std::vector<Metric> metrics = cfg.metrics.empty() ? default_pair_metrics() : cfg.metrics;
  std::optional<WeightArchive> weights;
  if (any_deep(metrics)) {
    if (resolve_weights(cfg)) {
      weights = load_weights_if(cfg, true, nullptr);
    } else {
      log_warning("bench: no weight archive, skipping LPIPS and DISTS");
      std::erase_if(metrics, [](Metric m) { return is_deep_metric(m); });
    }
  }
  BenchResult r;
  r.cpu = cpu_description();
  r.pairs = refs.size();
  std::vector<int> thread_counts = {1};
  const int many = cfg.threads > 1 ? cfg.threads : hardware_threads();
  if (many > 1) thread_counts.push_back(many);
  for (Metric m : metrics) {
    const PairScorer scorer({m}, weights ? &*weights : nullptr, cfg.metric_options);
    std::vector<double> first;
    for (int t : thread_counts) {
      std::vector<double> values(refs.size());
      const auto start = std::chrono::steady_clock::now();
      parallel_for(refs.size(), t, [&](std::size_t i) { values[i] = scorer.score(refs[i], cands[i])[0]; });
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      BenchEntry e;
      e.metric = m;
      e.threads = t;
      e.pairs_per_second = secs > 0 ? static_cast<double>(refs.size()) / secs : 0.0;
      if (first.empty()) first = values;
      e.identical = values == first;
      r.entries.push_back(e);
    }
  }
  if (cfg.out_json) write_file_atomic(*cfg.out_json, bench_to_json(r));
  return r;
}

std::string bench_to_json(const BenchResult& r) {
  json j;
  j["engine"] = "vtoff";
  j["engine_version"] = engine_version();
  j["cpu"] = r.cpu;
  j["pairs"] = r.pairs;
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"metric", metric_name(e.metric)},
                       {"threads", e.threads},
                       {"pairs_per_second", e.pairs_per_second},
                       {"identical", e.identical}});
  j["entries"] = entries;
  return j.dump(2) + "\n";
}

}  // namespace vtoff
