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
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "vtoff/vtoff.h"

namespace {

struct Common {
  std::string config_file;
  std::string weights;
  std::string metrics;
  std::string resolution;
  std::string pairs;
  std::string json_out;
  std::string csv_out;
  int threads = 0;
  bool quiet = false;
};

int report_error(vtoff_status st) {
  std::fprintf(stderr, "vtoff: %s: %s\n", vtoff_status_name(st), vtoff_last_error());
  return vtoff_exit_code(st);
}

// Config file first, then whatever flags were given on top.
std::optional<std::string> build_config(const Common& c, nlohmann::json extra, std::string& error) {
  nlohmann::json cfg = nlohmann::json::object();
  if (!c.config_file.empty()) {
    std::ifstream in(c.config_file);
    if (!in) {
      error = c.config_file + ": cannot open config";
      return std::nullopt;
    }
    try {
      cfg = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      error = c.config_file + ": " + e.what();
      return std::nullopt;
    }
  }
  if (!c.weights.empty()) cfg["weights"] = c.weights;
  if (!c.metrics.empty()) cfg["metrics"] = c.metrics;
  if (!c.resolution.empty()) cfg["resolution"] = c.resolution;
  if (!c.pairs.empty()) cfg["pairs"] = c.pairs;
  if (!c.json_out.empty()) cfg["out_json"] = c.json_out;
  if (!c.csv_out.empty()) cfg["out_csv"] = c.csv_out;
  if (c.threads > 0) cfg["threads"] = c.threads;
  if (!cfg.contains("threads")) {
    const unsigned hw = std::thread::hardware_concurrency();
    cfg["threads"] = hw == 0 ? 1 : static_cast<int>(hw);
  }
  for (auto& [k, v] : extra.items()) cfg[k] = v;
  return cfg.dump();
}

template <typename Fn>
int run(const Common& c, const nlohmann::json& extra, Fn&& fn) {
  std::string error;
  const auto text = build_config(c, extra, error);
  if (!text) {
    std::fprintf(stderr, "vtoff: InvalidParams: %s\n", error.c_str());
    return 2;
  }
  vtoff_config* cfg = nullptr;
  if (vtoff_status st = vtoff_config_create(text->c_str(), &cfg); st != VTOFF_OK) return report_error(st);
  vtoff_report* rep = nullptr;
  const vtoff_status st = fn(cfg, &rep);
  vtoff_config_destroy(cfg);
  if (st != VTOFF_OK) return report_error(st);
  if (!c.quiet) std::fputs(vtoff_report_summary(rep), stdout);
  vtoff_report_destroy(rep);
  return 0;
}

void add_common(CLI::App* app, Common& c, bool with_csv) {
  app->add_option("--config", c.config_file, "JSON config file; flags override its keys");
  app->add_option("--weights", c.weights, "Weight archive (default: $VTOFF_WEIGHTS_DIR/vtoff_weights.safetensors)");
  app->add_option("--threads", c.threads, "Worker threads (default: all cores)");
  app->add_option("--json", c.json_out, "Write the JSON report here");
  if (with_csv) app->add_option("--csv", c.csv_out, "Write the CSV table here");
  app->add_flag("-q,--quiet", c.quiet, "Do not print the summary");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vtoff: perceptual metrics and evaluation harness for virtual try-off"};
  app.set_version_flag("--version", std::string(vtoff_version()));
  app.require_subcommand(1);
  Common c;

  std::string a, b, spec, masks, split = "train", materialize;
  bool native = false, near = false;
  std::uint64_t seed = 0;

  auto* score = app.add_subcommand("score", "Per-pair metrics of predictions against ground truth");
  score->add_option("pred_dir", a, "Prediction images")->required();
  score->add_option("gt_dir", b, "Ground-truth images")->required();
  score->add_option("--metrics", c.metrics, "Comma list of ssim,msssim,cwssim,lpips,dists");
  score->add_option("--resolution", c.resolution, "strict or match-gt");
  score->add_option("--pairs", c.pairs, "Two-column file of pred/gt stems");
  add_common(score, c, true);

  auto* dist = app.add_subcommand("dist", "FID / FD-CLIP / KID between two feature sets");
  dist->add_option("pred", a, "Prediction feature archive (or image dir with --native)")->required();
  dist->add_option("gt", b, "Reference feature archive (or image dir with --native)")->required();
  dist->add_option("--metrics", c.metrics, "Comma list of fid,fd_clip,kid");
  dist->add_flag("--native", native, "Use VGG relu5_3 features of image directories");
  add_common(dist, c, true);

  auto* distort = app.add_subcommand("distort", "Run the distortion study over a manifest");
  distort->add_option("manifest", a, "JSONL manifest")->required();
  distort->add_option("--spec", spec, "Study spec JSON (default: the six standard cases)");
  distort->add_option("--metrics", c.metrics, "Override the metrics of the spec");
  distort->add_option("--materialize", materialize, "Also write distorted images under this directory");
  add_common(distort, c, true);

  auto* dataset = app.add_subcommand("dataset", "Manifest construction, deduplication and leakage checks");
  dataset->require_subcommand(1);
  auto* manifest = dataset->add_subcommand("manifest", "Pair person and garment images by stem and hash them");
  manifest->add_option("person_dir", a, "Person images")->required();
  manifest->add_option("garment_dir", b, "Garment images")->required();
  manifest->add_option("--split", split, "Split tag (train/test)");
  manifest->add_option("--masks", masks, "Directory of garment masks paired by stem");
  manifest->add_option("--pairs", c.pairs, "Two-column file of person/garment stems");
  manifest->add_option("-o,--out", c.json_out, "Write the JSONL manifest here");
  manifest->add_option("--config", c.config_file, "JSON config file");
  manifest->add_option("--threads", c.threads, "Worker threads");
  manifest->add_flag("-q,--quiet", c.quiet, "Do not print the summary");
  auto* dedup = dataset->add_subcommand("dedup", "Exact duplicate pairs inside one manifest");
  dedup->add_option("manifest", a, "JSONL manifest")->required();
  dedup->add_flag("--near", near, "Also list perceptual-hash near duplicates");
  dedup->add_option("-o,--out", c.json_out, "Write the JSON report here");
  dedup->add_flag("-q,--quiet", c.quiet, "Do not print the summary");
  auto* leak = dataset->add_subcommand("leak", "Test pairs that also appear in the training split");
  leak->add_option("train", a, "Train manifest")->required();
  leak->add_option("test", b, "Test manifest")->required();
  leak->add_option("-o,--out", c.json_out, "Write the JSON report here");
  leak->add_flag("-q,--quiet", c.quiet, "Do not print the summary");

  auto* bench = app.add_subcommand("bench", "Throughput per metric at 1 and N threads");
  bench->add_option("fixture_dir", a, "Directory of images")->required();
  bench->add_option("--metrics", c.metrics, "Comma list of metrics");
  add_common(bench, c, false);

  auto* synth = app.add_subcommand("synth-weights", "Write a deterministic synthetic weight archive");
  synth->add_option("out", a, "Output archive path")->required();
  synth->add_option("--seed", seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    // Usage errors share the input-error exit code.
    return rc == 0 ? 0 : 2;
  }

  if (*score) {
    return run(c, {}, [&](vtoff_config* cfg, vtoff_report** r) { return vtoff_score(cfg, a.c_str(), b.c_str(), r); });
  }
  if (*dist) {
    return run(c, {{"native_features", native}},
               [&](vtoff_config* cfg, vtoff_report** r) { return vtoff_dist(cfg, a.c_str(), b.c_str(), r); });
  }
  if (*distort) {
    nlohmann::json extra = nlohmann::json::object();
    if (!materialize.empty()) extra["materialize_dir"] = materialize;
    return run(c, extra, [&](vtoff_config* cfg, vtoff_report** r) {
      return vtoff_distort(cfg, a.c_str(), spec.empty() ? nullptr : spec.c_str(), r);
    });
  }
  if (*manifest) {
    return run(c, {}, [&](vtoff_config* cfg, vtoff_report** r) {
      const vtoff_status st = vtoff_dataset_manifest(cfg, a.c_str(), b.c_str(), split.c_str(),
                                                     masks.empty() ? nullptr : masks.c_str(), r);
      if (st == VTOFF_OK && c.json_out.empty()) std::fputs(vtoff_report_json(*r), stdout);
      return st;
    });
  }
  if (*dedup) {
    return run(c, {{"near_duplicates", near}},
               [&](vtoff_config* cfg, vtoff_report** r) { return vtoff_dataset_dedup(cfg, a.c_str(), r); });
  }
  if (*leak) {
    return run(c, {}, [&](vtoff_config* cfg, vtoff_report** r) {
      return vtoff_dataset_leak(cfg, a.c_str(), b.c_str(), r);
    });
  }
  if (*bench) {
    return run(c, {}, [&](vtoff_config* cfg, vtoff_report** r) { return vtoff_bench(cfg, a.c_str(), r); });
  }
  if (*synth) {
    if (vtoff_status st = vtoff_write_synthetic_weights(a.c_str(), seed); st != VTOFF_OK) return report_error(st);
    return 0;
  }
  return 2;
}
