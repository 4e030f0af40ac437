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
#include "vtoff/vtoff.h"

#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <string>

#include "vtoff/error.hpp"
#include "vtoff/harness.hpp"
#include "vtoff/vgg.hpp"

struct vtoff_config {
  vtoff::RunConfig cfg;
};

struct vtoff_report {
  std::string json;
  std::string csv;
  std::string summary;
  std::string config_hash;
  std::vector<vtoff::Metric> metrics;
  std::vector<double> aggregate;
  bool has_counts = false;
  std::size_t duplicate_pairs = 0;
  std::size_t leaked_pairs = 0;
  std::size_t clean_train = 0;
  std::size_t clean_test = 0;
};

struct vtoff_image {
  vtoff::Image img;
};

struct vtoff_weights {
  vtoff::WeightArchive archive;
  std::mutex mu;
  std::map<vtoff::Metric, std::shared_ptr<const vtoff::PairScorer>> scorers;
};

namespace {

thread_local std::string g_last_error;

vtoff_status to_status(vtoff::Errc code) { return static_cast<vtoff_status>(static_cast<int>(code) + 1); }

template <typename F>
vtoff_status guarded(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return VTOFF_OK;
  } catch (const vtoff::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return VTOFF_E_INTERNAL;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return VTOFF_E_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return VTOFF_E_INTERNAL;
  }
}

vtoff_status invalid(const char* what) {
  g_last_error = what;
  return VTOFF_E_INVALID_PARAMS;
}

std::unique_ptr<vtoff_report> from_metric_report(const vtoff::MetricReport& r) {
  auto out = std::make_unique<vtoff_report>();
  out->json = vtoff::render_json(r);
  out->csv = vtoff::render_csv(r);
  out->summary = vtoff::render_summary(r);
  out->config_hash = r.config_hash;
  out->metrics = r.metrics;
  out->aggregate = r.aggregate;
  return out;
}

std::string counts_summary(const vtoff::DuplicateReport& r, const char* noun) {
  std::string s = std::to_string(r.duplicate_pairs()) + " duplicate pairs in " + std::to_string(r.groups.size()) +
                  " groups";
  if (std::string(noun) == "leak") s = std::to_string(r.leaked_pairs) + " leaked pairs";
  if (!r.near.empty()) s += ", " + std::to_string(r.near.size()) + " near-duplicate candidates";
  return s + "\n";
}

}  // namespace

extern "C" {

const char* vtoff_version(void) {
  static const std::string v = vtoff::engine_version();
  return v.c_str();
}

const char* vtoff_status_name(vtoff_status status) {
  if (status == VTOFF_OK) return "Ok";
  if (status < VTOFF_OK || status > VTOFF_E_INTERNAL) return "Unknown";
  return vtoff::errc_name(static_cast<vtoff::Errc>(static_cast<int>(status) - 1)).data();
}

const char* vtoff_last_error(void) { return g_last_error.c_str(); }

int vtoff_exit_code(vtoff_status status) {
  if (status == VTOFF_OK) return 0;
  if (status < VTOFF_OK || status > VTOFF_E_INTERNAL) return 4;
  return vtoff::exit_code_for(static_cast<vtoff::Errc>(static_cast<int>(status) - 1));
}

vtoff_status vtoff_config_create(const char* json, vtoff_config** out) {
  if (!out) return invalid("null output pointer");
  *out = nullptr;
  return guarded([&] {
    auto c = std::make_unique<vtoff_config>();
    if (json) c->cfg.merge_json(json);
    *out = c.release();
  });
}

vtoff_status vtoff_config_merge(vtoff_config* cfg, const char* json) {
  if (!cfg || !json) return invalid("null argument");
  return guarded([&] {
    vtoff::RunConfig next = cfg->cfg;
    next.merge_json(json);
    cfg->cfg = std::move(next);
  });
}

void vtoff_config_destroy(vtoff_config* cfg) { delete cfg; }

vtoff_status vtoff_score(const vtoff_config* cfg, const char* pred_dir, const char* gt_dir, vtoff_report** out) {
  if (!cfg || !pred_dir || !gt_dir || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = from_metric_report(vtoff::cmd_score(pred_dir, gt_dir, cfg->cfg)).release(); });
}

vtoff_status vtoff_dist(const vtoff_config* cfg, const char* pred, const char* gt, vtoff_report** out) {
  if (!cfg || !pred || !gt || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = from_metric_report(vtoff::cmd_dist(pred, gt, cfg->cfg)).release(); });
}

vtoff_status vtoff_distort(const vtoff_config* cfg, const char* manifest, const char* spec_path, vtoff_report** out) {
  if (!cfg || !manifest || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    std::optional<std::filesystem::path> spec;
    if (spec_path) spec = spec_path;
    const vtoff::StudyResult r = vtoff::cmd_distort(manifest, spec, cfg->cfg);
    auto rep = std::make_unique<vtoff_report>();
    rep->json = vtoff::study_to_json(r);
    rep->csv = vtoff::study_to_csv(r);
    rep->summary = vtoff::study_table(r);
    rep->config_hash = r.config_hash;
    rep->metrics = r.metrics;
    *out = rep.release();
  });
}

vtoff_status vtoff_dataset_manifest(const vtoff_config* cfg, const char* person_dir, const char* garment_dir,
                                    const char* split, const char* mask_dir, vtoff_report** out) {
  if (!cfg || !person_dir || !garment_dir || !split || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    std::optional<std::filesystem::path> masks;
    if (mask_dir) masks = mask_dir;
    const vtoff::DatasetManifest m = vtoff::cmd_manifest(person_dir, garment_dir, split, masks, cfg->cfg);
    auto rep = std::make_unique<vtoff_report>();
    rep->json = vtoff::manifest_to_jsonl(m);
    rep->summary = std::to_string(m.entries.size()) + " pairs, " + std::to_string(m.warnings.size()) + " warnings\n";
    *out = rep.release();
  });
}

vtoff_status vtoff_dataset_dedup(const vtoff_config* cfg, const char* manifest, vtoff_report** out) {
  if (!cfg || !manifest || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    const vtoff::DuplicateReport r = vtoff::cmd_dedup(manifest, cfg->cfg);
    auto rep = std::make_unique<vtoff_report>();
    rep->json = vtoff::report_to_json(r, "dedup");
    rep->summary = counts_summary(r, "dedup");
    rep->has_counts = true;
    rep->duplicate_pairs = r.duplicate_pairs();
    *out = rep.release();
  });
}

vtoff_status vtoff_dataset_leak(const vtoff_config* cfg, const char* train_manifest, const char* test_manifest,
                                vtoff_report** out) {
  if (!cfg || !train_manifest || !test_manifest || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    const vtoff::LeakResult r = vtoff::cmd_leak(train_manifest, test_manifest);
    auto rep = std::make_unique<vtoff_report>();
    rep->json = vtoff::leak_to_json(r);
    rep->summary = counts_summary(r.report, "leak") + "cleaned: " + std::to_string(r.cleaned.train) + " train, " +
                   std::to_string(r.cleaned.test) + " test\n";
    rep->has_counts = true;
    rep->leaked_pairs = r.report.leaked_pairs;
    rep->clean_train = r.cleaned.train;
    rep->clean_test = r.cleaned.test;
    if (cfg->cfg.out_json) vtoff::write_file_atomic(*cfg->cfg.out_json, rep->json);
    *out = rep.release();
  });
}

vtoff_status vtoff_bench(const vtoff_config* cfg, const char* fixture_dir, vtoff_report** out) {
  if (!cfg || !fixture_dir || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    const vtoff::BenchResult r = vtoff::cmd_bench(fixture_dir, cfg->cfg);
    auto rep = std::make_unique<vtoff_report>();
    rep->json = vtoff::bench_to_json(r);
    std::string s = "cpu: " + r.cpu + "\nengine: " + vtoff::engine_version() + "\n";
    char buf[128];
    for (const auto& e : r.entries) {
      std::snprintf(buf, sizeof buf, "  %-8s threads=%-3d %10.2f pairs/s%s\n",
                    std::string(vtoff::metric_name(e.metric)).c_str(), e.threads, e.pairs_per_second,
                    e.identical ? "" : "  VALUES DIFFER");
      s += buf;
    }
    rep->summary = s;
    *out = rep.release();
  });
}

const char* vtoff_report_json(const vtoff_report* r) { return r ? r->json.c_str() : ""; }
const char* vtoff_report_csv(const vtoff_report* r) { return r ? r->csv.c_str() : ""; }
const char* vtoff_report_summary(const vtoff_report* r) { return r ? r->summary.c_str() : ""; }
const char* vtoff_report_config_hash(const vtoff_report* r) { return r ? r->config_hash.c_str() : ""; }

vtoff_status vtoff_report_aggregate(const vtoff_report* r, const char* metric, double* out) {
  if (!r || !metric || !out) return invalid("null argument");
  const auto m = vtoff::metric_from_name(metric);
  if (!m) return invalid("unknown metric");
  for (std::size_t i = 0; i < r->metrics.size() && i < r->aggregate.size(); ++i) {
    if (r->metrics[i] == *m) {
      *out = r->aggregate[i];
      g_last_error.clear();
      return VTOFF_OK;
    }
  }
  return invalid("metric not in report");
}

vtoff_status vtoff_report_counts(const vtoff_report* r, size_t* duplicate_pairs, size_t* leaked_pairs,
                                 size_t* clean_train, size_t* clean_test) {
  if (!r) return invalid("null report");
  if (!r->has_counts) return invalid("report has no dataset counts");
  if (duplicate_pairs) *duplicate_pairs = r->duplicate_pairs;
  if (leaked_pairs) *leaked_pairs = r->leaked_pairs;
  if (clean_train) *clean_train = r->clean_train;
  if (clean_test) *clean_test = r->clean_test;
  return VTOFF_OK;
}

vtoff_status vtoff_report_write(const vtoff_report* r, const char* json_path, const char* csv_path) {
  if (!r) return invalid("null report");
  return guarded([&] {
    if (json_path) vtoff::write_file_atomic(json_path, r->json);
    if (csv_path) vtoff::write_file_atomic(csv_path, r->csv);
  });
}

void vtoff_report_destroy(vtoff_report* r) { delete r; }

vtoff_status vtoff_image_load(const char* path, vtoff_image** out) {
  if (!path || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = new vtoff_image{vtoff::load_image(path)}; });
}

vtoff_status vtoff_image_from_rgb(const uint8_t* rgb, int width, int height, vtoff_image** out) {
  if (!rgb || !out) return invalid("null argument");
  if (width <= 0 || height <= 0) return invalid("image dimensions must be positive");
  *out = nullptr;
  return guarded([&] {
    const std::size_t n = static_cast<std::size_t>(width) * height * 3;
    *out = new vtoff_image{vtoff::Image(width, height, std::vector<std::uint8_t>(rgb, rgb + n))};
  });
}

int vtoff_image_width(const vtoff_image* img) { return img ? img->img.width() : 0; }
int vtoff_image_height(const vtoff_image* img) { return img ? img->img.height() : 0; }
void vtoff_image_destroy(vtoff_image* img) { delete img; }

vtoff_status vtoff_weights_load(const char* path, vtoff_weights** out) {
  if (!path || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    if (!std::filesystem::exists(path))
      vtoff::fail(vtoff::Errc::kMissingWeights, std::string(path) + ": weight archive not found");
    auto w = std::make_unique<vtoff_weights>();
    w->archive = vtoff::load_archive(path);
    *out = w.release();
  });
}

void vtoff_weights_destroy(vtoff_weights* w) { delete w; }

vtoff_status vtoff_write_synthetic_weights(const char* path, uint64_t seed) {
  if (!path) return invalid("null path");
  return guarded([&] { vtoff::synthesize_weights(seed).write(path); });
}

vtoff_status vtoff_pair_metric(const char* metric, const vtoff_image* reference, const vtoff_image* candidate,
                               const vtoff_weights* weights, double* out) {
  if (!metric || !reference || !candidate || !out) return invalid("null argument");
  const auto m = vtoff::metric_from_name(metric);
  if (!m) return invalid("unknown metric");
  return guarded([&] {
    std::shared_ptr<const vtoff::PairScorer> scorer;
    if (weights && vtoff::is_deep_metric(*m)) {
      auto* w = const_cast<vtoff_weights*>(weights);
      std::lock_guard lock(w->mu);
      auto& slot = w->scorers[*m];
      if (!slot) slot = std::make_shared<const vtoff::PairScorer>(std::vector{*m}, &w->archive);
      scorer = slot;
    } else {
      scorer = std::make_shared<const vtoff::PairScorer>(std::vector{*m}, weights ? &weights->archive : nullptr);
    }
    *out = scorer->score(reference->img, candidate->img)[0];
  });
}

}  // extern "C"
