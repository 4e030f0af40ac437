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
#include "vtoff/report.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "vtoff/error.hpp"
#include "vtoff/numeric.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace vtoff {

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(Errc::kInternal, "SHA-256 failed");
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += digits[md[i] >> 4];
    s += digits[md[i] & 15];
  }
  return s;
}

std::string engine_version() { return VTOFF_VERSION; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void MetricReport::compute_aggregate() {
  aggregate.assign(metrics.size(), 0.0);
  if (rows.empty()) return;
  for (std::size_t c = 0; c < metrics.size(); ++c) {
    CompensatedSum s;
    for (const auto& row : rows) s.add(row.values.at(c));
    aggregate[c] = s.value() / static_cast<double>(rows.size());
  }
}

std::vector<double> MetricReport::scaled_aggregate() const {
  std::vector<double> out(aggregate.size());
  for (std::size_t c = 0; c < aggregate.size(); ++c) out[c] = aggregate[c] * metric_scale(metrics[c]);
  return out;
}

std::string render_json(const MetricReport& r) {
  ordered_json j;
  j["command"] = r.command;
  ordered_json meta;
  meta["engine"] = "vtoff";
  meta["engine_version"] = engine_version();
  meta["config_hash"] = r.config_hash;
  for (const auto& [k, v] : r.metadata) meta[k] = v;
  j["metadata"] = meta;
  j["config"] = r.config_json.empty() ? ordered_json::object() : ordered_json::parse(r.config_json);
  ordered_json metrics = ordered_json::array(), scaling = ordered_json::object();
  for (Metric m : r.metrics) {
    metrics.push_back(metric_name(m));
    scaling[std::string(metric_name(m))] = metric_scale(m);
  }
  j["metrics"] = metrics;
  j["scaling"] = scaling;
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.rows) {
    ordered_json o;
    o["id"] = row.id;
    for (std::size_t c = 0; c < r.metrics.size(); ++c) o[std::string(metric_name(r.metrics[c]))] = row.values[c];
    rows.push_back(o);
  }
  j["rows"] = rows;
  ordered_json agg = ordered_json::object(), scaled = ordered_json::object();
  const auto sc = r.scaled_aggregate();
  for (std::size_t c = 0; c < r.metrics.size() && c < r.aggregate.size(); ++c) {
    agg[std::string(metric_name(r.metrics[c]))] = r.aggregate[c];
    scaled[std::string(metric_name(r.metrics[c]))] = sc[c];
  }
  j["aggregate"] = agg;
  j["scaled"] = scaled;
  j["count"] = r.rows.size();
  j["skipped"] = r.skipped;
  return j.dump(2) + "\n";
}

std::string render_csv(const MetricReport& r) {
  std::string out = "id";
  for (Metric m : r.metrics) {
    out += ',';
    out += metric_name(m);
  }
  out += '\n';
  auto line = [&](const std::string& id, const std::vector<double>& values) {
    out += id;
    for (double v : values) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  };
  for (const auto& row : r.rows) line(row.id, row.values);
  if (r.aggregate.size() == r.metrics.size()) {
    line("__mean__", r.aggregate);
    line("__scaled__", r.scaled_aggregate());
  }
  return out;
}

std::string render_summary(const MetricReport& r) {
  std::string out = r.command + ": " + std::to_string(r.rows.size()) + " rows";
  if (!r.skipped.empty()) out += ", " + std::to_string(r.skipped.size()) + " skipped";
  out += "\n";
  const auto sc = r.scaled_aggregate();
  for (std::size_t c = 0; c < r.metrics.size() && c < sc.size(); ++c) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %-8s %12.4f  (x%g)\n", std::string(metric_name(r.metrics[c])).c_str(), sc[c],
                  metric_scale(r.metrics[c]));
    out += buf;
  }
  out += "  config  " + r.config_hash + "\n";
  return out;
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::kIo, tmp.string() + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(Errc::kIo, tmp.string() + ": write failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(Errc::kIo, path.string() + ": rename failed: " + ec.message());
}

}  // namespace vtoff
