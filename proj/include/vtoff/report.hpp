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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vtoff/metrics.hpp"

namespace vtoff {

std::string sha256_hex(std::string_view bytes);

struct ReportRow {
  std::string id;
  std::vector<double> values;  // unit scale, in report column order
};

// Per-pair rows plus their mean. Values are stored at unit scale and the
// table factors are applied only when rendering the "scaled" block.
struct MetricReport {
  std::string command;
  std::vector<Metric> metrics;
  std::vector<ReportRow> rows;  // sorted by id
  std::vector<double> aggregate;
  std::vector<std::string> skipped;
  std::string config_json;  // canonical config the hash was taken over
  std::string config_hash;
  std::map<std::string, std::string> metadata;

  // Fills `aggregate` with the compensated mean of each column, rows taken in id order.
  void compute_aggregate();
  std::vector<double> scaled_aggregate() const;
};

std::string render_json(const MetricReport& r);
std::string render_csv(const MetricReport& r);
std::string render_summary(const MetricReport& r);

// Writes `bytes` to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string engine_version();

// Decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace vtoff
