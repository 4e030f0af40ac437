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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vtoff/image.hpp"

namespace vtoff {

using Digest = std::array<std::uint8_t, 32>;

std::string to_hex(const Digest& d);
Digest digest_from_hex(const std::string& hex);

// SHA-256 over width, height (little-endian u32) and the decoded RGB bytes,
// so the same pixels hash equally whatever container they came in.
Digest pixel_hash(const Image& img);

// 64-bit difference hash on a 9x8 luma thumbnail.
std::uint64_t dhash64(const Image& img);

struct ManifestEntry {
  std::string id;
  std::filesystem::path person;
  std::filesystem::path garment;
  Digest person_hash{};
  Digest garment_hash{};
  std::uint64_t person_dhash = 0;
  std::uint64_t garment_dhash = 0;
  std::string split;
  std::optional<std::filesystem::path> mask;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;  // sorted by id
  std::vector<std::string> warnings;
};

struct ManifestOptions {
  int threads = 1;
  // Optional directory of garment masks, paired by stem.
  std::optional<std::filesystem::path> mask_dir;
  // Explicit (person stem, garment stem) pairs instead of stem matching.
  std::vector<std::pair<std::string, std::string>> pairs;
};

DatasetManifest build_manifest(const std::filesystem::path& person_dir, const std::filesystem::path& garment_dir,
                               const std::string& split, const ManifestOptions& opts = {});

std::string manifest_to_jsonl(const DatasetManifest& m);
DatasetManifest manifest_from_jsonl(const std::string& text);
void write_manifest(const DatasetManifest& m, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

struct DuplicateGroup {
  std::vector<std::string> ids;  // sorted; first id is the one kept
};

struct LeakPair {
  std::string train_id;
  std::string test_id;
};

struct NearDuplicate {
  std::string a;
  std::string b;
  int distance = 0;
};

struct DuplicateReport {
  std::vector<DuplicateGroup> groups;
  std::vector<LeakPair> leaks;
  std::vector<NearDuplicate> near;  // only filled by the perceptual pass
  std::size_t entries_train = 0;
  std::size_t entries_test = 0;
  // Pairs that would be dropped by removing all but one member per group.
  std::size_t duplicate_pairs() const;
  // Distinct test contents that also appear in the training split.
  std::size_t leaked_pairs = 0;
  std::vector<std::string> removals;  // ids recommended for removal, sorted
};

struct DedupOptions {
  bool near_duplicates = false;
  int hamming_threshold = 4;
};

DuplicateReport find_duplicates(const DatasetManifest& m, const DedupOptions& opts = {});
DuplicateReport find_leakage(const DatasetManifest& train, const DatasetManifest& test);

struct CleanCounts {
  std::size_t train = 0;
  std::size_t test = 0;
};

// Split sizes after dropping in-split duplicates and leaked test pairs.
CleanCounts cleaned_counts(const DatasetManifest& train, const DatasetManifest& test);

std::string report_to_json(const DuplicateReport& r, const std::string& kind);

}  // namespace vtoff
