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

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vtoff/tensor.hpp"

namespace vtoff {

struct TensorRecord {
  std::vector<std::int64_t> shape;
  std::vector<float> values;

  std::int64_t element_count() const;
};

// Flat tensor store: u64 little-endian header length, a JSON header mapping
// tensor name -> {"dtype", "shape", "data_offsets"} plus an optional
// "__metadata__" string map, then the raw float32 payload.
class WeightArchive {
 public:
  static WeightArchive parse(std::span<const std::uint8_t> bytes);

  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  const TensorRecord& get(const std::string& name) const;
  // Named tensor as NCHW; shapes of rank < 4 are left-padded with 1s.
  Tensor tensor4(const std::string& name) const;

  std::vector<std::string> names() const;  // sorted
  std::size_t size() const noexcept { return tensors_.size(); }

  const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }
  void set_metadata(const std::string& key, const std::string& value) { metadata_[key] = value; }

  void add(const std::string& name, std::vector<std::int64_t> shape, std::vector<float> values);

  // Deterministic encoding: tensors in name order, header padded to 8 bytes.
  std::vector<std::uint8_t> serialize() const;
  // Writes to a temporary sibling and renames it into place.
  void write(const std::filesystem::path& path) const;

 private:
  std::unordered_map<std::string, TensorRecord> tensors_;
  std::map<std::string, std::string> metadata_;
};

WeightArchive load_archive(const std::filesystem::path& path);

}  // namespace vtoff
