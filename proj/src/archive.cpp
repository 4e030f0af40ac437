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
#include "vtoff/archive.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "vtoff/error.hpp"

namespace vtoff {

static_assert(std::endian::native == std::endian::little, "archive I/O assumes a little-endian host");

std::int64_t TensorRecord::element_count() const {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

namespace {

constexpr std::string_view kMetadataKey = "__metadata__";

struct Range {
  std::uint64_t begin;
  std::uint64_t end;
  std::string name;
};

}  // namespace

WeightArchive WeightArchive::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) fail(Errc::kBadHeader, "archive shorter than its length prefix");
  std::uint64_t header_len = 0;
  std::memcpy(&header_len, bytes.data(), 8);
  if (header_len > bytes.size() - 8) fail(Errc::kBadHeader, "header length exceeds file size");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kBadHeader, std::string("archive header is not valid JSON: ") + e.what());
  }
  if (!header.is_object()) fail(Errc::kBadHeader, "archive header must be a JSON object");

  const std::span<const std::uint8_t> payload = bytes.subspan(8 + header_len);
  WeightArchive ar;
  std::vector<Range> ranges;
  for (const auto& [name, entry] : header.items()) {
    if (name == kMetadataKey) {
      if (!entry.is_object()) fail(Errc::kBadHeader, "__metadata__ must be an object");
      for (const auto& [k, v] : entry.items()) {
        if (!v.is_string()) fail(Errc::kBadHeader, "__metadata__ values must be strings");
        ar.metadata_[k] = v.get<std::string>();
      }
      continue;
    }
    if (!entry.is_object() || !entry.contains("dtype") || !entry.contains("shape") || !entry.contains("data_offsets"))
      fail(Errc::kBadHeader, "tensor '" + name + "' lacks dtype/shape/data_offsets");
    const auto& dtype = entry["dtype"];
    if (!dtype.is_string()) fail(Errc::kBadHeader, "tensor '" + name + "' dtype must be a string");
    if (dtype.get<std::string>() != "F32")
      fail(Errc::kDtypeUnsupported, "tensor '" + name + "' has dtype " + dtype.get<std::string>() + "; only F32 is supported");
    const auto& shape = entry["shape"];
    const auto& offsets = entry["data_offsets"];
    if (!shape.is_array() || !offsets.is_array() || offsets.size() != 2)
      fail(Errc::kBadHeader, "tensor '" + name + "' has malformed shape or offsets");
    TensorRecord rec;
    for (const auto& d : shape) {
      if (!d.is_number_integer() || d.get<std::int64_t>() < 0) fail(Errc::kBadHeader, "tensor '" + name + "' has a bad dimension");
      rec.shape.push_back(d.get<std::int64_t>());
    }
    if (!offsets[0].is_number_unsigned() || !offsets[1].is_number_unsigned())
      fail(Errc::kBadHeader, "tensor '" + name + "' offsets must be non-negative integers");
    const auto begin = offsets[0].get<std::uint64_t>();
    const auto end = offsets[1].get<std::uint64_t>();
    if (end < begin) fail(Errc::kBadHeader, "tensor '" + name + "' has reversed offsets");
    if (end > payload.size()) fail(Errc::kTruncatedPayload, "tensor '" + name + "' extends past the end of the payload");
    if (end - begin != static_cast<std::uint64_t>(rec.element_count()) * sizeof(float))
      fail(Errc::kBadHeader, "tensor '" + name + "' byte range does not match its shape");
    rec.values.resize(static_cast<std::size_t>(rec.element_count()));
    if (!rec.values.empty()) std::memcpy(rec.values.data(), payload.data() + begin, end - begin);
    ranges.push_back({begin, end, name});
    ar.tensors_.emplace(name, std::move(rec));
  }
  std::sort(ranges.begin(), ranges.end(), [](const Range& a, const Range& b) {
    return a.begin != b.begin ? a.begin < b.begin : a.end < b.end;
  });
  for (std::size_t i = 1; i < ranges.size(); ++i)
    if (ranges[i].begin < ranges[i - 1].end && ranges[i].begin != ranges[i].end)
      fail(Errc::kOffsetOverlap, "tensors '" + ranges[i - 1].name + "' and '" + ranges[i].name + "' overlap");
  return ar;
}

const TensorRecord& WeightArchive::get(const std::string& name) const {
  const auto it = tensors_.find(name);
  if (it == tensors_.end()) fail(Errc::kMissingTensor, "archive has no tensor '" + name + "'");
  return it->second;
}

Tensor WeightArchive::tensor4(const std::string& name) const {
  const TensorRecord& rec = get(name);
  if (rec.shape.size() > 4) fail(Errc::kShapeMismatch, "tensor '" + name + "' has rank > 4");
  std::array<int, 4> dims = {1, 1, 1, 1};
  const std::size_t off = 4 - rec.shape.size();
  for (std::size_t i = 0; i < rec.shape.size(); ++i) dims[off + i] = static_cast<int>(rec.shape[i]);
  Tensor t(dims[0], dims[1], dims[2], dims[3]);
  std::copy(rec.values.begin(), rec.values.end(), t.data().begin());
  return t;
}

std::vector<std::string> WeightArchive::names() const {
  std::vector<std::string> out;
  out.reserve(tensors_.size());
  for (const auto& [k, v] : tensors_) out.push_back(k);
  std::sort(out.begin(), out.end());
  return out;
}

void WeightArchive::add(const std::string& name, std::vector<std::int64_t> shape, std::vector<float> values) {
  if (name == kMetadataKey) fail(Errc::kInvalidParams, "reserved tensor name");
  TensorRecord rec{std::move(shape), std::move(values)};
  if (rec.element_count() != static_cast<std::int64_t>(rec.values.size()))
    fail(Errc::kShapeMismatch, "tensor '" + name + "' values do not match its shape");
  tensors_[name] = std::move(rec);
}

std::vector<std::uint8_t> WeightArchive::serialize() const {
  nlohmann::json header = nlohmann::json::object();
  std::uint64_t offset = 0;
  const auto sorted = names();
  for (const auto& name : sorted) {
    const TensorRecord& rec = tensors_.at(name);
    const std::uint64_t bytes = rec.values.size() * sizeof(float);
    header[name] = {{"dtype", "F32"}, {"shape", rec.shape}, {"data_offsets", {offset, offset + bytes}}};
    offset += bytes;
  }
  if (!metadata_.empty()) header[std::string(kMetadataKey)] = metadata_;
  std::string text = header.dump();
  while ((text.size() + 8) % 8 != 0) text.push_back(' ');

  std::vector<std::uint8_t> out(8 + text.size() + offset);
  const std::uint64_t len = text.size();
  std::memcpy(out.data(), &len, 8);
  std::memcpy(out.data() + 8, text.data(), text.size());
  std::uint8_t* dst = out.data() + 8 + text.size();
  for (const auto& name : sorted) {
    const TensorRecord& rec = tensors_.at(name);
    const std::size_t bytes = rec.values.size() * sizeof(float);
    if (bytes != 0) std::memcpy(dst, rec.values.data(), bytes);
    dst += bytes;
  }
  return out;
}

void WeightArchive::write(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::kIo, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(Errc::kIo, "short write to " + tmp.string());
  }
  ec.clear();
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(Errc::kIo, "cannot move archive into place: " + ec.message());
}

WeightArchive load_archive(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) fail(Errc::kIo, path.string() + " is a directory, not an archive");
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kIo, "cannot open archive " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  try {
    return WeightArchive::parse(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace vtoff
