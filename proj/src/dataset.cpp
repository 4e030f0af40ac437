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
#include "vtoff/dataset.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "vtoff/error.hpp"
#include "vtoff/log.hpp"
#include "vtoff/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vtoff {

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

// stem -> path, sorted; a stem present under two extensions keeps the
// lexicographically first path and warns.
std::map<std::string, fs::path> list_images(const fs::path& dir, std::vector<std::string>& warnings) {
  if (!fs::is_directory(dir)) fail(Errc::kEmptyDirectory, dir.string() + ": not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::map<std::string, fs::path> out;
  for (const auto& f : files) {
    auto [it, inserted] = out.emplace(f.stem().string(), f);
    if (!inserted) warnings.push_back("duplicate stem '" + it->first + "' in " + dir.string() + "; using " + it->second.filename().string());
  }
  return out;
}

using Key = std::pair<Digest, Digest>;

Key key_of(const ManifestEntry& e) { return {e.person_hash, e.garment_hash}; }

}  // namespace

std::string to_hex(const Digest& d) {
  static const char* digits = "0123456789abcdef";
  std::string s(64, '0');
  for (std::size_t i = 0; i < d.size(); ++i) {
    s[2 * i] = digits[d[i] >> 4];
    s[2 * i + 1] = digits[d[i] & 15];
  }
  return s;
}

Digest digest_from_hex(const std::string& hex) {
  if (hex.size() != 64) fail(Errc::kCorruptFile, "digest must be 64 hex digits");
  Digest d{};
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    fail(Errc::kCorruptFile, "bad hex digit in digest");
  };
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) * 16 + nibble(hex[2 * i + 1]));
  return d;
}

Digest pixel_hash(const Image& img) {
  std::uint8_t dims[8];
  const auto w = static_cast<std::uint32_t>(img.width()), h = static_cast<std::uint32_t>(img.height());
  for (int i = 0; i < 4; ++i) {
    dims[i] = static_cast<std::uint8_t>(w >> (8 * i));
    dims[4 + i] = static_cast<std::uint8_t>(h >> (8 * i));
  }
  Digest d{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) fail(Errc::kInternal, "EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 && EVP_DigestUpdate(ctx, dims, sizeof dims) == 1 &&
                  EVP_DigestUpdate(ctx, img.data().data(), img.data().size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, d.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok || len != d.size()) fail(Errc::kInternal, "SHA-256 failed");
  return d;
}

std::uint64_t dhash64(const Image& img) {
  GeometrySpec spec;
  spec.interpolation = Interpolation::kBilinear;
  const Plane luma = to_luma(resize(img, 9, 8, spec));
  std::uint64_t h = 0;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) h = (h << 1) | (luma.at(x + 1, y) > luma.at(x, y) ? 1u : 0u);
  return h;
}

DatasetManifest build_manifest(const fs::path& person_dir, const fs::path& garment_dir, const std::string& split,
                               const ManifestOptions& opts) {
  DatasetManifest m;
  const auto persons = list_images(person_dir, m.warnings);
  const auto garments = list_images(garment_dir, m.warnings);
  if (persons.empty()) fail(Errc::kEmptyDirectory, person_dir.string() + ": no images");
  if (garments.empty()) fail(Errc::kEmptyDirectory, garment_dir.string() + ": no images");
  std::map<std::string, fs::path> masks;
  if (opts.mask_dir) masks = list_images(*opts.mask_dir, m.warnings);

  if (opts.pairs.empty()) {
    for (const auto& [stem, path] : persons) {
      auto g = garments.find(stem);
      if (g == garments.end()) {
        m.warnings.push_back("person '" + stem + "' has no garment");
        continue;
      }
      ManifestEntry e;
      e.id = stem;
      e.person = path;
      e.garment = g->second;
      m.entries.push_back(std::move(e));
    }
    for (const auto& [stem, path] : garments)
      if (!persons.count(stem)) m.warnings.push_back("garment '" + stem + "' has no person");
  } else {
    std::set<std::string> seen;
    for (const auto& [ps, gs] : opts.pairs) {
      auto p = persons.find(ps);
      auto g = garments.find(gs);
      if (p == persons.end() || g == garments.end()) {
        m.warnings.push_back("pair '" + ps + "' / '" + gs + "' not found");
        continue;
      }
      if (!seen.insert(ps).second) fail(Errc::kInvalidParams, "pair id '" + ps + "' listed twice");
      ManifestEntry e;
      e.id = ps;
      e.person = p->second;
      e.garment = g->second;
      m.entries.push_back(std::move(e));
    }
    std::sort(m.entries.begin(), m.entries.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  }
  if (m.entries.empty()) fail(Errc::kUnpairedFiles, "no person/garment pairs matched");

  for (auto& e : m.entries) {
    e.split = split;
    if (auto k = masks.find(e.id); k != masks.end()) e.mask = k->second;
  }
  parallel_for(m.entries.size(), opts.threads, [&](std::size_t i) {
    ManifestEntry& e = m.entries[i];
    const Image p = load_image(e.person);
    const Image g = load_image(e.garment);
    e.person_hash = pixel_hash(p);
    e.garment_hash = pixel_hash(g);
    e.person_dhash = dhash64(p);
    e.garment_dhash = dhash64(g);
  });
  for (const auto& w : m.warnings) log_warning(w);
  return m;
}

std::string manifest_to_jsonl(const DatasetManifest& m) {
  std::string out;
  for (const auto& e : m.entries) {
    json j;
    j["id"] = e.id;
    j["person"] = e.person.generic_string();
    j["garment"] = e.garment.generic_string();
    j["person_hash"] = to_hex(e.person_hash);
    j["garment_hash"] = to_hex(e.garment_hash);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(e.person_dhash));
    j["person_phash"] = buf;
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(e.garment_dhash));
    j["garment_phash"] = buf;
    j["split"] = e.split;
    if (e.mask) j["mask"] = e.mask->generic_string();
    out += j.dump();
    out += '\n';
  }
  return out;
}

DatasetManifest manifest_from_jsonl(const std::string& text) {
  DatasetManifest m;
  std::istringstream in(text);
  std::string line;
  std::set<std::string> ids;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ManifestEntry e;
      e.id = j.at("id").get<std::string>();
      e.person = j.at("person").get<std::string>();
      e.garment = j.at("garment").get<std::string>();
      e.split = j.value("split", "");
      if (j.contains("person_hash")) e.person_hash = digest_from_hex(j["person_hash"].get<std::string>());
      if (j.contains("garment_hash")) e.garment_hash = digest_from_hex(j["garment_hash"].get<std::string>());
      if (j.contains("person_phash")) e.person_dhash = std::stoull(j["person_phash"].get<std::string>(), nullptr, 16);
      if (j.contains("garment_phash")) e.garment_dhash = std::stoull(j["garment_phash"].get<std::string>(), nullptr, 16);
      if (j.contains("mask")) e.mask = fs::path(j["mask"].get<std::string>());
      if (!ids.insert(e.id).second) fail(Errc::kInvalidParams, "duplicate pair id '" + e.id + "'");
      m.entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      fail(Errc::kCorruptFile, "manifest line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  std::sort(m.entries.begin(), m.entries.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return m;
}

void write_manifest(const DatasetManifest& m, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::kIo, path.string() + ": cannot open for writing");
  out << manifest_to_jsonl(m);
  if (!out) fail(Errc::kIo, path.string() + ": write failed");
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kIo, path.string() + ": cannot open manifest");
  std::stringstream ss;
  ss << in.rdbuf();
  DatasetManifest m = manifest_from_jsonl(ss.str());
  // Relative paths in a manifest are relative to the manifest itself.
  const fs::path base = path.parent_path();
  for (auto& e : m.entries) {
    if (e.person.is_relative()) e.person = base / e.person;
    if (e.garment.is_relative()) e.garment = base / e.garment;
    if (e.mask && e.mask->is_relative()) e.mask = base / *e.mask;
  }
  return m;
}

DuplicateReport find_duplicates(const DatasetManifest& m, const DedupOptions& opts) {
  DuplicateReport r;
  std::vector<const ManifestEntry*> sorted;
  for (const auto& e : m.entries) {
    sorted.push_back(&e);
    (e.split == "test" ? r.entries_test : r.entries_train)++;
  }
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });
  std::map<Key, std::vector<std::string>> groups;
  for (const auto* e : sorted) groups[key_of(*e)].push_back(e->id);
  for (auto& [key, ids] : groups) {
    if (ids.size() < 2) continue;
    for (std::size_t i = 1; i < ids.size(); ++i) r.removals.push_back(ids[i]);
    r.groups.push_back({std::move(ids)});
  }
  std::sort(r.groups.begin(), r.groups.end(), [](const auto& a, const auto& b) { return a.ids.front() < b.ids.front(); });
  std::sort(r.removals.begin(), r.removals.end());

  if (opts.near_duplicates) {
    for (std::size_t i = 0; i < sorted.size(); ++i)
      for (std::size_t j = i + 1; j < sorted.size(); ++j) {
        const auto* a = sorted[i];
        const auto* b = sorted[j];
        if (key_of(*a) == key_of(*b)) continue;
        const int d = std::max(std::popcount(a->person_dhash ^ b->person_dhash),
                               std::popcount(a->garment_dhash ^ b->garment_dhash));
        if (d <= opts.hamming_threshold) r.near.push_back({a->id, b->id, d});
      }
  }
  return r;
}

std::size_t DuplicateReport::duplicate_pairs() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.ids.size() - 1;
  return n;
}

DuplicateReport find_leakage(const DatasetManifest& train, const DatasetManifest& test) {
  DuplicateReport r;
  r.entries_train = train.entries.size();
  r.entries_test = test.entries.size();
  std::map<Key, std::vector<std::string>> train_keys;
  for (const auto& e : train.entries) train_keys[key_of(e)].push_back(e.id);
  for (auto& [k, ids] : train_keys) std::sort(ids.begin(), ids.end());

  std::map<Key, std::vector<std::string>> test_keys;
  for (const auto& e : test.entries) test_keys[key_of(e)].push_back(e.id);
  for (auto& [k, ids] : test_keys) {
    auto t = train_keys.find(k);
    if (t == train_keys.end()) continue;
    std::sort(ids.begin(), ids.end());
    ++r.leaked_pairs;
    for (const auto& test_id : ids) {
      for (const auto& train_id : t->second) r.leaks.push_back({train_id, test_id});
      r.removals.push_back(test_id);
    }
  }
  std::sort(r.leaks.begin(), r.leaks.end(), [](const auto& a, const auto& b) {
    return std::tie(a.test_id, a.train_id) < std::tie(b.test_id, b.train_id);
  });
  std::sort(r.removals.begin(), r.removals.end());
  return r;
}

CleanCounts cleaned_counts(const DatasetManifest& train, const DatasetManifest& test) {
  std::set<Key> train_keys, test_keys;
  for (const auto& e : train.entries) train_keys.insert(key_of(e));
  for (const auto& e : test.entries)
    if (!train_keys.count(key_of(e))) test_keys.insert(key_of(e));
  return {train_keys.size(), test_keys.size()};
}

std::string report_to_json(const DuplicateReport& r, const std::string& kind) {
  json j;
  j["kind"] = kind;
  j["entries"] = {{"train", r.entries_train}, {"test", r.entries_test}};
  j["duplicate_pairs"] = r.duplicate_pairs();
  j["leaked_pairs"] = r.leaked_pairs;
  json groups = json::array();
  for (const auto& g : r.groups) groups.push_back(g.ids);
  j["groups"] = groups;
  json leaks = json::array();
  for (const auto& l : r.leaks) leaks.push_back({{"train", l.train_id}, {"test", l.test_id}});
  j["leaks"] = leaks;
  j["removals"] = r.removals;
  if (!r.near.empty()) {
    json near = json::array();
    for (const auto& n : r.near) near.push_back({{"a", n.a}, {"b", n.b}, {"distance", n.distance}});
    j["near_duplicates"] = near;
  }
  return j.dump(2) + "\n";
}

}  // namespace vtoff
