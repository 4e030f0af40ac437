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
#include "vtoff/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <json.hpp>

#include "vtoff/error.hpp"
#include "vtoff/log.hpp"
#include "vtoff/numeric.hpp"
#include "vtoff/parallel.hpp"
#include "vtoff/report.hpp"
#include "vtoff/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace vtoff {

namespace {

constexpr std::array<std::pair<DistortionKind, std::string_view>, 6> kKinds = {{
    {DistortionKind::kMaskGarment, "mask_garment"},
    {DistortionKind::kHueJitter, "hue_jitter"},
    {DistortionKind::kPatchColorJitter, "patch_color_jitter"},
    {DistortionKind::kPlainWhite, "plain_white"},
    {DistortionKind::kRotate, "rotate"},
    {DistortionKind::kPosterize, "posterize"},
}};

std::uint8_t clamp_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

Image posterize(const Image& img, int bits) {
  Image out = img;
  const auto mask = static_cast<std::uint8_t>(0xFF << (8 - bits));
  for (auto& v : out.data()) v &= mask;
  return out;
}

Image rotate(const Image& img, double degrees) {
  const int w = img.width(), h = img.height();
  Image out(w, h, 255);
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  const double cx = (w - 1) * 0.5, cy = (h - 1) * 0.5;
  auto sample = [&](int x, int y, int ch) -> double {
    if (x < 0 || y < 0 || x >= w || y >= h) return 255.0;
    return img.pixel(x, y)[ch];
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Inverse map: rotate the output position back by -angle (y grows downward).
      const double dx = x - cx, dy = y - cy;
      const double sx = c * dx - s * dy + cx;
      const double sy = s * dx + c * dy + cy;
      const double fx = std::floor(sx), fy = std::floor(sy);
      const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
      const double ax = sx - fx, ay = sy - fy;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = sample(x0, y0, ch) * (1.0 - ax) + sample(x0 + 1, y0, ch) * ax;
        const double bottom = sample(x0, y0 + 1, ch) * (1.0 - ax) + sample(x0 + 1, y0 + 1, ch) * ax;
        out.pixel(x, y)[ch] = clamp_byte(top * (1.0 - ay) + bottom * ay);
      }
    }
  }
  return out;
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double d = mx - mn;
  v = mx;
  s = mx > 0.0 ? d / mx : 0.0;
  if (d == 0.0) {
    h = 0.0;
  } else if (mx == r) {
    h = 60.0 * std::fmod((g - b) / d + 6.0, 6.0);
  } else if (mx == g) {
    h = 60.0 * ((b - r) / d + 2.0);
  } else {
    h = 60.0 * ((r - g) / d + 4.0);
  }
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r1 = 0, g1 = 0, b1 = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r1 = c; g1 = x; break;
    case 1: r1 = x; g1 = c; break;
    case 2: g1 = c; b1 = x; break;
    case 3: g1 = x; b1 = c; break;
    case 4: r1 = x; b1 = c; break;
    default: r1 = c; b1 = x; break;
  }
  const double m = v - c;
  r = r1 + m;
  g = g1 + m;
  b = b1 + m;
}

Image hue_jitter(const Image& img, double shift) {
  Image out = img;
  double delta = std::fmod(shift, 360.0);
  if (delta < 0) delta += 360.0;
  auto px = out.data();
  for (std::size_t i = 0; i < px.size(); i += 3) {
    double h, s, v;
    rgb_to_hsv(px[i] / 255.0, px[i + 1] / 255.0, px[i + 2] / 255.0, h, s, v);
    if (s == 0.0) continue;
    h = std::fmod(h + delta, 360.0);
    double r, g, b;
    hsv_to_rgb(h, s, v, r, g, b);
    px[i] = clamp_byte(r * 255.0);
    px[i + 1] = clamp_byte(g * 255.0);
    px[i + 2] = clamp_byte(b * 255.0);
  }
  return out;
}

Image patch_jitter(const Image& img, int patch, int strength, std::uint64_t seed, std::uint64_t item) {
  Image out = img;
  const int cols = (img.width() + patch - 1) / patch;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto idx = static_cast<std::uint64_t>((y / patch) * cols + x / patch);
      std::uint8_t* p = out.pixel(x, y);
      for (int ch = 0; ch < 3; ++ch) {
        // Integer offset uniform in [-strength, strength].
        const std::uint64_t r = keyed_u64(seed, item, idx, static_cast<std::uint64_t>(ch));
        const int off = static_cast<int>(r % static_cast<std::uint64_t>(2 * strength + 1)) - strength;
        p[ch] = static_cast<std::uint8_t>(std::clamp(p[ch] + off, 0, 255));
      }
    }
  }
  return out;
}

Image mask_garment(const Image& img, const DistortionSpec& spec, const Image* mask) {
  Image out = img;
  const int w = img.width(), h = img.height();
  if (mask) {
    if (mask->width() != w || mask->height() != h)
      fail(Errc::kMaskSizeMismatch, "mask is " + std::to_string(mask->width()) + "x" + std::to_string(mask->height()) +
                                        ", image is " + std::to_string(w) + "x" + std::to_string(h));
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const std::uint8_t* m = mask->pixel(x, y);
        const bool on = spec.mask_rgb ? (m[0] == (*spec.mask_rgb)[0] && m[1] == (*spec.mask_rgb)[1] && m[2] == (*spec.mask_rgb)[2])
                                      : (m[0] | m[1] | m[2]) != 0;
        if (on) std::fill_n(out.pixel(x, y), 3, std::uint8_t{255});
      }
    return out;
  }
  // Centered rectangle with the image's aspect ratio covering 40% of its area.
  const double f = std::sqrt(0.4);
  const int rw = static_cast<int>(std::lround(w * f)), rh = static_cast<int>(std::lround(h * f));
  const int x0 = (w - rw) / 2, y0 = (h - rh) / 2;
  for (int y = y0; y < y0 + rh; ++y)
    for (int x = x0; x < x0 + rw; ++x) std::fill_n(out.pixel(x, y), 3, std::uint8_t{255});
  return out;
}

std::uint64_t json_seed(const json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  if (j.is_string()) return std::stoull(j.get<std::string>());
  fail(Errc::kInvalidParams, "seed must be a non-negative integer");
}

ordered_json case_to_json(const DistortionSpec& c) {
  ordered_json j;
  j["label"] = c.label;
  j["kind"] = distortion_name(c.kind);
  j["target"] = c.target() == StudyTarget::kPerson ? "person" : "garment";
  ordered_json p = ordered_json::object();
  switch (c.kind) {
    case DistortionKind::kMaskGarment:
      if (c.mask_rgb) p["mask_rgb"] = {(*c.mask_rgb)[0], (*c.mask_rgb)[1], (*c.mask_rgb)[2]};
      p["fallback"] = "centered rectangle, 40% of area";
      break;
    case DistortionKind::kHueJitter: p["hue_shift"] = c.hue_shift; break;
    case DistortionKind::kPatchColorJitter:
      p["patch"] = c.patch;
      p["strength"] = c.strength;
      break;
    case DistortionKind::kPlainWhite: break;
    case DistortionKind::kRotate: p["angle"] = c.angle; break;
    case DistortionKind::kPosterize: p["bits"] = c.bits; break;
  }
  j["params"] = p;
  j["seed"] = c.seed;
  return j;
}

}  // namespace

std::string_view distortion_name(DistortionKind k) {
  for (const auto& [kind, name] : kKinds)
    if (kind == k) return name;
  return "unknown";
}

std::optional<DistortionKind> distortion_from_name(std::string_view name) {
  for (const auto& [kind, n] : kKinds)
    if (n == name) return kind;
  return std::nullopt;
}

void DistortionSpec::validate() const {
  if (bits < 1 || bits > 8) fail(Errc::kInvalidParams, "posterize bits must be in [1, 8]");
  if (!std::isfinite(angle) || std::abs(angle) > 45.0) fail(Errc::kInvalidParams, "rotation must be within 45 degrees");
  if (!std::isfinite(hue_shift)) fail(Errc::kInvalidParams, "hue shift must be finite");
  if (patch < 1) fail(Errc::kInvalidParams, "patch size must be positive");
  if (strength < 0 || strength > 255) fail(Errc::kInvalidParams, "jitter strength must be in [0, 255]");
}

StudyTarget DistortionSpec::target() const {
  switch (kind) {
    case DistortionKind::kMaskGarment:
    case DistortionKind::kHueJitter:
    case DistortionKind::kPatchColorJitter: return StudyTarget::kPerson;
    default: return StudyTarget::kGarment;
  }
}

Image apply(const Image& img, const DistortionSpec& spec, const DistortionContext& ctx) {
  spec.validate();
  switch (spec.kind) {
    case DistortionKind::kMaskGarment: return mask_garment(img, spec, ctx.mask);
    case DistortionKind::kHueJitter: return hue_jitter(img, spec.hue_shift);
    case DistortionKind::kPatchColorJitter: return patch_jitter(img, spec.patch, spec.strength, spec.seed, ctx.item);
    case DistortionKind::kPlainWhite: return Image(img.width(), img.height(), 255);
    case DistortionKind::kRotate: return rotate(img, spec.angle);
    case DistortionKind::kPosterize: return posterize(img, spec.bits);
  }
  fail(Errc::kInternal, "unknown distortion");
}

std::vector<DistortionSpec> default_study_cases(std::uint64_t seed) {
  std::vector<DistortionSpec> cases(6);
  const DistortionKind kinds[6] = {DistortionKind::kMaskGarment, DistortionKind::kHueJitter,
                                   DistortionKind::kPatchColorJitter, DistortionKind::kPlainWhite,
                                   DistortionKind::kRotate, DistortionKind::kPosterize};
  for (int i = 0; i < 6; ++i) {
    cases[i].kind = kinds[i];
    cases[i].label = std::string(1, static_cast<char>('a' + i));
    cases[i].seed = seed;
  }
  return cases;
}

StudySpec parse_study_spec(const std::string& text) {
  StudySpec s;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::kInvalidParams, std::string("study spec: ") + e.what());
  }
  if (!j.is_object()) fail(Errc::kInvalidParams, "study spec must be a JSON object");
  try {
    if (j.contains("seed")) s.seed = json_seed(j["seed"]);
    if (j.contains("metrics")) {
      for (const auto& m : j["metrics"]) {
        const auto metric = metric_from_name(m.get<std::string>());
        if (!metric || !is_pair_metric(*metric))
          fail(Errc::kInvalidParams, "study spec: unsupported metric '" + m.get<std::string>() + "'");
        s.metrics.push_back(*metric);
      }
    } else {
      s.metrics = default_pair_metrics();
    }
    if (!j.contains("cases")) {
      s.cases = default_study_cases(s.seed);
      return s;
    }
    for (const auto& c : j.at("cases")) {
      DistortionSpec d;
      const auto kind = distortion_from_name(c.at("kind").get<std::string>());
      if (!kind) fail(Errc::kInvalidParams, "study spec: unknown distortion '" + c.at("kind").get<std::string>() + "'");
      d.kind = *kind;
      d.label = c.value("label", std::string(distortion_name(d.kind)));
      d.seed = c.contains("seed") ? json_seed(c["seed"]) : s.seed;
      const json p = c.value("params", json::object());
      d.hue_shift = p.value("hue_shift", d.hue_shift);
      d.angle = p.value("angle", d.angle);
      d.bits = p.value("bits", d.bits);
      d.patch = p.value("patch", d.patch);
      d.strength = p.value("strength", d.strength);
      if (p.contains("mask_rgb")) {
        const auto v = p["mask_rgb"].get<std::vector<int>>();
        if (v.size() != 3) fail(Errc::kInvalidParams, "mask_rgb needs three components");
        d.mask_rgb = std::array<std::uint8_t, 3>{static_cast<std::uint8_t>(v[0]), static_cast<std::uint8_t>(v[1]),
                                                 static_cast<std::uint8_t>(v[2])};
      }
      d.validate();
      s.cases.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    fail(Errc::kInvalidParams, std::string("study spec: ") + e.what());
  }
  return s;
}

std::string study_spec_to_json(const StudySpec& s) {
  ordered_json j;
  j["seed"] = s.seed;
  ordered_json metrics = ordered_json::array();
  for (Metric m : s.metrics) metrics.push_back(metric_name(m));
  j["metrics"] = metrics;
  ordered_json cases = ordered_json::array();
  for (const auto& c : s.cases) cases.push_back(case_to_json(c));
  j["cases"] = cases;
  return j.dump();
}

StudyResult run_study(const DatasetManifest& manifest, const StudySpec& spec, const WeightArchive* weights,
                      const StudyOptions& opts) {
  StudyResult result;
  result.metrics = spec.metrics;
  result.spec = spec;
  for (const auto& c : spec.cases) c.validate();
  if (spec.cases.empty()) return result;
  const PairScorer scorer(spec.metrics, weights, opts.metric_options);

  std::vector<const ManifestEntry*> items;
  for (const auto& e : manifest.entries) items.push_back(&e);
  std::sort(items.begin(), items.end(), [](auto* a, auto* b) { return a->id < b->id; });

  const std::size_t n = items.size(), ncase = spec.cases.size();
  // values[case][item]; an empty vector marks a skipped item.
  std::vector<std::vector<std::vector<double>>> values(ncase, std::vector<std::vector<double>>(n));
  std::vector<std::vector<std::string>> errors(ncase, std::vector<std::string>(n));

  parallel_for(n, opts.threads, [&](std::size_t i) {
    const ManifestEntry& e = *items[i];
    std::optional<Image> person, garment, mask;
    std::string person_err, garment_err;
    for (std::size_t c = 0; c < ncase; ++c) {
      const DistortionSpec& d = spec.cases[c];
      try {
        const bool on_person = d.target() == StudyTarget::kPerson;
        std::optional<Image>& src = on_person ? person : garment;
        if (!src) src = load_image(on_person ? e.person : e.garment);
        DistortionContext ctx;
        ctx.item = i;
        if (d.kind == DistortionKind::kMaskGarment && e.mask) {
          if (!mask) mask = load_image(*e.mask, {.auto_expand = true});
          ctx.mask = &*mask;
        }
        const Image distorted = apply(*src, d, ctx);
        if (opts.materialize_dir) {
          const fs::path dir = *opts.materialize_dir / d.label;
          std::error_code ec;
          fs::create_directories(dir, ec);
          save_png(distorted, dir / (e.id + ".png"));
        }
        values[c][i] = scorer.score(*src, distorted);
      } catch (const Error& err) {
        if (err.code() == Errc::kMissingWeights || err.code() == Errc::kInternal) throw;
        errors[c][i] = e.id + ": " + err.what();
      }
    }
  });

  for (std::size_t c = 0; c < ncase; ++c) {
    StudyRow row;
    row.label = spec.cases[c].label;
    row.kind = spec.cases[c].kind;
    std::vector<CompensatedSum> sums(spec.metrics.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (values[c][i].empty()) {
        row.skipped.push_back(errors[c][i]);
        log_warning("case " + row.label + ": skipped " + errors[c][i]);
        continue;
      }
      ++row.count;
      for (std::size_t m = 0; m < sums.size(); ++m) sums[m].add(values[c][i][m]);
    }
    for (auto& s : sums) row.values.push_back(row.count ? s.value() / static_cast<double>(row.count) : 0.0);
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::string study_to_json(const StudyResult& r) {
  ordered_json j;
  j["command"] = "distort";
  ordered_json meta;
  meta["engine"] = "vtoff";
  meta["engine_version"] = engine_version();
  meta["config_hash"] = r.config_hash;
  meta["defaults"] = {{"hue_shift", 72.0}, {"angle", 2.0},    {"bits", 2},
                      {"patch", 64},       {"strength", 40}, {"mask_fallback", "centered rectangle, 40% of area"}};
  j["metadata"] = meta;
  j["study"] = ordered_json::parse(study_spec_to_json(r.spec));
  ordered_json scaling = ordered_json::object();
  for (Metric m : r.metrics) scaling[std::string(metric_name(m))] = metric_scale(m);
  j["scaling"] = scaling;
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.rows) {
    ordered_json o;
    o["label"] = row.label;
    o["kind"] = distortion_name(row.kind);
    o["count"] = row.count;
    ordered_json unit = ordered_json::object(), scaled = ordered_json::object();
    for (std::size_t m = 0; m < r.metrics.size(); ++m) {
      const std::string name(metric_name(r.metrics[m]));
      unit[name] = row.values[m];
      scaled[name] = row.values[m] * metric_scale(r.metrics[m]);
    }
    o["values"] = unit;
    o["scaled"] = scaled;
    o["skipped"] = row.skipped;
    rows.push_back(o);
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

std::string study_to_csv(const StudyResult& r) {
  std::string out = "case,kind,count";
  for (Metric m : r.metrics) out += "," + std::string(metric_name(m));
  for (Metric m : r.metrics) out += "," + std::string(metric_name(m)) + "_scaled";
  out += '\n';
  for (const auto& row : r.rows) {
    out += row.label + "," + std::string(distortion_name(row.kind)) + "," + std::to_string(row.count);
    for (double v : row.values) out += "," + format_double(v);
    for (std::size_t m = 0; m < r.metrics.size(); ++m) out += "," + format_double(row.values[m] * metric_scale(r.metrics[m]));
    out += '\n';
  }
  return out;
}

std::string study_table(const StudyResult& r) {
  std::string out = "case  kind                ";
  char buf[64];
  for (Metric m : r.metrics) {
    std::snprintf(buf, sizeof buf, "%9s", std::string(metric_name(m)).c_str());
    out += buf;
  }
  out += '\n';
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%-5s %-20s", row.label.c_str(), std::string(distortion_name(row.kind)).c_str());
    out += buf;
    for (std::size_t m = 0; m < r.metrics.size(); ++m) {
      std::snprintf(buf, sizeof buf, "%9.2f", row.values[m] * metric_scale(r.metrics[m]));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace vtoff
