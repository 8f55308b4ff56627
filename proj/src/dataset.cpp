/* Copyright (c) 2026 TFT Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include "tft/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "tft/backbone.hpp"
#include "tft/checkpoint.hpp"

namespace tft {

namespace {

constexpr uint32_t kImageMagic = 0x00000803;
constexpr uint32_t kLabelMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataError::Code::kMalformed, "cannot open: " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<unsigned char> gunzip(const std::vector<unsigned char>& in) {
  z_stream strm{};
  if (inflateInit2(&strm, 15 + 32) != Z_OK) {
    throw DataError(DataError::Code::kMalformed, "zlib init failed");
  }
  std::vector<unsigned char> out;
  unsigned char buf[1 << 16];
  strm.next_in = const_cast<unsigned char*>(in.data());
  strm.avail_in = static_cast<unsigned>(in.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    strm.next_out = buf;
    strm.avail_out = sizeof(buf);
    rc = inflate(&strm, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&strm);
      throw DataError(DataError::Code::kTruncated, "gzip stream damaged");
    }
    out.insert(out.end(), buf, buf + (sizeof(buf) - strm.avail_out));
  }
  inflateEnd(&strm);
  return out;
}

std::vector<unsigned char> read_maybe_gz(const std::string& path) {
  std::vector<unsigned char> bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return gunzip(bytes);
  return bytes;
}

uint32_t be32(const std::vector<unsigned char>& b, size_t off, const std::string& path) {
  if (off + 4 > b.size()) throw DataError(DataError::Code::kTruncated, "truncated: " + path);
  return (static_cast<uint32_t>(b[off]) << 24) | (static_cast<uint32_t>(b[off + 1]) << 16) |
         (static_cast<uint32_t>(b[off + 2]) << 8) | static_cast<uint32_t>(b[off + 3]);
}

void put_be32(std::ofstream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

std::vector<ImageSample> load_idx(const std::string& images_path,
                                  const std::string& labels_path) {
  const auto ib = read_maybe_gz(images_path);
  if (be32(ib, 0, images_path) != kImageMagic) {
    throw DataError(DataError::Code::kBadMagic, "bad image magic in " + images_path);
  }
  const uint32_t count = be32(ib, 4, images_path);
  const uint32_t rows = be32(ib, 8, images_path);
  const uint32_t cols = be32(ib, 12, images_path);
  const size_t expected = 16 + static_cast<size_t>(count) * rows * cols;
  if (ib.size() < expected) {
    throw DataError(DataError::Code::kTruncated, "image data truncated in " + images_path);
  }

  const auto lb = read_maybe_gz(labels_path);
  if (be32(lb, 0, labels_path) != kLabelMagic) {
    throw DataError(DataError::Code::kBadMagic, "bad label magic in " + labels_path);
  }
  const uint32_t lcount = be32(lb, 4, labels_path);
  if (lcount != count) {
    throw DataError(DataError::Code::kCountMismatch,
                    "image count " + std::to_string(count) + " != label count " +
                        std::to_string(lcount));
  }
  if (lb.size() < 8 + static_cast<size_t>(lcount)) {
    throw DataError(DataError::Code::kTruncated, "label data truncated in " + labels_path);
  }

  std::vector<ImageSample> samples;
  samples.reserve(count);
  size_t off = 16;
  for (uint32_t i = 0; i < count; ++i) {
    ImageSample s;
    s.pixels = Tensor({static_cast<int>(rows), static_cast<int>(cols)});
    double* p = s.pixels.mutable_data();
    for (uint32_t j = 0; j < rows * cols; ++j) p[j] = ib[off + j] / 255.0;
    off += rows * cols;
    s.label = lb[8 + i];
    samples.push_back(std::move(s));
  }
  return samples;
}

void save_idx(std::span<const ImageSample> samples, const std::string& images_path,
              const std::string& labels_path) {
  if (samples.empty()) throw UsageError("cannot save an empty dataset");
  const int rows = samples[0].pixels.dim(0);
  const int cols = samples[0].pixels.dim(1);
  std::ofstream io(images_path, std::ios::binary | std::ios::trunc);
  std::ofstream lo(labels_path, std::ios::binary | std::ios::trunc);
  if (!io || !lo) throw DataError(DataError::Code::kMalformed, "cannot open output files");
  put_be32(io, kImageMagic);
  put_be32(io, static_cast<uint32_t>(samples.size()));
  put_be32(io, static_cast<uint32_t>(rows));
  put_be32(io, static_cast<uint32_t>(cols));
  put_be32(lo, kLabelMagic);
  put_be32(lo, static_cast<uint32_t>(samples.size()));
  for (const auto& s : samples) {
    if (s.pixels.dim(0) != rows || s.pixels.dim(1) != cols) {
      throw ShapeError("all images must share one size");
    }
    const double* p = s.pixels.data();
    for (long i = 0; i < s.pixels.numel(); ++i) {
      const double v = std::clamp(p[i], 0.0, 1.0);
      io.put(static_cast<char>(std::floor(v * 255.0 + 0.5)));
    }
    lo.put(static_cast<char>(s.label < 0 ? 0 : s.label));
  }
}

ImageSample pad_to(const ImageSample& image, int target) {
  const int h = image.pixels.dim(0);
  const int w = image.pixels.dim(1);
  if (target < h || target < w) {
    throw UsageError("pad target " + std::to_string(target) + " smaller than source");
  }
  ImageSample out;
  out.label = image.label;
  out.pixels = Tensor({target, target});
  const int oy = (target - h) / 2;
  const int ox = (target - w) / 2;
  const double* src = image.pixels.data();
  double* dst = out.pixels.mutable_data();
  for (int y = 0; y < h; ++y) {
    std::memcpy(dst + static_cast<long>(y + oy) * target + ox, src + static_cast<long>(y) * w,
                sizeof(double) * static_cast<size_t>(w));
  }
  return out;
}

ImageSample max_norm(const ImageSample& image) {
  const double mx = image.pixels.max_abs();
  if (mx <= 0.0) return image;
  ImageSample out;
  out.label = image.label;
  out.pixels = Tensor(image.pixels.shape());
  const double* src = image.pixels.data();
  double* dst = out.pixels.mutable_data();
  for (long i = 0; i < image.pixels.numel(); ++i) dst[i] = src[i] / mx;
  return out;
}

ImageSample warp_image(const ImageSample& image, const TransformParams& params,
                       ComposeOrder order) {
  const int h = image.pixels.dim(0);
  const int w = image.pixels.dim(1);
  const AffineMatrix m = make_affine(params, grid_center(h, w), order);
  ImageSample out;
  out.label = image.label;
  out.pixels = bilinear_warp(image.pixels, m);
  double* p = out.pixels.mutable_data();
  for (long i = 0; i < out.pixels.numel(); ++i) p[i] = std::clamp(p[i], 0.0, 1.0);
  return out;
}

RangeSpec RangeSpec::set(std::vector<double> values) {
  RangeSpec r;
  r.discrete = true;
  r.values = std::move(values);
  return r;
}

RangeSpec RangeSpec::interval(double lo, double hi) {
  RangeSpec r;
  r.discrete = false;
  r.lo = lo;
  r.hi = hi;
  return r;
}

void RangeSpec::validate(bool positive) const {
  if (discrete) {
    if (values.empty()) throw UsageError("range value set must not be empty");
    for (double v : values) {
      if (!std::isfinite(v) || (positive && v <= 0.0)) throw UsageError("invalid range value");
    }
  } else {
    if (!(lo <= hi)) throw UsageError("range interval must satisfy lo <= hi");
    if (positive && lo <= 0.0) throw UsageError("range must stay positive");
  }
}

void ThetaRanges::validate() const {
  tx.validate(false);
  ty.validate(false);
  rotation.validate(false);
  scale.validate(true);
}

ThetaRanges ThetaRanges::grid() {
  std::vector<double> shifts;
  for (int t = -7; t <= 7; ++t) shifts.push_back(t);
  std::vector<double> rot;
  for (int a = -30; a <= 30; a += 5) rot.push_back(a);
  ThetaRanges r;
  r.tx = RangeSpec::set(shifts);
  r.ty = RangeSpec::set(shifts);
  r.rotation = RangeSpec::set(rot);
  r.scale = RangeSpec::set({0.9, 1.0, 1.1});
  return r;
}

ThetaRanges ThetaRanges::box() {
  ThetaRanges r;
  r.rotation = RangeSpec::interval(-30.0, 30.0);
  r.scale = RangeSpec::interval(0.8, 1.2);
  r.tx = RangeSpec::interval(-20.0, 20.0);
  r.ty = RangeSpec::interval(-20.0, 20.0);
  return r;
}

ThetaRanges ThetaRanges::identity_only() {
  ThetaRanges r;
  r.tx = RangeSpec::single(0.0);
  r.ty = RangeSpec::single(0.0);
  r.rotation = RangeSpec::single(0.0);
  r.scale = RangeSpec::single(1.0);
  return r;
}

namespace {
double sample_range(const RangeSpec& r, Rng& rng) {
  if (r.discrete) return r.values[rng.uniform_int(r.values.size())];
  return rng.uniform(r.lo, r.hi);
}
}  // namespace

TransformParams sample_theta(const ThetaRanges& ranges, Rng& rng) {
  ranges.validate();
  TransformParams p;
  p.tx = sample_range(ranges.tx, rng);
  p.ty = sample_range(ranges.ty, rng);
  p.theta_deg = sample_range(ranges.rotation, rng);
  p.scale = sample_range(ranges.scale, rng);
  return p;
}

const Tensor& TrainingTuple::ori(int tap_id) const {
  for (size_t i = 0; i < tap_ids.size(); ++i) {
    if (tap_ids[i] == tap_id) return f_ori[i];
  }
  throw UsageError("tuple does not carry tap " + std::to_string(tap_id));
}

const Tensor& TrainingTuple::theta(int tap_id) const {
  for (size_t i = 0; i < tap_ids.size(); ++i) {
    if (tap_ids[i] == tap_id) return f_theta[i];
  }
  throw UsageError("tuple does not carry tap " + std::to_string(tap_id));
}

std::vector<TrainingTuple> make_tuples(const Backbone& bb, std::span<const ImageSample> images,
                                       int count, const ThetaRanges& ranges, Rng& rng,
                                       const std::vector<int>& tap_ids) {
  if (images.empty()) throw UsageError("make_tuples needs at least one image");
  for (int tap : tap_ids) {
    if (tap < 1 || tap > bb.tap_count()) throw UsageError("tap id out of range");
  }
  std::vector<TrainingTuple> tuples;
  tuples.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const ImageSample& image = images[rng.uniform_int(images.size())];
    TrainingTuple t;
    t.params = sample_theta(ranges, rng);
    t.tap_ids = tap_ids;
    const ImageSample warped = warp_image(image, t.params);
    const auto ori = backbone_forward(bb, image.pixels);
    const auto theta = backbone_forward(bb, warped.pixels);
    for (int tap : tap_ids) {
      t.f_ori.push_back(ori.taps[static_cast<size_t>(tap - 1)]);
      t.f_theta.push_back(theta.taps[static_cast<size_t>(tap - 1)]);
    }
    tuples.push_back(std::move(t));
  }
  return tuples;
}

void save_tuples(std::span<const TrainingTuple> tuples, const std::string& path) {
  Container c;
  std::vector<double> meta = {static_cast<double>(tuples.size())};
  if (!tuples.empty()) {
    meta.push_back(static_cast<double>(tuples[0].tap_ids.size()));
    for (int tap : tuples[0].tap_ids) meta.push_back(tap);
  } else {
    meta.push_back(0.0);
  }
  c.add("meta/tuples", Tensor::from({static_cast<int>(meta.size())}, meta));
  char name[64];
  for (size_t i = 0; i < tuples.size(); ++i) {
    const TrainingTuple& t = tuples[i];
    std::snprintf(name, sizeof(name), "t%06zu/params", i);
    c.add(name, Tensor::from({4}, {t.params.theta_deg, t.params.scale, t.params.tx, t.params.ty}));
    for (size_t k = 0; k < t.tap_ids.size(); ++k) {
      std::snprintf(name, sizeof(name), "t%06zu/ori/tap%d", i, t.tap_ids[k]);
      c.add(name, t.f_ori[k]);
      std::snprintf(name, sizeof(name), "t%06zu/theta/tap%d", i, t.tap_ids[k]);
      c.add(name, t.f_theta[k]);
    }
  }
  c.save(path);
}

std::vector<TrainingTuple> load_tuples(const std::string& path) {
  const Container c = Container::load(path);
  const Tensor& meta = c.get("meta/tuples");
  if (meta.numel() < 2) throw DataError(DataError::Code::kMalformed, "bad tuple metadata");
  const long count = static_cast<long>(meta.at(0));
  const int ntaps = static_cast<int>(meta.at(1));
  std::vector<int> tap_ids;
  for (int k = 0; k < ntaps; ++k) tap_ids.push_back(static_cast<int>(meta.at(2 + k)));
  std::vector<TrainingTuple> tuples;
  tuples.reserve(static_cast<size_t>(count));
  char name[64];
  for (long i = 0; i < count; ++i) {
    TrainingTuple t;
    t.tap_ids = tap_ids;
    std::snprintf(name, sizeof(name), "t%06zu/params", static_cast<size_t>(i));
    const Tensor& p = c.get(name);
    t.params.theta_deg = p.at(0);
    t.params.scale = p.at(1);
    t.params.tx = p.at(2);
    t.params.ty = p.at(3);
    for (int tap : tap_ids) {
      std::snprintf(name, sizeof(name), "t%06zu/ori/tap%d", static_cast<size_t>(i), tap);
      t.f_ori.push_back(c.get(name));
      std::snprintf(name, sizeof(name), "t%06zu/theta/tap%d", static_cast<size_t>(i), tap);
      t.f_theta.push_back(c.get(name));
    }
    tuples.push_back(std::move(t));
  }
  return tuples;
}

// --- synthetic data -------------------------------------------------------

namespace {

struct Pt {
  double x, y;
};

using Stroke = std::vector<Pt>;

void arc(Stroke& s, double cx, double cy, double rx, double ry, double a0, double a1,
         int segments = 14) {
  for (int i = 0; i <= segments; ++i) {
    const double a = a0 + (a1 - a0) * i / segments;
    s.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
  }
}

Stroke line(Pt a, Pt b) { return {a, b}; }

// Glyph strokes in a unit box, x right, y down.
std::vector<Stroke> glyph(int digit) {
  constexpr double kTau = 6.28318530717958647692;
  std::vector<Stroke> s;
  switch (digit) {
    case 0: {
      Stroke o;
      arc(o, 0.5, 0.5, 0.28, 0.38, 0, kTau, 22);
      s.push_back(o);
      break;
    }
    case 1:
      s.push_back(line({0.35, 0.28}, {0.55, 0.12}));
      s.push_back(line({0.55, 0.12}, {0.55, 0.88}));
      break;
    case 2: {
      Stroke top;
      arc(top, 0.5, 0.32, 0.26, 0.2, -kTau * 0.45, kTau * 0.08);
      s.push_back(top);
      s.push_back(line({0.72, 0.38}, {0.26, 0.86}));
      s.push_back(line({0.26, 0.86}, {0.76, 0.86}));
      break;
    }
    case 3: {
      Stroke top, bottom;
      arc(top, 0.48, 0.3, 0.24, 0.19, -kTau * 0.35, kTau * 0.22);
      arc(bottom, 0.48, 0.68, 0.26, 0.21, -kTau * 0.22, kTau * 0.35);
      s.push_back(top);
      s.push_back(bottom);
      break;
    }
    case 4:
      s.push_back(line({0.62, 0.12}, {0.22, 0.62}));
      s.push_back(line({0.22, 0.62}, {0.8, 0.62}));
      s.push_back(line({0.62, 0.12}, {0.62, 0.88}));
      break;
    case 5: {
      s.push_back(line({0.72, 0.14}, {0.32, 0.14}));
      s.push_back(line({0.32, 0.14}, {0.3, 0.45}));
      Stroke bowl;
      arc(bowl, 0.48, 0.64, 0.26, 0.23, -kTau * 0.3, kTau * 0.28);
      s.push_back(bowl);
      break;
    }
    case 6: {
      Stroke spine, loop;
      arc(spine, 0.62, 0.52, 0.34, 0.42, kTau * 0.33, kTau * 0.52);
      arc(loop, 0.5, 0.66, 0.22, 0.2, 0, kTau, 18);
      s.push_back(spine);
      s.push_back(loop);
      break;
    }
    case 7:
      s.push_back(line({0.24, 0.14}, {0.78, 0.14}));
      s.push_back(line({0.78, 0.14}, {0.42, 0.88}));
      break;
    case 8: {
      Stroke top, bottom;
      arc(top, 0.5, 0.32, 0.2, 0.18, 0, kTau, 18);
      arc(bottom, 0.5, 0.68, 0.24, 0.2, 0, kTau, 18);
      s.push_back(top);
      s.push_back(bottom);
      break;
    }
    case 9: {
      Stroke loop;
      arc(loop, 0.52, 0.34, 0.22, 0.2, 0, kTau, 18);
      s.push_back(loop);
      s.push_back(line({0.73, 0.36}, {0.6, 0.88}));
      break;
    }
    default:
      throw UsageError("digit class must be 0..9");
  }
  return s;
}

double dist_to_segment(Pt p, Pt a, Pt b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double wx = p.x - a.x, wy = p.y - a.y;
  const double vv = vx * vx + vy * vy;
  double t = vv > 0 ? (wx * vx + wy * vy) / vv : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

void render_strokes(Tensor& pixels, const std::vector<Stroke>& strokes, double thickness,
                    double intensity) {
  const int side = pixels.dim(0);
  double* img = pixels.mutable_data();
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const Pt p{x + 0.5, y + 0.5};
      double d = 1e9;
      for (const Stroke& st : strokes) {
        for (size_t i = 0; i + 1 < st.size(); ++i) {
          d = std::min(d, dist_to_segment(p, st[i], st[i + 1]));
          if (d <= 0.0) break;
        }
      }
      const double v = std::clamp(1.6 * (1.0 - d / thickness), 0.0, 1.0);
      img[static_cast<long>(y) * side + x] = std::max(img[static_cast<long>(y) * side + x],
                                                      v * intensity);
    }
  }
}

}  // namespace

std::vector<ImageSample> synth_digits(int count, uint64_t seed, int side) {
  Rng rng(seed);
  std::vector<ImageSample> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int digit = i % 10;
    std::vector<Stroke> strokes = glyph(digit);

    const double angle = rng.uniform(-8.0, 8.0) * 3.14159265358979 / 180.0;
    const double sc = rng.uniform(0.85, 1.1) * side;
    const double dx = rng.uniform(-1.5, 1.5) + side / 2.0;
    const double dy = rng.uniform(-1.5, 1.5) + side / 2.0;
    const double ca = std::cos(angle), sa = std::sin(angle);
    for (Stroke& st : strokes) {
      for (Pt& p : st) {
        const double ux = (p.x - 0.5) * sc, uy = (p.y - 0.5) * sc;
        p = {ca * ux - sa * uy + dx, sa * ux + ca * uy + dy};
      }
    }

    ImageSample s;
    s.label = digit;
    s.pixels = Tensor({side, side});
    const double thickness = rng.uniform(1.3, 2.0) * side / 28.0;
    const double intensity = rng.uniform(0.85, 1.0);
    render_strokes(s.pixels, strokes, thickness, intensity);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ImageSample> synth_shapes(int count, uint64_t seed, int side) {
  Rng rng(seed);
  std::vector<ImageSample> out;
  out.reserve(static_cast<size_t>(count));
  constexpr double kTau = 6.28318530717958647692;
  for (int i = 0; i < count; ++i) {
    ImageSample s;
    s.label = i % 5;
    s.pixels = Tensor({side, side});
    std::vector<Stroke> strokes;
    const double cx = side * rng.uniform(0.4, 0.6);
    const double cy = side * rng.uniform(0.4, 0.6);
    const double r = side * rng.uniform(0.18, 0.3);
    switch (s.label) {
      case 0: {  // ring
        Stroke o;
        arc(o, cx, cy, r, r * rng.uniform(0.7, 1.0), 0, kTau, 28);
        strokes.push_back(o);
        break;
      }
      case 1: {  // box
        const double a = r, b = r * rng.uniform(0.6, 1.0);
        strokes.push_back(line({cx - a, cy - b}, {cx + a, cy - b}));
        strokes.push_back(line({cx + a, cy - b}, {cx + a, cy + b}));
        strokes.push_back(line({cx + a, cy + b}, {cx - a, cy + b}));
        strokes.push_back(line({cx - a, cy + b}, {cx - a, cy - b}));
        break;
      }
      case 2:  // cross
        strokes.push_back(line({cx - r, cy}, {cx + r, cy}));
        strokes.push_back(line({cx, cy - r}, {cx, cy + r}));
        break;
      case 3: {  // triangle
        Pt p0{cx, cy - r}, p1{cx - r * 0.9, cy + r * 0.8}, p2{cx + r * 0.9, cy + r * 0.8};
        strokes.push_back(line(p0, p1));
        strokes.push_back(line(p1, p2));
        strokes.push_back(line(p2, p0));
        break;
      }
      default: {  // spiralish double arc
        Stroke a1, a2;
        arc(a1, cx, cy, r, r, 0, kTau * 0.6, 18);
        arc(a2, cx, cy, r * 0.55, r * 0.55, kTau * 0.4, kTau, 18);
        strokes.push_back(a1);
        strokes.push_back(a2);
        break;
      }
    }
    render_strokes(s.pixels, strokes, side * rng.uniform(0.05, 0.09), 1.0);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace tft
