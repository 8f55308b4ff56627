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

#include "tft/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace tft {

namespace {

int pgm_token(std::istream& in) {
  // Skips whitespace and '#' comments, returns the next integer.
  while (in) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value = -1;
  in >> value;
  if (!in || value < 0) throw DataError(DataError::Code::kMalformed, "malformed PGM header");
  return value;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

ImageSample read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataError::Code::kMalformed, "cannot open: " + path);
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '5') {
    throw DataError(DataError::Code::kBadMagic, "not a binary PGM: " + path);
  }
  const int width = pgm_token(in);
  const int height = pgm_token(in);
  const int maxval = pgm_token(in);
  if (width < 1 || height < 1 || maxval < 1 || maxval > 255) {
    throw DataError(DataError::Code::kMalformed, "unsupported PGM header in " + path);
  }
  in.get();  // single whitespace after maxval
  std::vector<char> bytes(static_cast<size_t>(width) * height);
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw DataError(DataError::Code::kTruncated, "PGM pixel data truncated in " + path);
  }
  ImageSample s;
  s.pixels = Tensor({height, width});
  double* p = s.pixels.mutable_data();
  for (size_t i = 0; i < bytes.size(); ++i) {
    p[i] = static_cast<unsigned char>(bytes[i]) / static_cast<double>(maxval);
  }
  return s;
}

void write_pgm(const ImageSample& image, const std::string& path) {
  if (image.pixels.rank() != 2) throw ShapeError("write_pgm expects [H,W]");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(DataError::Code::kMalformed, "cannot open for writing: " + path);
  const int h = image.pixels.dim(0);
  const int w = image.pixels.dim(1);
  out << "P5\n" << w << " " << h << "\n255\n";
  const double* p = image.pixels.data();
  for (long i = 0; i < image.pixels.numel(); ++i) {
    const double v = std::clamp(p[i], 0.0, 1.0);
    out.put(static_cast<char>(static_cast<int>(std::floor(v * 255.0 + 0.5))));
  }
  if (!out) throw DataError(DataError::Code::kMalformed, "write failed: " + path);
}

void write_history_csv(const std::string& path, const LossHistory& history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(DataError::Code::kMalformed, "cannot open for writing: " + path);
  out << "step,loss\n";
  for (const auto& [step, loss] : history) out << step << "," << fmt(loss) << "\n";
}

void write_flow_csv(const std::string& path, const FlowField& field) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(DataError::Code::kMalformed, "cannot open for writing: " + path);
  out << "x0,y0,x1,y1,valid\n";
  for (const FlowVec& v : field.vectors) {
    out << fmt(v.x0) << "," << fmt(v.y0) << "," << fmt(v.x1) << "," << fmt(v.y1) << ","
        << (v.valid ? 1 : 0) << "\n";
  }
}

void write_flow_svg(const std::string& path, const FlowField& field) {
  if (field.vectors.empty()) throw UsageError("flow field is empty");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(DataError::Code::kMalformed, "cannot open for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << field.width << " "
      << field.height << "\">\n";
  out << "  <defs>\n"
      << "    <marker id=\"arrow\" viewBox=\"0 0 6 6\" refX=\"5\" refY=\"3\" markerWidth=\"4\" "
         "markerHeight=\"4\" orient=\"auto-start-reverse\">\n"
      << "      <path d=\"M0,0 L6,3 L0,6 z\"/>\n"
      << "    </marker>\n"
      << "  </defs>\n";
  const double eps = 1e-9;
  for (const FlowVec& v : field.vectors) {
    if (!v.valid) {
      out << "  <path class=\"invalid\" stroke=\"red\" stroke-width=\"0.15\" d=\"M"
          << fmt6(v.x0 - 0.4) << "," << fmt6(v.y0 - 0.4) << " L" << fmt6(v.x0 + 0.4) << ","
          << fmt6(v.y0 + 0.4) << " M" << fmt6(v.x0 - 0.4) << "," << fmt6(v.y0 + 0.4) << " L"
          << fmt6(v.x0 + 0.4) << "," << fmt6(v.y0 - 0.4) << "\"/>\n";
      continue;
    }
    const double dx = v.x1 - v.x0;
    const double dy = v.y1 - v.y0;
    if (dx * dx + dy * dy <= eps * eps) {
      out << "  <circle cx=\"" << fmt6(v.x0) << "\" cy=\"" << fmt6(v.y0)
          << "\" r=\"0.15\"/>\n";
    } else {
      out << "  <line x1=\"" << fmt6(v.x0) << "\" y1=\"" << fmt6(v.y0) << "\" x2=\""
          << fmt6(v.x1) << "\" y2=\"" << fmt6(v.y1)
          << "\" stroke=\"black\" stroke-width=\"0.12\" marker-end=\"url(#arrow)\"/>\n";
    }
  }
  out << "</svg>\n";
}

void write_run_metadata(const std::string& path, const std::string& command,
                        const std::vector<std::pair<std::string, std::string>>& config) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["version"] = kVersionString;
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = cfg;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(DataError::Code::kMalformed, "cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace tft
