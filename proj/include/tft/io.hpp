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

#pragma once

#include <string>
#include <vector>

#include "tft/pipelines.hpp"

namespace tft {

inline constexpr const char* kVersionString = "tft 1.0.0";

// Binary PGM (P5), maxval 255, values mapped to [0,1]. Writing rounds
// half-up, so a round trip moves a pixel by at most 1/510.
ImageSample read_pgm(const std::string& path);
void write_pgm(const ImageSample& image, const std::string& path);

// "step,loss" rows; losses printed with full double precision so reruns
// can be compared byte for byte.
void write_history_csv(const std::string& path, const LossHistory& history);

// "x0,y0,x1,y1,valid" rows.
void write_flow_csv(const std::string& path, const FlowField& field);

// One arrow per valid vector, a dot for vanishing displacements, a cross
// for invalid probes. The viewBox spans the feature-map extent.
void write_flow_svg(const std::string& path, const FlowField& field);

// JSON record with command, seed, config snapshot and version, written
// next to a command's primary output.
void write_run_metadata(const std::string& path, const std::string& command,
                        const std::vector<std::pair<std::string, std::string>>& config);

}  // namespace tft
