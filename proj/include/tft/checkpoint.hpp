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

#include <map>
#include <string>
#include <vector>

#include "tft/tensor.hpp"

namespace tft {

// Checkpoint container shared by every persisted artifact (models, tuple
// stores). Layout, all little-endian:
//   magic "TFTC", u32 version, u32 tensor count,
//   per tensor: u32 name length, UTF-8 name, u8 rank, u32 dims[rank],
//               IEEE-754 32-bit values,
//   u32 CRC32 of everything between the magic and the checksum.
class Container {
 public:
  static constexpr uint32_t kVersion = 1;

  void add(const std::string& name, const Tensor& tensor);
  bool has(const std::string& name) const;
  // Throws DataError(kMalformed) when the name is missing.
  const Tensor& get(const std::string& name) const;
  double get_scalar(const std::string& name) const;

  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }

  void save(const std::string& path) const;
  static Container load(const std::string& path);

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::map<std::string, size_t> index_;
};

// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).
uint32_t crc32(const unsigned char* data, size_t size, uint32_t seed = 0);

}  // namespace tft
