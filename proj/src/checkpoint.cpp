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

#include "tft/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace tft {

namespace {

const char kMagic[4] = {'T', 'F', 'T', 'C'};

void put_u32(std::vector<unsigned char>& out, uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

void put_f32(std::vector<unsigned char>& out, float f) {
  uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

class Reader {
 public:
  Reader(const unsigned char* data, size_t size) : data_(data), size_(size) {}

  uint32_t u32() {
    need(4);
    uint32_t v = static_cast<uint32_t>(data_[pos_]) | (static_cast<uint32_t>(data_[pos_ + 1]) << 8) |
                 (static_cast<uint32_t>(data_[pos_ + 2]) << 16) |
                 (static_cast<uint32_t>(data_[pos_ + 3]) << 24);
    pos_ += 4;
    return v;
  }

  uint8_t u8() {
    need(1);
    return data_[pos_++];
  }

  float f32() {
    uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
  }

  std::string str(size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }

  size_t pos() const { return pos_; }
  size_t remaining() const { return size_ - pos_; }

 private:
  void need(size_t n) {
    if (pos_ + n > size_) {
      throw DataError(DataError::Code::kTruncated, "checkpoint truncated");
    }
  }

  const unsigned char* data_;
  size_t size_;
  size_t pos_ = 0;
};

}  // namespace

uint32_t crc32(const unsigned char* data, size_t size, uint32_t seed) {
  static uint32_t table[256];
  static bool init = [] {
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      table[i] = c;
    }
    return true;
  }();
  (void)init;
  uint32_t c = seed ^ 0xFFFFFFFFu;
  for (size_t i = 0; i < size; ++i) c = table[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

void Container::add(const std::string& name, const Tensor& tensor) {
  if (index_.count(name)) {
    throw DataError(DataError::Code::kMalformed, "duplicate checkpoint entry: " + name);
  }
  index_[name] = entries_.size();
  entries_.emplace_back(name, tensor);
}

bool Container::has(const std::string& name) const { return index_.count(name) > 0; }

const Tensor& Container::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw DataError(DataError::Code::kMalformed, "checkpoint entry missing: " + name);
  }
  return entries_[it->second].second;
}

double Container::get_scalar(const std::string& name) const {
  const Tensor& t = get(name);
  if (t.numel() != 1) {
    throw DataError(DataError::Code::kMalformed, "checkpoint entry not scalar: " + name);
  }
  return t.at(0);
}

void Container::save(const std::string& path) const {
  std::vector<unsigned char> payload;
  put_u32(payload, kVersion);
  put_u32(payload, static_cast<uint32_t>(entries_.size()));
  for (const auto& [name, t] : entries_) {
    put_u32(payload, static_cast<uint32_t>(name.size()));
    payload.insert(payload.end(), name.begin(), name.end());
    payload.push_back(static_cast<unsigned char>(t.rank()));
    for (int d : t.shape()) put_u32(payload, static_cast<uint32_t>(d));
    const double* p = t.data();
    for (long i = 0; i < t.numel(); ++i) put_f32(payload, static_cast<float>(p[i]));
  }
  const uint32_t crc = crc32(payload.data(), payload.size());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(DataError::Code::kMalformed, "cannot open for writing: " + path);
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  std::vector<unsigned char> tail;
  put_u32(tail, crc);
  out.write(reinterpret_cast<const char*>(tail.data()), 4);
  if (!out) throw DataError(DataError::Code::kMalformed, "write failed: " + path);
}

Container Container::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataError::Code::kMalformed, "cannot open: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DataError(DataError::Code::kBadMagic, "bad magic in " + path);
  }
  if (bytes.size() < 12) {
    throw DataError(DataError::Code::kTruncated, "checkpoint truncated: " + path);
  }
  // Structural truncation is detected while parsing; the checksum is
  // verified afterwards so the two failure modes stay distinguishable.
  const size_t payload_size = bytes.size() - 8;
  Reader r(bytes.data() + 4, payload_size);
  const uint32_t version = r.u32();
  if (version != kVersion) {
    throw DataError(DataError::Code::kVersionMismatch,
                    "unsupported checkpoint version " + std::to_string(version));
  }
  const uint32_t count = r.u32();
  Container c;
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t name_len = r.u32();
    const std::string name = r.str(name_len);
    const uint8_t rank = r.u8();
    if (rank < 1 || rank > 4) {
      throw DataError(DataError::Code::kMalformed, "bad tensor rank in " + path);
    }
    std::vector<int> shape(rank);
    long numel = 1;
    for (auto& d : shape) {
      d = static_cast<int>(r.u32());
      if (d <= 0) throw DataError(DataError::Code::kMalformed, "bad dimension in " + path);
      numel *= d;
    }
    if (r.remaining() < static_cast<size_t>(numel) * 4) {
      throw DataError(DataError::Code::kTruncated, "checkpoint truncated mid-tensor: " + path);
    }
    std::vector<double> values(static_cast<size_t>(numel));
    for (auto& v : values) v = static_cast<double>(r.f32());
    c.add(name, Tensor::from(shape, std::move(values)));
  }
  if (r.remaining() != 0) {
    throw DataError(DataError::Code::kMalformed, "trailing bytes in " + path);
  }
  Reader tail(bytes.data() + 4 + payload_size, 4);
  const uint32_t stored_crc = tail.u32();
  const uint32_t actual_crc = crc32(bytes.data() + 4, payload_size);
  if (stored_crc != actual_crc) {
    throw DataError(DataError::Code::kBadChecksum, "checksum mismatch in " + path);
  }
  return c;
}

}  // namespace tft
