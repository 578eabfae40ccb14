// Copyright 2026 The ibspan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ibspan/checkpoint.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ibspan/error.h"

namespace ibspan {
namespace {

constexpr std::array<char, 8> kMagic = {'I', 'B', 'S', 'P',
                                        'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void PutLittleEndian(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T GetLittleEndian(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) {
    throw Error(ErrorCode::kIoError, "truncated checkpoint");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

void PutString(std::ostream& out, std::string_view s) {
  PutLittleEndian<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string GetString(std::istream& in) {
  const auto size = GetLittleEndian<std::uint64_t>(in);
  if (size > (1ULL << 32)) throw Error(ErrorCode::kIoError, "corrupt string");
  std::string s(size, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(size))) {
    throw Error(ErrorCode::kIoError, "truncated checkpoint");
  }
  return s;
}

}  // namespace

const Tensor* Checkpoint::Find(std::string_view name) const {
  for (const auto& [key, tensor] : tensors) {
    if (key == name) return &tensor;
  }
  return nullptr;
}

void WriteCheckpoint(std::ostream& out, const Checkpoint& checkpoint) {
  out.write(kMagic.data(), kMagic.size());
  PutLittleEndian(out, kVersion);
  PutString(out, checkpoint.config_digest);
  PutString(out, checkpoint.config_echo);
  PutLittleEndian<std::uint32_t>(out, checkpoint.metadata.size());
  for (const auto& [key, value] : checkpoint.metadata) {
    PutString(out, key);
    PutString(out, value);
  }
  PutLittleEndian<std::uint32_t>(out, checkpoint.tensors.size());
  for (const auto& [name, tensor] : checkpoint.tensors) {
    PutString(out, name);
    PutLittleEndian<std::uint32_t>(out, tensor.shape().size());
    for (int extent : tensor.shape()) {
      PutLittleEndian<std::uint64_t>(out, extent);
    }
    for (double v : tensor.values()) PutLittleEndian(out, v);
  }
  if (!out) throw Error(ErrorCode::kIoError, "checkpoint write failed");
}

void WriteCheckpoint(const std::filesystem::path& path,
                     const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  WriteCheckpoint(out, checkpoint);
}

Checkpoint ReadCheckpoint(std::istream& in,
                          std::optional<std::string> expected_digest) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw Error(ErrorCode::kIoError, "not an ibspan checkpoint");
  }
  const auto version = GetLittleEndian<std::uint32_t>(in);
  if (version != kVersion) {
    throw Error(ErrorCode::kIoError,
                "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint checkpoint;
  checkpoint.config_digest = GetString(in);
  if (expected_digest && *expected_digest != checkpoint.config_digest) {
    throw Error(ErrorCode::kDigestMismatch,
                "checkpoint digest " + checkpoint.config_digest +
                    " does not match config digest " + *expected_digest);
  }
  checkpoint.config_echo = GetString(in);
  const auto meta_count = GetLittleEndian<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < meta_count; ++i) {
    std::string key = GetString(in);
    checkpoint.metadata[key] = GetString(in);
  }
  const auto tensor_count = GetLittleEndian<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < tensor_count; ++i) {
    std::string name = GetString(in);
    const auto rank = GetLittleEndian<std::uint32_t>(in);
    if (rank > 8) throw Error(ErrorCode::kIoError, "corrupt tensor rank");
    std::vector<int> shape;
    std::size_t count = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const auto extent = GetLittleEndian<std::uint64_t>(in);
      if (extent > (1ULL << 31)) {
        throw Error(ErrorCode::kIoError, "corrupt tensor extent");
      }
      shape.push_back(static_cast<int>(extent));
      count *= extent;
    }
    std::vector<double> values(rank == 0 ? 0 : count);
    for (double& v : values) v = GetLittleEndian<double>(in);
    checkpoint.tensors.emplace_back(std::move(name),
                                    Tensor(std::move(shape), std::move(values)));
  }
  return checkpoint;
}

Checkpoint ReadCheckpoint(const std::filesystem::path& path,
                          std::optional<std::string> expected_digest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return ReadCheckpoint(in, std::move(expected_digest));
}

std::string Digest(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = kHex[hash & 0xF];
    hash >>= 4;
  }
  return out;
}

}  // namespace ibspan
