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

#ifndef IBSPAN_CHECKPOINT_H_
#define IBSPAN_CHECKPOINT_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ibspan/tensor.h"

namespace ibspan {

// Binary container, all integers and doubles little-endian:
//
//   "IBSPCKPT" u32 version
//   str digest, str config_echo
//   u32 n_meta  { str key, str value }*
//   u32 n_tensors { str name, u32 rank, u64 extents[rank],
//                   f64 values[prod(extents)] }*
//
// where str is u64 length followed by raw bytes.
struct Checkpoint {
  std::string config_digest;
  std::string config_echo;
  std::map<std::string, std::string> metadata;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* Find(std::string_view name) const;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void WriteCheckpoint(std::ostream& out, const Checkpoint& checkpoint);
void WriteCheckpoint(const std::filesystem::path& path,
                     const Checkpoint& checkpoint);
// Throws DigestMismatch when `expected_digest` is given and differs.
Checkpoint ReadCheckpoint(std::istream& in,
                          std::optional<std::string> expected_digest = {});
Checkpoint ReadCheckpoint(const std::filesystem::path& path,
                          std::optional<std::string> expected_digest = {});

// 64-bit FNV-1a of `text`, as 16 lowercase hex digits.
std::string Digest(std::string_view text);

}  // namespace ibspan

#endif  // IBSPAN_CHECKPOINT_H_
