// Copyright 2026 The Pragref Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Binary parameter container. Layout (little-endian):
//
//   char[8]  magic "PRAGCKPT"
//   u32      format version
//   u64      metadata length, then that many bytes of UTF-8 JSON
//   u64      array count
//   per array:
//     u32 name length, name bytes
//     char[4] dtype tag ("f64\0")
//     u32 ndim, u64 dims[ndim]
//     f64 values[prod(dims)], row-major

#ifndef PRAGREF_NN_CHECKPOINT_H_
#define PRAGREF_NN_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "pragref/nn/autodiff.h"

namespace pragref::nn {

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

struct NamedArray {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> data;  // row-major

  static NamedArray FromMatrix(const std::string& name, const Matrix& m);
  Matrix ToMatrix() const;  // 1-D arrays become column vectors
};

struct Checkpoint {
  std::uint32_t format_version = kCheckpointFormatVersion;
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedArray> arrays;

  const NamedArray* Find(const std::string& name) const;
};

// Throws IoError on filesystem failures.
void WriteCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws MissingCheckpoint if absent, CheckpointFormatError if malformed.
Checkpoint ReadCheckpoint(const std::filesystem::path& path);

// Adds every parameter value of `store` under its own name.
void AppendParameters(const ParameterStore& store, Checkpoint& ckpt);
// Loads values by name; throws CheckpointFormatError on a missing name or
// shape mismatch.
void LoadParameters(const Checkpoint& ckpt, ParameterStore& store);

void AppendNamed(const std::map<std::string, Matrix>& arrays,
                 const std::string& prefix, Checkpoint& ckpt);
std::map<std::string, Matrix> ExtractNamed(const Checkpoint& ckpt,
                                           const std::string& prefix);

}  // namespace pragref::nn

#endif  // PRAGREF_NN_CHECKPOINT_H_
