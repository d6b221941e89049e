// Copyright 2026 The ewer Authors.
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

#ifndef EWER_NN_CHECKPOINT_H_
#define EWER_NN_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ewer/nn/tensor.h"

namespace ewer::nn {

inline constexpr char kCheckpointMagic[] = "EWER2CKPT";
inline constexpr uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Shape shape;
  std::vector<float> values;

  bool operator==(const NamedTensor&) const = default;
};

// Binary layout, all integers little-endian:
//   "EWER2CKPT" (9 bytes), u32 version,
//   then per record: u32 name length, name bytes, u32 rank, u32 dims[rank],
//   float32 values[prod(dims)].
// Records run to end of file.
void SaveCheckpoint(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> LoadCheckpoint(const std::string& path);

std::string EncodeCheckpoint(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> DecodeCheckpoint(const std::string& bytes);

}  // namespace ewer::nn

#endif  // EWER_NN_CHECKPOINT_H_
