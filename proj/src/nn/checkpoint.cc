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

#include "ewer/nn/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ewer/error.h"

namespace ewer::nn {
namespace {

constexpr size_t kMagicLength = sizeof(kCheckpointMagic) - 1;

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  uint32_t U32() {
    Need(4, "integer");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::string Bytes(size_t n) {
    Need(n, "byte string");
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void Need(size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw ValidationError(std::string("checkpoint truncated while reading ") + what);
    }
  }

  const std::string& bytes_;
  size_t pos_ = 0;
};

}  // namespace

std::string EncodeCheckpoint(const std::vector<NamedTensor>& tensors) {
  std::string out(kCheckpointMagic, kMagicLength);
  PutU32(out, kCheckpointVersion);
  for (const auto& t : tensors) {
    if (t.values.size() != NumElements(t.shape)) {
      throw ShapeError("checkpoint record '" + t.name + "' does not match its shape");
    }
    PutU32(out, static_cast<uint32_t>(t.name.size()));
    out += t.name;
    PutU32(out, static_cast<uint32_t>(t.shape.size()));
    for (size_t d : t.shape) PutU32(out, static_cast<uint32_t>(d));
    for (float f : t.values) PutU32(out, std::bit_cast<uint32_t>(f));
  }
  return out;
}

std::vector<NamedTensor> DecodeCheckpoint(const std::string& bytes) {
  if (bytes.size() < kMagicLength || bytes.compare(0, kMagicLength, kCheckpointMagic) != 0) {
    throw ValidationError("not a checkpoint file (bad magic)");
  }
  const std::string body = bytes.substr(kMagicLength);
  Reader in(body);
  const uint32_t version = in.U32();
  if (version != kCheckpointVersion) {
    throw ValidationError("unsupported checkpoint version " + std::to_string(version));
  }
  std::vector<NamedTensor> out;
  while (!in.done()) {
    NamedTensor t;
    t.name = in.Bytes(in.U32());
    const uint32_t rank = in.U32();
    for (uint32_t r = 0; r < rank; ++r) t.shape.push_back(in.U32());
    t.values.resize(NumElements(t.shape));
    for (auto& f : t.values) f = std::bit_cast<float>(in.U32());
    out.push_back(std::move(t));
  }
  return out;
}

void SaveCheckpoint(const std::string& path, const std::vector<NamedTensor>& tensors) {
  const std::string bytes = EncodeCheckpoint(tensors);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

std::vector<NamedTensor> LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return DecodeCheckpoint(bytes);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace ewer::nn
