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

#include "ewer/wav.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "ewer/error.h"

namespace ewer {
namespace {

uint32_t ReadU32(const char* p) {
  const auto* b = reinterpret_cast<const unsigned char*>(p);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t ReadU16(const char* p) {
  const auto* b = reinterpret_cast<const unsigned char*>(p);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

int16_t FloatToPcm16(float x) {
  const double scaled = std::nearbyint(static_cast<double>(x) * 32768.0);
  return static_cast<int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

Waveform ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open wav file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 ||
      bytes.compare(8, 4, "WAVE") != 0) {
    throw ValidationError(path + ": not a RIFF/WAVE file");
  }

  Waveform wav;
  bool have_fmt = false;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const uint32_t size = ReadU32(bytes.data() + pos + 4);
    const size_t body = pos + 8;
    if (body + size > bytes.size()) {
      throw ValidationError(path + ": truncated chunk '" + id + "'");
    }
    if (id == "fmt ") {
      if (size < 16) throw ValidationError(path + ": short fmt chunk");
      const uint16_t format = ReadU16(bytes.data() + body);
      const uint16_t channels = ReadU16(bytes.data() + body + 2);
      wav.sample_rate = static_cast<int>(ReadU32(bytes.data() + body + 4));
      const uint16_t bits = ReadU16(bytes.data() + body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw ValidationError(path + ": only PCM 16-bit mono is supported");
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw ValidationError(path + ": data chunk before fmt");
      const size_t n = size / 2;
      wav.samples.resize(n);
      for (size_t i = 0; i < n; ++i) {
        const auto s = static_cast<int16_t>(ReadU16(bytes.data() + body + 2 * i));
        wav.samples[i] = static_cast<float>(s) / 32768.0f;
      }
      return wav;
    }
    pos = body + size + (size & 1);
  }
  throw ValidationError(path + ": no data chunk");
}

void WriteWav(const std::string& path, const Waveform& wav) {
  const auto data_bytes = static_cast<uint32_t>(wav.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  PutU32(out, 16);
  PutU16(out, 1);  // PCM
  PutU16(out, 1);  // mono
  PutU32(out, static_cast<uint32_t>(wav.sample_rate));
  PutU32(out, static_cast<uint32_t>(wav.sample_rate) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out += "data";
  PutU32(out, data_bytes);
  for (float x : wav.samples) {
    PutU16(out, static_cast<uint16_t>(FloatToPcm16(x)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write wav file: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace ewer
