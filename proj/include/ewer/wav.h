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

#ifndef EWER_WAV_H_
#define EWER_WAV_H_

#include <cstdint>
#include <string>
#include <vector>

namespace ewer {

// Mono 16-bit PCM audio. Samples are stored as floats in [-1, 1)
// (int16 / 32768).
struct Waveform {
  int sample_rate = 16000;
  std::vector<float> samples;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Reads a RIFF/WAVE file. Only PCM 16-bit mono is accepted; anything else
// raises ValidationError. Unknown chunks are skipped.
Waveform ReadWav(const std::string& path);

// Writes RIFF/WAVE PCM 16-bit mono. Samples are rounded and saturated to the
// int16 range.
void WriteWav(const std::string& path, const Waveform& wav);

// Quantisation used by WriteWav, exposed so callers can reproduce what a
// written file will read back as.
int16_t FloatToPcm16(float x);

}  // namespace ewer

#endif  // EWER_WAV_H_
