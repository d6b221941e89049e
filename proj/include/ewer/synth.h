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

#ifndef EWER_SYNTH_H_
#define EWER_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ewer/corpus.h"
#include "ewer/wav.h"

namespace ewer {

// Fixed toy pronunciation lexicon shared by every synthetic corpus with the
// same (vocab_size, num_programs). Words are partitioned round-robin into
// programs; every word of a program carries at least one of that program's
// marker phones, so phone sequences identify the program while each phone on
// its own stays shared with the others.
class ToyLexicon {
 public:
  ToyLexicon(size_t vocab_size, size_t num_programs);

  size_t vocab_size() const { return words_.size(); }
  size_t num_programs() const { return num_programs_; }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::string>& phone_inventory() const { return phones_; }

  const std::vector<size_t>& Pronunciation(size_t word) const { return prons_[word]; }
  size_t ProgramOf(size_t word) const { return word % num_programs_; }
  const std::vector<size_t>& ProgramWords(size_t program) const {
    return program_words_[program];
  }
  // Nominal tone frequency of a phone in Hz, before speaker scaling.
  double PhoneFrequency(size_t phone) const { return freqs_[phone]; }

 private:
  size_t num_programs_;
  std::vector<std::string> phones_;
  std::vector<double> freqs_;
  std::vector<std::string> words_;
  std::vector<std::vector<size_t>> prons_;
  std::vector<std::vector<size_t>> program_words_;
};

struct SynthConfig {
  std::string name = "synth";
  size_t num_utterances = 1000;
  size_t vocab_size = 2000;
  size_t num_programs = 8;
  size_t min_words = 2;
  size_t max_words = 20;
  // Per-utterance error level is mean_error + error_spread * d with d in
  // [-1, 1] made of a program term and an acoustic-noise term. A spread of 0
  // fixes the error level for every utterance.
  double mean_error = 0.3;
  double error_spread = 0.3;
  // Audio is written under <out_dir>/audio/<name>/ unless write_audio is off;
  // durations are computed either way.
  bool write_audio = true;
};

// Validates the ranges documented above; throws ConfigError.
void ValidateSynthConfig(const SynthConfig& cfg);

// Builds a corpus of reference/hypothesis pairs, phone strings, simulated
// decoder features and rendered audio. Identical (cfg, seed) produce an
// identical corpus and identical audio bytes.
Corpus GenerateSyntheticCorpus(const SynthConfig& cfg, uint64_t seed,
                               const std::string& out_dir);

// Renders a phone sequence as 80 ms tones. Exposed for tests.
Waveform RenderPhones(const ToyLexicon& lexicon,
                      const std::vector<std::vector<size_t>>& words,
                      double speaker_scale, double noise_stddev, uint64_t seed);

}  // namespace ewer

#endif  // EWER_SYNTH_H_
