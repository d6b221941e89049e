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

#ifndef EWER_CORPUS_H_
#define EWER_CORPUS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ewer/scorer.h"

namespace ewer {

inline constexpr size_t kNumDecoderFeats = 4;

// Decoder-side features of one utterance, in this order: total frame count,
// average log-likelihood, total acoustic-model likelihood, total
// language-model likelihood.
using DecoderFeats = std::array<double, kNumDecoderFeats>;

struct Utterance {
  std::string id;
  std::string audio_path;  // relative paths resolve against the manifest dir
  double duration_s = 0.0;
  WordSeq hyp_words;
  WordSeq phonemes;
  DecoderFeats decoder_feats{};
  std::optional<WordSeq> ref_words;
  std::optional<double> wer_target;  // clamped to [0, 1]

  bool operator==(const Utterance&) const = default;
};

struct Corpus {
  std::string name;
  std::vector<Utterance> utterances;
  // Directory that relative audio paths are resolved against. Not part of the
  // value: two corpora with equal name and utterances compare equal.
  std::string base_dir;

  size_t size() const { return utterances.size(); }
  bool empty() const { return utterances.empty(); }
  std::string AudioPath(const Utterance& utt) const;

  bool operator==(const Corpus& o) const {
    return name == o.name && utterances == o.utterances;
  }
};

// Throws ValidationError if the utterance violates an invariant.
void ValidateUtterance(const Utterance& utt);

// Reads a JSON-lines manifest, one utterance per line. Blank lines are
// rejected. `name` defaults to the file stem.
Corpus LoadManifest(const std::string& path, const std::string& name = "");

// Writes the manifest; LoadManifest of the result reproduces `corpus`.
void SaveManifest(const Corpus& corpus, const std::string& path);

// Serialisation of a single record, as used by the manifest.
std::string UtteranceToJsonLine(const Utterance& utt);
Utterance UtteranceFromJsonLine(const std::string& line);

// Shuffles with `seed` and cuts at floor(cumulative_fraction * n). Each part
// keeps the input's relative order. Fractions must be positive and sum to 1.
std::vector<Corpus> SplitCorpus(const Corpus& corpus,
                                const std::vector<double>& fractions,
                                uint64_t seed);

// Reference-scored target, clamped to [0, 1]. Throws if there is no reference.
double ClampedWerTarget(const Utterance& utt);

}  // namespace ewer

#endif  // EWER_CORPUS_H_
