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

#ifndef EWER_ENCODERS_H_
#define EWER_ENCODERS_H_

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ewer/corpus.h"
#include "ewer/dsp.h"

namespace ewer {

enum class TokenStream { kLexical, kPhonotactic };

inline constexpr size_t kLexicalLength = 100;
inline constexpr size_t kPhonotacticLength = 200;

// Token -> index map. Index 0 is padding and index 1 stands for any token not
// in the map; real tokens start at 2.
class Vocab {
 public:
  static constexpr int32_t kPad = 0;
  static constexpr int32_t kUnk = 1;

  Vocab();

  // Tokens are ordered by frequency (descending), ties by token (ascending),
  // and numbered from 2. Throws ValidationError on an empty corpus.
  static Vocab Build(const Corpus& corpus, TokenStream which);
  static Vocab FromTokens(const std::vector<std::string>& ordered_tokens);

  int32_t Index(const std::string& token) const;
  const std::string& Token(int32_t index) const;
  // Includes the two reserved indices.
  size_t size() const { return tokens_.size(); }

  // "token<TAB>index" per line for every index >= 2.
  void Save(const std::string& path) const;
  static Vocab Load(const std::string& path);

  bool operator==(const Vocab& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int32_t> index_;
};

// First min(|tokens|, max_len) slots hold indices, the rest are kPad. Longer
// inputs keep their prefix.
std::vector<int32_t> EncodeTokens(const WordSeq& tokens, const Vocab& vocab,
                                  size_t max_len);

// Per-dimension z-scoring of the four decoder features, fitted on the
// training split. Uses the population standard deviation with a 1e-8 floor.
class DecoderNormalizer {
 public:
  static constexpr double kStdFloor = 1e-8;

  DecoderNormalizer() = default;
  DecoderNormalizer(const DecoderFeats& mean, const DecoderFeats& stddev);

  static DecoderNormalizer Fit(const Corpus& train);
  static DecoderNormalizer Fit(const std::vector<DecoderFeats>& rows);

  bool fitted() const { return fitted_; }
  const DecoderFeats& mean() const { return mean_; }
  const DecoderFeats& stddev() const { return stddev_; }

  // Throws ConfigError when not fitted.
  DecoderFeats Normalize(const DecoderFeats& feats) const;

 private:
  DecoderFeats mean_{};
  DecoderFeats stddev_{};
  bool fitted_ = false;
};

// MFCCs as a T x 13 row-major float block.
struct AcousticFeats {
  size_t num_frames = 0;
  std::vector<float> data;

  float at(size_t t, size_t c) const { return data[t * dsp::kNumCeps + c]; }
  static AcousticFeats FromMfcc(const dsp::MfccMatrix& m);
};

// Model-ready representation of one utterance.
struct EncodedStreams {
  std::vector<int32_t> lexical;      // kLexicalLength ids
  std::vector<int32_t> phonotactic;  // kPhonotacticLength ids
  std::array<float, kNumDecoderFeats> decoder{};
  AcousticFeats acoustic;            // empty unless requested
};

// Vocabularies and decoder statistics fitted on a training corpus, plus the
// MFCC front-end. Immutable once fitted.
class FeaturePipeline {
 public:
  FeaturePipeline() = default;
  FeaturePipeline(Vocab lexical, Vocab phonotactic, DecoderNormalizer decoder);

  static FeaturePipeline Fit(const Corpus& train);

  const Vocab& lexical_vocab() const { return lexical_; }
  const Vocab& phonotactic_vocab() const { return phonotactic_; }
  const DecoderNormalizer& decoder_normalizer() const { return decoder_; }

  // Audio is read and converted to MFCCs only when with_acoustic is set.
  EncodedStreams Encode(const Corpus& corpus, const Utterance& utt,
                        bool with_acoustic) const;

  // Encodes every utterance; MFCC extraction fans out over `threads` workers
  // (0 = hardware concurrency). Output order follows the corpus.
  std::vector<EncodedStreams> EncodeCorpus(const Corpus& corpus,
                                           bool with_acoustic,
                                           unsigned threads = 0) const;

 private:
  Vocab lexical_;
  Vocab phonotactic_;
  DecoderNormalizer decoder_;
};

}  // namespace ewer

#endif  // EWER_ENCODERS_H_
