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

#ifndef EWER_MODEL_H_
#define EWER_MODEL_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ewer/encoders.h"
#include "ewer/nn/checkpoint.h"
#include "ewer/nn/layers.h"
#include "ewer/nn/tensor.h"
#include "ewer/rng.h"

namespace ewer {

enum class Stream { kDecoder = 0, kAcoustic = 1, kLexical = 2, kPhonotactic = 3 };
inline constexpr size_t kNumStreams = 4;
inline constexpr std::array<Stream, kNumStreams> kAllStreams = {
    Stream::kDecoder, Stream::kAcoustic, Stream::kLexical, Stream::kPhonotactic};

const char* StreamName(Stream s);
Stream ParseStreamName(const std::string& name);

// Subset of the four input streams feeding the fusion head.
class StreamConfig {
 public:
  StreamConfig() = default;
  // Throws ConfigError on an empty set.
  StreamConfig(std::initializer_list<Stream> streams);
  explicit StreamConfig(const std::vector<Stream>& streams);

  bool has(Stream s) const { return enabled_[static_cast<size_t>(s)]; }
  // Enabled streams in canonical order: decoder, acoustic, lexical, phonotactic.
  std::vector<Stream> streams() const;
  // Comma-separated canonical names, e.g. "acoustic,phonotactic".
  std::string ToString() const;
  static StreamConfig Parse(const std::string& text);

  bool operator==(const StreamConfig&) const = default;

 private:
  std::array<bool, kNumStreams> enabled_{};
};

// The six ablation systems, named A..F; the Unicode mathematical script
// capitals (U+1D49C etc.) are accepted as aliases.
//   A decoder+acoustic+lexical   B = A + phonotactic
//   C acoustic+lexical           D = C + phonotactic
//   E acoustic                   F = E + phonotactic
StreamConfig SystemConfig(const std::string& name);
const std::vector<std::string>& SystemNames();
// Canonical single-letter name for any accepted spelling.
std::string CanonicalSystemName(const std::string& name);

// Layer widths. Kernel sizes and strides are fixed by the architecture; only
// the widths scale.
struct ModelDims {
  size_t decoder_hidden = 64;
  size_t decoder_out = 32;
  size_t acoustic_filters = 500;
  size_t embed_dim = 256;
  size_t text_filters = 512;
  size_t fusion_hidden = 32;

  static ModelDims Full() { return {}; }
  // Reduced widths for CPU-bound experiments and tests.
  static ModelDims Small() { return {64, 32, 48, 32, 48, 32}; }
  static ModelDims Tiny() { return {5, 3, 3, 4, 2, 4}; }
  // "full", "small" or "tiny".
  static ModelDims Preset(const std::string& name);

  size_t StreamWidth(Stream s) const;
  bool operator==(const ModelDims&) const = default;
};

inline constexpr std::array<size_t, 3> kTextKernels = {3, 4, 5};

size_t FusionWidth(const StreamConfig& streams, const ModelDims& dims);

struct ModelSpec {
  StreamConfig streams;
  ModelDims dims;
  size_t lexical_vocab = 0;      // required when the lexical stream is on
  size_t phonotactic_vocab = 0;  // required when the phonotactic stream is on
  double dropout = 0.2;
  uint64_t seed = 0;
};

// A batch of encoded utterances laid out for the network. Streams that the
// model does not use may be left empty.
template <typename T>
struct ModelInput {
  size_t batch = 0;
  std::vector<T> decoder;              // [B, 4]
  nn::SequenceBatch<T> acoustic;       // [B, 13, T_max], per-utterance lengths
  std::vector<int32_t> lexical;        // [B, kLexicalLength]
  std::vector<int32_t> phonotactic;    // [B, kPhonotacticLength]
};

// Packs the given utterances; only streams enabled in `streams` are filled.
// Throws ValidationError when an enabled stream is missing, e.g. no MFCCs.
template <typename T>
ModelInput<T> MakeModelInput(std::span<const EncodedStreams* const> items,
                             const StreamConfig& streams);

// Multistream regressor: one subnetwork per enabled stream, outputs
// concatenated and fed to dense(32, relu) -> dropout -> dense(1, sigmoid).
//   decoder:     dense(64, relu) -> dropout -> dense(32, relu) -> dropout
//   acoustic:    conv(k5,s1) -> conv(k7,s2) -> conv(k1,s2) -> conv(k1,s1),
//                all relu, then global max pool
//   lexical and phonotactic: embedding -> conv k3 | k4 | k5 (relu, stride 1)
//                -> global max pool per branch -> concat
template <typename T>
class EwerModel {
 public:
  explicit EwerModel(const ModelSpec& spec);

  // Returns [B, 1] predictions in (0, 1). Dropout is active only when
  // `training` is set; it draws from the model's own seeded stream.
  nn::Tensor<T> Forward(const ModelInput<T>& input, bool training);
  // Accumulates parameter gradients from d loss / d prediction.
  void Backward(const nn::Tensor<T>& grad_out);

  std::vector<nn::NamedParam<T>> Parameters();
  std::vector<nn::Tensor<T>*> ParameterTensors();
  void ZeroGrad();
  size_t NumParameters();

  const ModelSpec& spec() const { return spec_; }
  size_t fusion_width() const { return fusion_width_; }
  void set_dropout_rate(double rate);

  std::vector<nn::NamedTensor> ExportParameters();
  // Requires exactly the model's names and shapes.
  void ImportParameters(const std::vector<nn::NamedTensor>& tensors);

 private:
  struct TextBranch {
    nn::Embedding<T> embedding;
    std::array<nn::Conv1d<T>, 3> convs;
    std::array<nn::GlobalMaxPool<T>, 3> pools;
    size_t length = 0;
  };

  void BuildText(TextBranch& branch, size_t vocab, size_t length, Rng& rng);
  nn::Tensor<T> TextForward(TextBranch& branch, const std::vector<int32_t>& ids, size_t batch);
  void TextBackward(TextBranch& branch, const nn::Tensor<T>& grad);
  void CollectText(TextBranch& branch, const std::string& prefix,
                   std::vector<nn::NamedParam<T>>& out);

  ModelSpec spec_;
  size_t fusion_width_ = 0;
  Rng dropout_rng_;

  nn::Dense<T> dec_fc1_, dec_fc2_;
  nn::Dropout<T> dec_drop1_, dec_drop2_;
  std::array<nn::Conv1d<T>, 4> ac_convs_;
  nn::GlobalMaxPool<T> ac_pool_;
  TextBranch lexical_, phonotactic_;
  nn::Dense<T> fuse_hidden_, fuse_out_;
  nn::Dropout<T> fuse_drop_;

  std::vector<size_t> widths_;  // per enabled stream, canonical order
};

extern template class EwerModel<float>;
extern template class EwerModel<double>;

// A trained estimator with everything needed to encode new data.
struct TrainedModel {
  std::string system;  // "A".."F" or "custom"
  ModelSpec spec;
  FeaturePipeline pipeline;
  EwerModel<float> model;
};

// Directory layout: model.ckpt (parameters), model.cfg (key=value spec,
// system, decoder statistics), lexical.vocab, phonotactic.vocab.
void SaveTrainedModel(TrainedModel& trained, const std::string& dir);
TrainedModel LoadTrainedModel(const std::string& dir);

// Eval-mode predictions for encoded utterances, batched.
std::vector<double> PredictEncoded(EwerModel<float>& model,
                                   const std::vector<EncodedStreams>& items,
                                   size_t batch_size = 32);

}  // namespace ewer

#endif  // EWER_MODEL_H_
