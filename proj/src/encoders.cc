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

#include "ewer/encoders.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "ewer/error.h"
#include "ewer/wav.h"

namespace ewer {

Vocab::Vocab() : tokens_{"<pad>", "<unk>"} {}

Vocab Vocab::FromTokens(const std::vector<std::string>& ordered_tokens) {
  Vocab v;
  for (const auto& tok : ordered_tokens) {
    if (tok.empty()) throw ValidationError("empty vocabulary token");
    const auto idx = static_cast<int32_t>(v.tokens_.size());
    if (!v.index_.emplace(tok, idx).second) {
      throw ValidationError("duplicate vocabulary token '" + tok + "'");
    }
    v.tokens_.push_back(tok);
  }
  return v;
}

Vocab Vocab::Build(const Corpus& corpus, TokenStream which) {
  if (corpus.empty()) throw ValidationError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, size_t> counts;
  for (const auto& utt : corpus.utterances) {
    const WordSeq& toks = which == TokenStream::kLexical ? utt.hyp_words : utt.phonemes;
    for (const auto& t : toks) ++counts[t];
  }
  std::vector<std::pair<std::string, size_t>> sorted(counts.begin(), counts.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> ordered;
  ordered.reserve(sorted.size());
  for (auto& [tok, n] : sorted) ordered.push_back(tok);
  return FromTokens(ordered);
}

int32_t Vocab::Index(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::Token(int32_t index) const {
  if (index < 0 || static_cast<size_t>(index) >= tokens_.size()) {
    throw ValidationError("vocabulary index out of range: " + std::to_string(index));
  }
  return tokens_[static_cast<size_t>(index)];
}

void Vocab::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write vocabulary: " + path);
  for (size_t i = 2; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << i << '\n';
  if (!out) throw IoError("write failed: " + path);
}

Vocab Vocab::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary: " + path);
  std::vector<std::string> tokens;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected token<TAB>index");
    }
    const std::string index_text = line.substr(tab + 1);
    size_t index = 0;
    try {
      size_t used = 0;
      index = std::stoul(index_text, &used);
      if (used != index_text.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": bad index '" + index_text + "'");
    }
    if (index != tokens.size() + 2) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": indices must be consecutive from 2");
    }
    tokens.push_back(line.substr(0, tab));
  }
  return FromTokens(tokens);
}

std::vector<int32_t> EncodeTokens(const WordSeq& tokens, const Vocab& vocab,
                                  size_t max_len) {
  std::vector<int32_t> out(max_len, Vocab::kPad);
  const size_t n = std::min(tokens.size(), max_len);
  for (size_t i = 0; i < n; ++i) out[i] = vocab.Index(tokens[i]);
  return out;
}

DecoderNormalizer::DecoderNormalizer(const DecoderFeats& mean, const DecoderFeats& stddev)
    : mean_(mean), stddev_(stddev), fitted_(true) {}

DecoderNormalizer DecoderNormalizer::Fit(const std::vector<DecoderFeats>& rows) {
  if (rows.empty()) throw ValidationError("cannot fit decoder statistics on no data");
  DecoderFeats mean{};
  DecoderFeats var{};
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    for (size_t d = 0; d < kNumDecoderFeats; ++d) mean[d] += r[d];
  }
  for (auto& m : mean) m /= n;
  for (const auto& r : rows) {
    for (size_t d = 0; d < kNumDecoderFeats; ++d) var[d] += (r[d] - mean[d]) * (r[d] - mean[d]);
  }
  DecoderFeats stddev{};
  for (size_t d = 0; d < kNumDecoderFeats; ++d) stddev[d] = std::sqrt(var[d] / n);
  return DecoderNormalizer(mean, stddev);
}

DecoderNormalizer DecoderNormalizer::Fit(const Corpus& train) {
  std::vector<DecoderFeats> rows;
  rows.reserve(train.size());
  for (const auto& utt : train.utterances) rows.push_back(utt.decoder_feats);
  return Fit(rows);
}

DecoderFeats DecoderNormalizer::Normalize(const DecoderFeats& feats) const {
  if (!fitted_) throw ConfigError("decoder feature statistics are not fitted");
  DecoderFeats out{};
  for (size_t d = 0; d < kNumDecoderFeats; ++d) {
    out[d] = (feats[d] - mean_[d]) / std::max(stddev_[d], kStdFloor);
  }
  return out;
}

AcousticFeats AcousticFeats::FromMfcc(const dsp::MfccMatrix& m) {
  AcousticFeats a;
  a.num_frames = m.rows;
  a.data.resize(m.data.size());
  std::transform(m.data.begin(), m.data.end(), a.data.begin(),
                 [](double v) { return static_cast<float>(v); });
  return a;
}

FeaturePipeline::FeaturePipeline(Vocab lexical, Vocab phonotactic, DecoderNormalizer decoder)
    : lexical_(std::move(lexical)),
      phonotactic_(std::move(phonotactic)),
      decoder_(std::move(decoder)) {}

FeaturePipeline FeaturePipeline::Fit(const Corpus& train) {
  return FeaturePipeline(Vocab::Build(train, TokenStream::kLexical),
                         Vocab::Build(train, TokenStream::kPhonotactic),
                         DecoderNormalizer::Fit(train));
}

EncodedStreams FeaturePipeline::Encode(const Corpus& corpus, const Utterance& utt,
                                       bool with_acoustic) const {
  EncodedStreams enc;
  enc.lexical = EncodeTokens(utt.hyp_words, lexical_, kLexicalLength);
  enc.phonotactic = EncodeTokens(utt.phonemes, phonotactic_, kPhonotacticLength);
  const DecoderFeats z = decoder_.Normalize(utt.decoder_feats);
  for (size_t d = 0; d < kNumDecoderFeats; ++d) enc.decoder[d] = static_cast<float>(z[d]);
  if (with_acoustic) {
    const Waveform wav = ReadWav(corpus.AudioPath(utt));
    if (wav.samples.empty()) throw ValidationError(utt.id + ": empty audio");
    enc.acoustic = AcousticFeats::FromMfcc(dsp::ComputeMfcc(wav.samples, wav.sample_rate));
  }
  return enc;
}

std::vector<EncodedStreams> FeaturePipeline::EncodeCorpus(const Corpus& corpus,
                                                          bool with_acoustic,
                                                          unsigned threads) const {
  const size_t n = corpus.size();
  std::vector<EncodedStreams> out(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<size_t>(threads, std::max<size_t>(n, 1)));

  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&](size_t begin) {
    try {
      for (size_t i = begin; i < n; i += threads) {
        out[i] = Encode(corpus, corpus.utterances[i], with_acoustic);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace ewer
