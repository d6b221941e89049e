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

#include "ewer/model.h"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ewer/error.h"

namespace ewer {
namespace {

constexpr std::array<const char*, kNumStreams> kStreamNames = {"decoder", "acoustic", "lexical",
                                                                "phonotactic"};

// Acoustic CNN layer shapes as (kernel, stride).
constexpr std::array<std::pair<size_t, size_t>, 4> kAcousticLayers = {
    {{5, 1}, {7, 2}, {1, 2}, {1, 1}}};

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

double ParseDouble(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ConfigError("bad number for " + what + ": '" + s + "'");
  }
  return v;
}

uint64_t ParseUnsigned(const std::string& s, const std::string& what) {
  uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ConfigError("bad integer for " + what + ": '" + s + "'");
  }
  return v;
}

}  // namespace

const char* StreamName(Stream s) { return kStreamNames[static_cast<size_t>(s)]; }

Stream ParseStreamName(const std::string& name) {
  for (Stream s : kAllStreams) {
    if (name == StreamName(s)) return s;
  }
  throw ConfigError("unknown stream '" + name + "'");
}

StreamConfig::StreamConfig(std::initializer_list<Stream> streams)
    : StreamConfig(std::vector<Stream>(streams)) {}

StreamConfig::StreamConfig(const std::vector<Stream>& streams) {
  for (Stream s : streams) enabled_[static_cast<size_t>(s)] = true;
  if (streams.empty()) throw ConfigError("at least one input stream must be enabled");
}

std::vector<Stream> StreamConfig::streams() const {
  std::vector<Stream> out;
  for (Stream s : kAllStreams) {
    if (has(s)) out.push_back(s);
  }
  return out;
}

std::string StreamConfig::ToString() const {
  std::string out;
  for (Stream s : streams()) {
    if (!out.empty()) out += ",";
    out += StreamName(s);
  }
  return out;
}

StreamConfig StreamConfig::Parse(const std::string& text) {
  std::vector<Stream> streams;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) streams.push_back(ParseStreamName(item));
  }
  return StreamConfig(streams);
}

const std::vector<std::string>& SystemNames() {
  static const std::vector<std::string> names = {"A", "B", "C", "D", "E", "F"};
  return names;
}

std::string CanonicalSystemName(const std::string& name) {
  static const std::map<std::string, std::string> aliases = {
      {"A", "A"}, {"B", "B"}, {"C", "C"}, {"D", "D"}, {"E", "E"}, {"F", "F"},
      {"a", "A"}, {"b", "B"}, {"c", "C"}, {"d", "D"}, {"e", "E"}, {"f", "F"},
      {"\xF0\x9D\x92\x9C", "A"},  // U+1D49C
      {"\xE2\x84\xAC", "B"},      // U+212C
      {"\xF0\x9D\x92\x9E", "C"},  // U+1D49E
      {"\xF0\x9D\x92\x9F", "D"},  // U+1D49F
      {"\xE2\x84\xB0", "E"},      // U+2130
      {"\xE2\x84\xB1", "F"},      // U+2131
  };
  const auto it = aliases.find(name);
  if (it == aliases.end()) throw ConfigError("unknown system '" + name + "' (expected A..F)");
  return it->second;
}

StreamConfig SystemConfig(const std::string& name) {
  const std::string c = CanonicalSystemName(name);
  using S = Stream;
  if (c == "A") return {S::kDecoder, S::kAcoustic, S::kLexical};
  if (c == "B") return {S::kDecoder, S::kAcoustic, S::kLexical, S::kPhonotactic};
  if (c == "C") return {S::kAcoustic, S::kLexical};
  if (c == "D") return {S::kAcoustic, S::kLexical, S::kPhonotactic};
  if (c == "E") return {S::kAcoustic};
  return {S::kAcoustic, S::kPhonotactic};
}

ModelDims ModelDims::Preset(const std::string& name) {
  if (name == "full") return Full();
  if (name == "small") return Small();
  if (name == "tiny") return Tiny();
  throw ConfigError("unknown dims preset '" + name + "' (expected full, small or tiny)");
}

size_t ModelDims::StreamWidth(Stream s) const {
  switch (s) {
    case Stream::kDecoder:
      return decoder_out;
    case Stream::kAcoustic:
      return acoustic_filters;
    case Stream::kLexical:
    case Stream::kPhonotactic:
      return kTextKernels.size() * text_filters;
  }
  return 0;
}

size_t FusionWidth(const StreamConfig& streams, const ModelDims& dims) {
  size_t w = 0;
  for (Stream s : streams.streams()) w += dims.StreamWidth(s);
  return w;
}

template <typename T>
ModelInput<T> MakeModelInput(std::span<const EncodedStreams* const> items,
                             const StreamConfig& streams) {
  ModelInput<T> in;
  in.batch = items.size();
  if (in.batch == 0) throw ValidationError("empty batch");
  const size_t batch = in.batch;
  if (streams.has(Stream::kDecoder)) {
    in.decoder.reserve(batch * kNumDecoderFeats);
    for (const auto* e : items) {
      for (float v : e->decoder) in.decoder.push_back(static_cast<T>(v));
    }
  }
  if (streams.has(Stream::kAcoustic)) {
    size_t t_max = 0;
    for (const auto* e : items) {
      if (e->acoustic.num_frames == 0) {
        throw ValidationError("acoustic stream enabled but an utterance has no MFCC frames");
      }
      t_max = std::max(t_max, e->acoustic.num_frames);
    }
    in.acoustic.values = nn::Tensor<T>({batch, dsp::kNumCeps, t_max});
    in.acoustic.lengths.resize(batch);
    for (size_t b = 0; b < batch; ++b) {
      const AcousticFeats& a = items[b]->acoustic;
      in.acoustic.lengths[b] = a.num_frames;
      for (size_t c = 0; c < dsp::kNumCeps; ++c) {
        T* row = &in.acoustic.values.at(b, c, 0);
        for (size_t t = 0; t < a.num_frames; ++t) row[t] = static_cast<T>(a.at(t, c));
      }
    }
  }
  auto pack = [&](Stream s, size_t length, auto member, std::vector<int32_t>& out) {
    if (!streams.has(s)) return;
    out.reserve(batch * length);
    for (const auto* e : items) {
      const std::vector<int32_t>& ids = e->*member;
      if (ids.size() != length) {
        throw ValidationError(std::string(StreamName(s)) + " stream has " +
                              std::to_string(ids.size()) + " ids, expected " +
                              std::to_string(length));
      }
      out.insert(out.end(), ids.begin(), ids.end());
    }
  };
  pack(Stream::kLexical, kLexicalLength, &EncodedStreams::lexical, in.lexical);
  pack(Stream::kPhonotactic, kPhonotacticLength, &EncodedStreams::phonotactic, in.phonotactic);
  return in;
}

template ModelInput<float> MakeModelInput<float>(std::span<const EncodedStreams* const>,
                                                 const StreamConfig&);
template ModelInput<double> MakeModelInput<double>(std::span<const EncodedStreams* const>,
                                                   const StreamConfig&);

template <typename T>
EwerModel<T>::EwerModel(const ModelSpec& spec)
    : spec_(spec), dropout_rng_(Rng::Derive(spec.seed, 100)) {
  const ModelDims& d = spec_.dims;
  const StreamConfig& s = spec_.streams;
  if (s.streams().empty()) throw ConfigError("at least one input stream must be enabled");
  if (s.has(Stream::kLexical) && spec_.lexical_vocab < 2) {
    throw ConfigError("lexical stream needs a vocabulary of at least 2 entries");
  }
  if (s.has(Stream::kPhonotactic) && spec_.phonotactic_vocab < 2) {
    throw ConfigError("phonotactic stream needs a vocabulary of at least 2 entries");
  }
  set_dropout_rate(spec_.dropout);
  if (s.has(Stream::kDecoder)) {
    Rng rng = Rng::Derive(spec_.seed, 1);
    dec_fc1_ = nn::Dense<T>(kNumDecoderFeats, d.decoder_hidden, nn::Activation::kRelu);
    dec_fc2_ = nn::Dense<T>(d.decoder_hidden, d.decoder_out, nn::Activation::kRelu);
    dec_fc1_.Initialize(rng, nn::InitScheme::kHeUniform);
    dec_fc2_.Initialize(rng, nn::InitScheme::kHeUniform);
  }
  if (s.has(Stream::kAcoustic)) {
    Rng rng = Rng::Derive(spec_.seed, 2);
    size_t in = dsp::kNumCeps;
    for (size_t i = 0; i < ac_convs_.size(); ++i) {
      ac_convs_[i] = nn::Conv1d<T>(in, d.acoustic_filters, kAcousticLayers[i].first,
                                   kAcousticLayers[i].second, nn::Activation::kRelu);
      ac_convs_[i].Initialize(rng, nn::InitScheme::kHeUniform);
      in = d.acoustic_filters;
    }
  }
  if (s.has(Stream::kLexical)) {
    Rng rng = Rng::Derive(spec_.seed, 3);
    BuildText(lexical_, spec_.lexical_vocab, kLexicalLength, rng);
  }
  if (s.has(Stream::kPhonotactic)) {
    Rng rng = Rng::Derive(spec_.seed, 4);
    BuildText(phonotactic_, spec_.phonotactic_vocab, kPhonotacticLength, rng);
  }
  for (Stream st : s.streams()) widths_.push_back(d.StreamWidth(st));
  fusion_width_ = FusionWidth(s, d);
  Rng rng = Rng::Derive(spec_.seed, 10);
  fuse_hidden_ = nn::Dense<T>(fusion_width_, d.fusion_hidden, nn::Activation::kRelu);
  fuse_out_ = nn::Dense<T>(d.fusion_hidden, 1, nn::Activation::kSigmoid);
  fuse_hidden_.Initialize(rng, nn::InitScheme::kHeUniform);
  fuse_out_.Initialize(rng, nn::InitScheme::kXavierUniform);
}

template <typename T>
void EwerModel<T>::BuildText(TextBranch& branch, size_t vocab, size_t length, Rng& rng) {
  const ModelDims& d = spec_.dims;
  branch.length = length;
  branch.embedding = nn::Embedding<T>(vocab, d.embed_dim);
  branch.embedding.Initialize(rng);
  for (size_t k = 0; k < kTextKernels.size(); ++k) {
    branch.convs[k] =
        nn::Conv1d<T>(d.embed_dim, d.text_filters, kTextKernels[k], 1, nn::Activation::kRelu);
    branch.convs[k].Initialize(rng, nn::InitScheme::kHeUniform);
  }
}

template <typename T>
void EwerModel<T>::set_dropout_rate(double rate) {
  dec_drop1_.set_rate(rate);
  dec_drop2_.set_rate(rate);
  fuse_drop_.set_rate(rate);
  spec_.dropout = rate;
}

template <typename T>
nn::Tensor<T> EwerModel<T>::TextForward(TextBranch& branch, const std::vector<int32_t>& ids,
                                        size_t batch) {
  const nn::Tensor<T> emb = branch.embedding.Forward(ids, batch, branch.length);
  const nn::SequenceBatch<T> seq{nn::TransposeLastTwo(emb),
                                 std::vector<size_t>(batch, branch.length)};
  std::array<nn::Tensor<T>, 3> pooled;
  for (size_t k = 0; k < 3; ++k) {
    pooled[k] = branch.pools[k].Forward(branch.convs[k].Forward(seq));
  }
  return nn::ConcatColumns<T>({&pooled[0], &pooled[1], &pooled[2]});
}

template <typename T>
void EwerModel<T>::TextBackward(TextBranch& branch, const nn::Tensor<T>& grad) {
  const size_t f = spec_.dims.text_filters;
  const std::vector<nn::Tensor<T>> parts = nn::SplitColumns(grad, {f, f, f});
  nn::Tensor<T> dseq;
  for (size_t k = 0; k < 3; ++k) {
    nn::Tensor<T> dx = branch.convs[k].Backward(branch.pools[k].Backward(parts[k]));
    if (k == 0) {
      dseq = std::move(dx);
    } else {
      for (size_t i = 0; i < dseq.size(); ++i) dseq[i] += dx[i];
    }
  }
  branch.embedding.Backward(nn::TransposeLastTwo(dseq));
}

template <typename T>
nn::Tensor<T> EwerModel<T>::Forward(const ModelInput<T>& input, bool training) {
  const size_t batch = input.batch;
  if (batch == 0) throw ValidationError("empty batch");
  const StreamConfig& s = spec_.streams;
  std::vector<nn::Tensor<T>> parts;
  if (s.has(Stream::kDecoder)) {
    if (input.decoder.size() != batch * kNumDecoderFeats) {
      throw ValidationError("decoder stream missing from the batch");
    }
    nn::Tensor<T> h({batch, kNumDecoderFeats}, input.decoder);
    h = dec_drop1_.Forward(dec_fc1_.Forward(h), training, dropout_rng_);
    h = dec_drop2_.Forward(dec_fc2_.Forward(h), training, dropout_rng_);
    parts.push_back(std::move(h));
  }
  if (s.has(Stream::kAcoustic)) {
    if (input.acoustic.lengths.size() != batch) {
      throw ValidationError("acoustic stream missing from the batch");
    }
    nn::SequenceBatch<T> seq = ac_convs_[0].Forward(input.acoustic);
    for (size_t i = 1; i < ac_convs_.size(); ++i) seq = ac_convs_[i].Forward(seq);
    parts.push_back(ac_pool_.Forward(seq));
  }
  if (s.has(Stream::kLexical)) {
    if (input.lexical.size() != batch * kLexicalLength) {
      throw ValidationError("lexical stream missing from the batch");
    }
    parts.push_back(TextForward(lexical_, input.lexical, batch));
  }
  if (s.has(Stream::kPhonotactic)) {
    if (input.phonotactic.size() != batch * kPhonotacticLength) {
      throw ValidationError("phonotactic stream missing from the batch");
    }
    parts.push_back(TextForward(phonotactic_, input.phonotactic, batch));
  }
  std::vector<const nn::Tensor<T>*> ptrs;
  for (const auto& p : parts) ptrs.push_back(&p);
  nn::Tensor<T> h = fuse_hidden_.Forward(nn::ConcatColumns(ptrs));
  h = fuse_drop_.Forward(h, training, dropout_rng_);
  return fuse_out_.Forward(h);
}

template <typename T>
void EwerModel<T>::Backward(const nn::Tensor<T>& grad_out) {
  nn::Tensor<T> g = fuse_drop_.Backward(fuse_out_.Backward(grad_out));
  const std::vector<nn::Tensor<T>> parts = nn::SplitColumns(fuse_hidden_.Backward(g), widths_);
  const std::vector<Stream> streams = spec_.streams.streams();
  for (size_t i = 0; i < streams.size(); ++i) {
    switch (streams[i]) {
      case Stream::kDecoder:
        dec_fc1_.Backward(dec_drop1_.Backward(dec_fc2_.Backward(dec_drop2_.Backward(parts[i]))));
        break;
      case Stream::kAcoustic: {
        nn::Tensor<T> d = ac_pool_.Backward(parts[i]);
        for (size_t k = ac_convs_.size(); k-- > 0;) d = ac_convs_[k].Backward(d);
        break;
      }
      case Stream::kLexical:
        TextBackward(lexical_, parts[i]);
        break;
      case Stream::kPhonotactic:
        TextBackward(phonotactic_, parts[i]);
        break;
    }
  }
}

template <typename T>
void EwerModel<T>::CollectText(TextBranch& branch, const std::string& prefix,
                               std::vector<nn::NamedParam<T>>& out) {
  branch.embedding.CollectParameters(prefix + ".embedding", out);
  for (size_t k = 0; k < 3; ++k) {
    branch.convs[k].CollectParameters(prefix + ".conv_k" + std::to_string(kTextKernels[k]), out);
  }
}

template <typename T>
std::vector<nn::NamedParam<T>> EwerModel<T>::Parameters() {
  std::vector<nn::NamedParam<T>> out;
  const StreamConfig& s = spec_.streams;
  if (s.has(Stream::kDecoder)) {
    dec_fc1_.CollectParameters("decoder.fc1", out);
    dec_fc2_.CollectParameters("decoder.fc2", out);
  }
  if (s.has(Stream::kAcoustic)) {
    for (size_t i = 0; i < ac_convs_.size(); ++i) {
      ac_convs_[i].CollectParameters("acoustic.conv" + std::to_string(i + 1), out);
    }
  }
  if (s.has(Stream::kLexical)) CollectText(lexical_, "lexical", out);
  if (s.has(Stream::kPhonotactic)) CollectText(phonotactic_, "phonotactic", out);
  fuse_hidden_.CollectParameters("fusion.hidden", out);
  fuse_out_.CollectParameters("fusion.output", out);
  return out;
}

template <typename T>
std::vector<nn::Tensor<T>*> EwerModel<T>::ParameterTensors() {
  std::vector<nn::Tensor<T>*> out;
  for (auto& p : Parameters()) out.push_back(p.tensor);
  return out;
}

template <typename T>
void EwerModel<T>::ZeroGrad() {
  for (auto& p : Parameters()) p.tensor->ZeroGrad();
}

template <typename T>
size_t EwerModel<T>::NumParameters() {
  size_t n = 0;
  for (auto& p : Parameters()) n += p.tensor->size();
  return n;
}

template <typename T>
std::vector<nn::NamedTensor> EwerModel<T>::ExportParameters() {
  std::vector<nn::NamedTensor> out;
  for (auto& p : Parameters()) {
    nn::NamedTensor t{p.name, p.tensor->shape(), {}};
    t.values.reserve(p.tensor->size());
    for (T v : p.tensor->values()) t.values.push_back(static_cast<float>(v));
    out.push_back(std::move(t));
  }
  return out;
}

template <typename T>
void EwerModel<T>::ImportParameters(const std::vector<nn::NamedTensor>& tensors) {
  auto params = Parameters();
  if (params.size() != tensors.size()) {
    throw ValidationError("checkpoint has " + std::to_string(tensors.size()) +
                          " tensors, model expects " + std::to_string(params.size()));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    const nn::NamedTensor& t = tensors[i];
    if (t.name != params[i].name) {
      throw ValidationError("checkpoint tensor '" + t.name + "' where '" + params[i].name +
                            "' was expected");
    }
    if (t.shape != params[i].tensor->shape()) {
      throw ValidationError("checkpoint tensor '" + t.name + "' has shape " +
                            nn::ShapeString(t.shape) + ", model expects " +
                            nn::ShapeString(params[i].tensor->shape()));
    }
    auto& dst = params[i].tensor->values();
    for (size_t j = 0; j < dst.size(); ++j) dst[j] = static_cast<T>(t.values[j]);
  }
}

template class EwerModel<float>;
template class EwerModel<double>;

namespace {

constexpr char kCheckpointFile[] = "model.ckpt";
constexpr char kConfigFile[] = "model.cfg";
constexpr char kLexicalVocabFile[] = "lexical.vocab";
constexpr char kPhonotacticVocabFile[] = "phonotactic.vocab";

std::string JoinFeats(const DecoderFeats& f) {
  std::string out;
  for (size_t i = 0; i < f.size(); ++i) {
    if (i) out += ",";
    out += FormatDouble(f[i]);
  }
  return out;
}

DecoderFeats SplitFeats(const std::string& text, const std::string& what) {
  DecoderFeats f{};
  std::stringstream ss(text);
  std::string item;
  size_t i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= f.size()) throw ConfigError(what + " has more than 4 entries");
    f[i++] = ParseDouble(Trim(item), what);
  }
  if (i != f.size()) throw ConfigError(what + " must have 4 entries");
  return f;
}

std::map<std::string, std::string> ReadKeyValues(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = Trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    kv[Trim(line.substr(0, eq))] = Trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace

void SaveTrainedModel(TrainedModel& trained, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path root(dir);
  nn::SaveCheckpoint((root / kCheckpointFile).string(), trained.model.ExportParameters());
  trained.pipeline.lexical_vocab().Save((root / kLexicalVocabFile).string());
  trained.pipeline.phonotactic_vocab().Save((root / kPhonotacticVocabFile).string());

  const ModelSpec& s = trained.spec;
  const DecoderNormalizer& dn = trained.pipeline.decoder_normalizer();
  std::ofstream out(root / kConfigFile, std::ios::trunc);
  if (!out) throw IoError("cannot write " + (root / kConfigFile).string());
  out << "system=" << trained.system << "\n"
      << "streams=" << s.streams.ToString() << "\n"
      << "decoder_hidden=" << s.dims.decoder_hidden << "\n"
      << "decoder_out=" << s.dims.decoder_out << "\n"
      << "acoustic_filters=" << s.dims.acoustic_filters << "\n"
      << "embed_dim=" << s.dims.embed_dim << "\n"
      << "text_filters=" << s.dims.text_filters << "\n"
      << "fusion_hidden=" << s.dims.fusion_hidden << "\n"
      << "lexical_vocab=" << s.lexical_vocab << "\n"
      << "phonotactic_vocab=" << s.phonotactic_vocab << "\n"
      << "dropout=" << FormatDouble(s.dropout) << "\n"
      << "seed=" << s.seed << "\n"
      << "lexical_vocab_file=" << kLexicalVocabFile << "\n"
      << "phonotactic_vocab_file=" << kPhonotacticVocabFile << "\n";
  if (dn.fitted()) {
    out << "decoder_mean=" << JoinFeats(dn.mean()) << "\n"
        << "decoder_std=" << JoinFeats(dn.stddev()) << "\n";
  }
  if (!out) throw IoError("write failed: " + (root / kConfigFile).string());
}

TrainedModel LoadTrainedModel(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  const std::string cfg_path = (root / kConfigFile).string();
  const auto kv = ReadKeyValues(cfg_path);
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(cfg_path + ": missing key '" + key + "'");
    return it->second;
  };
  auto get_u = [&](const std::string& key) { return ParseUnsigned(get(key), key); };

  ModelSpec spec;
  spec.streams = StreamConfig::Parse(get("streams"));
  spec.dims.decoder_hidden = get_u("decoder_hidden");
  spec.dims.decoder_out = get_u("decoder_out");
  spec.dims.acoustic_filters = get_u("acoustic_filters");
  spec.dims.embed_dim = get_u("embed_dim");
  spec.dims.text_filters = get_u("text_filters");
  spec.dims.fusion_hidden = get_u("fusion_hidden");
  spec.lexical_vocab = get_u("lexical_vocab");
  spec.phonotactic_vocab = get_u("phonotactic_vocab");
  spec.dropout = ParseDouble(get("dropout"), "dropout");
  spec.seed = get_u("seed");

  Vocab lexical = Vocab::Load((root / get("lexical_vocab_file")).string());
  Vocab phonotactic = Vocab::Load((root / get("phonotactic_vocab_file")).string());
  if (spec.streams.has(Stream::kLexical) && lexical.size() != spec.lexical_vocab) {
    throw ValidationError("lexical vocabulary size does not match " + cfg_path);
  }
  if (spec.streams.has(Stream::kPhonotactic) && phonotactic.size() != spec.phonotactic_vocab) {
    throw ValidationError("phonotactic vocabulary size does not match " + cfg_path);
  }
  DecoderNormalizer dn;
  if (kv.count("decoder_mean")) {
    dn = DecoderNormalizer(SplitFeats(get("decoder_mean"), "decoder_mean"),
                           SplitFeats(get("decoder_std"), "decoder_std"));
  }
  TrainedModel trained{get("system"), spec,
                       FeaturePipeline(std::move(lexical), std::move(phonotactic), dn),
                       EwerModel<float>(spec)};
  trained.model.ImportParameters(nn::LoadCheckpoint((root / kCheckpointFile).string()));
  return trained;
}

std::vector<double> PredictEncoded(EwerModel<float>& model,
                                   const std::vector<EncodedStreams>& items,
                                   size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  std::vector<double> out;
  out.reserve(items.size());
  std::vector<const EncodedStreams*> ptrs;
  for (size_t start = 0; start < items.size(); start += batch_size) {
    ptrs.clear();
    for (size_t i = start; i < std::min(items.size(), start + batch_size); ++i) {
      ptrs.push_back(&items[i]);
    }
    const auto input = MakeModelInput<float>(ptrs, model.spec().streams);
    const nn::Tensor<float> y = model.Forward(input, false);
    for (size_t i = 0; i < y.size(); ++i) out.push_back(y[i]);
  }
  return out;
}

}  // namespace ewer
