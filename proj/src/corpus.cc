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

#include "ewer/corpus.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "json.hpp"

#include "ewer/error.h"
#include "ewer/rng.h"

namespace ewer {
namespace {

using ordered_json = nlohmann::ordered_json;

WordSeq TokensField(const ordered_json& j, const char* key) {
  if (!j.contains(key)) {
    throw ValidationError(std::string("missing required field '") + key + "'");
  }
  const auto& v = j.at(key);
  if (!v.is_string()) {
    throw ValidationError(std::string("field '") + key + "' must be a string");
  }
  return Tokenize(v.get<std::string>());
}

double NumberField(const ordered_json& v, const char* key) {
  if (!v.is_number()) {
    throw ValidationError(std::string("field '") + key + "' must be a number");
  }
  return v.get<double>();
}

}  // namespace

std::string Corpus::AudioPath(const Utterance& utt) const {
  std::filesystem::path p(utt.audio_path);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (std::filesystem::path(base_dir) / p).string();
}

void ValidateUtterance(const Utterance& utt) {
  if (utt.id.empty()) throw ValidationError("utterance id must not be empty");
  if (!(utt.duration_s > 0.0) || !std::isfinite(utt.duration_s)) {
    throw ValidationError(utt.id + ": duration_s must be > 0");
  }
  for (double f : utt.decoder_feats) {
    if (!std::isfinite(f)) {
      throw ValidationError(utt.id + ": decoder_feats must be finite");
    }
  }
  if (utt.wer_target) {
    const double w = *utt.wer_target;
    if (!(w >= 0.0 && w <= 1.0)) {
      throw ValidationError(utt.id + ": wer_target must lie in [0, 1]");
    }
  }
}

std::string UtteranceToJsonLine(const Utterance& utt) {
  ordered_json j;
  j["id"] = utt.id;
  j["audio"] = utt.audio_path;
  j["duration_s"] = utt.duration_s;
  j["hyp"] = JoinTokens(utt.hyp_words);
  j["phonemes"] = JoinTokens(utt.phonemes);
  j["decoder_feats"] = utt.decoder_feats;
  if (utt.ref_words) j["ref"] = JoinTokens(*utt.ref_words);
  if (utt.wer_target) j["wer_target"] = *utt.wer_target;
  return j.dump();
}

Utterance UtteranceFromJsonLine(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (!j.is_object()) throw ParseError("record is not a JSON object");

  Utterance utt;
  for (const char* key : {"id", "audio", "duration_s", "decoder_feats"}) {
    if (!j.contains(key)) {
      throw ValidationError(std::string("missing required field '") + key + "'");
    }
  }
  if (!j["id"].is_string() || !j["audio"].is_string()) {
    throw ValidationError("fields 'id' and 'audio' must be strings");
  }
  utt.id = j["id"].get<std::string>();
  utt.audio_path = j["audio"].get<std::string>();
  utt.duration_s = NumberField(j["duration_s"], "duration_s");
  utt.hyp_words = TokensField(j, "hyp");
  utt.phonemes = TokensField(j, "phonemes");

  const auto& feats = j["decoder_feats"];
  if (!feats.is_array() || feats.size() != kNumDecoderFeats) {
    throw ValidationError("decoder_feats must have 4 entries");
  }
  for (size_t i = 0; i < kNumDecoderFeats; ++i) {
    utt.decoder_feats[i] = NumberField(feats[i], "decoder_feats");
  }
  if (j.contains("ref")) utt.ref_words = TokensField(j, "ref");
  if (j.contains("wer_target")) {
    utt.wer_target = NumberField(j["wer_target"], "wer_target");
  }
  for (const auto& [key, value] : j.items()) {
    static const std::set<std::string> kKnown = {
        "id", "audio", "duration_s", "hyp", "phonemes", "decoder_feats", "ref", "wer_target"};
    if (!kKnown.count(key)) throw ValidationError("unknown field '" + key + "'");
  }
  ValidateUtterance(utt);
  return utt;
}

Corpus LoadManifest(const std::string& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  const std::filesystem::path fs_path(path);
  Corpus corpus;
  corpus.name = name.empty() ? fs_path.stem().string() : name;
  corpus.base_dir = fs_path.parent_path().string();

  std::set<std::string> ids;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    try {
      Utterance utt = UtteranceFromJsonLine(line);
      if (!ids.insert(utt.id).second) {
        throw ValidationError("duplicate id '" + utt.id + "'");
      }
      corpus.utterances.push_back(std::move(utt));
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return corpus;
}

void SaveManifest(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path);
  for (const auto& utt : corpus.utterances) out << UtteranceToJsonLine(utt) << '\n';
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

std::vector<Corpus> SplitCorpus(const Corpus& corpus,
                                const std::vector<double>& fractions,
                                uint64_t seed) {
  if (fractions.empty()) throw ConfigError("split needs at least one fraction");
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw ConfigError("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");

  const size_t n = corpus.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.Shuffle(order);

  std::vector<Corpus> parts;
  double cumulative = 0.0;
  size_t begin = 0;
  for (size_t k = 0; k < fractions.size(); ++k) {
    cumulative += fractions[k];
    size_t end = k + 1 == fractions.size()
                     ? n
                     : static_cast<size_t>(std::floor(cumulative * static_cast<double>(n) + 1e-9));
    end = std::clamp(end, begin, n);
    std::vector<size_t> members(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                order.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(members.begin(), members.end());
    Corpus part;
    part.name = corpus.name + "." + std::to_string(k);
    part.base_dir = corpus.base_dir;
    for (size_t i : members) part.utterances.push_back(corpus.utterances[i]);
    parts.push_back(std::move(part));
    begin = end;
  }
  return parts;
}

double ClampedWerTarget(const Utterance& utt) {
  if (!utt.ref_words) throw ValidationError(utt.id + ": no reference transcript");
  return std::clamp(WerUtterance(*utt.ref_words, utt.hyp_words), 0.0, 1.0);
}

}  // namespace ewer
