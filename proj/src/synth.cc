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

#include "ewer/synth.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "ewer/error.h"
#include "ewer/rng.h"

namespace ewer {
namespace {

constexpr int kRate = 16000;
constexpr size_t kPhoneSamples = 1280;   // 80 ms
constexpr size_t kFadeSamples = 80;      // 5 ms raised-cosine ramps
constexpr size_t kEdgeSilence = 1600;    // 100 ms lead-in and tail
constexpr size_t kWordGap = 640;         // 40 ms pause between words
constexpr double kToneAmplitude = 0.25;
constexpr size_t kMarkersPerProgram = 2;

// Share of the error-level deviation explained by the program versus the
// acoustic noise level.
constexpr double kProgramWeight = 0.6;
constexpr double kNoiseWeight = 0.4;

// Edit operation mix for injected errors; deletions and substitutions
// dominate insertions as in broadcast-news scoring.
constexpr double kSubShare = 0.5;
constexpr double kDelShare = 0.42;

const std::vector<std::string>& ArpabetPhones() {
  static const std::vector<std::string> kPhones = {
      "aa", "ae", "ah", "ao", "aw", "ay", "b",  "ch", "d",  "dh",
      "eh", "er", "ey", "f",  "g",  "hh", "ih", "iy", "jh", "k",
      "l",  "m",  "n",  "ng", "ow", "oy", "p",  "r",  "s",  "sh",
      "t",  "th", "uh", "uw", "v",  "w",  "y",  "z",  "zh"};
  return kPhones;
}

std::string PadNumber(size_t value, size_t width) {
  std::string s = std::to_string(value);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

size_t Digits(size_t n) {
  size_t d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

}  // namespace

ToyLexicon::ToyLexicon(size_t vocab_size, size_t num_programs)
    : num_programs_(num_programs), phones_(ArpabetPhones()) {
  if (vocab_size < 2) throw ConfigError("vocabulary size must be >= 2");
  if (num_programs == 0) throw ConfigError("need at least one program");
  if (num_programs > vocab_size) {
    throw ConfigError("more programs than vocabulary words");
  }
  const size_t n_phones = phones_.size();
  if (num_programs * kMarkersPerProgram + 4 > n_phones) {
    throw ConfigError("too many programs for the phone inventory");
  }

  freqs_.resize(n_phones);
  for (size_t i = 0; i < n_phones; ++i) {
    freqs_[i] = 200.0 * std::pow(17.5, static_cast<double>(i) /
                                           static_cast<double>(n_phones - 1));
  }

  Rng rng = Rng::Derive(0x1e71c0ULL, vocab_size * 1000 + num_programs);
  std::vector<size_t> roles(n_phones);
  for (size_t i = 0; i < n_phones; ++i) roles[i] = i;
  rng.Shuffle(roles);
  std::vector<std::vector<size_t>> markers(num_programs);
  size_t next = 0;
  for (size_t p = 0; p < num_programs; ++p) {
    for (size_t m = 0; m < kMarkersPerProgram; ++m) markers[p].push_back(roles[next++]);
  }
  const std::vector<size_t> common(roles.begin() + static_cast<std::ptrdiff_t>(next),
                                   roles.end());

  const size_t width = std::max<size_t>(4, Digits(vocab_size - 1));
  program_words_.resize(num_programs);
  for (size_t w = 0; w < vocab_size; ++w) {
    words_.push_back("w" + PadNumber(w, width));
    const size_t len = static_cast<size_t>(rng.UniformRange(2, 5));
    std::vector<size_t> pron(len);
    for (auto& ph : pron) ph = common[rng.UniformInt(common.size())];
    const auto& mk = markers[w % num_programs];
    pron[rng.UniformInt(len)] = mk[rng.UniformInt(mk.size())];
    prons_.push_back(std::move(pron));
    program_words_[w % num_programs].push_back(w);
  }
}

void ValidateSynthConfig(const SynthConfig& cfg) {
  if (cfg.vocab_size < 2) throw ConfigError("vocabulary size must be >= 2");
  if (cfg.min_words < 1 || cfg.min_words > cfg.max_words) {
    throw ConfigError("invalid sentence length range");
  }
  if (cfg.num_programs == 0) throw ConfigError("need at least one program");
  if (!(cfg.mean_error >= 0.0 && cfg.mean_error <= 1.0)) {
    throw ConfigError("mean error level must lie in [0, 1]");
  }
  if (!(cfg.error_spread >= 0.0 && cfg.error_spread <= 1.0)) {
    throw ConfigError("error spread must lie in [0, 1]");
  }
  if (cfg.name.empty()) throw ConfigError("corpus name must not be empty");
}

Waveform RenderPhones(const ToyLexicon& lexicon,
                      const std::vector<std::vector<size_t>>& words,
                      double speaker_scale, double noise_stddev, uint64_t seed) {
  size_t total = 2 * kEdgeSilence;
  for (size_t w = 0; w < words.size(); ++w) {
    total += words[w].size() * kPhoneSamples + (w > 0 ? kWordGap : 0);
  }
  Waveform wav;
  wav.sample_rate = kRate;
  std::vector<double> signal(total, 0.0);

  size_t pos = kEdgeSilence;
  for (size_t w = 0; w < words.size(); ++w) {
    if (w > 0) pos += kWordGap;
    for (size_t phone : words[w]) {
      const double freq = lexicon.PhoneFrequency(phone) * speaker_scale;
      for (size_t n = 0; n < kPhoneSamples; ++n) {
        double gain = 1.0;
        const size_t edge = std::min(n, kPhoneSamples - 1 - n);
        if (edge < kFadeSamples) {
          gain = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(edge) /
                                      static_cast<double>(kFadeSamples));
        }
        signal[pos + n] = kToneAmplitude * gain *
                          std::sin(2.0 * std::numbers::pi * freq *
                                   static_cast<double>(n) / kRate);
      }
      pos += kPhoneSamples;
    }
  }

  Rng noise(seed);
  wav.samples.resize(total);
  for (size_t i = 0; i < total; ++i) {
    wav.samples[i] = static_cast<float>(signal[i] + noise.Normal(0.0, noise_stddev));
  }
  return wav;
}

Corpus GenerateSyntheticCorpus(const SynthConfig& cfg, uint64_t seed,
                               const std::string& out_dir) {
  ValidateSynthConfig(cfg);
  const ToyLexicon lexicon(cfg.vocab_size, cfg.num_programs);

  Corpus corpus;
  corpus.name = cfg.name;
  corpus.base_dir = out_dir;
  const std::filesystem::path audio_rel = std::filesystem::path("audio") / cfg.name;
  if (cfg.write_audio) {
    std::filesystem::create_directories(std::filesystem::path(out_dir) / audio_rel);
  }

  const size_t id_width = std::max<size_t>(5, Digits(cfg.num_utterances));
  const size_t n_phones = lexicon.phone_inventory().size();
  for (size_t u = 0; u < cfg.num_utterances; ++u) {
    Rng rng = Rng::Derive(seed, 4 * u);
    Rng phone_rng = Rng::Derive(seed, 4 * u + 1);
    Rng decoder_rng = Rng::Derive(seed, 4 * u + 2);
    const uint64_t audio_seed = Rng::Derive(seed, 4 * u + 3).NextU64();

    const size_t program = rng.UniformInt(cfg.num_programs);
    const double noise_level = rng.Uniform();
    const double speaker_scale = rng.Uniform(0.85, 1.18);
    double level = cfg.mean_error;
    if (cfg.error_spread > 0.0) {
      const double program_offset =
          cfg.num_programs > 1
              ? -1.0 + 2.0 * static_cast<double>(program) /
                           static_cast<double>(cfg.num_programs - 1)
              : 0.0;
      level += cfg.error_spread * (kProgramWeight * program_offset +
                                   kNoiseWeight * (2.0 * noise_level - 1.0));
    }
    level = std::clamp(level, 0.0, 1.0);

    const auto& pool = lexicon.ProgramWords(program);
    auto draw_word = [&]() { return pool[rng.UniformInt(pool.size())]; };
    const auto n_words = static_cast<size_t>(rng.UniformRange(
        static_cast<int64_t>(cfg.min_words), static_cast<int64_t>(cfg.max_words)));
    std::vector<size_t> ref(n_words);
    for (auto& w : ref) w = draw_word();

    // Exactly round(level * N) positions are corrupted.
    const auto n_errors = static_cast<size_t>(
        std::lround(level * static_cast<double>(n_words)));
    std::vector<size_t> positions(n_words);
    for (size_t i = 0; i < n_words; ++i) positions[i] = i;
    rng.Shuffle(positions);
    std::vector<int> op(n_words, 0);  // 0 keep, 1 sub, 2 del, 3 ins
    for (size_t e = 0; e < n_errors; ++e) {
      const double r = rng.Uniform();
      op[positions[e]] = r < kSubShare ? 1 : (r < kSubShare + kDelShare ? 2 : 3);
    }
    std::vector<size_t> hyp;
    for (size_t i = 0; i < n_words; ++i) {
      switch (op[i]) {
        case 1: {
          size_t w = draw_word();
          while (pool.size() > 1 && w == ref[i]) w = draw_word();
          hyp.push_back(w);
          break;
        }
        case 2:
          break;
        case 3:
          hyp.push_back(ref[i]);
          hyp.push_back(draw_word());
          break;
        default:
          hyp.push_back(ref[i]);
      }
    }

    Utterance utt;
    utt.id = cfg.name + "-" + PadNumber(u, id_width);
    utt.audio_path = (audio_rel / (utt.id + ".wav")).string();
    WordSeq ref_words;
    for (size_t w : ref) ref_words.push_back(lexicon.words()[w]);
    for (size_t w : hyp) utt.hyp_words.push_back(lexicon.words()[w]);

    // Phone recogniser output: pronunciations of the hypothesis with
    // substitutions that grow with the acoustic noise.
    const double phone_noise = 0.01 + 0.04 * noise_level;
    for (size_t w : hyp) {
      for (size_t ph : lexicon.Pronunciation(w)) {
        size_t out = ph;
        if (phone_rng.Bernoulli(phone_noise)) {
          out = (ph + 1 + phone_rng.UniformInt(n_phones - 1)) % n_phones;
        }
        utt.phonemes.push_back(lexicon.phone_inventory()[out]);
      }
    }

    std::vector<std::vector<size_t>> spoken;
    for (size_t w : ref) spoken.push_back(lexicon.Pronunciation(w));
    const double noise_stddev = 0.003 + 0.05 * noise_level;
    const Waveform wav = RenderPhones(lexicon, spoken, speaker_scale, noise_stddev, audio_seed);
    utt.duration_s = wav.duration_s();
    if (cfg.write_audio) WriteWav(corpus.AudioPath(utt), wav);

    // Decoder features at 100 frames per second.
    const double frames = std::round(utt.duration_s * 100.0);
    const double avg_ll = -(0.8 + 2.5 * level + 0.25 * decoder_rng.Normal());
    utt.decoder_feats = {frames, avg_ll, 0.85 * avg_ll * frames,
                         0.15 * avg_ll * frames * (1.0 + 0.1 * decoder_rng.Normal())};

    utt.wer_target = std::clamp(WerUtterance(ref_words, utt.hyp_words), 0.0, 1.0);
    utt.ref_words = std::move(ref_words);
    corpus.utterances.push_back(std::move(utt));
  }
  return corpus;
}

}  // namespace ewer
