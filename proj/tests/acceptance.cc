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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ewer/cli.h"
#include "ewer/corpus.h"
#include "ewer/dsp.h"
#include "ewer/error.h"
#include "ewer/eval.h"
#include "ewer/model.h"
#include "ewer/nn/grad_check.h"
#include "ewer/nn/layers.h"
#include "ewer/nn/loss.h"
#include "ewer/scorer.h"
#include "ewer/synth.h"
#include "ewer/trainer.h"
#include "ewer/wav.h"
#include "oracles.h"
#include "test_util.h"

namespace ewer {
namespace {

// Pinned tolerances and budgets.
constexpr double kScorerBudgetS = 10.0;
constexpr double kMfccTol = 1e-4;
constexpr double kMfccBudgetS = 5.0;
constexpr double kLayerGradTol = 1e-4;
constexpr double kModelGradTol = 1e-3;
constexpr double kGradBudgetS = 60.0;
constexpr double kOverfitMse = 1e-3;
constexpr size_t kOverfitEpochs = 200;
constexpr double kOverfitBudgetS = 300.0;
constexpr double kLearnPearson = 0.9;
constexpr double kLearnBudgetS = 1800.0;
constexpr double kCurveTol = 1e-12;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string Fmt(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

// 1. align() against brute-force edit distance on every pair of sequences up
// to length 4 over three symbols.
Outcome ScorerExhaustive() {
  const auto start = std::chrono::steady_clock::now();
  const auto seqs = testing::AllSequences({"a", "b", "c"}, 4);
  size_t pairs = 0, mismatches = 0;
  for (const auto& ref : seqs) {
    for (const auto& hyp : seqs) {
      const AlignmentCounts c = Align(ref, hyp);
      const int64_t want = testing::BruteEditDistance(ref, hyp);
      if (c.err != want || c.ins + c.del + c.sub != want ||
          c.n_ref != static_cast<int64_t>(ref.size())) {
        ++mismatches;
      }
      ++pairs;
    }
  }
  const double t = Seconds(start);
  return {mismatches == 0 && pairs == 14641 && t < kScorerBudgetS,
          std::to_string(pairs) + " pairs, " + std::to_string(mismatches) + " mismatches, " +
              Fmt("%.2f s", t)};
}

// 2. Corpus WER from error and word counts given in thousands.
Outcome TableArithmetic() {
  struct Row {
    const char* name;
    double err, n, want, tol;
  };
  const Row rows[] = {{"test", 5.7e3, 20e3, 0.285, 0.001},
                      {"train", 22.8e3, 69e3, 0.331, 0.003},
                      {"dev", 32.1e3, 75e3, 0.426, 0.003}};
  bool ok = true;
  std::string detail;
  for (const Row& r : rows) {
    AlignmentCounts c;
    c.err = static_cast<int64_t>(r.err);
    c.sub = c.err;
    c.n_ref = static_cast<int64_t>(r.n);
    const double wer = CorpusWer(std::vector<AlignmentCounts>{c});
    ok &= std::abs(wer - r.want) <= r.tol;
    detail += std::string(detail.empty() ? "" : ", ") + r.name + " " + Fmt("%.4f", wer);
  }
  return {ok, detail};
}

// 3. MFCC golden fixtures generated by an independent implementation.
Outcome MfccGoldens() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  bool shapes_ok = true;
  for (const char* name : {"noise", "tone1k", "chirp"}) {
    const std::string base = testing::DataDir() + "/mfcc/" + name;
    const Waveform wav = ReadWav(base + ".wav");
    const dsp::MfccMatrix got = dsp::ComputeMfcc(wav.samples, wav.sample_rate);
    const auto want = testing::ReadCsvMatrix(base + ".csv");
    if (want.rows != got.rows || want.rows == 0 || want.cols != got.cols) {
      shapes_ok = false;
      continue;
    }
    for (size_t i = 0; i < got.data.size(); ++i) {
      worst = std::max(worst, std::abs(got.data[i] - want.data[i]));
    }
  }
  const double t = Seconds(start);
  return {shapes_ok && worst <= kMfccTol && t < kMfccBudgetS,
          "max abs diff " + Fmt("%.3g", worst) + (shapes_ok ? "" : ", shape mismatch") + ", " +
              Fmt("%.2f s", t)};
}

// 4. Finite-difference gradient checks.
nn::SequenceBatch<double> RandomSeq(size_t channels, std::vector<size_t> lengths, Rng& rng) {
  size_t t_max = 0;
  for (size_t l : lengths) t_max = std::max(t_max, l);
  nn::SequenceBatch<double> x{nn::Tensor<double>({lengths.size(), channels, t_max}), lengths};
  for (size_t b = 0; b < lengths.size(); ++b) {
    for (size_t c = 0; c < channels; ++c) {
      for (size_t t = 0; t < lengths[b]; ++t) x.values.at(b, c, t) = rng.Normal();
    }
  }
  return x;
}

Outcome GradientChecks() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(2024);
  std::vector<std::pair<std::string, double>> errors;

  for (auto act : {nn::Activation::kNone, nn::Activation::kRelu, nn::Activation::kSigmoid}) {
    nn::Dense<double> d(6, 4, act);
    d.Initialize(rng, nn::InitScheme::kHeUniform);
    for (auto& b : d.bias().values()) b = 0.1 * rng.Normal();
    nn::Tensor<double> x({3, 6});
    for (auto& v : x.values()) v = rng.Normal();
    x.EnableGrad();
    std::vector<double> w(12);
    for (auto& v : w) v = rng.Normal();
    auto run = [&](bool back) {
      nn::Tensor<double> y = d.Forward(x);
      if (back) {
        const nn::Tensor<double> dx = d.Backward(nn::Tensor<double>({3, 4}, w));
        for (size_t i = 0; i < dx.size(); ++i) x.grad()[i] += dx[i];
      }
      return y;
    };
    auto loss = [&] {
      const auto y = run(false);
      double s = 0.0;
      for (size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
      return s;
    };
    std::vector<nn::NamedParam<double>> targets;
    d.CollectParameters("dense", targets);
    targets.push_back({"x", &x});
    errors.emplace_back("dense", nn::GradCheck(loss, [&] { run(true); }, targets).max_rel_error);
  }

  const std::pair<size_t, size_t> conv_shapes[] = {{5, 1}, {7, 2}, {1, 2}, {1, 1}, {3, 1}};
  for (const auto& [k, s] : conv_shapes) {
    nn::Conv1d<double> conv(3, 4, k, s, nn::Activation::kRelu);
    conv.Initialize(rng, nn::InitScheme::kHeUniform);
    for (auto& b : conv.bias().values()) b = 0.1 * rng.Normal();
    nn::SequenceBatch<double> x = RandomSeq(3, {9, 4}, rng);
    x.values.EnableGrad();
    const nn::Shape out_shape = conv.Forward(x).values.shape();
    std::vector<double> w(nn::NumElements(out_shape));
    for (auto& v : w) v = rng.Normal();
    auto loss = [&] {
      const auto y = conv.Forward(x).values;
      double sum = 0.0;
      for (size_t i = 0; i < y.size(); ++i) sum += w[i] * y[i];
      return sum;
    };
    auto backward = [&] {
      conv.Forward(x);
      const auto dx = conv.Backward(nn::Tensor<double>(out_shape, w));
      for (size_t i = 0; i < dx.size(); ++i) x.values.grad()[i] += dx[i];
    };
    std::vector<nn::NamedParam<double>> targets;
    conv.CollectParameters("conv", targets);
    targets.push_back({"x", &x.values});
    errors.emplace_back("conv_k" + std::to_string(k) + "s" + std::to_string(s),
                        nn::GradCheck(loss, backward, targets).max_rel_error);
  }

  {
    nn::Embedding<double> emb(7, 3);
    emb.Initialize(rng);
    const std::vector<int32_t> ids = {0, 4, 4, 6, 1, 2};
    std::vector<double> w(18);
    for (auto& v : w) v = rng.Normal();
    auto loss = [&] {
      const auto y = emb.Forward(ids, 2, 3);
      double s = 0.0;
      for (size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
      return s;
    };
    auto backward = [&] {
      emb.Forward(ids, 2, 3);
      emb.Backward(nn::Tensor<double>({2, 3, 3}, w));
    };
    std::vector<nn::NamedParam<double>> targets;
    emb.CollectParameters("emb", targets);
    errors.emplace_back("embedding", nn::GradCheck(loss, backward, targets).max_rel_error);
  }

  {
    nn::GlobalMaxPool<double> pool;
    nn::SequenceBatch<double> x = RandomSeq(4, {6, 3}, rng);
    x.values.EnableGrad();
    std::vector<double> w(8);
    for (auto& v : w) v = rng.Normal();
    auto loss = [&] {
      const auto y = pool.Forward(x);
      double s = 0.0;
      for (size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
      return s;
    };
    auto backward = [&] {
      pool.Forward(x);
      const auto dx = pool.Backward(nn::Tensor<double>({2, 4}, w));
      for (size_t i = 0; i < dx.size(); ++i) x.values.grad()[i] += dx[i];
    };
    errors.emplace_back("maxpool", nn::GradCheck(loss, backward, {{"x", &x.values}}).max_rel_error);
  }

  {
    nn::Tensor<double> pred({4, 1}, std::vector<double>{0.2, 0.7, 0.4, 0.9});
    const nn::Tensor<double> target({4, 1}, std::vector<double>{0.1, 0.8, 0.0, 1.0});
    pred.EnableGrad();
    auto loss = [&] { return nn::MseLoss(pred, target).loss; };
    auto backward = [&] {
      const auto g = nn::MseLoss(pred, target).grad;
      for (size_t i = 0; i < g.size(); ++i) pred.grad()[i] += g[i];
    };
    errors.emplace_back("mse", nn::GradCheck(loss, backward, {{"pred", &pred}}).max_rel_error);
  }

  double worst_layer = 0.0;
  std::string worst_name;
  for (const auto& [name, e] : errors) {
    if (e >= worst_layer) {
      worst_layer = e;
      worst_name = name;
    }
  }

  // Full model, tiny widths, all four streams.
  Rng data_rng(99);
  std::vector<EncodedStreams> items(3);
  for (size_t i = 0; i < items.size(); ++i) {
    EncodedStreams& e = items[i];
    for (auto& v : e.decoder) v = static_cast<float>(data_rng.Normal());
    e.acoustic.num_frames = 6 + 5 * i;
    e.acoustic.data.resize(e.acoustic.num_frames * dsp::kNumCeps);
    for (auto& v : e.acoustic.data) v = static_cast<float>(data_rng.Normal());
    e.lexical.assign(kLexicalLength, Vocab::kPad);
    e.phonotactic.assign(kPhonotacticLength, Vocab::kPad);
    for (size_t t = 0; t < 5 + i; ++t) {
      e.lexical[t] = static_cast<int32_t>(1 + data_rng.UniformInt(7));
    }
    for (size_t t = 0; t < 12 + 3 * i; ++t) {
      e.phonotactic[t] = static_cast<int32_t>(1 + data_rng.UniformInt(5));
    }
  }
  std::vector<const EncodedStreams*> ptrs;
  for (const auto& e : items) ptrs.push_back(&e);
  ModelSpec spec;
  spec.streams = SystemConfig("B");
  spec.dims = ModelDims::Tiny();
  spec.lexical_vocab = 8;
  spec.phonotactic_vocab = 6;
  spec.dropout = 0.0;
  spec.seed = 5;
  EwerModel<double> model(spec);
  // Move biases off zero so no unit sits exactly on a relu kink.
  for (auto& p : model.Parameters()) {
    if (p.name.ends_with(".bias")) {
      for (auto& v : p.tensor->values()) v = 0.1 * rng.Normal();
    }
  }
  const auto input = MakeModelInput<double>(ptrs, spec.streams);
  const nn::Tensor<double> target({3, 1}, std::vector<double>{0.1, 0.5, 0.8});
  auto loss = [&] { return nn::MseLoss(model.Forward(input, false), target).loss; };
  auto backward = [&] { model.Backward(nn::MseLoss(model.Forward(input, false), target).grad); };
  const nn::GradCheckResult full = nn::GradCheck(loss, backward, model.Parameters());

  const double t = Seconds(start);
  return {worst_layer < kLayerGradTol && full.max_rel_error < kModelGradTol &&
              full.checked == model.NumParameters() && t < kGradBudgetS,
          std::to_string(errors.size()) + " layer checks, worst " + worst_name + " " +
              Fmt("%.2e", worst_layer) + "; full model " + std::to_string(full.checked) +
              " params " + Fmt("%.2e", full.max_rel_error) + "; " + Fmt("%.1f s", t)};
}

// 5. A reduced-width four-stream model memorises 32 utterances.
Outcome Overfit() {
  const auto start = std::chrono::steady_clock::now();
  const std::string dir = testing::ScratchDir("accept_overfit");
  SynthConfig sc;
  sc.name = "overfit";
  sc.num_utterances = 32;
  const Corpus corpus = GenerateSyntheticCorpus(sc, 5, dir);
  const FeaturePipeline pipeline = FeaturePipeline::Fit(corpus);
  const StreamConfig streams = SystemConfig("B");
  const Dataset data = MakeDataset(corpus, pipeline, streams, 1);
  TrainConfig cfg;
  cfg.max_epochs = kOverfitEpochs;
  cfg.patience = kOverfitEpochs;
  cfg.dropout = 0.0;
  cfg.batch_size = 8;
  cfg.seed = 1;
  const TrainResult r =
      TrainModel("B", streams, ModelDims::Small(), pipeline, data, data, cfg, nullptr);
  double best = 1e9;
  size_t first_below = 0;
  for (const auto& m : r.history.epochs) {
    best = std::min(best, m.train_mse);
    if (first_below == 0 && m.train_mse < kOverfitMse) first_below = m.epoch;
  }
  const double t = Seconds(start);
  return {first_below > 0 && t < kOverfitBudgetS,
          "min train MSE " + Fmt("%.2e", best) +
              (first_below ? " (below 1e-3 at epoch " + std::to_string(first_below) + ")" : "") +
              ", " + Fmt("%.1f s", t)};
}

// 6. Acoustic-only (E) versus acoustic+phonotactic (F) on synthetic data.
Outcome Learnability() {
  const auto start = std::chrono::steady_clock::now();
  const std::string dir = testing::ScratchDir("accept_learn");
  SynthConfig sc;
  sc.name = "synth";
  sc.num_utterances = 7400;
  const Corpus all = GenerateSyntheticCorpus(sc, 1, dir);
  const std::vector<Corpus> parts =
      SplitCorpus(all, {5000.0 / 7400.0, 1000.0 / 7400.0, 1400.0 / 7400.0}, 0);
  const Corpus& train = parts[0];
  const Corpus& dev = parts[1];
  const Corpus& test = parts[2];
  const FeaturePipeline pipeline = FeaturePipeline::Fit(train);
  const StreamConfig streams_f = SystemConfig("F");
  const Dataset train_ds = MakeDataset(train, pipeline, streams_f);
  const Dataset dev_ds = MakeDataset(dev, pipeline, streams_f);
  const Dataset test_ds = MakeDataset(test, pipeline, streams_f);
  TrainConfig cfg;
  cfg.seed = 7;
  double pearson[2] = {0.0, 0.0};
  const char* systems[2] = {"E", "F"};
  for (int k = 0; k < 2; ++k) {
    TrainResult r = TrainModel(systems[k], SystemConfig(systems[k]), ModelDims::Small(),
                               pipeline, train_ds, dev_ds, cfg, nullptr);
    pearson[k] = Pearson(PredictDataset(r.trained.model, test_ds), test_ds.targets);
  }
  const double t = Seconds(start);
  const bool sizes_ok = train.size() == 5000 && dev.size() == 1000 && test.size() == 1400;
  return {sizes_ok && pearson[1] >= kLearnPearson && pearson[1] > pearson[0] && t < kLearnBudgetS,
          std::to_string(train.size()) + "/" + std::to_string(dev.size()) + "/" +
              std::to_string(test.size()) + " utts, test Pearson E " + Fmt("%.4f", pearson[0]) +
              ", F " + Fmt("%.4f", pearson[1]) + ", " + Fmt("%.0f s", t)};
}

// 7. The cumulative curve ends at the overall WER.
Outcome CurveConsistency() {
  Rng rng(31337);
  double worst = 0.0;
  for (int set = 0; set < 10; ++set) {
    const size_t n = 1 + rng.UniformInt(2000);
    std::vector<WerEstimate> e;
    for (size_t i = 0; i < n; ++i) {
      e.push_back({"u" + std::to_string(i), rng.Uniform(), rng.Uniform(0.5, 30.0), {}});
    }
    worst = std::max(worst, std::abs(CumulativeCurve(e).back().wer - OverallWer(e)));
  }
  return {worst <= kCurveTol, "10 sets, max |final - overall| " + Fmt("%.3g", worst)};
}

int Cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  if (out_text) *out_text = out.str();
  if (code != kExitOk) std::cerr << err.str();
  return code;
}

std::string MakeSmallCorpus(const std::string& name, size_t n) {
  const std::string dir = testing::ScratchDir(name);
  if (Cli({"synth", "--out-dir", dir, "--num", std::to_string(n), "--seed", "11", "--split",
           "0.5,0.25,0.25"}) != kExitOk) {
    throw Error("synth failed");
  }
  return dir;
}

// 8. Two identical training runs give byte-identical artifacts.
Outcome Determinism() {
  const std::string data = MakeSmallCorpus("accept_det_data", 80);
  const std::string dir = testing::ScratchDir("accept_det");
  for (const char* run : {"run1", "run2"}) {
    if (Cli({"train", "--train", data + "/train.jsonl", "--dev", data + "/dev.jsonl", "--out",
             dir + "/" + run, "--system", "B", "--dims", "small", "--epochs", "4", "--seed",
             "7"}) != kExitOk) {
      return {false, std::string("train ") + run + " failed"};
    }
  }
  const std::string c1 = testing::ReadText(dir + "/run1/model.ckpt");
  const std::string c2 = testing::ReadText(dir + "/run2/model.ckpt");
  const std::string h1 = testing::ReadText(dir + "/run1/history.csv");
  const std::string h2 = testing::ReadText(dir + "/run2/history.csv");
  const bool ok = !c1.empty() && c1 == c2 && h1 == h2 &&
                  testing::ReadText(dir + "/run1/model.cfg") ==
                      testing::ReadText(dir + "/run2/model.cfg");
  return {ok, "checkpoint " + std::to_string(c1.size()) + " bytes " +
                  (c1 == c2 ? "identical" : "DIFFERENT") + ", history " +
                  (h1 == h2 ? "identical" : "DIFFERENT")};
}

// 9. The ablation harness at full widths reports six systems whose fusion
// widths agree with the model's own.
Outcome Ablation() {
  const std::string data = MakeSmallCorpus("accept_ablate_data", 24);
  std::string csv;
  if (Cli({"ablate", "--train", data + "/train.jsonl", "--dev", data + "/dev.jsonl", "--test",
           data + "/test.jsonl", "--dims", "full", "--epochs", "1", "--seed", "3"},
          &csv) != kExitOk) {
    return {false, "ablate failed"};
  }
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  bool ok = line == "system,pearson,rmse,overall_wer,fusion_width";
  const Corpus train = LoadManifest(data + "/train.jsonl");
  const FeaturePipeline pipeline = FeaturePipeline::Fit(train);
  std::vector<std::string> seen;
  std::string widths;
  while (std::getline(in, line)) {
    const std::string system = line.substr(0, line.find(','));
    const size_t reported = std::stoul(line.substr(line.rfind(',') + 1));
    ModelSpec spec;
    spec.streams = SystemConfig(system);
    spec.dims = ModelDims::Full();
    spec.lexical_vocab = pipeline.lexical_vocab().size();
    spec.phonotactic_vocab = pipeline.phonotactic_vocab().size();
    const size_t built = EwerModel<float>(spec).fusion_width();
    ok &= reported == built;
    seen.push_back(system);
    widths += (widths.empty() ? "" : " ") + system + "=" + std::to_string(reported);
  }
  ok &= seen == SystemNames();
  const std::vector<size_t> expected_widths = {2068, 3604, 2036, 3572, 500, 2036};
  for (size_t i = 0; i < std::min(seen.size(), expected_widths.size()); ++i) {
    ok &= FusionWidth(SystemConfig(seen[i]), ModelDims::Full()) == expected_widths[i];
  }
  return {ok, std::to_string(seen.size()) + " rows, widths " + widths};
}

}  // namespace
}  // namespace ewer

int main(int argc, char** argv) {
  using Check = std::function<ewer::Outcome()>;
  const std::vector<std::pair<const char*, Check>> criteria = {
      {"scorer matches brute-force edit distance", ewer::ScorerExhaustive},
      {"corpus WER from counts in thousands", ewer::TableArithmetic},
      {"MFCC golden fixtures", ewer::MfccGoldens},
      {"gradient checks", ewer::GradientChecks},
      {"overfit 32 utterances", ewer::Overfit},
      {"synthetic learnability E vs F", ewer::Learnability},
      {"cumulative curve ends at overall WER", ewer::CurveConsistency},
      {"deterministic training", ewer::Determinism},
      {"ablation harness widths", ewer::Ablation},
  };
  std::set<size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoul(argv[i]));
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.count(i + 1)) continue;
    ewer::Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
