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

#include "ewer/cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "ewer/corpus.h"
#include "ewer/dsp.h"
#include "ewer/encoders.h"
#include "ewer/error.h"
#include "ewer/eval.h"
#include "ewer/model.h"
#include "ewer/nn/checkpoint.h"
#include "ewer/scorer.h"
#include "ewer/synth.h"
#include "ewer/trainer.h"
#include "ewer/wav.h"

namespace ewer {
namespace {

namespace fs = std::filesystem;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

// Writes to `path`, or to `out` when the path is empty or "-".
void Emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    out.flush();
  } else {
    WriteFile(path, text);
  }
}

std::vector<double> ParseFractions(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad split fraction '" + item + "'");
    }
  }
  return out;
}

std::vector<std::string> SplitComma(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

// Kaldi-style transcript: "<id> word word ..." per line, or plain lines
// numbered from 1 when `plain` is set.
std::vector<std::pair<std::string, WordSeq>> ReadTranscripts(const std::string& path,
                                                             bool plain) {
  std::istringstream in(ReadFile(path));
  std::vector<std::pair<std::string, WordSeq>> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    WordSeq tokens = Tokenize(line);
    if (plain) {
      out.emplace_back(std::to_string(lineno), std::move(tokens));
      continue;
    }
    if (tokens.empty()) continue;
    std::string id = tokens.front();
    tokens.erase(tokens.begin());
    out.emplace_back(std::move(id), std::move(tokens));
  }
  return out;
}

std::string FormatRate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string CountsRow(const std::string& id, const AlignmentCounts& c) {
  const std::string wer =
      c.n_ref > 0 ? FormatRate(static_cast<double>(c.err) / static_cast<double>(c.n_ref))
                  : "nan";
  return id + "," + std::to_string(c.ins) + "," + std::to_string(c.del) + "," +
         std::to_string(c.sub) + "," + std::to_string(c.n_ref) + "," + std::to_string(c.err) +
         "," + wer + "\n";
}

struct CommonTrainFlags {
  std::string dims = "full";
  size_t batch_size = 32;
  size_t epochs = 50;
  double dropout = 0.2;
  double lr = 1e-3;
  size_t patience = 5;
  uint64_t seed = 0;
  unsigned threads = 0;

  void Add(CLI::App* app) {
    app->add_option("--dims", dims, "Layer widths: full, small or tiny")
        ->check(CLI::IsMember({"full", "small", "tiny"}))
        ->capture_default_str();
    app->add_option("--batch-size", batch_size, "Mini-batch size")->capture_default_str();
    app->add_option("--epochs", epochs, "Maximum number of epochs")->capture_default_str();
    app->add_option("--dropout", dropout, "Dropout rate")->capture_default_str();
    app->add_option("--lr", lr, "Adam learning rate")->capture_default_str();
    app->add_option("--patience", patience, "Early-stopping patience in epochs")
        ->capture_default_str();
    app->add_option("--seed", seed, "Seed for initialisation, shuffling and dropout")
        ->capture_default_str();
    app->add_option("--threads", threads, "Feature extraction threads (0 = all cores)")
        ->capture_default_str();
  }

  TrainConfig Config() const {
    TrainConfig cfg;
    cfg.batch_size = batch_size;
    cfg.max_epochs = epochs;
    cfg.dropout = dropout;
    cfg.lr = lr;
    cfg.patience = patience;
    cfg.seed = seed;
    cfg.Validate();
    return cfg;
  }
};

Corpus LoadCorpus(const std::string& path, std::ostream& err) {
  Corpus c = LoadManifest(path);
  err << "loaded " << c.size() << " utterances from " << path << "\n";
  return c;
}

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int Run(const std::vector<std::string>& args);

 private:
  void SetupSynth(CLI::App& app);
  void SetupScore(CLI::App& app);
  void SetupMfcc(CLI::App& app);
  void SetupTrain(CLI::App& app);
  void SetupPredict(CLI::App& app);
  void SetupEvaluate(CLI::App& app);
  void SetupAblate(CLI::App& app);
  void SetupCurve(CLI::App& app);

  CLI::App* Sub(CLI::App& app, const std::string& name, const std::string& help) {
    return app.add_subcommand(name, help);
  }

  std::ostream& out_;
  std::ostream& err_;
};

void Cli::SetupSynth(CLI::App& app) {
  struct Flags {
    SynthConfig cfg;
    std::string out_dir;
    uint64_t seed = 0;
    bool no_audio = false;
    std::string split;
    std::string split_names = "train,dev,test";
    uint64_t split_seed = 0;
  };
  auto f = std::make_shared<Flags>();
  CLI::App* sub = Sub(app, "synth", "Generate a synthetic corpus (manifest plus audio)");
  sub->add_option("--out-dir", f->out_dir, "Output directory")->required();
  sub->add_option("--name", f->cfg.name, "Corpus name")->capture_default_str();
  sub->add_option("--num", f->cfg.num_utterances, "Number of utterances")->capture_default_str();
  sub->add_option("--vocab-size", f->cfg.vocab_size, "Toy vocabulary size")->capture_default_str();
  sub->add_option("--programs", f->cfg.num_programs, "Number of programs")->capture_default_str();
  sub->add_option("--min-words", f->cfg.min_words, "Shortest reference")->capture_default_str();
  sub->add_option("--max-words", f->cfg.max_words, "Longest reference")->capture_default_str();
  sub->add_option("--mean-error", f->cfg.mean_error, "Mean error level")->capture_default_str();
  sub->add_option("--error-spread", f->cfg.error_spread, "Error level spread")
      ->capture_default_str();
  sub->add_option("--seed", f->seed, "Generation seed")->capture_default_str();
  sub->add_flag("--no-audio", f->no_audio, "Skip writing WAV files");
  sub->add_option("--split", f->split, "Comma-separated fractions, e.g. 0.7,0.1,0.2");
  sub->add_option("--split-names", f->split_names, "Names of the split parts")
      ->capture_default_str();
  sub->add_option("--split-seed", f->split_seed, "Seed of the split shuffle")
      ->capture_default_str();
  sub->callback([this, f] {
    f->cfg.write_audio = !f->no_audio;
    const Corpus corpus = GenerateSyntheticCorpus(f->cfg, f->seed, f->out_dir);
    const fs::path dir(f->out_dir);
    if (f->split.empty()) {
      const std::string path = (dir / (f->cfg.name + ".jsonl")).string();
      SaveManifest(corpus, path);
      out_ << path << "\n";
      err_ << "wrote " << corpus.size() << " utterances\n";
      return;
    }
    const std::vector<std::string> names = SplitComma(f->split_names);
    const std::vector<double> fractions = ParseFractions(f->split);
    if (names.size() != fractions.size()) {
      throw ConfigError("--split has " + std::to_string(fractions.size()) +
                        " parts but --split-names has " + std::to_string(names.size()));
    }
    std::vector<Corpus> parts = SplitCorpus(corpus, fractions, f->split_seed);
    for (size_t k = 0; k < parts.size(); ++k) {
      parts[k].name = names[k];
      const std::string path = (dir / (names[k] + ".jsonl")).string();
      SaveManifest(parts[k], path);
      out_ << path << "\n";
      err_ << "wrote " << parts[k].size() << " utterances to " << path << "\n";
    }
  });
}

void Cli::SetupScore(CLI::App& app) {
  struct Flags {
    std::string ref, hyp, manifest, out;
    bool plain = false;
  };
  auto f = std::make_shared<Flags>();
  CLI::App* sub = Sub(app, "score", "Reference-based WER scoring");
  auto* ref = sub->add_option("--ref", f->ref, "Reference transcripts (<id> words... per line)");
  auto* hyp = sub->add_option("--hyp", f->hyp, "Hypothesis transcripts");
  auto* man = sub->add_option("--manifest", f->manifest, "Score hyp against ref in a manifest");
  ref->needs(hyp);
  hyp->needs(ref);
  man->excludes(ref)->excludes(hyp);
  sub->add_flag("--plain", f->plain, "Transcript lines carry no id; lines pair by position");
  sub->add_option("--out", f->out, "Output CSV (default stdout)");
  sub->callback([this, f] {
    std::vector<std::pair<std::string, AlignmentCounts>> rows;
    if (!f->manifest.empty()) {
      const Corpus c = LoadManifest(f->manifest);
      for (const auto& u : c.utterances) {
        if (!u.ref_words) throw ValidationError(u.id + ": no reference in manifest");
        rows.emplace_back(u.id, Align(*u.ref_words, u.hyp_words));
      }
    } else if (!f->ref.empty()) {
      const auto refs = ReadTranscripts(f->ref, f->plain);
      const auto hyps = ReadTranscripts(f->hyp, f->plain);
      std::map<std::string, const WordSeq*> by_id;
      for (const auto& [id, words] : hyps) {
        if (!by_id.emplace(id, &words).second) {
          throw ValidationError(f->hyp + ": duplicate id " + id);
        }
      }
      if (hyps.size() != refs.size()) {
        throw ValidationError("reference has " + std::to_string(refs.size()) +
                              " utterances, hypothesis has " + std::to_string(hyps.size()));
      }
      for (const auto& [id, words] : refs) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw ValidationError("no hypothesis for utterance " + id);
        rows.emplace_back(id, Align(words, *it->second));
      }
    } else {
      throw CLI::RequiredError("score needs --ref/--hyp or --manifest");
    }
    std::string csv = "id,I,D,S,N,ERR,WER\n";
    AlignmentCounts total;
    for (const auto& [id, c] : rows) {
      csv += CountsRow(id, c);
      total += c;
    }
    csv += CountsRow("TOTAL", total);
    Emit(f->out, csv, out_);
    if (total.n_ref == 0) throw ValidationError("corpus WER undefined: no reference words");
    err_ << "corpus WER " << FormatRate(CorpusWer(std::vector<AlignmentCounts>{total}))
         << " (" << total.err << " errors / " << total.n_ref << " words)\n";
  });
}

void Cli::SetupMfcc(CLI::App& app) {
  struct Flags {
    std::string wav, out, format = "csv";
  };
  auto f = std::make_shared<Flags>();
  CLI::App* sub = Sub(app, "mfcc", "Extract 13 MFCCs per 10 ms frame from a WAV file");
  sub->add_option("--wav", f->wav, "16 kHz mono PCM16 WAV")->required();
  sub->add_option("--out", f->out, "Output file (default stdout)");
  sub->add_option("--format", f->format, "csv or ckpt (binary tensor)")
      ->check(CLI::IsMember({"csv", "ckpt"}))
      ->capture_default_str();
  sub->callback([this, f] {
    const Waveform wav = ReadWav(f->wav);
    const dsp::MfccMatrix m = dsp::ComputeMfcc(wav.samples, wav.sample_rate);
    if (f->format == "ckpt") {
      if (f->out.empty() || f->out == "-") {
        throw ConfigError("--format ckpt needs --out");
      }
      nn::NamedTensor t{"mfcc", {m.rows, m.cols}, {}};
      for (double v : m.data) t.values.push_back(static_cast<float>(v));
      nn::SaveCheckpoint(f->out, {t});
    } else {
      std::string csv;
      char buf[40];
      for (size_t r = 0; r < m.rows; ++r) {
        for (size_t c = 0; c < m.cols; ++c) {
          std::snprintf(buf, sizeof(buf), c ? ",%.9g" : "%.9g", m(r, c));
          csv += buf;
        }
        csv += "\n";
      }
      Emit(f->out, csv, out_);
    }
    err_ << m.rows << " frames\n";
  });
}

void Cli::SetupTrain(CLI::App& app) {
  struct Flags {
    CommonTrainFlags common;
    std::string train, dev, out_dir, system = "B", streams;
  };
  auto f = std::make_shared<Flags>();
  CLI::App* sub = Sub(app, "train", "Train a WER estimator");
  sub->add_option("--train", f->train, "Training manifest")->required();
  sub->add_option("--dev", f->dev, "Dev manifest for early stopping")->required();
  sub->add_option("--out", f->out_dir, "Model output directory")->required();
  sub->add_option("--system", f->system, "Stream set A..F")->capture_default_str();
  sub->add_option("--streams", f->streams,
                  "Explicit comma-separated streams; overrides --system");
  f->common.Add(sub);
  sub->callback([this, f] {
    const TrainConfig cfg = f->common.Config();
    const ModelDims dims = ModelDims::Preset(f->common.dims);
    const std::string system =
        f->streams.empty() ? CanonicalSystemName(f->system) : std::string("custom");
    const StreamConfig streams =
        f->streams.empty() ? SystemConfig(system) : StreamConfig::Parse(f->streams);
    const Corpus train = LoadCorpus(f->train, err_);
    const Corpus dev = LoadCorpus(f->dev, err_);
    const FeaturePipeline pipeline = FeaturePipeline::Fit(train);
    const Dataset train_ds = MakeDataset(train, pipeline, streams, f->common.threads);
    const Dataset dev_ds = MakeDataset(dev, pipeline, streams, f->common.threads);
    err_ << "system " << system << " (" << streams.ToString() << "), fusion width "
         << FusionWidth(streams, dims) << "\n";
    TrainResult r = TrainModel(system, streams, dims, pipeline, train_ds, dev_ds, cfg, &err_);
    SaveTrainedModel(r.trained, f->out_dir);
    WriteFile((fs::path(f->out_dir) / "history.csv").string(), HistoryCsv(r.history));
    err_ << "best epoch " << r.history.best_epoch << ", dev MSE " << r.history.best_dev_mse
         << "\n";
    out_ << f->out_dir << "\n";
  });
}

void Cli::SetupPredict(CLI::App& app) {
  struct Flags {
    std::string model, manifest, out;
    unsigned threads = 0;
  };
  auto f = std::make_shared<Flags>();
  CLI::App* sub = Sub(app, "predict", "Estimate per-utterance WER without references");
  sub->add_option("--model", f->model, "Model directory")->required();
  sub->add_option("--manifest", f->manifest, "Manifest to score")->required();
  sub->add_option("--out", f->out, "Estimates CSV (default stdout)");
  sub->add_option("--threads", f->threads, "Feature extraction threads")->capture_default_str();
  sub->callback([this, f] {
    TrainedModel trained = LoadTrainedModel(f->model);
    const Corpus corpus = LoadCorpus(f->manifest, err_);
    const auto estimates = PredictCorpus(trained, corpus, f->threads);
    Emit(f->out, EstimatesCsv(estimates), out_);
    err_ << "estimated overall WER " << FormatRate(OverallWer(estimates)) << "\n";
  });
}

void Cli::SetupEvaluate(CLI::App& app) {
  struct Flags {
    std::string model, manifest, out, estimates_out, summary;
    unsigned threads = 0;
  };
  auto f = std::make_shared<Flags>();
  CLI::App* sub = Sub(app, "evaluate", "Compare estimates with reference-scored WER");
  sub->add_option("--model", f->model, "Model directory")->required();
  sub->add_option("--manifest", f->manifest, "Manifest with references")->required();
  sub->add_option("--out", f->out, "Report CSV (default stdout)");
  sub->add_option("--estimates-out", f->estimates_out, "Also write per-utterance estimates");
  sub->add_option("--summary", f->summary, "Write the text summary here instead of stderr");
  sub->add_option("--threads", f->threads, "Feature extraction threads")->capture_default_str();
  sub->callback([this, f] {
    TrainedModel trained = LoadTrainedModel(f->model);
    const Corpus corpus = LoadCorpus(f->manifest, err_);
    const SystemEvaluation ev = EvaluateSystem(trained, corpus, false, f->threads);
    Emit(f->out, ReportCsv(ev.report), out_);
    if (!f->estimates_out.empty()) WriteFile(f->estimates_out, EstimatesCsv(ev.estimates));
    if (f->summary.empty()) {
      err_ << ReportSummary(ev.report);
    } else {
      WriteFile(f->summary, ReportSummary(ev.report));
    }
  });
}

void Cli::SetupAblate(CLI::App& app) {
  struct Flags {
    CommonTrainFlags common;
    std::string train, dev, test, out, save_dir;
  };
  auto f = std::make_shared<Flags>();
  CLI::App* sub = Sub(app, "ablate", "Train and evaluate the six stream systems A..F");
  sub->add_option("--train", f->train, "Training manifest")->required();
  sub->add_option("--dev", f->dev, "Dev manifest")->required();
  sub->add_option("--test", f->test, "Test manifest with references")->required();
  sub->add_option("--out", f->out, "Results CSV (default stdout)");
  sub->add_option("--save-dir", f->save_dir, "Keep each trained system under <dir>/<name>");
  f->common.Add(sub);
  sub->callback([this, f] {
    const TrainConfig cfg = f->common.Config();
    const ModelDims dims = ModelDims::Preset(f->common.dims);
    const Corpus train = LoadCorpus(f->train, err_);
    const Corpus dev = LoadCorpus(f->dev, err_);
    const Corpus test = LoadCorpus(f->test, err_);
    const FeaturePipeline pipeline = FeaturePipeline::Fit(train);
    // Every system uses the acoustic stream, so one encoding serves all six.
    const StreamConfig all{Stream::kDecoder, Stream::kAcoustic, Stream::kLexical,
                           Stream::kPhonotactic};
    const Dataset train_ds = MakeDataset(train, pipeline, all, f->common.threads);
    const Dataset dev_ds = MakeDataset(dev, pipeline, all, f->common.threads);
    const std::vector<EncodedStreams> test_items =
        pipeline.EncodeCorpus(test, true, f->common.threads);
    std::vector<AlignmentCounts> counts;
    for (const auto& u : test.utterances) {
      if (!u.ref_words) throw ValidationError(u.id + ": test utterance without reference");
      counts.push_back(Align(*u.ref_words, u.hyp_words));
    }

    std::string csv = "system,pearson,rmse,overall_wer,fusion_width\n";
    for (const std::string& name : SystemNames()) {
      err_ << "== system " << name << " (" << SystemConfig(name).ToString() << ")\n";
      TrainResult r =
          TrainModel(name, SystemConfig(name), dims, pipeline, train_ds, dev_ds, cfg, &err_);
      const std::vector<double> pred = PredictEncoded(r.trained.model, test_items);
      std::vector<WerEstimate> estimates;
      for (size_t i = 0; i < test.size(); ++i) {
        const Utterance& u = test.utterances[i];
        estimates.push_back({u.id, pred[i], u.duration_s, ClampedWerTarget(u)});
      }
      const EvalReport rep = Evaluate(estimates, counts, true);
      csv += name + "," + FormatMetric(rep.pearson) + "," + FormatMetric(rep.rmse) + "," +
             FormatMetric(rep.estimated_overall_wer) + "," +
             std::to_string(r.trained.model.fusion_width()) + "\n";
      if (!f->save_dir.empty()) {
        SaveTrainedModel(r.trained, (fs::path(f->save_dir) / name).string());
      }
    }
    Emit(f->out, csv, out_);
  });
}

void Cli::SetupCurve(CLI::App& app) {
  struct Flags {
    std::string estimates, model, manifest, out, svg, title = "Cumulative WER";
    unsigned threads = 0;
  };
  auto f = std::make_shared<Flags>();
  CLI::App* sub = Sub(app, "curve", "Cumulative overall WER against hours of audio");
  auto* est = sub->add_option("--estimates", f->estimates, "Estimates CSV from predict");
  auto* model = sub->add_option("--model", f->model, "Model directory (with --manifest)");
  auto* man = sub->add_option("--manifest", f->manifest, "Manifest, in corpus order");
  est->excludes(model)->excludes(man);
  model->needs(man);
  man->needs(model);
  sub->add_option("--out", f->out, "Curve CSV (default stdout)");
  sub->add_option("--svg", f->svg, "Also write an SVG plot");
  sub->add_option("--title", f->title, "Plot title")->capture_default_str();
  sub->add_option("--threads", f->threads, "Feature extraction threads")->capture_default_str();
  sub->callback([this, f] {
    std::vector<WerEstimate> estimates;
    if (!f->estimates.empty()) {
      estimates = ParseEstimatesCsv(ReadFile(f->estimates));
    } else if (!f->model.empty()) {
      TrainedModel trained = LoadTrainedModel(f->model);
      estimates = PredictCorpus(trained, LoadCorpus(f->manifest, err_), f->threads);
    } else {
      throw CLI::RequiredError("curve needs --estimates or --model with --manifest");
    }
    const std::vector<CurvePoint> curve = CumulativeCurve(estimates);
    Emit(f->out, CurveCsv(curve), out_);
    if (!f->svg.empty()) WriteFile(f->svg, CurveSvg(curve, f->title));
    err_ << "final overall WER " << FormatRate(curve.back().wer) << " after "
         << curve.back().x_hours << " h\n";
  });
}

int Cli::Run(const std::vector<std::string>& args) {
  CLI::App app("Reference-free WER estimation toolkit", "ewer");
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "TOML file with one [<subcommand>] table of flag values; flags given on the "
                 "command line take precedence");
  app.fallthrough(false);
  SetupSynth(app);
  SetupScore(app);
  SetupMfcc(app);
  SetupTrain(app);
  SetupPredict(app);
  SetupEvaluate(app);
  SetupAblate(app);
  SetupCurve(app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out_, err_);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out_, err_);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out_, err_);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out_, err_);
    return kExitUsage;
  } catch (const Error& e) {
    err_ << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err_ << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return Cli(out, err).Run(args);
}

int RunCli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return RunCli(args, std::cout, std::cerr);
}

}  // namespace ewer
