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

#include "ewer/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "ewer/error.h"
#include "ewer/eval.h"
#include "ewer/nn/adam.h"
#include "ewer/nn/loss.h"
#include "ewer/rng.h"

namespace ewer {

void TrainConfig::Validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
  if (patience == 0) throw ConfigError("patience must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
}

std::vector<std::vector<size_t>> MakeBatches(size_t n, size_t batch_size, uint64_t seed,
                                             size_t epoch, BatchMode mode) {
  if (n == 0) throw ValidationError("cannot batch an empty dataset");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  if (mode == BatchMode::kShuffle) {
    Rng rng = Rng::Derive(seed ^ 0xba7c4e5ULL, epoch);
    rng.Shuffle(order);
  }
  std::vector<std::vector<size_t>> batches;
  for (size_t start = 0; start < n; start += batch_size) {
    batches.emplace_back(order.begin() + start,
                         order.begin() + std::min(n, start + batch_size));
  }
  return batches;
}

double TrainingTarget(const Utterance& utt) {
  if (utt.wer_target) return std::clamp(*utt.wer_target, 0.0, 1.0);
  if (utt.ref_words) return ClampedWerTarget(utt);
  throw ValidationError(utt.id + ": no wer_target and no reference to score");
}

Dataset MakeDataset(const Corpus& corpus, const FeaturePipeline& pipeline,
                    const StreamConfig& streams, unsigned threads) {
  Dataset d;
  for (const auto& u : corpus.utterances) {
    d.ids.push_back(u.id);
    d.targets.push_back(TrainingTarget(u));
    d.durations.push_back(u.duration_s);
  }
  d.items = pipeline.EncodeCorpus(corpus, streams.has(Stream::kAcoustic), threads);
  return d;
}

namespace {

std::vector<const EncodedStreams*> Gather(const Dataset& data, const std::vector<size_t>& idx) {
  std::vector<const EncodedStreams*> out;
  out.reserve(idx.size());
  for (size_t i : idx) out.push_back(&data.items[i]);
  return out;
}

double Mse(const std::vector<double>& pred, const std::vector<double>& target) {
  double acc = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) acc += (pred[i] - target[i]) * (pred[i] - target[i]);
  return acc / static_cast<double>(pred.size());
}

}  // namespace

std::vector<double> PredictDataset(EwerModel<float>& model, const Dataset& data,
                                   size_t batch_size) {
  return PredictEncoded(model, data.items, batch_size);
}

TrainHistory Fit(EwerModel<float>& model, const Dataset& train, const Dataset& dev,
                 const TrainConfig& cfg, std::ostream* log) {
  cfg.Validate();
  if (train.size() == 0) throw ValidationError("empty training set");
  if (dev.size() == 0) throw ValidationError("empty dev set");
  model.set_dropout_rate(cfg.dropout);
  nn::Adam<float> adam(nn::AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});
  const std::vector<nn::Tensor<float>*> params = model.ParameterTensors();

  TrainHistory history;
  history.best_dev_mse = std::numeric_limits<double>::infinity();
  std::vector<nn::NamedTensor> best;
  size_t since_best = 0;

  for (size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    double loss_sum = 0.0;
    for (const auto& idx : MakeBatches(train.size(), cfg.batch_size, cfg.seed, epoch,
                                       BatchMode::kShuffle)) {
      const auto input = MakeModelInput<float>(Gather(train, idx), model.spec().streams);
      nn::Tensor<float> target({idx.size(), 1});
      for (size_t i = 0; i < idx.size(); ++i) target[i] = static_cast<float>(train.targets[idx[i]]);
      model.ZeroGrad();
      const nn::Tensor<float> pred = model.Forward(input, true);
      const auto loss = nn::MseLoss(pred, target);
      if (!std::isfinite(loss.loss)) throw Error("training diverged: non-finite loss");
      model.Backward(loss.grad);
      adam.Step(params);
      loss_sum += static_cast<double>(loss.loss) * static_cast<double>(idx.size());
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.train_mse = loss_sum / static_cast<double>(train.size());
    const std::vector<double> pred = PredictDataset(model, dev, cfg.batch_size);
    m.dev_mse = Mse(pred, dev.targets);
    m.dev_rmse = std::sqrt(m.dev_mse);
    try {
      m.dev_pearson = Pearson(pred, dev.targets);
    } catch (const Error&) {
      m.dev_pearson = std::numeric_limits<double>::quiet_NaN();
    }
    history.epochs.push_back(m);

    const bool improved = m.dev_mse < history.best_dev_mse;
    if (improved) {
      history.best_dev_mse = m.dev_mse;
      history.best_epoch = epoch;
      best = model.ExportParameters();
      since_best = 0;
    } else {
      ++since_best;
    }
    if (log) {
      char line[160];
      std::snprintf(line, sizeof(line),
                    "epoch %zu train_mse=%.6f dev_mse=%.6f dev_pearson=%.4f dev_rmse=%.4f%s\n",
                    epoch, m.train_mse, m.dev_mse, m.dev_pearson, m.dev_rmse,
                    improved ? " *" : "");
      *log << line << std::flush;
    }
    if (since_best >= cfg.patience) {
      history.stopped_early = epoch < cfg.max_epochs;
      break;
    }
  }
  if (!best.empty()) model.ImportParameters(best);
  return history;
}

TrainResult TrainModel(const std::string& system, const StreamConfig& streams,
                       const ModelDims& dims, const FeaturePipeline& pipeline,
                       const Dataset& train, const Dataset& dev, const TrainConfig& cfg,
                       std::ostream* log) {
  cfg.Validate();
  ModelSpec spec;
  spec.streams = streams;
  spec.dims = dims;
  spec.lexical_vocab = pipeline.lexical_vocab().size();
  spec.phonotactic_vocab = pipeline.phonotactic_vocab().size();
  spec.dropout = cfg.dropout;
  spec.seed = cfg.seed;
  TrainResult r{TrainedModel{system, spec, pipeline, EwerModel<float>(spec)}, {}};
  r.history = Fit(r.trained.model, train, dev, cfg, log);
  return r;
}

std::string HistoryCsv(const TrainHistory& history) {
  std::string out = "epoch,train_mse,dev_mse,dev_pearson,dev_rmse\n";
  char line[160];
  for (const auto& m : history.epochs) {
    std::snprintf(line, sizeof(line), "%zu,%.9g,%.9g,%.9g,%.9g\n", m.epoch, m.train_mse,
                  m.dev_mse, m.dev_pearson, m.dev_rmse);
    out += line;
  }
  return out;
}

}  // namespace ewer
