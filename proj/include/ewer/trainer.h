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

#ifndef EWER_TRAINER_H_
#define EWER_TRAINER_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ewer/corpus.h"
#include "ewer/encoders.h"
#include "ewer/model.h"

namespace ewer {

struct TrainConfig {
  size_t batch_size = 32;
  size_t max_epochs = 50;
  double dropout = 0.2;
  double lr = 1e-3;
  size_t patience = 5;
  uint64_t seed = 0;

  // Throws ConfigError on a zero batch size, patience or epoch budget, or a
  // dropout rate outside [0, 1).
  void Validate() const;
};

enum class BatchMode { kShuffle, kSequential };

// Index batches covering [0, n). Shuffled order depends only on
// (seed, epoch). The final batch may be short. Throws on n == 0.
std::vector<std::vector<size_t>> MakeBatches(size_t n, size_t batch_size, uint64_t seed,
                                             size_t epoch, BatchMode mode);

// Encoded utterances with their targets, ready for training or scoring.
struct Dataset {
  std::vector<std::string> ids;
  std::vector<EncodedStreams> items;
  std::vector<double> targets;  // clamped to [0, 1]
  std::vector<double> durations;

  size_t size() const { return items.size(); }
};

// Target is wer_target when present, else the scored reference; an utterance
// with neither raises ValidationError. MFCCs are computed only when the
// acoustic stream is enabled.
Dataset MakeDataset(const Corpus& corpus, const FeaturePipeline& pipeline,
                    const StreamConfig& streams, unsigned threads = 0);

double TrainingTarget(const Utterance& utt);

struct EpochMetrics {
  size_t epoch = 0;        // 1-based
  double train_mse = 0.0;  // mean training-mode loss over the epoch's batches
  double dev_mse = 0.0;
  double dev_pearson = 0.0;  // NaN when undefined
  double dev_rmse = 0.0;
};

struct TrainHistory {
  std::vector<EpochMetrics> epochs;
  size_t best_epoch = 0;
  double best_dev_mse = 0.0;
  bool stopped_early = false;
};

// Mini-batch Adam on MSE with early stopping on dev MSE. The model ends up
// holding the parameters of the best dev epoch. Progress goes to `log` when
// given.
TrainHistory Fit(EwerModel<float>& model, const Dataset& train, const Dataset& dev,
                 const TrainConfig& cfg, std::ostream* log = nullptr);

struct TrainResult {
  TrainedModel trained;
  TrainHistory history;
};

// Builds a model for `streams` sized by `dims` and the pipeline's
// vocabularies, seeded with cfg.seed, then runs Fit.
TrainResult TrainModel(const std::string& system, const StreamConfig& streams,
                       const ModelDims& dims, const FeaturePipeline& pipeline,
                       const Dataset& train, const Dataset& dev, const TrainConfig& cfg,
                       std::ostream* log = nullptr);

// Eval-mode predictions in dataset order.
std::vector<double> PredictDataset(EwerModel<float>& model, const Dataset& data,
                                   size_t batch_size = 32);

// epoch,train_mse,dev_mse,dev_pearson,dev_rmse
std::string HistoryCsv(const TrainHistory& history);

}  // namespace ewer

#endif  // EWER_TRAINER_H_
