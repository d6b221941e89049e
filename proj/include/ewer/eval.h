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

#ifndef EWER_EVAL_H_
#define EWER_EVAL_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ewer/corpus.h"
#include "ewer/scorer.h"

namespace ewer {

struct TrainedModel;

struct WerEstimate {
  std::string id;
  double predicted = 0.0;  // WER fraction
  double duration_s = 0.0;
  std::optional<double> reference_wer;  // clamped to [0, 1]
};

// Sample correlation coefficient. Throws ValidationError on length mismatch
// or fewer than two points, and Error("undefined correlation") when either
// side is constant.
double Pearson(std::span<const double> x, std::span<const double> y);
// Throws ValidationError on length mismatch or empty input.
double Rmse(std::span<const double> pred, std::span<const double> target);

// Duration-weighted mean of the predicted WERs.
double OverallWer(const std::vector<WerEstimate>& estimates);

struct CurvePoint {
  double x_hours = 0.0;
  double wer = 0.0;
};
// Point k is the overall WER of the first k estimates against the hours of
// audio seen so far. Accumulates the same sums as OverallWer in the same
// order, so the last point equals OverallWer exactly.
std::vector<CurvePoint> CumulativeCurve(const std::vector<WerEstimate>& estimates);

struct EvalReport {
  size_t utterances = 0;
  std::optional<double> pearson;  // empty when undefined
  double rmse = 0.0;
  double estimated_overall_wer = 0.0;
  double true_overall_wer = 0.0;   // duration-weighted, clamped per sentence
  double true_corpus_wer = 0.0;    // word-weighted from alignment counts
};

// Per-sentence metrics use the clamped reference WER. Every estimate needs a
// reference_wer. With allow_undefined_pearson unset a constant predictor or
// constant reference raises the correlation error; otherwise the report
// leaves pearson empty.
EvalReport Evaluate(const std::vector<WerEstimate>& estimates,
                    const std::vector<AlignmentCounts>& counts,
                    bool allow_undefined_pearson = false);

struct SystemEvaluation {
  std::vector<WerEstimate> estimates;
  EvalReport report;
};

// Encodes `corpus` with the model's pipeline, predicts every utterance and
// scores the predictions against the references (which must be present).
SystemEvaluation EvaluateSystem(TrainedModel& trained, const Corpus& corpus,
                                bool allow_undefined_pearson = false,
                                unsigned threads = 0);

// Predictions only; reference_wer is filled when a reference exists.
std::vector<WerEstimate> PredictCorpus(TrainedModel& trained, const Corpus& corpus,
                                       unsigned threads = 0);

std::string ReportCsv(const EvalReport& report);
std::string ReportSummary(const EvalReport& report);
// id,duration_s,predicted_wer[,reference_wer]
std::string EstimatesCsv(const std::vector<WerEstimate>& estimates);
std::vector<WerEstimate> ParseEstimatesCsv(const std::string& text);
// x_hours,wer
std::string CurveCsv(const std::vector<CurvePoint>& curve);
// Self-contained SVG line plot of the curve.
std::string CurveSvg(const std::vector<CurvePoint>& curve, const std::string& title);

// Formats a metric with 6 decimals; empty optionals print as "nan".
std::string FormatMetric(std::optional<double> v);

}  // namespace ewer

#endif  // EWER_EVAL_H_
