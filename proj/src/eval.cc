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

#include "ewer/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ewer/error.h"
#include "ewer/model.h"

namespace ewer {
namespace {

std::string Fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void CheckPaired(size_t a, size_t b, size_t min_size, const char* what) {
  if (a != b) {
    throw ValidationError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                          " vs " + std::to_string(b) + ")");
  }
  if (a < min_size) {
    throw ValidationError(std::string(what) + " needs at least " + std::to_string(min_size) +
                          " values");
  }
}

}  // namespace

double Pearson(std::span<const double> x, std::span<const double> y) {
  CheckPaired(x.size(), y.size(), 2, "pearson");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("undefined correlation: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double Rmse(std::span<const double> pred, std::span<const double> target) {
  CheckPaired(pred.size(), target.size(), 1, "rmse");
  double acc = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

double OverallWer(const std::vector<WerEstimate>& estimates) {
  if (estimates.empty()) throw ValidationError("overall WER of an empty set");
  double num = 0.0, den = 0.0;
  for (const auto& e : estimates) {
    num += e.predicted * e.duration_s;
    den += e.duration_s;
  }
  if (!(den > 0.0)) throw ValidationError("overall WER needs positive total duration");
  return num / den;
}

std::vector<CurvePoint> CumulativeCurve(const std::vector<WerEstimate>& estimates) {
  if (estimates.empty()) throw ValidationError("cumulative curve of an empty set");
  std::vector<CurvePoint> curve;
  curve.reserve(estimates.size());
  double num = 0.0, den = 0.0;
  for (const auto& e : estimates) {
    num += e.predicted * e.duration_s;
    den += e.duration_s;
    if (!(den > 0.0)) throw ValidationError("cumulative curve needs positive durations");
    curve.push_back({den / 3600.0, num / den});
  }
  return curve;
}

EvalReport Evaluate(const std::vector<WerEstimate>& estimates,
                    const std::vector<AlignmentCounts>& counts, bool allow_undefined_pearson) {
  if (estimates.empty()) throw ValidationError("nothing to evaluate");
  std::vector<double> pred, truth;
  std::vector<WerEstimate> true_as_estimates;
  for (const auto& e : estimates) {
    if (!e.reference_wer) throw ValidationError(e.id + ": evaluation needs a reference");
    pred.push_back(e.predicted);
    truth.push_back(*e.reference_wer);
    true_as_estimates.push_back({e.id, *e.reference_wer, e.duration_s, std::nullopt});
  }
  EvalReport r;
  r.utterances = estimates.size();
  try {
    r.pearson = Pearson(pred, truth);
  } catch (const ValidationError&) {
    throw;
  } catch (const Error&) {
    if (!allow_undefined_pearson) throw;
  }
  r.rmse = Rmse(pred, truth);
  r.estimated_overall_wer = OverallWer(estimates);
  r.true_overall_wer = OverallWer(true_as_estimates);
  r.true_corpus_wer = CorpusWer(counts);
  return r;
}

std::vector<WerEstimate> PredictCorpus(TrainedModel& trained, const Corpus& corpus,
                                       unsigned threads) {
  const std::vector<EncodedStreams> items = trained.pipeline.EncodeCorpus(
      corpus, trained.spec.streams.has(Stream::kAcoustic), threads);
  const std::vector<double> pred = PredictEncoded(trained.model, items);
  std::vector<WerEstimate> out;
  out.reserve(corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    const Utterance& u = corpus.utterances[i];
    WerEstimate e{u.id, pred[i], u.duration_s, std::nullopt};
    if (u.ref_words) e.reference_wer = ClampedWerTarget(u);
    out.push_back(std::move(e));
  }
  return out;
}

SystemEvaluation EvaluateSystem(TrainedModel& trained, const Corpus& corpus,
                                bool allow_undefined_pearson, unsigned threads) {
  std::vector<AlignmentCounts> counts;
  for (const auto& u : corpus.utterances) {
    if (!u.ref_words) throw ValidationError(u.id + ": evaluation needs a reference");
    counts.push_back(Align(*u.ref_words, u.hyp_words));
  }
  SystemEvaluation ev;
  ev.estimates = PredictCorpus(trained, corpus, threads);
  ev.report = Evaluate(ev.estimates, counts, allow_undefined_pearson);
  return ev;
}

std::string FormatMetric(std::optional<double> v) { return v ? Fixed(*v) : "nan"; }

std::string ReportCsv(const EvalReport& r) {
  return "utterances,pearson,rmse,estimated_overall_wer,true_overall_wer,true_corpus_wer\n" +
         std::to_string(r.utterances) + "," + FormatMetric(r.pearson) + "," + Fixed(r.rmse) +
         "," + Fixed(r.estimated_overall_wer) + "," + Fixed(r.true_overall_wer) + "," +
         Fixed(r.true_corpus_wer) + "\n";
}

std::string ReportSummary(const EvalReport& r) {
  std::ostringstream os;
  os << "utterances              " << r.utterances << "\n"
     << "pearson                 " << (r.pearson ? Fixed(*r.pearson, 4) : "undefined") << "\n"
     << "rmse                    " << Fixed(r.rmse, 4) << "\n"
     << "estimated overall WER   " << Fixed(100.0 * r.estimated_overall_wer, 2) << "%\n"
     << "true overall WER        " << Fixed(100.0 * r.true_overall_wer, 2)
     << "% (duration-weighted)\n"
     << "true corpus WER         " << Fixed(100.0 * r.true_corpus_wer, 2)
     << "% (word-weighted)\n";
  return os.str();
}

std::string EstimatesCsv(const std::vector<WerEstimate>& estimates) {
  const bool with_ref = std::all_of(estimates.begin(), estimates.end(),
                                    [](const WerEstimate& e) { return e.reference_wer.has_value(); });
  std::string out = with_ref ? "id,duration_s,predicted_wer,reference_wer\n"
                             : "id,duration_s,predicted_wer\n";
  char buf[128];
  for (const auto& e : estimates) {
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", e.duration_s, e.predicted);
    out += e.id + buf;
    if (with_ref) {
      std::snprintf(buf, sizeof(buf), ",%.17g", *e.reference_wer);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::vector<WerEstimate> ParseEstimatesCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("estimates CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool with_ref;
  if (line == "id,duration_s,predicted_wer,reference_wer") {
    with_ref = true;
  } else if (line == "id,duration_s,predicted_wer") {
    with_ref = false;
  } else {
    throw ParseError("estimates CSV: unexpected header '" + line + "'");
  }
  std::vector<WerEstimate> out;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != (with_ref ? 4u : 3u)) {
      throw ParseError("estimates CSV line " + std::to_string(lineno) + ": wrong field count");
    }
    try {
      WerEstimate e{f[0], std::stod(f[2]), std::stod(f[1]), std::nullopt};
      if (with_ref) e.reference_wer = std::stod(f[3]);
      if (!(e.duration_s > 0.0)) {
        throw ParseError("estimates CSV line " + std::to_string(lineno) +
                         ": duration must be positive");
      }
      out.push_back(std::move(e));
    } catch (const std::invalid_argument&) {
      throw ParseError("estimates CSV line " + std::to_string(lineno) + ": bad number");
    } catch (const std::out_of_range&) {
      throw ParseError("estimates CSV line " + std::to_string(lineno) + ": number out of range");
    }
  }
  return out;
}

std::string CurveCsv(const std::vector<CurvePoint>& curve) {
  std::string out = "x_hours,wer\n";
  char buf[96];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", p.x_hours, p.wer);
    out += buf;
  }
  return out;
}

std::string CurveSvg(const std::vector<CurvePoint>& curve, const std::string& title) {
  if (curve.empty()) throw ValidationError("cannot plot an empty curve");
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
  const double x_max = std::max(curve.back().x_hours, 1e-9);
  double y_max = 0.0;
  for (const auto& p : curve) y_max = std::max(y_max, p.wer);
  y_max = std::max(0.1, std::ceil(y_max * 10.0) / 10.0);
  auto sx = [&](double x) { return kLeft + (kW - kLeft - kRight) * x / x_max; };
  auto sy = [&](double y) { return kH - kBottom - (kH - kTop - kBottom) * y / y_max; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n"
     << "<line x1=\"" << kLeft << "\" y1=\"" << sy(0) << "\" x2=\"" << kW - kRight << "\" y2=\""
     << sy(0) << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << kLeft << "\" y1=\"" << sy(0) << "\" x2=\"" << kLeft << "\" y2=\""
     << kTop << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = y_max * i / 4.0;
    const double xv = x_max * i / 4.0;
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">"
       << Fixed(100.0 * yv, 0) << "%</text>\n"
       << "<text x=\"" << sx(xv) << "\" y=\"" << kH - kBottom + 18
       << "\" text-anchor=\"middle\">" << Fixed(xv, 2) << "</text>\n";
  }
  os << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 10
     << "\" text-anchor=\"middle\">hours</text>\n"
     << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (size_t i = 0; i < curve.size(); ++i) {
    if (i) os << ' ';
    os << Fixed(sx(curve[i].x_hours), 2) << ',' << Fixed(sy(curve[i].wer), 2);
  }
  os << "\"/>\n</svg>\n";
  return os.str();
}

}  // namespace ewer
