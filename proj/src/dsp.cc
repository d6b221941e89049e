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

#include "ewer/dsp.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ewer/error.h"

namespace ewer::dsp {
namespace {

void CheckInput(std::span<const float> pcm, int sample_rate) {
  if (pcm.empty()) throw ValidationError("empty signal");
  if (sample_rate != kSampleRate) {
    throw ValidationError("expected 16000 Hz audio, got " +
                          std::to_string(sample_rate) + " Hz");
  }
}

}  // namespace

size_t NumFrames(size_t num_samples) {
  if (num_samples < kFrameLength) return 1;
  return (num_samples - kFrameLength) / kFrameShift + 1;
}

std::vector<Frame> FrameSignal(std::span<const float> pcm) {
  if (pcm.empty()) throw ValidationError("empty signal");
  const size_t count = NumFrames(pcm.size());
  std::vector<Frame> frames(count);
  for (size_t t = 0; t < count; ++t) {
    Frame& f = frames[t];
    f.fill(0.0f);
    const size_t start = t * kFrameShift;
    const size_t n = std::min(kFrameLength, pcm.size() - start);
    std::copy_n(pcm.begin() + static_cast<std::ptrdiff_t>(start), n, f.begin());
  }
  return frames;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<double> HammingWindow(size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (size_t i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
  }
  return w;
}

Matrix MelFilterbankMatrix(size_t n_filters, size_t n_fft, double fmin,
                           double fmax, int sample_rate) {
  const double nyquist = sample_rate / 2.0;
  if (fmax > nyquist) {
    throw ConfigError("filterbank fmax " + std::to_string(fmax) +
                      " Hz exceeds Nyquist " + std::to_string(nyquist) + " Hz");
  }
  if (n_filters == 0 || n_fft < 2 || fmin < 0.0 || fmin >= fmax) {
    throw ConfigError("invalid filterbank configuration");
  }
  const size_t n_bins = n_fft / 2 + 1;
  const double mel_lo = HzToMel(fmin);
  const double mel_hi = HzToMel(fmax);
  std::vector<size_t> bin(n_filters + 2);
  for (size_t m = 0; m < n_filters + 2; ++m) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(m) /
                                    static_cast<double>(n_filters + 1);
    const double hz = MelToHz(mel);
    bin[m] = std::min(n_bins - 1,
                      static_cast<size_t>(std::floor((n_fft + 1) * hz / sample_rate)));
  }

  Matrix fb(n_filters, n_bins);
  for (size_t m = 0; m < n_filters; ++m) {
    const size_t left = bin[m];
    const size_t centre = bin[m + 1];
    const size_t right = bin[m + 2];
    for (size_t k = left; k < centre; ++k) {
      fb(m, k) = static_cast<double>(k - left) / static_cast<double>(centre - left);
    }
    for (size_t k = centre; k < right; ++k) {
      fb(m, k) = static_cast<double>(right - k) / static_cast<double>(right - centre);
    }
    fb(m, centre) = 1.0;
  }
  return fb;
}

FftPlan::FftPlan(size_t n) : n_(n), bitrev_(n), twiddle_(n / 2) {
  if (n == 0 || (n & (n - 1)) != 0) {
    throw ConfigError("FFT size must be a power of two");
  }
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    bitrev_[i] = j;
  }
  for (size_t k = 0; k < n / 2; ++k) {
    twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                      static_cast<double>(n));
  }
}

void FftPlan::Transform(std::vector<std::complex<double>>& x) const {
  if (x.size() != n_) throw ConfigError("FFT input size does not match plan");
  for (size_t i = 1; i < n_; ++i) {
    if (i < bitrev_[i]) std::swap(x[i], x[bitrev_[i]]);
  }
  for (size_t len = 2; len <= n_; len <<= 1) {
    const size_t half = len / 2;
    const size_t stride = n_ / len;
    for (size_t i = 0; i < n_; i += len) {
      for (size_t k = 0; k < half; ++k) {
        const std::complex<double> u = x[i + k];
        const std::complex<double> v = x[i + k + half] * twiddle_[k * stride];
        x[i + k] = u + v;
        x[i + k + half] = u - v;
      }
    }
  }
}

void Fft(std::vector<std::complex<double>>& x) { FftPlan(x.size()).Transform(x); }

MfccExtractor::MfccExtractor()
    : window_(HammingWindow(kFrameLength)),
      filterbank_(MelFilterbankMatrix()),
      dct_(kNumCeps, kNumFilters),
      half_fft_(kFftSize / 2) {
  const double n = static_cast<double>(kNumFilters);
  for (size_t k = 0; k < kNumCeps; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (size_t i = 0; i < kNumFilters; ++i) {
      dct_(k, i) = scale * std::cos(std::numbers::pi * static_cast<double>(k) *
                                    (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n));
    }
  }
  twiddle_.resize(kFftSize / 2);
  for (size_t k = 0; k < kFftSize / 2; ++k) {
    twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                      static_cast<double>(kFftSize));
  }
}

std::array<double, kNumBins> MfccExtractor::PowerSpectrum(const Frame& frame) const {
  // Real FFT of length 512 through one complex FFT of length 256 over the
  // even/odd sample pairs.
  constexpr size_t kHalf = kFftSize / 2;
  std::vector<std::complex<double>> z(kHalf);
  auto sample = [&](size_t i) -> double {
    return i < kFrameLength ? static_cast<double>(frame[i]) * window_[i] : 0.0;
  };
  for (size_t i = 0; i < kHalf; ++i) z[i] = {sample(2 * i), sample(2 * i + 1)};
  half_fft_.Transform(z);

  std::array<double, kNumBins> power{};
  for (size_t k = 0; k <= kHalf; ++k) {
    const std::complex<double> zk = z[k % kHalf];
    const std::complex<double> zc = std::conj(z[(kHalf - k) % kHalf]);
    const std::complex<double> even = 0.5 * (zk + zc);
    const std::complex<double> odd = std::complex<double>(0.0, -0.5) * (zk - zc);
    const std::complex<double> tw =
        k < kHalf ? twiddle_[k] : std::complex<double>(-1.0, 0.0);
    power[k] = std::norm(even + tw * odd);
  }
  return power;
}

Matrix MfccExtractor::LogFilterbank(std::span<const float> pcm, int sample_rate) const {
  CheckInput(pcm, sample_rate);
  const std::vector<Frame> frames = FrameSignal(pcm);
  Matrix out(frames.size(), kNumFilters);
  for (size_t t = 0; t < frames.size(); ++t) {
    const auto power = PowerSpectrum(frames[t]);
    for (size_t m = 0; m < kNumFilters; ++m) {
      double e = 0.0;
      const auto w = filterbank_.row(m);
      for (size_t k = 0; k < kNumBins; ++k) e += w[k] * power[k];
      out(t, m) = std::log(std::max(e, kEnergyFloor));
    }
  }
  return out;
}

MfccMatrix MfccExtractor::Compute(std::span<const float> pcm, int sample_rate) const {
  const Matrix logfb = LogFilterbank(pcm, sample_rate);
  MfccMatrix out(logfb.rows, kNumCeps);
  for (size_t t = 0; t < logfb.rows; ++t) {
    for (size_t k = 0; k < kNumCeps; ++k) {
      double acc = 0.0;
      for (size_t m = 0; m < kNumFilters; ++m) acc += dct_(k, m) * logfb(t, m);
      out(t, k) = acc;
    }
  }
  return out;
}

MfccMatrix ComputeMfcc(std::span<const float> pcm, int sample_rate) {
  static const MfccExtractor extractor;
  return extractor.Compute(pcm, sample_rate);
}

}  // namespace ewer::dsp
