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

#ifndef EWER_DSP_H_
#define EWER_DSP_H_

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ewer::dsp {

inline constexpr int kSampleRate = 16000;
inline constexpr size_t kFrameLength = 400;  // 25 ms
inline constexpr size_t kFrameShift = 160;   // 10 ms
inline constexpr size_t kFftSize = 512;
inline constexpr size_t kNumBins = kFftSize / 2 + 1;
inline constexpr size_t kNumFilters = 26;
inline constexpr size_t kNumCeps = 13;
inline constexpr double kEnergyFloor = 1e-10;

using Frame = std::array<float, kFrameLength>;

// Dense row-major matrix of doubles.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(size_t r, size_t c) { return data[r * cols + c]; }
  double operator()(size_t r, size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(size_t r) const {
    return {data.data() + r * cols, cols};
  }
  bool operator==(const Matrix&) const = default;
};

// T x 13 cepstra, one row per frame.
using MfccMatrix = Matrix;

// T = floor((L - 400) / 160) + 1 for L >= 400, and 1 for 0 < L < 400.
size_t NumFrames(size_t num_samples);

// Splits a signal into 400-sample frames every 160 samples. A signal shorter
// than one frame yields a single zero-padded frame. Throws on empty input.
std::vector<Frame> FrameSignal(std::span<const float> pcm);

// HTK mel scale.
double HzToMel(double hz);
double MelToHz(double mel);

// Symmetric Hamming window 0.54 - 0.46 cos(2 pi n / (N - 1)).
std::vector<double> HammingWindow(size_t n);

// Triangular filters with vertices equally spaced on the mel scale between
// fmin and fmax, mapped to FFT bins by floor((n_fft + 1) * hz / rate). Each
// row peaks at exactly 1 on its centre bin. Returns n_filters x (n_fft/2 + 1).
// Throws ConfigError when fmax exceeds the Nyquist frequency.
Matrix MelFilterbankMatrix(size_t n_filters = kNumFilters,
                           size_t n_fft = kFftSize, double fmin = 0.0,
                           double fmax = 8000.0, int sample_rate = kSampleRate);

// Iterative radix-2 FFT with precomputed twiddles and bit-reversal table.
class FftPlan {
 public:
  // Throws ConfigError unless n is a power of two.
  explicit FftPlan(size_t n);
  void Transform(std::vector<std::complex<double>>& x) const;
  size_t size() const { return n_; }

 private:
  size_t n_;
  std::vector<size_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;
};

// One-shot in-place FFT.
void Fft(std::vector<std::complex<double>>& x);

// Precomputed tables for the 25 ms / 512-point / 26-filter / 13-cepstra
// recipe. Stateless after construction, so one instance may be shared across
// threads.
class MfccExtractor {
 public:
  MfccExtractor();

  // Log mel energies ln(max(E, 1e-10)), T x 26.
  Matrix LogFilterbank(std::span<const float> pcm, int sample_rate = kSampleRate) const;

  // Cepstra c0..c12 via orthonormal DCT-II of the log energies, T x 13.
  MfccMatrix Compute(std::span<const float> pcm, int sample_rate = kSampleRate) const;

  // |X[k]|^2, k = 0..256, of one windowed, zero-padded frame.
  std::array<double, kNumBins> PowerSpectrum(const Frame& frame) const;

  const Matrix& filterbank() const { return filterbank_; }

 private:
  std::vector<double> window_;
  Matrix filterbank_;
  Matrix dct_;  // 13 x 26
  std::vector<std::complex<double>> twiddle_;  // real-FFT post-processing
  FftPlan half_fft_;
};

// Convenience wrapper around a process-wide extractor.
MfccMatrix ComputeMfcc(std::span<const float> pcm, int sample_rate = kSampleRate);

}  // namespace ewer::dsp

#endif  // EWER_DSP_H_
