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

#ifndef EWER_NN_LAYERS_H_
#define EWER_NN_LAYERS_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ewer/error.h"
#include "ewer/nn/tensor.h"
#include "ewer/rng.h"

namespace ewer::nn {

enum class Activation { kNone, kRelu, kSigmoid };
enum class InitScheme { kHeUniform, kXavierUniform };

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

namespace internal {

template <typename T>
T Activate(T z, Activation act) {
  switch (act) {
    case Activation::kRelu:
      return z > T(0) ? z : T(0);
    case Activation::kSigmoid: {
      // Kept strictly inside (0, 1) so that downstream code can rely on it.
      const T eps = std::numeric_limits<T>::epsilon();
      const T y = T(1) / (T(1) + std::exp(-z));
      return std::clamp(y, eps, T(1) - eps);
    }
    case Activation::kNone:
      break;
  }
  return z;
}

// Derivative expressed through the activation's output y.
template <typename T>
T ActivationGrad(T y, Activation act) {
  switch (act) {
    case Activation::kRelu:
      return y > T(0) ? T(1) : T(0);
    case Activation::kSigmoid:
      return y * (T(1) - y);
    case Activation::kNone:
      break;
  }
  return T(1);
}

template <typename T>
void FillUniform(Tensor<T>& t, double limit, Rng& rng) {
  for (auto& v : t.values()) v = static_cast<T>(rng.Uniform(-limit, limit));
}

inline double InitLimit(InitScheme scheme, size_t fan_in, size_t fan_out) {
  return scheme == InitScheme::kHeUniform
             ? std::sqrt(6.0 / static_cast<double>(fan_in))
             : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace internal

// Fully connected layer y = act(x W + b) with W: [in, out], b: [out].
template <typename T>
class Dense {
 public:
  Dense() = default;
  Dense(size_t in, size_t out, Activation act)
      : in_(in), out_(out), act_(act), weight_({in, out}), bias_({out}) {
    weight_.EnableGrad();
    bias_.EnableGrad();
  }

  void Initialize(Rng& rng, InitScheme scheme) {
    internal::FillUniform(weight_, internal::InitLimit(scheme, in_, out_), rng);
    std::fill(bias_.values().begin(), bias_.values().end(), T(0));
  }

  Tensor<T> Forward(const Tensor<T>& x) {
    if (x.rank() != 2 || x.dim(1) != in_) {
      throw ShapeError("dense: input " + ShapeString(x.shape()) +
                       " does not match weight " + ShapeString(weight_.shape()));
    }
    const size_t batch = x.dim(0);
    Tensor<T> y({batch, out_});
    MatrixMap<T> ym(y.data(), batch, out_);
    ym.noalias() = ConstMatrixMap<T>(x.data(), batch, in_) *
                   ConstMatrixMap<T>(weight_.data(), in_, out_);
    for (size_t b = 0; b < batch; ++b) {
      for (size_t o = 0; o < out_; ++o) {
        ym(b, o) = internal::Activate(ym(b, o) + bias_[o], act_);
      }
    }
    input_ = x;
    output_ = y;
    return y;
  }

  // Accumulates parameter gradients and returns d loss / d x.
  Tensor<T> Backward(const Tensor<T>& grad_out) {
    RequireShape(grad_out.shape(), output_.shape(), "dense backward");
    const size_t batch = output_.dim(0);
    RowMatrix<T> gz(batch, out_);
    for (size_t b = 0; b < batch; ++b) {
      for (size_t o = 0; o < out_; ++o) {
        gz(b, o) = grad_out.at(b, o) * internal::ActivationGrad(output_.at(b, o), act_);
      }
    }
    ConstMatrixMap<T> xm(input_.data(), batch, in_);
    MatrixMap<T>(weight_.grad().data(), in_, out_).noalias() += xm.transpose() * gz;
    Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias_.grad().data(), out_) +=
        gz.colwise().sum();
    Tensor<T> dx({batch, in_});
    MatrixMap<T>(dx.data(), batch, in_).noalias() =
        gz * ConstMatrixMap<T>(weight_.data(), in_, out_).transpose();
    return dx;
  }

  void CollectParameters(const std::string& prefix, std::vector<NamedParam<T>>& out) {
    out.push_back({prefix + ".weight", &weight_});
    out.push_back({prefix + ".bias", &bias_});
  }

  size_t in_features() const { return in_; }
  size_t out_features() const { return out_; }
  Tensor<T>& weight() { return weight_; }
  Tensor<T>& bias() { return bias_; }

 private:
  size_t in_ = 0;
  size_t out_ = 0;
  Activation act_ = Activation::kNone;
  Tensor<T> weight_;
  Tensor<T> bias_;
  Tensor<T> input_;
  Tensor<T> output_;
};

// 1-d cross-correlation over [B, C_in, T] with kernels [C_out, C_in, k] and
// "same" zero padding: each sequence of length L yields ceil(L / stride)
// outputs, padded on the left by floor(P / 2) where
// P = max((out - 1) * stride + k - L, 0). Sequences in a batch are handled at
// their own lengths, so padding frames of a batch never leak into results.
template <typename T>
class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(size_t in_channels, size_t out_channels, size_t kernel, size_t stride,
         Activation act)
      : cin_(in_channels),
        cout_(out_channels),
        kernel_size_(kernel),
        stride_(stride),
        act_(act),
        kernel_({out_channels, in_channels, kernel}),
        bias_({out_channels}) {
    if (kernel == 0 || stride == 0) throw ConfigError("conv1d: kernel and stride must be >= 1");
    kernel_.EnableGrad();
    bias_.EnableGrad();
  }

  static size_t OutputLength(size_t length, size_t stride) {
    return (length + stride - 1) / stride;
  }
  static size_t PadLeft(size_t length, size_t kernel, size_t stride) {
    const size_t out = OutputLength(length, stride);
    if (out == 0) return 0;
    const size_t span = (out - 1) * stride + kernel;
    return span > length ? (span - length) / 2 : 0;
  }

  void Initialize(Rng& rng, InitScheme scheme) {
    internal::FillUniform(
        kernel_, internal::InitLimit(scheme, cin_ * kernel_size_, cout_ * kernel_size_), rng);
    std::fill(bias_.values().begin(), bias_.values().end(), T(0));
  }

  SequenceBatch<T> Forward(const SequenceBatch<T>& x) {
    CheckInput(x);
    const size_t batch = x.batch();
    const size_t t_out = OutputLength(x.max_length(), stride_);
    SequenceBatch<T> y{Tensor<T>({batch, cout_, t_out}), std::vector<size_t>(batch)};
    ConstMatrixMap<T> km(kernel_.data(), cout_, cin_ * kernel_size_);
    for (size_t b = 0; b < batch; ++b) {
      const size_t len = x.lengths[b];
      const size_t lo = OutputLength(len, stride_);
      y.lengths[b] = lo;
      if (lo == 0) continue;
      const RowMatrix<T> col = Columns(x, b);
      RowMatrix<T> z = km * col;
      for (size_t o = 0; o < cout_; ++o) {
        T* row = &y.values.at(b, o, 0);
        for (size_t t = 0; t < lo; ++t) row[t] = internal::Activate(z(o, t) + bias_[o], act_);
      }
    }
    input_ = x;
    output_ = y.values;
    return y;
  }

  // grad_out: [B, C_out, T_out]. Returns d loss / d x as [B, C_in, T_in].
  Tensor<T> Backward(const Tensor<T>& grad_out) {
    RequireShape(grad_out.shape(), output_.shape(), "conv1d backward");
    const size_t batch = input_.batch();
    Tensor<T> dx({batch, cin_, input_.max_length()});
    ConstMatrixMap<T> km(kernel_.data(), cout_, cin_ * kernel_size_);
    MatrixMap<T> dk(kernel_.grad().data(), cout_, cin_ * kernel_size_);
    for (size_t b = 0; b < batch; ++b) {
      const size_t len = input_.lengths[b];
      const size_t lo = OutputLength(len, stride_);
      if (lo == 0) continue;
      RowMatrix<T> gz(cout_, lo);
      for (size_t o = 0; o < cout_; ++o) {
        const T* g = &grad_out.at(b, o, 0);
        const T* yv = &output_.at(b, o, 0);
        for (size_t t = 0; t < lo; ++t) {
          gz(o, t) = g[t] * internal::ActivationGrad(yv[t], act_);
        }
        T acc = T(0);
        for (size_t t = 0; t < lo; ++t) acc += gz(o, t);
        bias_.grad()[o] += acc;
      }
      const RowMatrix<T> col = Columns(input_, b);
      dk.noalias() += gz * col.transpose();
      const RowMatrix<T> dcol = km.transpose() * gz;
      const size_t pad = PadLeft(len, kernel_size_, stride_);
      for (size_t c = 0; c < cin_; ++c) {
        T* dxr = &dx.at(b, c, 0);
        for (size_t j = 0; j < kernel_size_; ++j) {
          for (size_t t = 0; t < lo; ++t) {
            const size_t shifted = t * stride_ + j;
            if (shifted < pad || shifted - pad >= len) continue;
            dxr[shifted - pad] += dcol(c * kernel_size_ + j, t);
          }
        }
      }
    }
    return dx;
  }

  void CollectParameters(const std::string& prefix, std::vector<NamedParam<T>>& out) {
    out.push_back({prefix + ".kernel", &kernel_});
    out.push_back({prefix + ".bias", &bias_});
  }

  Tensor<T>& kernel() { return kernel_; }
  Tensor<T>& bias() { return bias_; }
  size_t out_channels() const { return cout_; }

 private:
  void CheckInput(const SequenceBatch<T>& x) const {
    if (x.values.rank() != 3 || x.channels() != cin_ || x.lengths.size() != x.batch()) {
      throw ShapeError("conv1d: input " + ShapeString(x.values.shape()) +
                       " does not match kernels " + ShapeString(kernel_.shape()));
    }
    for (size_t len : x.lengths) {
      if (len > x.max_length()) throw ShapeError("conv1d: sequence length exceeds tensor");
    }
  }

  // im2col for one sequence: row c * k + j, column t holds
  // x[c, t * stride + j - pad] or 0 outside [0, len).
  RowMatrix<T> Columns(const SequenceBatch<T>& x, size_t b) const {
    const size_t len = x.lengths[b];
    const size_t lo = OutputLength(len, stride_);
    const size_t pad = PadLeft(len, kernel_size_, stride_);
    RowMatrix<T> col = RowMatrix<T>::Zero(cin_ * kernel_size_, lo);
    for (size_t c = 0; c < cin_; ++c) {
      const T* xr = &x.values.at(b, c, 0);
      for (size_t j = 0; j < kernel_size_; ++j) {
        T* cr = &col(c * kernel_size_ + j, 0);
        for (size_t t = 0; t < lo; ++t) {
          const size_t shifted = t * stride_ + j;
          if (shifted < pad || shifted - pad >= len) continue;
          cr[t] = xr[shifted - pad];
        }
      }
    }
    return col;
  }

  size_t cin_ = 0;
  size_t cout_ = 0;
  size_t kernel_size_ = 1;
  size_t stride_ = 1;
  Activation act_ = Activation::kNone;
  Tensor<T> kernel_;
  Tensor<T> bias_;
  SequenceBatch<T> input_;
  Tensor<T> output_;
};

// Row lookup ids [B, L] -> [B, L, E] in a table [V, E].
template <typename T>
class Embedding {
 public:
  Embedding() = default;
  Embedding(size_t vocab, size_t dim) : vocab_(vocab), dim_(dim), table_({vocab, dim}) {
    table_.EnableGrad();
  }

  void Initialize(Rng& rng) {
    internal::FillUniform(table_, internal::InitLimit(InitScheme::kXavierUniform, vocab_, dim_),
                          rng);
  }

  Tensor<T> Forward(std::span<const int32_t> ids, size_t batch, size_t length) {
    if (ids.size() != batch * length) {
      throw ShapeError("embedding: " + std::to_string(ids.size()) + " ids for shape " +
                       ShapeString({batch, length}));
    }
    Tensor<T> y({batch, length, dim_});
    for (size_t i = 0; i < ids.size(); ++i) {
      const int32_t id = ids[i];
      if (id < 0 || static_cast<size_t>(id) >= vocab_) {
        throw ValidationError("embedding: id " + std::to_string(id) + " outside [0, " +
                              std::to_string(vocab_) + ")");
      }
      std::copy_n(table_.data() + static_cast<size_t>(id) * dim_, dim_, y.data() + i * dim_);
    }
    ids_.assign(ids.begin(), ids.end());
    out_shape_ = y.shape();
    return y;
  }

  // Scatters grad_out [B, L, E] into the rows that were looked up.
  void Backward(const Tensor<T>& grad_out) {
    RequireShape(grad_out.shape(), out_shape_, "embedding backward");
    for (size_t i = 0; i < ids_.size(); ++i) {
      T* row = table_.grad().data() + static_cast<size_t>(ids_[i]) * dim_;
      const T* g = grad_out.data() + i * dim_;
      for (size_t e = 0; e < dim_; ++e) row[e] += g[e];
    }
  }

  void CollectParameters(const std::string& prefix, std::vector<NamedParam<T>>& out) {
    out.push_back({prefix + ".table", &table_});
  }

  Tensor<T>& table() { return table_; }

 private:
  size_t vocab_ = 0;
  size_t dim_ = 0;
  Tensor<T> table_;
  std::vector<int32_t> ids_;
  Shape out_shape_;
};

// Per-channel maximum over the valid time steps: [B, C, T] -> [B, C].
// Gradient flows to the first position attaining the maximum.
template <typename T>
class GlobalMaxPool {
 public:
  Tensor<T> Forward(const SequenceBatch<T>& x) {
    if (x.values.rank() != 3 || x.lengths.size() != x.batch()) {
      throw ShapeError("global max pool: bad input " + ShapeString(x.values.shape()));
    }
    const size_t batch = x.batch();
    const size_t channels = x.channels();
    Tensor<T> y({batch, channels});
    argmax_.assign(batch * channels, 0);
    for (size_t b = 0; b < batch; ++b) {
      const size_t len = x.lengths[b];
      if (len == 0) throw ShapeError("global max pool over an empty sequence");
      for (size_t c = 0; c < channels; ++c) {
        const T* row = &x.values.at(b, c, 0);
        size_t best = 0;
        for (size_t t = 1; t < len; ++t) {
          if (row[t] > row[best]) best = t;
        }
        argmax_[b * channels + c] = best;
        y.at(b, c) = row[best];
      }
    }
    input_shape_ = x.values.shape();
    return y;
  }

  Tensor<T> Backward(const Tensor<T>& grad_out) {
    RequireShape(grad_out.shape(), {input_shape_[0], input_shape_[1]}, "global max pool backward");
    Tensor<T> dx(input_shape_);
    for (size_t b = 0; b < input_shape_[0]; ++b) {
      for (size_t c = 0; c < input_shape_[1]; ++c) {
        dx.at(b, c, argmax_[b * input_shape_[1] + c]) += grad_out.at(b, c);
      }
    }
    return dx;
  }

 private:
  Shape input_shape_;
  std::vector<size_t> argmax_;
};

// Inverted dropout: in training, zero with probability `rate` and scale
// survivors by 1 / (1 - rate); identity in evaluation.
template <typename T>
class Dropout {
 public:
  explicit Dropout(double rate = 0.0) { set_rate(rate); }

  void set_rate(double rate) {
    if (!(rate >= 0.0 && rate < 1.0)) {
      throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
    }
    rate_ = rate;
  }
  double rate() const { return rate_; }

  Tensor<T> Forward(const Tensor<T>& x, bool training, Rng& rng) {
    active_ = training && rate_ > 0.0;
    if (!active_) return x;
    const T scale = static_cast<T>(1.0 / (1.0 - rate_));
    mask_.resize(x.size());
    Tensor<T> y = x;
    for (size_t i = 0; i < x.size(); ++i) {
      mask_[i] = rng.Uniform() < rate_ ? T(0) : scale;
      y[i] *= mask_[i];
    }
    return y;
  }

  Tensor<T> Backward(const Tensor<T>& grad_out) const {
    if (!active_) return grad_out;
    if (grad_out.size() != mask_.size()) throw ShapeError("dropout backward: size mismatch");
    Tensor<T> g = grad_out;
    for (size_t i = 0; i < g.size(); ++i) g[i] *= mask_[i];
    return g;
  }

 private:
  double rate_ = 0.0;
  bool active_ = false;
  std::vector<T> mask_;
};

// [B, D1, D2] -> [B, D2, D1].
template <typename T>
Tensor<T> TransposeLastTwo(const Tensor<T>& x) {
  if (x.rank() != 3) throw ShapeError("transpose: expected rank 3, got " + ShapeString(x.shape()));
  const size_t batch = x.dim(0);
  const size_t d1 = x.dim(1);
  const size_t d2 = x.dim(2);
  Tensor<T> y({batch, d2, d1});
  for (size_t b = 0; b < batch; ++b) {
    for (size_t i = 0; i < d1; ++i) {
      for (size_t j = 0; j < d2; ++j) y.at(b, j, i) = x.at(b, i, j);
    }
  }
  return y;
}

// Concatenates [B, w_i] blocks along the feature axis.
template <typename T>
Tensor<T> ConcatColumns(const std::vector<const Tensor<T>*>& parts) {
  if (parts.empty()) throw ShapeError("concat of nothing");
  const size_t batch = parts.front()->dim(0);
  size_t width = 0;
  for (const auto* p : parts) {
    if (p->rank() != 2 || p->dim(0) != batch) {
      throw ShapeError("concat: incompatible block " + ShapeString(p->shape()));
    }
    width += p->dim(1);
  }
  Tensor<T> y({batch, width});
  for (size_t b = 0; b < batch; ++b) {
    size_t offset = 0;
    for (const auto* p : parts) {
      std::copy_n(p->data() + b * p->dim(1), p->dim(1), y.data() + b * width + offset);
      offset += p->dim(1);
    }
  }
  return y;
}

// Inverse of ConcatColumns, used to route the fused gradient to each stream.
template <typename T>
std::vector<Tensor<T>> SplitColumns(const Tensor<T>& x, const std::vector<size_t>& widths) {
  size_t total = 0;
  for (size_t w : widths) total += w;
  if (x.rank() != 2 || x.dim(1) != total) {
    throw ShapeError("split: " + ShapeString(x.shape()) + " does not have " +
                     std::to_string(total) + " columns");
  }
  const size_t batch = x.dim(0);
  std::vector<Tensor<T>> out;
  size_t offset = 0;
  for (size_t w : widths) {
    Tensor<T> part({batch, w});
    for (size_t b = 0; b < batch; ++b) {
      std::copy_n(x.data() + b * total + offset, w, part.data() + b * w);
    }
    out.push_back(std::move(part));
    offset += w;
  }
  return out;
}

}  // namespace ewer::nn

#endif  // EWER_NN_LAYERS_H_
