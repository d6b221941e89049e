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

#ifndef EWER_NN_TENSOR_H_
#define EWER_NN_TENSOR_H_

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ewer/error.h"

namespace ewer::nn {

using Shape = std::vector<size_t>;

inline size_t NumElements(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), size_t{1}, std::multiplies<>());
}

inline std::string ShapeString(const Shape& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

// Dense row-major n-d array with an optional gradient buffer of the same
// shape. Parameters carry a gradient; activations usually do not.
template <typename T>
class Tensor {
 public:
  using value_type = T;
  // Eigen's vectorised kernels peel differently depending on where a buffer
  // starts, which changes float summation order. Aligned storage keeps
  // results independent of the heap layout.
  using Storage = std::vector<T, Eigen::aligned_allocator<T>>;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), data_(NumElements(shape_), fill) {}
  Tensor(Shape shape, const std::vector<T>& values)
      : shape_(std::move(shape)), data_(values.begin(), values.end()) {
    if (data_.size() != NumElements(shape_)) {
      throw ShapeError("tensor data of length " + std::to_string(data_.size()) +
                       " does not fit shape " + ShapeString(shape_));
    }
  }

  const Shape& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t dim(size_t i) const { return shape_.at(i); }
  size_t size() const { return data_.size(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  Storage& values() { return data_; }
  const Storage& values() const { return data_; }
  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  T& at(size_t i, size_t j) { return data_[i * shape_[1] + j]; }
  const T& at(size_t i, size_t j) const { return data_[i * shape_[1] + j]; }
  T& at(size_t i, size_t j, size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  const T& at(size_t i, size_t j, size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  bool has_grad() const { return grad_.size() == data_.size() && requires_grad_; }
  void EnableGrad() {
    requires_grad_ = true;
    grad_.assign(data_.size(), T(0));
  }
  Storage& grad() { return grad_; }
  const Storage& grad() const { return grad_; }
  void ZeroGrad() { std::fill(grad_.begin(), grad_.end(), T(0)); }

  // Same data, new shape with equal element count.
  void Reshape(Shape shape) {
    if (NumElements(shape) != data_.size()) {
      throw ShapeError("cannot reshape " + ShapeString(shape_) + " to " + ShapeString(shape));
    }
    shape_ = std::move(shape);
  }

  bool SameValues(const Tensor& o) const { return shape_ == o.shape_ && data_ == o.data_; }

 private:
  Shape shape_;
  Storage data_;
  Storage grad_;
  bool requires_grad_ = false;
};

// Variable-length sequences packed as [B, C, T_max]. Entries at t >=
// lengths[b] are zero and never influence results.
template <typename T>
struct SequenceBatch {
  Tensor<T> values;
  std::vector<size_t> lengths;

  size_t batch() const { return values.dim(0); }
  size_t channels() const { return values.dim(1); }
  size_t max_length() const { return values.dim(2); }
};

// A trainable tensor together with its stable checkpoint name.
template <typename T>
struct NamedParam {
  std::string name;
  Tensor<T>* tensor;
};

inline void RequireShape(const Shape& got, const Shape& want, const std::string& what) {
  if (got != want) {
    throw ShapeError(what + ": expected shape " + ShapeString(want) + ", got " +
                     ShapeString(got));
  }
}

}  // namespace ewer::nn

#endif  // EWER_NN_TENSOR_H_
