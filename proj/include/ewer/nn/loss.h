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

#ifndef EWER_NN_LOSS_H_
#define EWER_NN_LOSS_H_

#include "ewer/nn/tensor.h"

namespace ewer::nn {

template <typename T>
struct LossResult {
  T loss;
  Tensor<T> grad;  // d loss / d pred
};

// Mean squared error over all elements; gradient 2 (pred - target) / n.
template <typename T>
LossResult<T> MseLoss(const Tensor<T>& pred, const Tensor<T>& target) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("mse: prediction " + ShapeString(pred.shape()) + " vs target " +
                     ShapeString(target.shape()));
  }
  if (pred.size() == 0) throw ShapeError("mse of an empty tensor");
  const T n = static_cast<T>(pred.size());
  LossResult<T> r{T(0), Tensor<T>(pred.shape())};
  for (size_t i = 0; i < pred.size(); ++i) {
    const T d = pred[i] - target[i];
    r.loss += d * d;
    r.grad[i] = T(2) * d / n;
  }
  r.loss /= n;
  return r;
}

}  // namespace ewer::nn

#endif  // EWER_NN_LOSS_H_
