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

#ifndef EWER_NN_ADAM_H_
#define EWER_NN_ADAM_H_

#include <cmath>
#include <vector>

#include "ewer/nn/tensor.h"

namespace ewer::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias-corrected moments. Moment buffers are created on the first
// step and bound positionally to the parameter list.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void Step(const std::vector<Tensor<T>*>& params) {
    if (m_.empty()) {
      for (const auto* p : params) {
        m_.emplace_back(p->size(), T(0));
        v_.emplace_back(p->size(), T(0));
      }
    }
    if (params.size() != m_.size()) {
      throw ShapeError("adam: parameter count changed between steps");
    }
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    const T b1 = static_cast<T>(cfg_.beta1);
    const T b2 = static_cast<T>(cfg_.beta2);
    const T step = static_cast<T>(cfg_.lr / c1);
    const T inv_c2 = static_cast<T>(1.0 / c2);
    const T eps = static_cast<T>(cfg_.eps);
    for (size_t k = 0; k < params.size(); ++k) {
      Tensor<T>& p = *params[k];
      if (p.size() != m_[k].size() || p.grad().size() != p.size()) {
        throw ShapeError("adam: parameter " + std::to_string(k) + " has shape " +
                         ShapeString(p.shape()) + " but optimizer state of size " +
                         std::to_string(m_[k].size()));
      }
      T* w = p.data();
      const T* g = p.grad().data();
      T* m = m_[k].data();
      T* v = v_[k].data();
      for (size_t i = 0; i < p.size(); ++i) {
        m[i] = b1 * m[i] + (T(1) - b1) * g[i];
        v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
        w[i] -= step * m[i] / (std::sqrt(v[i] * inv_c2) + eps);
      }
    }
  }

  size_t step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  size_t t_ = 0;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
};

}  // namespace ewer::nn

#endif  // EWER_NN_ADAM_H_
