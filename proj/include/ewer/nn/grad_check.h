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

#ifndef EWER_NN_GRAD_CHECK_H_
#define EWER_NN_GRAD_CHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ewer/error.h"
#include "ewer/nn/tensor.h"

namespace ewer::nn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  size_t worst_index = 0;
  size_t checked = 0;
};

// Compares analytic gradients with central differences
// (f(x + eps) - f(x - eps)) / (2 eps) for every element of every tensor in
// `targets`. `loss` runs a forward pass and returns the scalar objective;
// `backward` must leave d loss / d target in each target's grad buffer
// (targets' grads are zeroed first). Relative error is
// |a - n| / max(|a|, |n|, 1e-7). Double precision only.
inline GradCheckResult GradCheck(const std::function<double()>& loss,
                                 const std::function<void()>& backward,
                                 const std::vector<NamedParam<double>>& targets,
                                 double epsilon = 1e-4) {
  for (const auto& t : targets) {
    if (!t.tensor->has_grad()) t.tensor->EnableGrad();
    t.tensor->ZeroGrad();
  }
  const double base = loss();
  if (!std::isfinite(base)) throw Error("grad check: non-finite loss");
  backward();

  GradCheckResult result;
  for (const auto& t : targets) {
    const auto analytic = t.tensor->grad();
    for (size_t i = 0; i < t.tensor->size(); ++i) {
      double& x = (*t.tensor)[i];
      const double saved = x;
      x = saved + epsilon;
      const double up = loss();
      x = saved - epsilon;
      const double down = loss();
      x = saved;
      if (!std::isfinite(up) || !std::isfinite(down) || !std::isfinite(analytic[i])) {
        throw Error("grad check: non-finite value in " + t.name);
      }
      const double numeric = (up - down) / (2.0 * epsilon);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-7});
      const double rel = std::abs(analytic[i] - numeric) / denom;
      ++result.checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_tensor = t.name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace ewer::nn

#endif  // EWER_NN_GRAD_CHECK_H_
