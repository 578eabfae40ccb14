// Copyright 2026 The ibspan Authors.
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

#ifndef IBSPAN_OPTIM_H_
#define IBSPAN_OPTIM_H_

#include <random>
#include <span>
#include <vector>

#include "ibspan/graph.h"
#include "ibspan/tensor.h"

namespace ibspan {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment estimates, one pair per parameter in registration
// order.
struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  long step = 0;
};

AdamState MakeAdamState(std::span<Parameter* const> params);

// Bias-corrected Adam update using each parameter's current grad.
void AdamStep(std::span<Parameter* const> params, AdamState& state, double lr,
              const AdamOptions& options = {});

// eta0 / (1 + rho * epoch), epoch counting completed epochs from 0.
double LrSchedule(int epoch, double eta0, double rho);

// Rescales all grads by threshold/norm when their global L2 norm exceeds
// threshold. Returns the norm before clipping.
double ClipGlobalNorm(std::span<Parameter* const> params, double threshold);
double GlobalGradNorm(std::span<Parameter* const> params);

void ZeroGrads(std::span<Parameter* const> params);

// Random matrix with orthonormal columns (rows >= cols) or rows
// (rows < cols). Shape must be rank 2.
Tensor InitOrthonormal(const std::vector<int>& shape, std::mt19937_64& rng);
// Uniform in +-sqrt(6 / (rows + cols)).
Tensor InitGlorot(const std::vector<int>& shape, std::mt19937_64& rng);

}  // namespace ibspan

#endif  // IBSPAN_OPTIM_H_
