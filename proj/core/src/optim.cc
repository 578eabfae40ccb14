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

#include "ibspan/optim.h"

#include <cmath>

#include "eigen_maps.h"
#include "ibspan/error.h"

namespace ibspan {

AdamState MakeAdamState(std::span<Parameter* const> params) {
  AdamState state;
  for (const Parameter* p : params) {
    state.first_moment.emplace_back(p->value.shape());
    state.second_moment.emplace_back(p->value.shape());
  }
  return state;
}

void AdamStep(std::span<Parameter* const> params, AdamState& state, double lr,
              const AdamOptions& options) {
  if (state.first_moment.size() != params.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "Adam state does not match the parameter list");
  }
  ++state.step;
  const double correction1 =
      1.0 - std::pow(options.beta1, static_cast<double>(state.step));
  const double correction2 =
      1.0 - std::pow(options.beta2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& value = params[p]->value;
    const Tensor& grad = params[p]->grad;
    Tensor& m = state.first_moment[p];
    Tensor& v = state.second_moment[p];
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * grad[i];
      v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= lr * m_hat / (std::sqrt(v_hat) + options.epsilon);
    }
  }
}

double LrSchedule(int epoch, double eta0, double rho) {
  return eta0 / (1.0 + rho * epoch);
}

double GlobalGradNorm(std::span<Parameter* const> params) {
  double squared = 0;
  for (const Parameter* p : params) squared += p->grad.SquaredNorm();
  return std::sqrt(squared);
}

double ClipGlobalNorm(std::span<Parameter* const> params, double threshold) {
  if (threshold <= 0) {
    throw Error(ErrorCode::kBadShape, "clip threshold must be positive");
  }
  const double norm = GlobalGradNorm(params);
  if (norm > threshold) {
    const double scale = threshold / norm;
    for (Parameter* p : params) {
      for (double& g : p->grad.values()) g *= scale;
    }
  }
  return norm;
}

void ZeroGrads(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->ZeroGrad();
}

Tensor InitOrthonormal(const std::vector<int>& shape, std::mt19937_64& rng) {
  if (shape.size() != 2 || shape[0] < 1 || shape[1] < 1) {
    throw Error(ErrorCode::kBadShape,
                "orthonormal init needs a rank-2 shape with positive extents");
  }
  const int rows = shape[0], cols = shape[1];
  const int tall = std::max(rows, cols), narrow = std::min(rows, cols);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd gaussian(tall, narrow);
  for (Eigen::Index c = 0; c < gaussian.cols(); ++c) {
    for (Eigen::Index r = 0; r < gaussian.rows(); ++r) gaussian(r, c) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(tall, narrow);
  // Sign fix makes the distribution uniform over orthonormal frames.
  const Eigen::MatrixXd r = qr.matrixQR();
  for (int k = 0; k < narrow; ++k) {
    if (r(k, k) < 0) q.col(k) *= -1.0;
  }
  Tensor out = Tensor::Zeros(rows, cols);
  if (rows >= cols) {
    internal::AsMatrix(out) = q;
  } else {
    internal::AsMatrix(out) = q.transpose();
  }
  return out;
}

Tensor InitGlorot(const std::vector<int>& shape, std::mt19937_64& rng) {
  if (shape.size() != 2 || shape[0] < 1 || shape[1] < 1) {
    throw Error(ErrorCode::kBadShape,
                "glorot init needs a rank-2 shape with positive extents");
  }
  const double bound = std::sqrt(6.0 / (shape[0] + shape[1]));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  Tensor out(shape);
  for (double& v : out.values()) v = uniform(rng);
  return out;
}

}  // namespace ibspan
