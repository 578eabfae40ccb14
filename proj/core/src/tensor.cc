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

#include "ibspan/tensor.h"

#include <algorithm>
#include <functional>
#include <numeric>

#include "ibspan/error.h"

namespace ibspan {
namespace {

std::size_t Product(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int extent : shape) {
    if (extent < 0) throw Error(ErrorCode::kBadShape, "negative extent");
    n *= static_cast<std::size_t>(extent);
  }
  return shape.empty() ? 0 : n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape, double fill)
    : shape_(std::move(shape)), values_(Product(shape_), fill) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (Product(shape_) != values_.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "shape " + ShapeString() + " does not hold " +
                    std::to_string(values_.size()) + " values");
  }
}

Tensor Tensor::RowVector(std::span<const double> values) {
  return Tensor({1, static_cast<int>(values.size())},
                std::vector<double>(values.begin(), values.end()));
}

int Tensor::cols() const {
  if (shape_.size() < 2) return shape_.empty() ? 0 : 1;
  return static_cast<int>(values_.size() / std::max(1, shape_[0]));
}

std::span<const double> Tensor::row(int r) const {
  const std::size_t c = static_cast<std::size_t>(cols());
  return std::span<const double>(values_).subspan(r * c, c);
}

std::span<double> Tensor::row(int r) {
  const std::size_t c = static_cast<std::size_t>(cols());
  return std::span<double>(values_).subspan(r * c, c);
}

void Tensor::Fill(double value) {
  std::fill(values_.begin(), values_.end(), value);
}

double Tensor::SquaredNorm() const {
  double sum = 0;
  for (double v : values_) sum += v * v;
  return sum;
}

std::string Tensor::ShapeString() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

void CheckShape(const Tensor& tensor, int rows, int cols, const char* what) {
  if (tensor.rank() != 2 || tensor.rows() != rows || tensor.cols() != cols) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(what) + ": expected [" + std::to_string(rows) +
                    "x" + std::to_string(cols) + "], got " +
                    tensor.ShapeString());
  }
}

}  // namespace ibspan
