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

#ifndef IBSPAN_TENSOR_H_
#define IBSPAN_TENSOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ibspan {

// Dense row-major array of doubles. Most kernels work on rank-2 tensors;
// a scalar is a 1x1 matrix.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, double fill = 0.0);
  Tensor(std::vector<int> shape, std::vector<double> values);

  static Tensor Matrix(int rows, int cols, std::vector<double> values) {
    return Tensor({rows, cols}, std::move(values));
  }
  static Tensor Zeros(int rows, int cols) { return Tensor({rows, cols}); }
  static Tensor Scalar(double value) { return Tensor({1, 1}, {value}); }
  static Tensor RowVector(std::span<const double> values);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  int rows() const { return shape_.empty() ? 0 : shape_[0]; }
  int cols() const;

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> row(int r) const;
  std::span<double> row(int r);

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator()(int r, int c) {
    return values_[static_cast<std::size_t>(r) * cols() + c];
  }
  double operator()(int r, int c) const {
    return values_[static_cast<std::size_t>(r) * cols() + c];
  }

  bool SameShape(const Tensor& other) const { return shape_ == other.shape_; }
  void Fill(double value);
  double SquaredNorm() const;
  std::string ShapeString() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<int> shape_;
  std::vector<double> values_;
};

// Throws ShapeMismatch with `what` when the tensor is not rows x cols.
void CheckShape(const Tensor& tensor, int rows, int cols, const char* what);

}  // namespace ibspan

#endif  // IBSPAN_TENSOR_H_
