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

#ifndef IBSPAN_SRC_EIGEN_MAPS_H_
#define IBSPAN_SRC_EIGEN_MAPS_H_

#include <Eigen/Dense>

#include "ibspan/tensor.h"

namespace ibspan::internal {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

inline ConstMatrixMap AsMatrix(const Tensor& t) {
  return ConstMatrixMap(t.data(), t.rows(), t.cols());
}
inline MatrixMap AsMatrix(Tensor& t) {
  return MatrixMap(t.data(), t.rows(), t.cols());
}

}  // namespace ibspan::internal

#endif  // IBSPAN_SRC_EIGEN_MAPS_H_
