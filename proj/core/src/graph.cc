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

#include "ibspan/graph.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eigen_maps.h"
#include "ibspan/error.h"

namespace ibspan {

using internal::AsMatrix;
using internal::RowMatrix;

Parameter::Parameter(std::string name, Tensor value)
    : name(std::move(name)), value(std::move(value)) {
  grad = Tensor(this->value.shape());
}

const Tensor& Var::value() const { return graph_->value(id_); }

Var Graph::Constant(Tensor value) {
  nodes_.push_back(Node{.value = std::move(value)});
  return Var(this, size() - 1);
}

Var Graph::Param(Parameter& parameter) {
  auto it = parameter_nodes_.find(&parameter);
  if (it != parameter_nodes_.end()) return Var(this, it->second);
  if (parameter.grad.shape() != parameter.value.shape()) {
    parameter.grad = Tensor(parameter.value.shape());
  }
  nodes_.push_back(Node{.value = parameter.value,
                        .parameter = &parameter,
                        .needs_grad = recording_});
  parameter_nodes_.emplace(&parameter, size() - 1);
  return Var(this, size() - 1);
}

Var Graph::Record(Tensor value, std::vector<int> inputs, BackwardFn backward) {
  Node node{.value = std::move(value)};
  if (recording_) {
    node.needs_grad = std::any_of(inputs.begin(), inputs.end(),
                                  [&](int id) { return nodes_[id].needs_grad; });
    if (node.needs_grad) {
      node.inputs = std::move(inputs);
      node.backward = std::move(backward);
    }
  }
  nodes_.push_back(std::move(node));
  return Var(this, size() - 1);
}

Tensor& Graph::grad_slot(int id) {
  Node& node = nodes_[id];
  if (node.grad.empty()) node.grad = Tensor(node.value.shape());
  return node.grad;
}

void Graph::Backward(Var loss) {
  if (loss.graph() != this) {
    throw Error(ErrorCode::kShapeMismatch, "loss belongs to another graph");
  }
  const Tensor& value = nodes_[loss.id()].value;
  if (value.size() != 1) {
    throw Error(ErrorCode::kNonScalarLoss,
                "loss has shape " + value.ShapeString());
  }
  if (!nodes_[loss.id()].needs_grad) return;
  grad_slot(loss.id())[0] += 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& node = nodes_[id];
    if (!node.needs_grad || node.grad.empty()) continue;
    if (node.backward) node.backward(*this, id);
    if (node.parameter != nullptr) {
      Tensor& target = node.parameter->grad;
      for (std::size_t i = 0; i < target.size(); ++i) target[i] += node.grad[i];
    }
  }
}

namespace ops {
namespace {

void Require(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorCode::kShapeMismatch, message);
}

void SameGraph(Var a, Var b) {
  Require(a.graph() == b.graph() && a.graph() != nullptr,
          "operands belong to different graphs");
}

// Accumulates `delta` into the gradient of node `id` if it needs one.
template <typename Fn>
void Accumulate(Graph& g, int id, Fn&& fn) {
  if (g.needs_grad(id)) fn(g.grad_slot(id));
}

template <typename Fn>
Var Pointwise(Var a, Fn&& fn, Graph::BackwardFn backward) {
  Tensor out = a.value();
  for (double& v : out.values()) v = fn(v);
  return a.graph()->Record(std::move(out), {a.id()}, std::move(backward));
}

}  // namespace

Var MatMul(Var a, Var b) {
  SameGraph(a, b);
  Require(a.cols() == b.rows(), "MatMul: " + a.value().ShapeString() + " x " +
                                    b.value().ShapeString());
  Tensor out = Tensor::Zeros(a.rows(), b.cols());
  AsMatrix(out).noalias() = AsMatrix(a.value()) * AsMatrix(b.value());
  const int ia = a.id(), ib = b.id();
  return a.graph()->Record(std::move(out), {ia, ib}, [ia, ib](Graph& g, int n) {
    auto dc = AsMatrix(g.grad(n));
    Accumulate(g, ia, [&](Tensor& da) {
      AsMatrix(da).noalias() += dc * AsMatrix(g.value(ib)).transpose();
    });
    Accumulate(g, ib, [&](Tensor& db) {
      AsMatrix(db).noalias() += AsMatrix(g.value(ia)).transpose() * dc;
    });
  });
}

Var MatMulNT(Var a, Var b) {
  SameGraph(a, b);
  Require(a.cols() == b.cols(), "MatMulNT: " + a.value().ShapeString() +
                                    " x " + b.value().ShapeString() + "^T");
  Tensor out = Tensor::Zeros(a.rows(), b.rows());
  AsMatrix(out).noalias() =
      AsMatrix(a.value()) * AsMatrix(b.value()).transpose();
  const int ia = a.id(), ib = b.id();
  return a.graph()->Record(std::move(out), {ia, ib}, [ia, ib](Graph& g, int n) {
    auto dc = AsMatrix(g.grad(n));
    Accumulate(g, ia, [&](Tensor& da) {
      AsMatrix(da).noalias() += dc * AsMatrix(g.value(ib));
    });
    Accumulate(g, ib, [&](Tensor& db) {
      AsMatrix(db).noalias() += dc.transpose() * AsMatrix(g.value(ia));
    });
  });
}

Var Add(Var a, Var b) {
  SameGraph(a, b);
  Require(a.value().SameShape(b.value()), "Add: shape mismatch");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  const int ia = a.id(), ib = b.id();
  return a.graph()->Record(std::move(out), {ia, ib}, [ia, ib](Graph& g, int n) {
    const Tensor& dc = g.grad(n);
    for (int id : {ia, ib}) {
      Accumulate(g, id, [&](Tensor& d) {
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += dc[i];
      });
    }
  });
}

Var Sub(Var a, Var b) {
  SameGraph(a, b);
  Require(a.value().SameShape(b.value()), "Sub: shape mismatch");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  const int ia = a.id(), ib = b.id();
  return a.graph()->Record(std::move(out), {ia, ib}, [ia, ib](Graph& g, int n) {
    const Tensor& dc = g.grad(n);
    Accumulate(g, ia, [&](Tensor& d) {
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += dc[i];
    });
    Accumulate(g, ib, [&](Tensor& d) {
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= dc[i];
    });
  });
}

Var AddRow(Var a, Var row) {
  SameGraph(a, row);
  Require(row.rows() == 1 && row.cols() == a.cols(),
          "AddRow: " + row.value().ShapeString() + " onto " +
              a.value().ShapeString());
  Tensor out = a.value();
  AsMatrix(out).rowwise() += AsMatrix(row.value()).row(0);
  const int ia = a.id(), ir = row.id();
  return a.graph()->Record(std::move(out), {ia, ir}, [ia, ir](Graph& g, int n) {
    auto dc = AsMatrix(g.grad(n));
    Accumulate(g, ia, [&](Tensor& d) { AsMatrix(d) += dc; });
    Accumulate(g, ir, [&](Tensor& d) {
      AsMatrix(d).row(0) += dc.colwise().sum();
    });
  });
}

Var ConcatCols(std::span<const Var> parts) {
  Require(!parts.empty(), "ConcatCols: no inputs");
  const int rows = parts[0].rows();
  int cols = 0;
  std::vector<int> ids, offsets;
  for (const Var& part : parts) {
    SameGraph(parts[0], part);
    Require(part.rows() == rows, "ConcatCols: row mismatch");
    ids.push_back(part.id());
    offsets.push_back(cols);
    cols += part.cols();
  }
  Tensor out = Tensor::Zeros(rows, cols);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    AsMatrix(out).middleCols(offsets[p], parts[p].cols()) =
        AsMatrix(parts[p].value());
  }
  return parts[0].graph()->Record(
      std::move(out), ids, [ids, offsets](Graph& g, int n) {
        auto dc = AsMatrix(g.grad(n));
        for (std::size_t p = 0; p < ids.size(); ++p) {
          Accumulate(g, ids[p], [&](Tensor& d) {
            AsMatrix(d) += dc.middleCols(offsets[p], d.cols());
          });
        }
      });
}

Var ConcatRows(std::span<const Var> parts) {
  Require(!parts.empty(), "ConcatRows: no inputs");
  const int cols = parts[0].cols();
  int rows = 0;
  std::vector<int> ids, offsets;
  for (const Var& part : parts) {
    SameGraph(parts[0], part);
    Require(part.cols() == cols, "ConcatRows: column mismatch");
    ids.push_back(part.id());
    offsets.push_back(rows);
    rows += part.rows();
  }
  Tensor out = Tensor::Zeros(rows, cols);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    std::copy(parts[p].value().values().begin(),
              parts[p].value().values().end(),
              out.data() + static_cast<std::size_t>(offsets[p]) * cols);
  }
  return parts[0].graph()->Record(
      std::move(out), ids, [ids, offsets](Graph& g, int n) {
        const Tensor& dc = g.grad(n);
        const std::size_t width = dc.cols();
        for (std::size_t p = 0; p < ids.size(); ++p) {
          Accumulate(g, ids[p], [&](Tensor& d) {
            const double* src = dc.data() + offsets[p] * width;
            for (std::size_t i = 0; i < d.size(); ++i) d[i] += src[i];
          });
        }
      });
}

Var Tanh(Var a) {
  const int ia = a.id();
  return Pointwise(a, [](double v) { return std::tanh(v); },
                   [ia](Graph& g, int n) {
                     const Tensor& y = g.value(n);
                     const Tensor& dy = g.grad(n);
                     Accumulate(g, ia, [&](Tensor& d) {
                       for (std::size_t i = 0; i < d.size(); ++i) {
                         d[i] += dy[i] * (1.0 - y[i] * y[i]);
                       }
                     });
                   });
}

Var Sigmoid(Var a) {
  const int ia = a.id();
  return Pointwise(a, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
                   [ia](Graph& g, int n) {
                     const Tensor& y = g.value(n);
                     const Tensor& dy = g.grad(n);
                     Accumulate(g, ia, [&](Tensor& d) {
                       for (std::size_t i = 0; i < d.size(); ++i) {
                         d[i] += dy[i] * y[i] * (1.0 - y[i]);
                       }
                     });
                   });
}

Var Exp(Var a) {
  const int ia = a.id();
  return Pointwise(a, [](double v) { return std::exp(v); },
                   [ia](Graph& g, int n) {
                     const Tensor& y = g.value(n);
                     const Tensor& dy = g.grad(n);
                     Accumulate(g, ia, [&](Tensor& d) {
                       for (std::size_t i = 0; i < d.size(); ++i) {
                         d[i] += dy[i] * y[i];
                       }
                     });
                   });
}

Var Log(Var a) {
  const int ia = a.id();
  return Pointwise(a, [](double v) { return std::log(v); },
                   [ia](Graph& g, int n) {
                     const Tensor& x = g.value(ia);
                     const Tensor& dy = g.grad(n);
                     Accumulate(g, ia, [&](Tensor& d) {
                       for (std::size_t i = 0; i < d.size(); ++i) {
                         d[i] += dy[i] / x[i];
                       }
                     });
                   });
}

Var Softmax(Var a, int axis) {
  Require(axis == 0 || axis == 1, "Softmax: axis must be 0 or 1");
  RowMatrix x = AsMatrix(a.value());
  if (axis == 0) x.transposeInPlace();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double peak = x.row(r).maxCoeff();
    x.row(r) = (x.row(r).array() - peak).exp().matrix();
    x.row(r) /= x.row(r).sum();
  }
  if (axis == 0) x.transposeInPlace();
  Tensor out = Tensor::Zeros(a.rows(), a.cols());
  AsMatrix(out) = x;
  const int ia = a.id();
  return a.graph()->Record(std::move(out), {ia}, [ia, axis](Graph& g, int n) {
    Accumulate(g, ia, [&](Tensor& d) {
      RowMatrix y = AsMatrix(g.value(n));
      RowMatrix dy = AsMatrix(g.grad(n));
      if (axis == 0) {
        y.transposeInPlace();
        dy.transposeInPlace();
      }
      RowMatrix dx(y.rows(), y.cols());
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        const double inner = y.row(r).dot(dy.row(r));
        dx.row(r) = (y.row(r).array() * (dy.row(r).array() - inner)).matrix();
      }
      if (axis == 0) dx.transposeInPlace();
      AsMatrix(d) += dx;
    });
  });
}

Var Dropout(Var a, double ratio, bool train, std::mt19937_64& rng) {
  if (ratio < 0.0 || ratio >= 1.0) {
    throw Error(ErrorCode::kBadShape, "dropout ratio must be in [0, 1)");
  }
  if (!train || ratio == 0.0) return a;
  const double scale = 1.0 / (1.0 - ratio);
  std::bernoulli_distribution keep(1.0 - ratio);
  std::vector<double> mask(a.value().size());
  for (double& m : mask) m = keep(rng) ? scale : 0.0;
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  const int ia = a.id();
  return a.graph()->Record(std::move(out), {ia},
                           [ia, mask = std::move(mask)](Graph& g, int n) {
                             const Tensor& dy = g.grad(n);
                             Accumulate(g, ia, [&](Tensor& d) {
                               for (std::size_t i = 0; i < d.size(); ++i) {
                                 d[i] += dy[i] * mask[i];
                               }
                             });
                           });
}

Var Sum(Var a) {
  double total = 0;
  for (double v : a.value().values()) total += v;
  const int ia = a.id();
  return a.graph()->Record(Tensor::Scalar(total), {ia}, [ia](Graph& g, int n) {
    const double dy = g.grad(n)[0];
    Accumulate(g, ia, [&](Tensor& d) {
      for (double& v : d.values()) v += dy;
    });
  });
}

Var EmbeddingLookup(Var table, std::span<const int> ids) {
  const int width = table.cols();
  Tensor out = Tensor::Zeros(static_cast<int>(ids.size()), width);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    Require(ids[r] >= 0 && ids[r] < table.rows(),
            "EmbeddingLookup: id " + std::to_string(ids[r]) + " out of range");
    auto src = table.value().row(ids[r]);
    std::copy(src.begin(), src.end(), out.row(static_cast<int>(r)).begin());
  }
  const int it = table.id();
  return table.graph()->Record(
      std::move(out), {it},
      [it, rows = std::vector<int>(ids.begin(), ids.end())](Graph& g, int n) {
        const Tensor& dy = g.grad(n);
        Accumulate(g, it, [&](Tensor& d) {
          for (std::size_t r = 0; r < rows.size(); ++r) {
            auto src = dy.row(static_cast<int>(r));
            auto dst = d.row(rows[r]);
            for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
          }
        });
      });
}

Var PickPerRow(Var a, std::span<const int> cols) {
  Require(static_cast<int>(cols.size()) == a.rows(),
          "PickPerRow: one column per row required");
  Tensor out = Tensor::Zeros(a.rows(), 1);
  for (int r = 0; r < a.rows(); ++r) {
    Require(cols[r] >= 0 && cols[r] < a.cols(), "PickPerRow: bad column");
    out[r] = a.value()(r, cols[r]);
  }
  const int ia = a.id();
  return a.graph()->Record(
      std::move(out), {ia},
      [ia, picks = std::vector<int>(cols.begin(), cols.end())](Graph& g,
                                                               int n) {
        const Tensor& dy = g.grad(n);
        Accumulate(g, ia, [&](Tensor& d) {
          for (std::size_t r = 0; r < picks.size(); ++r) {
            d(static_cast<int>(r), picks[r]) += dy[r];
          }
        });
      });
}

Var Conv1dMaxPool(Var input, Var filters, Var bias, int window) {
  SameGraph(input, filters);
  SameGraph(input, bias);
  const int length = input.rows();
  const int channels = input.cols();
  const int num_filters = filters.cols();
  Require(window >= 1 && length >= window,
          "Conv1dMaxPool: input shorter than window");
  Require(filters.rows() == window * channels,
          "Conv1dMaxPool: filters must have window*channels rows");
  Require(bias.rows() == 1 && bias.cols() == num_filters,
          "Conv1dMaxPool: bias must be [1, filters]");
  const int positions = length - window + 1;
  const int patch = window * channels;
  // Window p is the contiguous slice starting at row p of the input.
  Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>> windows(
      input.value().data(), positions, patch, Eigen::OuterStride<>(channels));
  RowMatrix conv = windows * AsMatrix(filters.value());
  conv.rowwise() += AsMatrix(bias.value()).row(0);
  Tensor out = Tensor::Zeros(1, num_filters);
  std::vector<int> argmax(num_filters, 0);
  for (int f = 0; f < num_filters; ++f) {
    Eigen::Index best = 0;
    out[f] = conv.col(f).maxCoeff(&best);
    argmax[f] = static_cast<int>(best);
  }
  const int ii = input.id(), iw = filters.id(), ib = bias.id();
  return input.graph()->Record(
      std::move(out), {ii, iw, ib},
      [=, argmax = std::move(argmax)](Graph& g, int n) {
        const Tensor& dy = g.grad(n);
        const Tensor& x = g.value(ii);
        const Tensor& w = g.value(iw);
        Accumulate(g, iw, [&](Tensor& dw) {
          for (int f = 0; f < num_filters; ++f) {
            const double* patch_values = x.data() + argmax[f] * channels;
            for (int k = 0; k < patch; ++k) dw(k, f) += patch_values[k] * dy[f];
          }
        });
        Accumulate(g, ib, [&](Tensor& db) {
          for (int f = 0; f < num_filters; ++f) db[f] += dy[f];
        });
        Accumulate(g, ii, [&](Tensor& dx) {
          for (int f = 0; f < num_filters; ++f) {
            double* dst = dx.data() + argmax[f] * channels;
            for (int k = 0; k < patch; ++k) dst[k] += w(k, f) * dy[f];
          }
        });
      });
}

Var Lstm(Var inputs, Var input_weights, Var recurrent_weights, Var bias,
         bool reverse) {
  SameGraph(inputs, input_weights);
  SameGraph(inputs, recurrent_weights);
  SameGraph(inputs, bias);
  const int steps = inputs.rows();
  const int hidden = recurrent_weights.rows();
  Require(steps >= 1, "Lstm: empty sequence");
  Require(input_weights.rows() == inputs.cols() &&
              input_weights.cols() == 4 * hidden,
          "Lstm: input weights must be [n, 4h]");
  Require(recurrent_weights.cols() == 4 * hidden,
          "Lstm: recurrent weights must be [h, 4h]");
  Require(bias.rows() == 1 && bias.cols() == 4 * hidden,
          "Lstm: bias must be [1, 4h]");

  // Activated gates [T, 4h] in (i, f, g, o) order, cell states and
  // tanh(cell) per step, indexed by sequence position.
  RowMatrix gates = AsMatrix(inputs.value()) * AsMatrix(input_weights.value());
  gates.rowwise() += AsMatrix(bias.value()).row(0);
  RowMatrix cells(steps, hidden), cell_tanh(steps, hidden);
  Tensor out = Tensor::Zeros(steps, hidden);
  auto h_out = AsMatrix(out);
  auto wh = AsMatrix(recurrent_weights.value());
  Eigen::RowVectorXd h_prev = Eigen::RowVectorXd::Zero(hidden);
  Eigen::RowVectorXd c_prev = Eigen::RowVectorXd::Zero(hidden);
  for (int k = 0; k < steps; ++k) {
    const int t = reverse ? steps - 1 - k : k;
    auto z = gates.row(t);
    z.noalias() += h_prev * wh;
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    for (int j = 0; j < hidden; ++j) {
      z(j) = sig(z(j));
      z(hidden + j) = sig(z(hidden + j));
      z(2 * hidden + j) = std::tanh(z(2 * hidden + j));
      z(3 * hidden + j) = sig(z(3 * hidden + j));
    }
    for (int j = 0; j < hidden; ++j) {
      const double c = z(hidden + j) * c_prev(j) + z(j) * z(2 * hidden + j);
      cells(t, j) = c;
      cell_tanh(t, j) = std::tanh(c);
      h_out(t, j) = z(3 * hidden + j) * cell_tanh(t, j);
    }
    h_prev = h_out.row(t);
    c_prev = cells.row(t);
  }

  const int ix = inputs.id(), iwx = input_weights.id(),
            iwh = recurrent_weights.id(), ib = bias.id();
  return inputs.graph()->Record(
      std::move(out), {ix, iwx, iwh, ib},
      [=, gates = std::move(gates), cells = std::move(cells),
       cell_tanh = std::move(cell_tanh)](Graph& g, int n) {
        auto dh_out = AsMatrix(g.grad(n));
        auto h = AsMatrix(g.value(n));
        auto wh = AsMatrix(g.value(iwh));
        RowMatrix dz(steps, 4 * hidden);
        // Row t holds the state that fed step t (zero for the first step).
        RowMatrix h_before = RowMatrix::Zero(steps, hidden);
        Eigen::RowVectorXd dh_next = Eigen::RowVectorXd::Zero(hidden);
        Eigen::RowVectorXd dc_next = Eigen::RowVectorXd::Zero(hidden);
        for (int k = steps - 1; k >= 0; --k) {
          const int t = reverse ? steps - 1 - k : k;
          const int prev = reverse ? t + 1 : t - 1;
          const bool has_prev = k > 0;
          if (has_prev) h_before.row(t) = h.row(prev);
          Eigen::RowVectorXd dh = dh_out.row(t) + dh_next;
          for (int j = 0; j < hidden; ++j) {
            const double i = gates(t, j);
            const double f = gates(t, hidden + j);
            const double cand = gates(t, 2 * hidden + j);
            const double o = gates(t, 3 * hidden + j);
            const double tc = cell_tanh(t, j);
            const double c_before = has_prev ? cells(prev, j) : 0.0;
            const double dc = dh(j) * o * (1.0 - tc * tc) + dc_next(j);
            dz(t, j) = dc * cand * i * (1.0 - i);
            dz(t, hidden + j) = dc * c_before * f * (1.0 - f);
            dz(t, 2 * hidden + j) = dc * i * (1.0 - cand * cand);
            dz(t, 3 * hidden + j) = dh(j) * tc * o * (1.0 - o);
            dc_next(j) = dc * f;
          }
          dh_next.noalias() = dz.row(t) * wh.transpose();
        }
        Accumulate(g, ix, [&](Tensor& dx) {
          AsMatrix(dx).noalias() += dz * AsMatrix(g.value(iwx)).transpose();
        });
        Accumulate(g, iwx, [&](Tensor& dw) {
          AsMatrix(dw).noalias() += AsMatrix(g.value(ix)).transpose() * dz;
        });
        Accumulate(g, iwh, [&](Tensor& dw) {
          AsMatrix(dw).noalias() += h_before.transpose() * dz;
        });
        Accumulate(g, ib, [&](Tensor& db) {
          AsMatrix(db).row(0) += dz.colwise().sum();
        });
      });
}

Var SpanFeatures(Var forward, Var backward, std::span<const Span> spans,
                 bool with_sums) {
  SameGraph(forward, backward);
  Require(forward.value().SameShape(backward.value()),
          "SpanFeatures: forward/backward state shapes differ");
  const int steps = forward.rows();
  const int hidden = forward.cols();
  for (const Span& s : spans) {
    Require(s.start >= 1 && s.start <= s.end && s.end <= steps,
            "SpanFeatures: span outside sentence");
  }
  const int parts = with_sums ? 4 : 2;
  Tensor out = Tensor::Zeros(static_cast<int>(spans.size()), parts * hidden);
  const Tensor& fw = forward.value();
  const Tensor& bw = backward.value();
  // Positions are 1-based; row index is position - 1.
  for (std::size_t r = 0; r < spans.size(); ++r) {
    const int a = spans[r].start, b = spans[r].end;
    auto row = out.row(static_cast<int>(r));
    for (int j = 0; j < hidden; ++j) {
      const double fw_before = a > 1 ? fw(a - 2, j) : 0.0;
      const double bw_after = b < steps ? bw(b, j) : 0.0;
      row[j] = fw(b - 1, j) - fw_before;
      row[hidden + j] = bw(a - 1, j) - bw_after;
      if (with_sums) {
        row[2 * hidden + j] = fw(a - 1, j) + fw(b - 1, j);
        row[3 * hidden + j] = bw(a - 1, j) + bw(b - 1, j);
      }
    }
  }
  const int iff = forward.id(), ibb = backward.id();
  return forward.graph()->Record(
      std::move(out), {iff, ibb},
      [=, spans = std::vector<Span>(spans.begin(), spans.end())](Graph& g,
                                                                 int n) {
        const Tensor& dy = g.grad(n);
        Accumulate(g, iff, [&](Tensor& d) {
          for (std::size_t r = 0; r < spans.size(); ++r) {
            const int a = spans[r].start, b = spans[r].end;
            auto row = dy.row(static_cast<int>(r));
            for (int j = 0; j < hidden; ++j) {
              d(b - 1, j) += row[j];
              if (a > 1) d(a - 2, j) -= row[j];
              if (with_sums) {
                d(a - 1, j) += row[2 * hidden + j];
                d(b - 1, j) += row[2 * hidden + j];
              }
            }
          }
        });
        Accumulate(g, ibb, [&](Tensor& d) {
          for (std::size_t r = 0; r < spans.size(); ++r) {
            const int a = spans[r].start, b = spans[r].end;
            auto row = dy.row(static_cast<int>(r));
            for (int j = 0; j < hidden; ++j) {
              d(a - 1, j) += row[hidden + j];
              if (b < steps) d(b, j) -= row[hidden + j];
              if (with_sums) {
                d(a - 1, j) += row[3 * hidden + j];
                d(b - 1, j) += row[3 * hidden + j];
              }
            }
          }
        });
      });
}

Var SoftmaxCrossEntropy(Var logits, std::span<const int> targets) {
  const int rows = logits.rows(), cols = logits.cols();
  Require(static_cast<int>(targets.size()) == rows,
          "SoftmaxCrossEntropy: one target per row required");
  Tensor probs = logits.value();
  double loss = 0;
  for (int r = 0; r < rows; ++r) {
    Require(targets[r] >= 0 && targets[r] < cols,
            "SoftmaxCrossEntropy: target out of range");
    auto row = probs.row(r);
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0;
    for (double v : row) total += std::exp(v - peak);
    const double log_z = peak + std::log(total);
    loss += log_z - row[targets[r]];
    for (double& v : row) v = std::exp(v - log_z);
  }
  const int il = logits.id();
  return logits.graph()->Record(
      Tensor::Scalar(loss), {il},
      [il, probs = std::move(probs),
       gold = std::vector<int>(targets.begin(), targets.end())](Graph& g,
                                                                int n) {
        const double dy = g.grad(n)[0];
        Accumulate(g, il, [&](Tensor& d) {
          for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy * probs[i];
          for (std::size_t r = 0; r < gold.size(); ++r) {
            d(static_cast<int>(r), gold[r]) -= dy;
          }
        });
      });
}

Var NcaNll(Var scores, std::span<const int> support_labels,
           std::span<const int> targets, double floor) {
  const int rows = scores.rows(), cols = scores.cols();
  if (cols == 0) throw Error(ErrorCode::kEmptySupport, "NcaNll: no support");
  Require(static_cast<int>(support_labels.size()) == cols,
          "NcaNll: one label per support column required");
  Require(static_cast<int>(targets.size()) == rows,
          "NcaNll: one target per row required");
  const double log_floor = std::log(floor);
  // d(loss)/d(scores) for a unit upstream gradient.
  Tensor local = Tensor::Zeros(rows, cols);
  double loss = 0;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < rows; ++r) {
    auto s = scores.value().row(r);
    double peak = neg_inf, peak_gold = neg_inf;
    for (int j = 0; j < cols; ++j) {
      peak = std::max(peak, s[j]);
      if (support_labels[j] == targets[r]) peak_gold = std::max(peak_gold, s[j]);
    }
    double total = 0, total_gold = 0;
    for (int j = 0; j < cols; ++j) {
      total += std::exp(s[j] - peak);
      if (support_labels[j] == targets[r]) total_gold += std::exp(s[j] - peak_gold);
    }
    const double log_z = peak + std::log(total);
    const double log_gold =
        total_gold > 0 ? peak_gold + std::log(total_gold) - log_z : neg_inf;
    if (log_gold < log_floor) {
      loss -= log_floor;  // clamped: constant, no gradient
      continue;
    }
    loss -= log_gold;
    const double log_gold_z = log_gold + log_z;
    auto grad_row = local.row(r);
    for (int j = 0; j < cols; ++j) {
      double g = std::exp(s[j] - log_z);
      if (support_labels[j] == targets[r]) g -= std::exp(s[j] - log_gold_z);
      grad_row[j] = g;
    }
  }
  const int is = scores.id();
  return scores.graph()->Record(
      Tensor::Scalar(loss), {is},
      [is, local = std::move(local)](Graph& g, int n) {
        const double dy = g.grad(n)[0];
        Accumulate(g, is, [&](Tensor& d) {
          for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy * local[i];
        });
      });
}

}  // namespace ops
}  // namespace ibspan
