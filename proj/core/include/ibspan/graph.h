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

#ifndef IBSPAN_GRAPH_H_
#define IBSPAN_GRAPH_H_

#include <deque>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ibspan/corpus.h"
#include "ibspan/tensor.h"

namespace ibspan {

// A trainable weight and its gradient accumulator.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value);

  void ZeroGrad() { grad.Fill(0.0); }

  std::string name;
  Tensor value;
  Tensor grad;
};

class Graph;

// Handle to a node recorded in a Graph. Cheap to copy; valid while the
// graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, int id) : graph_(graph), id_(id) {}

  Graph* graph() const { return graph_; }
  int id() const { return id_; }
  const Tensor& value() const;
  int rows() const { return value().rows(); }
  int cols() const { return value().cols(); }

 private:
  Graph* graph_ = nullptr;
  int id_ = -1;
};

// Tape for one forward pass. Nodes are appended after their inputs, so
// walking the tape backwards is a reverse topological order.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int node)>;

  // With record_gradients=false no backward closures are kept; use for
  // evaluation-only passes.
  explicit Graph(bool record_gradients = true)
      : recording_(record_gradients) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var Constant(Tensor value);
  // One leaf per parameter per graph; gradients flow into parameter.grad.
  Var Param(Parameter& parameter);

  // Accumulates d(loss)/d(parameter) into every reachable Parameter::grad.
  void Backward(Var loss);

  bool recording() const { return recording_; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Kernel-facing interface.
  Var Record(Tensor value, std::vector<int> inputs, BackwardFn backward);
  const Tensor& value(int id) const { return nodes_[id].value; }
  const Tensor& grad(int id) const { return nodes_[id].grad; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  // Gradient accumulator of `id`, allocated on first use.
  Tensor& grad_slot(int id);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<int> inputs;
    BackwardFn backward;
    Parameter* parameter = nullptr;
    bool needs_grad = false;
  };

  bool recording_;
  std::deque<Node> nodes_;  // deque keeps value references stable
  std::unordered_map<Parameter*, int> parameter_nodes_;
};

// Differentiable kernels. All operate on rank-2 tensors.
namespace ops {

Var MatMul(Var a, Var b);    // [m,k] x [k,n]
Var MatMulNT(Var a, Var b);  // [m,k] x [n,k]^T
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
// a [m,n] plus a [1,n] row added to every row.
Var AddRow(Var a, Var row);
Var ConcatCols(std::span<const Var> parts);
Var ConcatRows(std::span<const Var> parts);
Var Tanh(Var a);
Var Sigmoid(Var a);
Var Exp(Var a);
Var Log(Var a);
// axis 1 normalizes each row, axis 0 each column.
Var Softmax(Var a, int axis);
// Inverted dropout: kept entries are scaled by 1/(1-ratio) in training;
// identity when !train or ratio == 0.
Var Dropout(Var a, double ratio, bool train, std::mt19937_64& rng);
// Sum of all entries as a 1x1 tensor.
Var Sum(Var a);
// Rows of `table` [V,n] selected by `ids`, giving [ids.size(), n].
Var EmbeddingLookup(Var table, std::span<const int> ids);
// Entrywise product with a constant-shaped selection; picks a[r, cols[r]]
// into an [m,1] column.
Var PickPerRow(Var a, std::span<const int> cols);
// Sliding window of `window` rows over input [L,c], each flattened to
// window*c and multiplied with filters [window*c, F] plus bias [1,F], then
// max-pooled over positions. Requires L >= window. Output [1,F].
Var Conv1dMaxPool(Var input, Var filters, Var bias, int window);
// Unidirectional LSTM over inputs [T,n] with input weights [n,4h],
// recurrent weights [h,4h] and bias [1,4h]; gate blocks ordered
// (input, forget, candidate, output). Zero initial state. When `reverse`
// is set the sequence is consumed from T down to 1 and row t of the
// output still corresponds to input row t. Output [T,h].
Var Lstm(Var inputs, Var input_weights, Var recurrent_weights, Var bias,
         bool reverse);
// Boundary-difference span features from forward/backward states [T,h].
// Each row is [fwd_b - fwd_{a-1}, bwd_a - bwd_{b+1}] and, when
// `with_sums`, additionally [fwd_a + fwd_b, bwd_a + bwd_b]. States outside
// 1..T are zero.
Var SpanFeatures(Var forward, Var backward, std::span<const Span> spans,
                 bool with_sums);
// Sum over rows of -log softmax(logits)[r, targets[r]], log-sum-exp
// stabilized. Output 1x1.
Var SoftmaxCrossEntropy(Var logits, std::span<const int> targets);
// Neighbourhood-component NLL. scores [N,M] are query-by-support
// similarities; support_labels has M entries and targets N. For each row:
//   -log max(sum_{j: label_j = target} softmax(scores_row)_j, floor)
// summed over rows. Output 1x1.
Var NcaNll(Var scores, std::span<const int> support_labels,
           std::span<const int> targets, double floor);

}  // namespace ops
}  // namespace ibspan

#endif  // IBSPAN_GRAPH_H_
