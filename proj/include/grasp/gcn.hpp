// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// GRASP network: stacked graph convolutions, mean readout over all nodes,
// then a two-layer classifier (ReLU hidden layer, linear logits, softmax).
//
// Each graph convolution computes, for node i,
//
//     h_i' = ReLU(b + sum_{j in N(i)} (1/c_ji) h_j W)
//
// using Topology::aggregate, which touches every row a constant number of
// times. The reference namespace holds a dense-adjacency implementation used
// only to cross-check the structured path.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grasp/graph.hpp"
#include "grasp/types.hpp"

namespace grasp {

struct DenseLayer {
  Matrix weight;  // in x out
  RowVector bias;  // out
};

/// Layer widths. The defaults give 378,245 parameters at d = 1024, C = 5.
struct ModelShape {
  int input_dim = 1024;
  std::vector<int> gcn_widths{256, 256, 128};
  int hidden = 128;
  int classes = 2;

  std::int64_t count() const;
  void validate() const;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// Flat view of one parameter tensor; used by the optimizer and checkpoints.
template <typename T>
struct TensorView {
  std::string name;
  std::span<T> values;
  bool is_weight;  // false for biases
};

struct ModelParams {
  ModelShape shape;
  std::vector<DenseLayer> gcn;
  DenseLayer hidden;
  DenseLayer output;

  static ModelParams zeros(const ModelShape& shape);

  std::int64_t count() const;
  bool all_finite() const;

  /// Tensors in checkpoint order: gcn0.W, gcn0.b, ..., hidden.W, hidden.b, output.W, output.b.
  std::vector<TensorView<double>> tensors();
  std::vector<TensorView<const double>> tensors() const;
};

/// Scalar parameter count of the default architecture.
std::int64_t count_params(int input_dim, int classes);

struct LayerTrace {
  Matrix aggregated;  // sum_j (1/c_ji) h_j, the input to the affine map
  Matrix pre;          // aggregated * W + b
  Matrix act;          // ReLU(pre)
};

struct ForwardTrace {
  std::vector<LayerTrace> layers;
  RowVector readout;
  RowVector hidden_pre;
  RowVector hidden;
  RowVector logits;
  RowVector probs;
};

/// One graph convolution. `layer` is only used to label NumericError.
Matrix gcn_layer_forward(const Matrix& feats, const Topology& topology, const Matrix& weight,
                         const RowVector& bias, int layer = 0);

ForwardTrace forward(const PyramidGraph& graph, const ModelParams& params);
ForwardTrace forward(const Topology& topology, const Matrix& feats, const ModelParams& params);

struct Gradients {
  ModelParams params;  // same layout as the model
  Matrix input;        // d(objective)/d(node_feats); empty unless requested
  double loss = 0.0;
};

/// Gradients of class_weight * CE(probs, target).
Gradients backward(const ForwardTrace& trace, const PyramidGraph& graph, const ModelParams& params,
                   int target, double class_weight, bool input_grad = true);

/// Gradients of <dlogits, logits>; e.g. a one-hot dlogits differentiates one logit.
Gradients backward_from_logits(const ForwardTrace& trace, const Topology& topology,
                               const ModelParams& params, const RowVector& dlogits,
                               bool input_grad = true);

/// Weighted cross-entropy for a finished forward pass.
double weighted_cross_entropy(const ForwardTrace& trace, int target, double class_weight);

namespace reference {

/// ReLU(b + A feats W) with A the dense normalized adjacency.
Matrix gcn_layer_forward(const Matrix& feats, const Matrix& adjacency, const Matrix& weight,
                         const RowVector& bias);

ForwardTrace forward(const PyramidGraph& graph, const ModelParams& params);

}  // namespace reference

}  // namespace grasp
