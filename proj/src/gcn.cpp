// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "grasp/gcn.hpp"

#include <cmath>

#include "grasp/errors.hpp"

namespace grasp {

namespace {

std::int64_t layer_count(std::int64_t in, std::int64_t out) { return in * out + out; }

DenseLayer zero_layer(int in, int out) { return {Matrix::Zero(in, out), RowVector::Zero(out)}; }

void check_layer(const DenseLayer& layer, Eigen::Index in, const std::string& name) {
  if (layer.weight.rows() != in || layer.bias.size() != layer.weight.cols()) {
    throw ShapeError(name + ": weight is " + std::to_string(layer.weight.rows()) + "x" +
                     std::to_string(layer.weight.cols()) + " with bias " +
                     std::to_string(layer.bias.size()) + ", expected input width " +
                     std::to_string(in));
  }
}

RowVector softmax(const RowVector& logits) {
  const double top = logits.maxCoeff();
  RowVector e = (logits.array() - top).exp().matrix();
  return e / e.sum();
}

// Classifier head shared by the structured forward path.
void classify(ForwardTrace& trace, const ModelParams& params) {
  const int last = static_cast<int>(params.gcn.size());
  trace.readout = trace.layers.back().act.colwise().mean();
  trace.hidden_pre = trace.readout * params.hidden.weight + params.hidden.bias;
  if (!trace.hidden_pre.allFinite()) throw NumericError(last, "non-finite classifier hidden layer");
  trace.hidden = trace.hidden_pre.cwiseMax(0.0);
  trace.logits = trace.hidden * params.output.weight + params.output.bias;
  if (!trace.logits.allFinite()) throw NumericError(last + 1, "non-finite logits");
  trace.probs = softmax(trace.logits);
}

Matrix relu_mask(const Matrix& pre) { return (pre.array() > 0.0).cast<double>().matrix(); }

}  // namespace

// ---------------------------------------------------------------------------
// Shapes and parameters

std::int64_t ModelShape::count() const {
  std::int64_t total = 0;
  std::int64_t in = input_dim;
  for (int width : gcn_widths) {
    total += layer_count(in, width);
    in = width;
  }
  total += layer_count(in, hidden);
  total += layer_count(hidden, classes);
  return total;
}

void ModelShape::validate() const {
  if (input_dim < 1) throw ConfigError("input dimension must be positive");
  if (classes < 1) throw ConfigError("class count must be positive");
  if (hidden < 1) throw ConfigError("classifier hidden width must be positive");
  if (gcn_widths.empty() || gcn_widths.size() > 6) {
    throw ConfigError("number of graph convolution layers must be in [1, 6]");
  }
  for (int w : gcn_widths) {
    if (w < 1) throw ConfigError("graph convolution widths must be positive");
  }
}

ModelParams ModelParams::zeros(const ModelShape& shape) {
  shape.validate();
  ModelParams p;
  p.shape = shape;
  int in = shape.input_dim;
  for (int width : shape.gcn_widths) {
    p.gcn.push_back(zero_layer(in, width));
    in = width;
  }
  p.hidden = zero_layer(in, shape.hidden);
  p.output = zero_layer(shape.hidden, shape.classes);
  return p;
}

std::int64_t ModelParams::count() const {
  std::int64_t total = 0;
  for (const auto& t : tensors()) total += static_cast<std::int64_t>(t.values.size());
  return total;
}

bool ModelParams::all_finite() const {
  for (const auto& t : tensors()) {
    for (double v : t.values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

namespace {

template <typename T, typename Params>
std::vector<TensorView<T>> collect(Params& p) {
  std::vector<TensorView<T>> out;
  auto add = [&](const std::string& name, auto& layer) {
    out.push_back({name + ".W", std::span<T>(layer.weight.data(), static_cast<std::size_t>(layer.weight.size())), true});
    out.push_back({name + ".b", std::span<T>(layer.bias.data(), static_cast<std::size_t>(layer.bias.size())), false});
  };
  for (std::size_t l = 0; l < p.gcn.size(); ++l) add("gcn" + std::to_string(l), p.gcn[l]);
  add("hidden", p.hidden);
  add("output", p.output);
  return out;
}

}  // namespace

std::vector<TensorView<double>> ModelParams::tensors() { return collect<double>(*this); }
std::vector<TensorView<const double>> ModelParams::tensors() const { return collect<const double>(*this); }

std::int64_t count_params(int input_dim, int classes) {
  ModelShape shape;
  shape.input_dim = input_dim;
  shape.classes = classes;
  return shape.count();
}

// ---------------------------------------------------------------------------
// Forward

Matrix gcn_layer_forward(const Matrix& feats, const Topology& topology, const Matrix& weight,
                         const RowVector& bias, int layer) {
  if (feats.cols() != weight.rows() || bias.size() != weight.cols()) {
    throw ShapeError("layer " + std::to_string(layer) + ": features have width " +
                     std::to_string(feats.cols()) + ", weight is " + std::to_string(weight.rows()) +
                     "x" + std::to_string(weight.cols()));
  }
  Matrix pre = topology.aggregate(feats) * weight;
  pre.rowwise() += bias;
  if (!pre.allFinite()) throw NumericError(layer, "non-finite graph convolution output");
  return pre.cwiseMax(0.0);
}

ForwardTrace forward(const Topology& topology, const Matrix& feats, const ModelParams& params) {
  if (feats.rows() != topology.num_nodes()) {
    throw ShapeError("forward: " + std::to_string(feats.rows()) + " feature rows for " +
                     std::to_string(topology.num_nodes()) + " nodes");
  }
  if (feats.cols() != params.shape.input_dim) {
    throw ShapeError("forward: graph has d=" + std::to_string(feats.cols()) +
                     " but the model expects " + std::to_string(params.shape.input_dim));
  }
  ForwardTrace trace;
  trace.layers.resize(params.gcn.size());
  const Matrix* current = &feats;
  for (std::size_t l = 0; l < params.gcn.size(); ++l) {
    const auto& layer = params.gcn[l];
    check_layer(layer, current->cols(), "gcn" + std::to_string(l));
    auto& t = trace.layers[l];
    t.aggregated = topology.aggregate(*current);
    t.pre.noalias() = t.aggregated * layer.weight;
    t.pre.rowwise() += layer.bias;
    if (!t.pre.allFinite()) throw NumericError(static_cast<int>(l), "non-finite graph convolution output");
    t.act = t.pre.cwiseMax(0.0);
    current = &t.act;
  }
  check_layer(params.hidden, current->cols(), "hidden");
  check_layer(params.output, params.hidden.weight.cols(), "output");
  classify(trace, params);
  return trace;
}

ForwardTrace forward(const PyramidGraph& graph, const ModelParams& params) {
  return forward(graph.topology, graph.node_feats, params);
}

double weighted_cross_entropy(const ForwardTrace& trace, int target, double class_weight) {
  const double top = trace.logits.maxCoeff();
  const double lse = top + std::log((trace.logits.array() - top).exp().sum());
  return class_weight * (lse - trace.logits(target));
}

// ---------------------------------------------------------------------------
// Backward

Gradients backward_from_logits(const ForwardTrace& trace, const Topology& topology,
                               const ModelParams& params, const RowVector& dlogits,
                               bool input_grad) {
  if (trace.layers.size() != params.gcn.size() || dlogits.size() != params.shape.classes ||
      trace.logits.size() != params.shape.classes ||
      trace.layers.front().aggregated.rows() != topology.num_nodes()) {
    throw ContractError("backward: trace does not belong to this model and graph");
  }
  Gradients g;
  g.params.shape = params.shape;
  g.params.gcn.resize(params.gcn.size());

  g.params.output.weight.noalias() = trace.hidden.transpose() * dlogits;
  g.params.output.bias = dlogits;

  RowVector dhidden = dlogits * params.output.weight.transpose();
  dhidden = dhidden.cwiseProduct((trace.hidden_pre.array() > 0.0).cast<double>().matrix());
  g.params.hidden.weight.noalias() = trace.readout.transpose() * dhidden;
  g.params.hidden.bias = dhidden;

  const RowVector dreadout = dhidden * params.hidden.weight.transpose();
  const auto n = static_cast<double>(topology.num_nodes());
  Matrix dact = dreadout.replicate(topology.num_nodes(), 1) / n;

  for (std::size_t l = params.gcn.size(); l-- > 0;) {
    const auto& t = trace.layers[l];
    Matrix dpre = dact.cwiseProduct(relu_mask(t.pre));
    g.params.gcn[l].weight.noalias() = t.aggregated.transpose() * dpre;
    g.params.gcn[l].bias = dpre.colwise().sum();
    if (l == 0 && !input_grad) break;
    Matrix dagg = dpre * params.gcn[l].weight.transpose();
    dact = topology.aggregate(dagg);
  }
  if (input_grad) g.input = std::move(dact);
  return g;
}

Gradients backward(const ForwardTrace& trace, const PyramidGraph& graph, const ModelParams& params,
                   int target, double class_weight, bool input_grad) {
  if (target < 0 || target >= params.shape.classes) {
    throw ContractError("backward: target class " + std::to_string(target) + " out of range");
  }
  RowVector dlogits = trace.probs;
  dlogits(target) -= 1.0;
  dlogits *= class_weight;
  Gradients g = backward_from_logits(trace, graph.topology, params, dlogits, input_grad);
  g.loss = weighted_cross_entropy(trace, target, class_weight);
  return g;
}

// ---------------------------------------------------------------------------
// Dense reference

namespace reference {

Matrix gcn_layer_forward(const Matrix& feats, const Matrix& adjacency, const Matrix& weight,
                         const RowVector& bias) {
  Matrix pre = (adjacency * feats) * weight;
  pre.rowwise() += bias;
  return pre.cwiseMax(0.0);
}

ForwardTrace forward(const PyramidGraph& graph, const ModelParams& params) {
  const Matrix adjacency = graph.topology.dense_normalized_adjacency();
  ForwardTrace trace;
  Matrix h = graph.node_feats;
  for (const auto& layer : params.gcn) {
    LayerTrace t;
    t.aggregated = adjacency * h;
    t.pre = t.aggregated * layer.weight;
    t.pre.rowwise() += layer.bias;
    t.act = t.pre.cwiseMax(0.0);
    h = t.act;
    trace.layers.push_back(std::move(t));
  }
  trace.readout = RowVector::Zero(h.cols());
  for (Eigen::Index i = 0; i < h.rows(); ++i) trace.readout += h.row(i);
  trace.readout /= static_cast<double>(h.rows());
  trace.hidden_pre = trace.readout * params.hidden.weight + params.hidden.bias;
  trace.hidden = trace.hidden_pre.cwiseMax(0.0);
  trace.logits = trace.hidden * params.output.weight + params.output.bias;
  trace.probs = softmax(trace.logits);
  return trace;
}

}  // namespace reference

}  // namespace grasp
