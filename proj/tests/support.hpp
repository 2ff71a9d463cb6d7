// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Helpers shared by the unit tests and the acceptance binary.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "grasp/gcn.hpp"
#include "grasp/graph.hpp"

namespace grasp::testing {

inline EmbeddingPyramid random_pyramid(int m, int d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  EmbeddingPyramid p;
  p.slide_id = "s";
  p.group_id = "g";
  for (auto& b : p.blocks) {
    b.resize(m, d);
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < d; ++k) b(i, k) = static_cast<float>(normal(rng));
  }
  return p;
}

inline ModelParams random_params(const ModelShape& shape, std::mt19937_64& rng, double scale = 0.3) {
  ModelParams p = ModelParams::zeros(shape);
  std::normal_distribution<double> normal(0.0, scale);
  for (auto& t : p.tensors())
    for (double& v : t.values) v = normal(rng);
  return p;
}

// Adjacency built by enumerating every node pair from the definition:
// same magnification and different triplet, or same triplet and linked
// magnifications. Independent of Topology::adjacent.
inline std::set<std::pair<int, int>> enumerate_edges(int m, bool triangle = false) {
  std::set<std::pair<int, int>> out;
  const int n = 3 * m;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const int ma = a / m, mb = b / m, ta = a % m, tb = b % m;
      const bool clique = ma == mb && ta != tb;
      const bool chain = ta == tb && ma != mb && (triangle || std::abs(ma - mb) == 1);
      if (clique || chain) out.insert({a, b});
    }
  }
  return out;
}

inline double rel_err(double a, double b, double floor = 1e-7) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Relative error as used in the gradient check: when both sides are tiny the
// absolute difference is compared against the floor instead.
inline bool grad_close(double analytic, double numeric, double tol) {
  return rel_err(analytic, numeric) < tol;
}

// Sign pattern of every pre-activation in the trace. A finite-difference
// probe that flips any of them straddles a kink and is not a valid oracle.
inline std::vector<bool> relu_pattern(const ForwardTrace& t) {
  std::vector<bool> out;
  for (const auto& l : t.layers)
    for (Eigen::Index i = 0; i < l.pre.size(); ++i) out.push_back(l.pre.data()[i] > 0.0);
  for (Eigen::Index i = 0; i < t.hidden_pre.size(); ++i) out.push_back(t.hidden_pre(i) > 0.0);
  return out;
}

}  // namespace grasp::testing
