// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Numerical check that last-layer node features inside one magnification
// collapse toward a common center as the number of triplets grows, when
// weights and inputs are L2-bounded.

#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "grasp/gcn.hpp"
#include "grasp/graph.hpp"

namespace grasp {

struct SpreadMeasure {
  std::array<double, 3> max_spread{};   // max pairwise L2 distance per magnification
  std::array<double, 3> mean_spread{};  // mean pairwise L2 distance per magnification
  std::array<RowVector, 3> centers;     // per-magnification mean of last-layer activations
  RowVector readout;
};

/// Exact max/mean pairwise distances of the last graph layer, per magnification.
/// Requires the full (unmasked) topology.
SpreadMeasure measure_spread(const PyramidGraph& graph, const ModelParams& params);

/// Gaussian weights and biases, each tensor rescaled to Frobenius norm `weight_scale`.
ModelParams random_bounded_params(const ModelShape& shape, double weight_scale, std::mt19937_64& rng);

/// Rows drawn uniformly in direction with radius uniform in [0, 1].
EmbeddingPyramid random_bounded_pyramid(int m, int d, std::mt19937_64& rng);

/// Spearman rank correlation (average ranks for ties). 0 if either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct ConvergenceConfig {
  std::vector<int> m_list{8, 32, 128, 256};
  std::vector<std::uint64_t> seeds;
  int d = 32;
  double weight_scale = 1.0;
  GraphOptions graph{};
  std::vector<int> gcn_widths{256, 256, 128};
  int jobs = 1;
};

struct ConvergencePoint {
  int m = 0;
  std::uint64_t seed = 0;
  SpreadMeasure measure;
};

struct ConvergenceReport {
  std::vector<ConvergencePoint> points;  // m-major, then seed
  std::vector<int> m_list;
  std::array<std::vector<double>, 3> median_spread;  // per magnification, per m
  std::array<double, 3> trend{};                      // Spearman(m, median spread)
  double weight_scale = 0.0;

  /// m,seed,spread_m1,spread_m2,spread_m3,trend (trend = largest of the three).
  std::string to_csv() const;
};

ConvergenceReport convergence_sweep(const ConvergenceConfig& config);

double median(std::vector<double> values);

}  // namespace grasp
