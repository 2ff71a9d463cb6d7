// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Graph-size Monte Carlo test and magnification ablation.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grasp/graph.hpp"
#include "grasp/trainer.hpp"

namespace grasp {

/// Removes every node of the listed triplets. Indices must be distinct, in
/// [0, m), and leave at least one triplet.
PyramidGraph drop_triplets(const PyramidGraph& graph, std::span<const int> indices);

/// Keeps only the masked magnifications of a full graph. Chain edges survive
/// only between kept magnifications.
PyramidGraph apply_mask(const PyramidGraph& graph, MagnificationMask mask);

struct MonteCarloPlan {
  int base_m = 400;
  int step = 10;
  int min_count = 10;
  int max_count = 390;
  bool full_grid = false;                   // every count in [min_count, max_count] by step
  std::vector<int> counts{50, 150, 250, 350};  // used when full_grid is false
  int repetitions = 3;
  std::uint64_t seed = 0;

  std::vector<int> resolved_counts() const;
  void validate() const;
};

struct MonteCarloRow {
  int count = 0;   // triplets dropped per slide
  int nodes = 0;   // 3 (m - count)
  Summary balanced_accuracy;
  Summary f1;
  std::vector<double> run_balanced_accuracies;  // repetition-major, then seed, then fold
};

/// For each repetition and slide, samples a drop set per count (uniform,
/// without replacement), then cross-validates every (repetition, count).
std::vector<MonteCarloRow> monte_carlo_test(const Dataset& dataset, const MonteCarloPlan& plan,
                                            const TrainConfig& config);

/// nodes,mean_bacc,std_bacc
std::string monte_carlo_csv(std::span<const MonteCarloRow> rows);

struct MaskReport {
  MagnificationMask mask;
  EvalReport report;
};

/// Trains and evaluates the same architecture on each masked graph set. The
/// full mask is appended when missing.
std::vector<MaskReport> magnification_test(const Dataset& dataset, std::span<const MagnificationMask> masks,
                                           const TrainConfig& config);

/// mask,bacc,std,f1,std
std::string magnification_csv(std::span<const MaskReport> reports);

}  // namespace grasp
