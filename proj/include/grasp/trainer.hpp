// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training and group-aware cross-validation.

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "grasp/data_io.hpp"
#include "grasp/gcn.hpp"
#include "grasp/metrics.hpp"

namespace grasp {

enum class ClassWeightMode { InverseFrequency, Uniform, Explicit };
enum class DecayMode { Decoupled, Coupled };

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  DecayMode decay_mode = DecayMode::Decoupled;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 100;
  int folds = 3;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::uint64_t fold_seed = 0;  // folds stay fixed across training seeds
  ClassWeightMode class_weights = ClassWeightMode::InverseFrequency;
  std::vector<double> explicit_weights;
  int batch = 1;
  std::vector<int> gcn_widths{256, 256, 128};
  int classifier_hidden = 128;
  F1Average f1_average = F1Average::Macro;
  int jobs = 1;

  void validate() const;
  ModelShape shape(int input_dim, int classes) const;

  nlohmann::ordered_json to_json() const;
  /// Overlays keys present in `j` onto the defaults; unknown keys are an error.
  static TrainConfig from_json(const nlohmann::json& j);
};

std::string to_string(ClassWeightMode mode);
ClassWeightMode parse_class_weight_mode(std::string_view text);

/// Per-class loss weights. Inverse frequency is N/(C n_c) rescaled to mean 1.
std::vector<double> make_class_weights(std::span<const int> labels, int classes, ClassWeightMode mode,
                                       std::span<const double> explicit_weights = {});

struct SlideKey {
  std::string slide_id;
  std::string group_id;
  int label = 0;
};

struct FoldAssignment {
  int k = 0;
  std::vector<int> fold_of_slide;
  std::map<std::string, int> fold_of_group;

  std::vector<int> test_indices(int fold) const;
  std::vector<int> train_indices(int fold) const;
  std::vector<int> fold_sizes() const;
};

/// Shuffles groups by seed, orders them largest first (stable), then assigns
/// each to the fold with the fewest slides so far (lowest index on ties).
FoldAssignment group_kfold(std::span<const SlideKey> slides, int k, std::uint64_t seed);
FoldAssignment group_kfold(const Dataset& dataset, int k, std::uint64_t seed);

/// Glorot-uniform weights, zero biases.
ModelParams init_params(const ModelShape& shape, std::uint64_t seed);

/// Adam with decoupled (or coupled) weight decay on weights only.
class AdamW {
 public:
  AdamW(const ModelParams& like, const TrainConfig& config);
  void step(ModelParams& params, const ModelParams& grads);
  std::int64_t steps() const { return t_; }

 private:
  TrainConfig config_;
  ModelParams m_;
  ModelParams v_;
  std::int64_t t_ = 0;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_curve;  // mean weighted loss per epoch
};

/// Trains from scratch on the given slide indices (all slides when empty).
TrainResult train(const Dataset& dataset, std::span<const int> indices, const TrainConfig& config,
                  std::uint64_t seed);
inline TrainResult train(const Dataset& dataset, const TrainConfig& config, std::uint64_t seed) {
  return train(dataset, {}, config, seed);
}

struct Evaluation {
  ConfusionMatrix confusion{1};
  std::vector<int> predictions;
  double balanced_accuracy = 0.0;
  double f1 = 0.0;
  double seconds = 0.0;
};

Evaluation evaluate(const ModelParams& params, const Dataset& dataset, std::span<const int> indices = {});

struct RunReport {
  std::uint64_t seed = 0;
  int fold = 0;
  int train_size = 0;
  int test_size = 0;
  double balanced_accuracy = 0.0;
  double f1 = 0.0;
  ConfusionMatrix confusion{1};
  std::vector<double> loss_curve;
  double train_seconds = 0.0;
  double eval_seconds = 0.0;
};

struct EvalReport {
  std::vector<RunReport> runs;  // seed-major, then fold
  Summary balanced_accuracy;
  Summary f1;
  FoldAssignment folds;

  std::vector<double> balanced_accuracies() const;

  /// Deterministic content only; replaying a run gives identical bytes.
  nlohmann::ordered_json to_json() const;
  /// Wall-clock timings, kept apart so the report itself stays replayable.
  nlohmann::ordered_json timing_json() const;
  /// epoch,loss rows per run: seed,fold,epoch,loss.
  std::string loss_csv() const;
};

/// Trains on k-1 folds and evaluates on the held-out fold for every seed.
EvalReport cross_validate(const Dataset& dataset, const TrainConfig& config);

/// Same, and keeps the trained model of every run (indexed like `runs`).
EvalReport cross_validate(const Dataset& dataset, const TrainConfig& config, std::vector<ModelParams>* models);

}  // namespace grasp
