// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace grasp {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int classes);
  static ConfusionMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows);

  void add(int truth, int predicted, std::int64_t count = 1);

  int classes() const { return classes_; }
  std::int64_t at(int truth, int predicted) const;
  std::int64_t total() const;
  std::int64_t true_count(int cls) const;
  std::int64_t predicted_count(int cls) const;

  std::vector<std::vector<std::int64_t>> rows() const;
  nlohmann::ordered_json to_json() const { return rows(); }

 private:
  int classes_;
  std::vector<std::int64_t> cells_;
};

/// Mean per-class recall. Throws MetricError if a class has no samples.
double balanced_accuracy(const ConfusionMatrix& cm);

/// Mean recall over the classes that have at least one true sample. Used for
/// held-out folds, which group splitting does not stratify. MetricError if
/// the matrix is empty.
double balanced_accuracy_present(const ConfusionMatrix& cm);

enum class F1Average { Macro, Weighted };

/// Per-class F1 averaged; a class with no true or predicted samples scores 0.
double f1_score(const ConfusionMatrix& cm, F1Average average = F1Average::Macro);
inline double macro_f1(const ConfusionMatrix& cm) { return f1_score(cm, F1Average::Macro); }

/// Index of the largest probability; ties go to the lowest index.
int argmax_predict(std::span<const double> probabilities);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population (ddof = 0)
};

Summary summarize(std::span<const double> values);

}  // namespace grasp
