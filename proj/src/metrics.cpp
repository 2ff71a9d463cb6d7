// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "grasp/metrics.hpp"

#include <cmath>

#include "grasp/errors.hpp"

namespace grasp {

ConfusionMatrix::ConfusionMatrix(int classes) : classes_(classes) {
  if (classes < 1) throw ConfigError("confusion matrix needs at least one class");
  cells_.assign(static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes), 0);
}

ConfusionMatrix ConfusionMatrix::from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
  ConfusionMatrix cm(static_cast<int>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != rows.size()) throw ShapeError("confusion matrix must be square");
    for (std::size_t p = 0; p < rows.size(); ++p) {
      cm.add(static_cast<int>(t), static_cast<int>(p), rows[t][p]);
    }
  }
  return cm;
}

void ConfusionMatrix::add(int truth, int predicted, std::int64_t count) {
  if (truth < 0 || truth >= classes_ || predicted < 0 || predicted >= classes_) {
    throw ContractError("confusion matrix: class index out of range");
  }
  if (count < 0) throw ContractError("confusion matrix: negative count");
  cells_[static_cast<std::size_t>(truth * classes_ + predicted)] += count;
}

std::int64_t ConfusionMatrix::at(int truth, int predicted) const {
  return cells_.at(static_cast<std::size_t>(truth * classes_ + predicted));
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t sum = 0;
  for (auto c : cells_) sum += c;
  return sum;
}

std::int64_t ConfusionMatrix::true_count(int cls) const {
  std::int64_t sum = 0;
  for (int p = 0; p < classes_; ++p) sum += at(cls, p);
  return sum;
}

std::int64_t ConfusionMatrix::predicted_count(int cls) const {
  std::int64_t sum = 0;
  for (int t = 0; t < classes_; ++t) sum += at(t, cls);
  return sum;
}

std::vector<std::vector<std::int64_t>> ConfusionMatrix::rows() const {
  std::vector<std::vector<std::int64_t>> out(static_cast<std::size_t>(classes_));
  for (int t = 0; t < classes_; ++t) {
    for (int p = 0; p < classes_; ++p) out[static_cast<std::size_t>(t)].push_back(at(t, p));
  }
  return out;
}

double balanced_accuracy(const ConfusionMatrix& cm) {
  double sum = 0.0;
  for (int c = 0; c < cm.classes(); ++c) {
    const auto n = cm.true_count(c);
    if (n == 0) throw MetricError(c, "balanced accuracy undefined: no samples of this class");
    sum += static_cast<double>(cm.at(c, c)) / static_cast<double>(n);
  }
  return sum / cm.classes();
}

double balanced_accuracy_present(const ConfusionMatrix& cm) {
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < cm.classes(); ++c) {
    const auto n = cm.true_count(c);
    if (n == 0) continue;
    sum += static_cast<double>(cm.at(c, c)) / static_cast<double>(n);
    ++present;
  }
  if (present == 0) throw MetricError(0, "balanced accuracy undefined: empty confusion matrix");
  return sum / present;
}

double f1_score(const ConfusionMatrix& cm, F1Average average) {
  double sum = 0.0;
  double weight_sum = 0.0;
  for (int c = 0; c < cm.classes(); ++c) {
    const auto tp = static_cast<double>(cm.at(c, c));
    const auto fp = static_cast<double>(cm.predicted_count(c)) - tp;
    const auto fn = static_cast<double>(cm.true_count(c)) - tp;
    const double denom = 2.0 * tp + fp + fn;
    const double f1 = denom > 0.0 ? 2.0 * tp / denom : 0.0;
    const double w = average == F1Average::Macro ? 1.0 : static_cast<double>(cm.true_count(c));
    sum += w * f1;
    weight_sum += w;
  }
  return weight_sum > 0.0 ? sum / weight_sum : 0.0;
}

int argmax_predict(std::span<const double> probabilities) {
  if (probabilities.empty()) throw ContractError("argmax of an empty vector");
  int best = 0;
  for (std::size_t i = 1; i < probabilities.size(); ++i) {
    if (probabilities[i] > probabilities[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

}  // namespace grasp
