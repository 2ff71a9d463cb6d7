// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Which magnifications did the model consult for a slide?
//
// The predicted-class logit is differentiated with respect to the input node
// features. The energy of magnification k is the summed squared L2 norm of
// those gradients over its nodes; shares are energies over their total. A
// magnification is "consulted" when its share reaches the threshold tau.
// This gradient-energy definition is a reconstruction in the Grad-CAM
// tradition, not a published formula.

#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "grasp/data_io.hpp"
#include "grasp/gcn.hpp"
#include "grasp/graph.hpp"
#include "grasp/trainer.hpp"

namespace grasp {

struct GradientEnergy {
  std::array<double, 3> energy{};  // M1, M2, M3
  int predicted = 0;
};

/// Needs a full (unmasked) graph.
GradientEnergy gradient_energy(const PyramidGraph& graph, const ModelParams& params);

/// Energies normalized to sum 1. An all-zero input maps to equal thirds.
std::array<double, 3> energy_shares(const std::array<double, 3>& energy);

/// {k : share_k >= tau}, or the argmax singleton if that is empty. 0 < tau <= 1/2.
MagnificationMask consulted_set(const std::array<double, 3>& shares, double tau);

struct ConsultationRecord {
  std::string slide_id;
  int true_label = 0;
  int predicted = 0;
  std::array<double, 3> energies{};
  std::array<double, 3> shares{};
  MagnificationMask consulted;
  bool degenerate = false;  // zero Jacobian; reported as all three consulted
};

inline constexpr double kDefaultConsultTau = 0.25;

ConsultationRecord consult(const PyramidGraph& graph, const ModelParams& params, double tau = kDefaultConsultTau);

std::vector<ConsultationRecord> consult_all(const Dataset& dataset, const ModelParams& params,
                                            std::span<const int> indices = {}, double tau = kDefaultConsultTau,
                                            int jobs = 1);

/// The seven nonempty subsets of {5x, 10x, 20x}, indexed by mask bits - 1.
inline constexpr int kConsultCategories = 7;

struct ConsultationHistogram {
  std::vector<std::string> class_names;
  std::vector<int> slides_per_class;
  std::vector<std::array<double, kConsultCategories>> fractions;  // per true class

  nlohmann::ordered_json to_json() const;
};

ConsultationHistogram consultation_histogram(std::span<const ConsultationRecord> records,
                                             std::vector<std::string> class_names);
ConsultationHistogram consultation_histogram(const Dataset& dataset, const ModelParams& params,
                                             double tau = kDefaultConsultTau);

/// slide_id,true_label,predicted,e_5x,e_10x,e_20x,share_5x,share_10x,share_20x,consulted,degenerate
std::string consultation_csv(std::span<const ConsultationRecord> records);

/// Evaluation with one magnification's input features set to zero.
Evaluation occlusion_evaluation(const ModelParams& params, const Dataset& dataset, Magnification mag,
                                std::span<const int> indices = {});

}  // namespace grasp
