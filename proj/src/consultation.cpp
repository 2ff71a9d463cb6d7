// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "grasp/consultation.hpp"

#include <numeric>
#include <sstream>

#include "grasp/errors.hpp"
#include "grasp/parallel.hpp"

namespace grasp {

GradientEnergy gradient_energy(const PyramidGraph& graph, const ModelParams& params) {
  if (graph.topology.options().mask != MagnificationMask::all()) {
    throw ContractError("gradient energy needs all three magnifications");
  }
  const ForwardTrace trace = forward(graph, params);
  GradientEnergy out;
  out.predicted = argmax_predict(std::span<const double>(trace.probs.data(), static_cast<std::size_t>(trace.probs.size())));
  RowVector onehot = RowVector::Zero(params.shape.classes);
  onehot(out.predicted) = 1.0;
  const Gradients g = backward_from_logits(trace, graph.topology, params, onehot, true);
  for (auto mag : kMagnifications) {
    out.energy[static_cast<std::size_t>(mag)] =
        g.input.middleRows(graph.topology.node_index(mag, 0), graph.m()).squaredNorm();
  }
  return out;
}

std::array<double, 3> energy_shares(const std::array<double, 3>& energy) {
  const double total = energy[0] + energy[1] + energy[2];
  if (!(total > 0.0)) return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  return {energy[0] / total, energy[1] / total, energy[2] / total};
}

MagnificationMask consulted_set(const std::array<double, 3>& shares, double tau) {
  if (!(tau > 0.0 && tau <= 0.5)) throw ConfigError("consultation threshold must be in (0, 1/2]");
  unsigned bits = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    if (shares[k] >= tau) bits |= 1u << k;
  }
  if (bits == 0) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < 3; ++k) {
      if (shares[k] > shares[best]) best = k;
    }
    bits = 1u << best;
  }
  return MagnificationMask::from_bits(bits);
}

ConsultationRecord consult(const PyramidGraph& graph, const ModelParams& params, double tau) {
  if (!(tau > 0.0 && tau <= 0.5)) throw ConfigError("consultation threshold must be in (0, 1/2]");
  const GradientEnergy e = gradient_energy(graph, params);
  ConsultationRecord r;
  r.slide_id = graph.slide_id;
  r.true_label = graph.label;
  r.predicted = e.predicted;
  r.energies = e.energy;
  r.shares = energy_shares(e.energy);
  r.degenerate = !(e.energy[0] + e.energy[1] + e.energy[2] > 0.0);
  r.consulted = r.degenerate ? MagnificationMask::all() : consulted_set(r.shares, tau);
  return r;
}

std::vector<ConsultationRecord> consult_all(const Dataset& dataset, const ModelParams& params,
                                            std::span<const int> indices, double tau, int jobs) {
  std::vector<int> idx(indices.begin(), indices.end());
  if (idx.empty()) {
    idx.resize(dataset.graphs.size());
    std::iota(idx.begin(), idx.end(), 0);
  }
  std::vector<ConsultationRecord> out(idx.size());
  parallel_for(idx.size(), jobs, [&](std::size_t i) {
    out[i] = consult(dataset.graphs.at(static_cast<std::size_t>(idx[i])), params, tau);
  });
  return out;
}

ConsultationHistogram consultation_histogram(std::span<const ConsultationRecord> records,
                                             std::vector<std::string> class_names) {
  ConsultationHistogram h;
  const auto classes = class_names.size();
  h.class_names = std::move(class_names);
  h.slides_per_class.assign(classes, 0);
  h.fractions.assign(classes, {});
  for (const auto& r : records) {
    if (r.true_label < 0 || static_cast<std::size_t>(r.true_label) >= classes) {
      throw ValidationError("consultation record '" + r.slide_id + "' has an unknown class");
    }
    const auto c = static_cast<std::size_t>(r.true_label);
    ++h.slides_per_class[c];
    h.fractions[c][r.consulted.bits() - 1] += 1.0;
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (h.slides_per_class[c] == 0) continue;
    for (double& f : h.fractions[c]) f /= h.slides_per_class[c];
  }
  return h;
}

ConsultationHistogram consultation_histogram(const Dataset& dataset, const ModelParams& params, double tau) {
  const auto records = consult_all(dataset, params, {}, tau);
  return consultation_histogram(records, dataset.class_names);
}

nlohmann::ordered_json ConsultationHistogram::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    nlohmann::ordered_json cj;
    cj["slides"] = slides_per_class[c];
    nlohmann::ordered_json cats = nlohmann::ordered_json::object();
    for (unsigned bits = 1; bits <= kConsultCategories; ++bits) {
      cats[MagnificationMask::from_bits(bits).zoom_name()] = fractions[c][bits - 1];
    }
    cj["fractions"] = std::move(cats);
    j[class_names[c]] = std::move(cj);
  }
  return j;
}

std::string consultation_csv(std::span<const ConsultationRecord> records) {
  std::ostringstream out;
  out.precision(17);
  out << "slide_id,true_label,predicted,e_5x,e_10x,e_20x,share_5x,share_10x,share_20x,consulted,degenerate\n";
  for (const auto& r : records) {
    out << r.slide_id << ',' << r.true_label << ',' << r.predicted;
    for (double e : r.energies) out << ',' << e;
    for (double s : r.shares) out << ',' << s;
    out << ',' << r.consulted.zoom_name() << ',' << (r.degenerate ? 1 : 0) << '\n';
  }
  return out.str();
}

Evaluation occlusion_evaluation(const ModelParams& params, const Dataset& dataset, Magnification mag,
                                std::span<const int> indices) {
  Dataset occluded;
  occluded.class_names = dataset.class_names;
  occluded.graphs = dataset.graphs;
  for (auto& g : occluded.graphs) {
    const int row0 = g.topology.node_index(mag, 0);
    if (row0 >= 0) g.node_feats.middleRows(row0, g.m()).setZero();
  }
  return evaluate(params, occluded, indices);
}

}  // namespace grasp
