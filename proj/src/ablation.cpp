// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "grasp/ablation.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "grasp/errors.hpp"

namespace grasp {

PyramidGraph drop_triplets(const PyramidGraph& graph, std::span<const int> indices) {
  const int m = graph.m();
  std::vector<char> dropped(static_cast<std::size_t>(m), 0);
  for (int i : indices) {
    if (i < 0 || i >= m) throw ValidationError("drop index " + std::to_string(i) + " outside [0, m)");
    if (dropped[static_cast<std::size_t>(i)]) throw ValidationError("drop index " + std::to_string(i) + " repeated");
    dropped[static_cast<std::size_t>(i)] = 1;
  }
  const int kept = m - static_cast<int>(indices.size());
  if (kept < 1) throw ValidationError("cannot drop every triplet of slide '" + graph.slide_id + "'");

  PyramidGraph out{Topology(kept, graph.topology.options()), Matrix(), graph.label, graph.slide_id,
                   graph.group_id};
  out.node_feats.resize(out.topology.num_nodes(), graph.d());
  for (auto mag : graph.topology.options().mask.kept()) {
    int dst = out.topology.node_index(mag, 0);
    const int src0 = graph.topology.node_index(mag, 0);
    for (int i = 0; i < m; ++i) {
      if (!dropped[static_cast<std::size_t>(i)]) out.node_feats.row(dst++) = graph.node_feats.row(src0 + i);
    }
  }
  return out;
}

PyramidGraph apply_mask(const PyramidGraph& graph, MagnificationMask mask) {
  const auto& opts = graph.topology.options();
  if (opts.mask != MagnificationMask::all()) throw ContractError("apply_mask expects an unmasked graph");
  GraphOptions masked = opts;
  masked.mask = mask;
  PyramidGraph out{Topology(graph.m(), masked), Matrix(), graph.label, graph.slide_id, graph.group_id};
  out.node_feats.resize(out.topology.num_nodes(), graph.d());
  for (auto mag : mask.kept()) {
    out.node_feats.middleRows(out.topology.node_index(mag, 0), graph.m()) =
        graph.node_feats.middleRows(graph.topology.node_index(mag, 0), graph.m());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo

std::vector<int> MonteCarloPlan::resolved_counts() const {
  if (!full_grid) return counts;
  std::vector<int> out;
  for (int c = min_count; c <= max_count; c += step) out.push_back(c);
  return out;
}

void MonteCarloPlan::validate() const {
  if (base_m < 2) throw ConfigError("monte carlo: base m must be >= 2");
  if (repetitions < 1) throw ConfigError("monte carlo: repetitions must be >= 1");
  if (full_grid && (step < 1 || min_count < 0 || max_count < min_count)) {
    throw ConfigError("monte carlo: bad count grid");
  }
  const auto resolved = resolved_counts();
  if (resolved.empty()) throw ConfigError("monte carlo: no counts");
  for (int c : resolved) {
    if (c < 0 || c >= base_m) {
      throw ConfigError("monte carlo: count " + std::to_string(c) + " must be in [0, m)");
    }
  }
}

std::vector<MonteCarloRow> monte_carlo_test(const Dataset& dataset, const MonteCarloPlan& plan,
                                            const TrainConfig& config) {
  plan.validate();
  config.validate();
  for (const auto& g : dataset.graphs) {
    if (g.m() != plan.base_m) {
      throw ValidationError("monte carlo: slide '" + g.slide_id + "' has m=" + std::to_string(g.m()) +
                            ", plan expects " + std::to_string(plan.base_m));
    }
  }
  const auto counts = plan.resolved_counts();
  const std::size_t n_slides = dataset.graphs.size();

  // Drop sets are drawn in the loop order repetition -> slide -> count from
  // one stream, then the graphs are materialised one (repetition, count) at a time.
  std::vector<std::vector<std::vector<std::vector<int>>>> drops(
      static_cast<std::size_t>(plan.repetitions),
      std::vector<std::vector<std::vector<int>>>(counts.size(), std::vector<std::vector<int>>(n_slides)));
  std::mt19937_64 rng(plan.seed);
  std::vector<int> pool(static_cast<std::size_t>(plan.base_m));
  for (int r = 0; r < plan.repetitions; ++r) {
    for (std::size_t s = 0; s < n_slides; ++s) {
      for (std::size_t c = 0; c < counts.size(); ++c) {
        std::iota(pool.begin(), pool.end(), 0);
        const int count = counts[c];
        // Partial Fisher-Yates: the first `count` entries are a uniform sample.
        for (int i = 0; i < count; ++i) {
          std::uniform_int_distribution<int> pick(i, plan.base_m - 1);
          std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
        }
        auto& out = drops[static_cast<std::size_t>(r)][c][s];
        out.assign(pool.begin(), pool.begin() + count);
        std::sort(out.begin(), out.end());
      }
    }
  }

  std::vector<MonteCarloRow> rows(counts.size());
  std::vector<std::vector<double>> f1s(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    rows[c].count = counts[c];
    rows[c].nodes = 3 * (plan.base_m - counts[c]);
  }
  for (int r = 0; r < plan.repetitions; ++r) {
    for (std::size_t c = 0; c < counts.size(); ++c) {
      Dataset reduced;
      reduced.class_names = dataset.class_names;
      reduced.graphs.reserve(n_slides);
      for (std::size_t s = 0; s < n_slides; ++s) {
        reduced.graphs.push_back(drop_triplets(dataset.graphs[s], drops[static_cast<std::size_t>(r)][c][s]));
      }
      const EvalReport report = cross_validate(reduced, config);
      for (const auto& run : report.runs) {
        rows[c].run_balanced_accuracies.push_back(run.balanced_accuracy);
        f1s[c].push_back(run.f1);
      }
    }
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    rows[c].balanced_accuracy = summarize(rows[c].run_balanced_accuracies);
    rows[c].f1 = summarize(f1s[c]);
  }
  return rows;
}

std::string monte_carlo_csv(std::span<const MonteCarloRow> rows) {
  std::ostringstream out;
  out.precision(17);
  out << "nodes,mean_bacc,std_bacc\n";
  for (const auto& r : rows) out << r.nodes << ',' << r.balanced_accuracy.mean << ',' << r.balanced_accuracy.std << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Magnification test

std::vector<MaskReport> magnification_test(const Dataset& dataset, std::span<const MagnificationMask> masks,
                                           const TrainConfig& config) {
  if (masks.empty()) throw ConfigError("magnification test needs at least one mask");
  std::vector<MagnificationMask> all(masks.begin(), masks.end());
  if (std::find(all.begin(), all.end(), MagnificationMask::all()) == all.end()) {
    all.push_back(MagnificationMask::all());
  }
  std::vector<MaskReport> out;
  for (auto mask : all) {
    Dataset masked;
    masked.class_names = dataset.class_names;
    masked.graphs.reserve(dataset.graphs.size());
    for (const auto& g : dataset.graphs) masked.graphs.push_back(apply_mask(g, mask));
    out.push_back({mask, cross_validate(masked, config)});
  }
  return out;
}

std::string magnification_csv(std::span<const MaskReport> reports) {
  std::ostringstream out;
  out.precision(17);
  out << "mask,bacc,std,f1,std\n";
  for (const auto& r : reports) {
    out << r.mask.name() << ',' << r.report.balanced_accuracy.mean << ',' << r.report.balanced_accuracy.std
        << ',' << r.report.f1.mean << ',' << r.report.f1.std << '\n';
  }
  return out.str();
}

}  // namespace grasp
