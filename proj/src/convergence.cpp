// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "grasp/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "grasp/errors.hpp"
#include "grasp/parallel.hpp"

namespace grasp {

SpreadMeasure measure_spread(const PyramidGraph& graph, const ModelParams& params) {
  if (graph.topology.options().mask != MagnificationMask::all()) {
    throw ContractError("measure_spread needs all three magnifications");
  }
  const ForwardTrace trace = forward(graph, params);
  const Matrix& last = trace.layers.back().act;
  const int m = graph.m();

  SpreadMeasure out;
  out.readout = trace.readout;
  for (auto mag : kMagnifications) {
    const auto k = static_cast<std::size_t>(mag);
    auto block = last.middleRows(graph.topology.node_index(mag, 0), m);
    out.centers[k] = block.colwise().mean();
    double worst = 0.0;
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        const double dist = (block.row(i) - block.row(j)).norm();
        worst = std::max(worst, dist);
        total += dist;
      }
    }
    out.max_spread[k] = worst;
    out.mean_spread[k] = m > 1 ? total / (0.5 * m * (m - 1)) : 0.0;
  }
  return out;
}

ModelParams random_bounded_params(const ModelShape& shape, double weight_scale, std::mt19937_64& rng) {
  ModelParams p = ModelParams::zeros(shape);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& t : p.tensors()) {
    double norm2 = 0.0;
    for (double& v : t.values) {
      v = normal(rng);
      norm2 += v * v;
    }
    const double scale = norm2 > 0.0 ? weight_scale / std::sqrt(norm2) : 0.0;
    for (double& v : t.values) v *= scale;
  }
  return p;
}

EmbeddingPyramid random_bounded_pyramid(int m, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> radius(0.0, 1.0);
  EmbeddingPyramid pyr;
  pyr.slide_id = "bounded";
  pyr.group_id = "bounded";
  for (auto& block : pyr.blocks) {
    block.resize(m, d);
    for (int i = 0; i < m; ++i) {
      RowVector v(d);
      for (int k = 0; k < d; ++k) v(k) = normal(rng);
      const double n = v.norm();
      if (n > 0.0) v *= radius(rng) / n;
      block.row(i) = v.cast<float>();
    }
  }
  return pyr;
}

namespace {

std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("spearman: length mismatch");
  if (x.size() < 2) return 0.0;
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ConvergenceReport convergence_sweep(const ConvergenceConfig& config) {
  if (config.m_list.empty() || config.seeds.empty()) {
    throw ConfigError("convergence sweep needs at least one m and one seed");
  }
  if (!(config.weight_scale >= 0.0)) throw ConfigError("weight scale must be >= 0");
  if (config.graph.mask != MagnificationMask::all()) {
    throw ConfigError("convergence sweep needs all three magnifications");
  }
  ModelShape shape;
  shape.input_dim = config.d;
  shape.gcn_widths = config.gcn_widths;
  shape.classes = 2;
  shape.validate();

  ConvergenceReport report;
  report.m_list = config.m_list;
  report.weight_scale = config.weight_scale;
  const std::size_t n_seeds = config.seeds.size();
  report.points.resize(config.m_list.size() * n_seeds);

  parallel_for(report.points.size(), config.jobs, [&](std::size_t cell) {
    const int m = config.m_list[cell / n_seeds];
    const auto seed = config.seeds[cell % n_seeds];
    // Weights depend on the seed only, so each seed compares one network across m.
    std::mt19937_64 weight_rng(seed);
    const ModelParams params = random_bounded_params(shape, config.weight_scale, weight_rng);
    std::mt19937_64 input_rng(seed * 1000003ull + static_cast<std::uint64_t>(m));
    const EmbeddingPyramid pyr = random_bounded_pyramid(m, config.d, input_rng);
    report.points[cell] = {m, seed, measure_spread(build_graph(pyr, config.graph), params)};
  });

  std::vector<double> ms(config.m_list.begin(), config.m_list.end());
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t mi = 0; mi < config.m_list.size(); ++mi) {
      std::vector<double> spreads;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        spreads.push_back(report.points[mi * n_seeds + s].measure.max_spread[k]);
      }
      report.median_spread[k].push_back(median(std::move(spreads)));
    }
    report.trend[k] = spearman(ms, report.median_spread[k]);
  }
  return report;
}

std::string ConvergenceReport::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  const double worst = *std::max_element(trend.begin(), trend.end());
  out << "m,seed,spread_m1,spread_m2,spread_m3,trend\n";
  for (const auto& p : points) {
    out << p.m << ',' << p.seed << ',' << p.measure.max_spread[0] << ',' << p.measure.max_spread[1] << ','
        << p.measure.max_spread[2] << ',' << worst << '\n';
  }
  return out.str();
}

}  // namespace grasp
