// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "grasp/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>

#include "grasp/errors.hpp"

namespace grasp {

std::string_view zoom_label(Magnification mag) {
  switch (mag) {
    case Magnification::M1: return "5x";
    case Magnification::M2: return "10x";
    case Magnification::M3: return "20x";
  }
  return "?";
}

std::string_view magnification_name(Magnification mag) {
  switch (mag) {
    case Magnification::M1: return "M1";
    case Magnification::M2: return "M2";
    case Magnification::M3: return "M3";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// MagnificationMask

MagnificationMask MagnificationMask::from_bits(unsigned bits) {
  if (bits == 0 || bits > 0b111) {
    throw ConfigError("magnification mask must be a nonempty subset of {M1,M2,M3}");
  }
  return MagnificationMask(bits);
}

MagnificationMask MagnificationMask::parse(std::string_view text) {
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "all" || lower == "full" || lower == "grasp") return all();

  unsigned bits = 0;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    if (token == "m1" || token == "5x") bits |= 1u;
    else if (token == "m2" || token == "10x") bits |= 2u;
    else if (token == "m3" || token == "20x") bits |= 4u;
    else throw ConfigError("unknown magnification '" + token + "' in mask '" + std::string(text) + "'");
    token.clear();
  };
  for (char c : lower) {
    if (c == '+' || c == '&' || c == ',' || c == ' ') flush();
    else token.push_back(c);
  }
  flush();
  return from_bits(bits);
}

int MagnificationMask::count() const {
  return static_cast<int>((bits_ & 1u) + ((bits_ >> 1) & 1u) + ((bits_ >> 2) & 1u));
}

std::vector<Magnification> MagnificationMask::kept() const {
  std::vector<Magnification> out;
  for (auto mag : kMagnifications) {
    if (contains(mag)) out.push_back(mag);
  }
  return out;
}

int MagnificationMask::block_index(Magnification mag) const {
  if (!contains(mag)) return -1;
  int idx = 0;
  for (auto other : kMagnifications) {
    if (other == mag) return idx;
    if (contains(other)) ++idx;
  }
  return -1;
}

std::string MagnificationMask::name() const {
  std::string out;
  for (auto mag : kept()) {
    if (!out.empty()) out += '&';
    out += magnification_name(mag);
  }
  return out;
}

std::string MagnificationMask::zoom_name() const {
  std::string out;
  for (auto mag : kept()) {
    if (!out.empty()) out += '&';
    out += zoom_label(mag);
  }
  return out;
}

// ---------------------------------------------------------------------------
// EmbeddingPyramid

void EmbeddingPyramid::validate() const {
  const auto rows = blocks[0].rows();
  const auto cols = blocks[0].cols();
  for (int k = 1; k < 3; ++k) {
    if (blocks[k].rows() != rows || blocks[k].cols() != cols) {
      throw ShapeError("pyramid '" + slide_id + "': block " + std::to_string(k + 1) + " is " +
                       std::to_string(blocks[k].rows()) + "x" + std::to_string(blocks[k].cols()) +
                       ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  if (rows < 1 || cols < 1) {
    throw ValidationError("pyramid '" + slide_id + "': m and d must be positive");
  }
  for (int k = 0; k < 3; ++k) {
    if (!blocks[k].allFinite()) {
      throw ValidationError("pyramid '" + slide_id + "': non-finite feature in block M" +
                            std::to_string(k + 1));
    }
  }
  if (label < 0) throw ValidationError("pyramid '" + slide_id + "': negative label");
}

// ---------------------------------------------------------------------------
// Topology

Topology::Topology(int m, GraphOptions options) : m_(m), options_(options) {
  if (m < 1) throw ValidationError("graph needs at least one triplet");
}

std::int64_t Topology::num_edges() const {
  const std::int64_t m = m_;
  std::int64_t edges = num_blocks() * (m * (m - 1) / 2);
  if (linked(Magnification::M1, Magnification::M2)) edges += m;
  if (linked(Magnification::M2, Magnification::M3)) edges += m;
  if (linked(Magnification::M1, Magnification::M3)) edges += m;
  return edges;
}

Magnification Topology::magnification_of(int node) const {
  return options_.mask.kept()[static_cast<std::size_t>(node / m_)];
}

int Topology::node_index(Magnification mag, int triplet) const {
  const int block = options_.mask.block_index(mag);
  return block < 0 ? -1 : block * m_ + triplet;
}

bool Topology::linked(Magnification a, Magnification b) const {
  if (a == b || !options_.mask.contains(a) || !options_.mask.contains(b)) return false;
  const int gap = std::abs(static_cast<int>(a) - static_cast<int>(b));
  return gap == 1 || options_.triplet == TripletLink::Triangle;
}

int Topology::block_degree(Magnification mag) const {
  int deg = m_ - 1;
  for (auto other : kMagnifications) {
    if (linked(mag, other)) ++deg;
  }
  if (options_.self_loops) ++deg;
  return deg;
}

std::vector<int> Topology::degrees() const {
  std::vector<int> out(static_cast<std::size_t>(num_nodes()));
  for (int i = 0; i < num_nodes(); ++i) out[static_cast<std::size_t>(i)] = degree(i);
  return out;
}

bool Topology::adjacent(int a, int b) const {
  if (a < 0 || b < 0 || a >= num_nodes() || b >= num_nodes()) return false;
  if (a == b) return options_.self_loops;
  const auto ma = magnification_of(a);
  const auto mb = magnification_of(b);
  if (ma == mb) return true;
  return linked(ma, mb) && triplet_of(a) == triplet_of(b);
}

std::vector<std::pair<int, int>> Topology::explicit_edges() const {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(num_edges()));
  for (int block = 0; block < num_blocks(); ++block) {
    const int base = block * m_;
    for (int i = 0; i < m_; ++i) {
      for (int j = i + 1; j < m_; ++j) edges.emplace_back(base + i, base + j);
    }
  }
  for (auto a : kMagnifications) {
    for (auto b : kMagnifications) {
      if (static_cast<int>(a) >= static_cast<int>(b) || !linked(a, b)) continue;
      for (int i = 0; i < m_; ++i) edges.emplace_back(node_index(a, i), node_index(b, i));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

int Topology::diameter() const {
  const int n = num_nodes();
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (auto [a, b] : explicit_edges()) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  int diam = 0;
  std::vector<int> dist(static_cast<std::size_t>(n));
  std::deque<int> queue;
  for (int src = 0; src < n; ++src) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[static_cast<std::size_t>(src)] = 0;
    queue.assign(1, src);
    int reached = 1;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : adj[static_cast<std::size_t>(u)]) {
        if (dist[static_cast<std::size_t>(v)] >= 0) continue;
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        diam = std::max(diam, dist[static_cast<std::size_t>(v)]);
        ++reached;
        queue.push_back(v);
      }
    }
    if (reached != n) return -1;
  }
  return diam;
}

Matrix Topology::aggregate(const Matrix& x) const {
  if (x.rows() != num_nodes()) {
    throw ShapeError("aggregate: feature matrix has " + std::to_string(x.rows()) +
                     " rows, graph has " + std::to_string(num_nodes()) + " nodes");
  }
  const NormalizationTable norm(*this);
  Matrix out(x.rows(), x.cols());
  for (auto mag : options_.mask.kept()) {
    const int row0 = node_index(mag, 0);
    auto own = x.middleRows(row0, m_);
    auto dst = out.middleRows(row0, m_);
    dst.setZero();

    const bool clique = m_ > 1;
    if (clique || options_.self_loops) {
      const double c = norm.between(mag, mag);
      if (clique) {
        // Each node receives the block total minus its own row.
        const RowVector total = own.colwise().sum();
        dst.rowwise() += c * total;
        if (!options_.self_loops) dst.noalias() -= c * own;
      } else {
        dst.noalias() += c * own;
      }
    }
    for (auto other : kMagnifications) {
      if (!linked(mag, other)) continue;
      dst.noalias() += norm.between(mag, other) * x.middleRows(node_index(other, 0), m_);
    }
  }
  return out;
}

Matrix Topology::dense_normalized_adjacency() const {
  const NormalizationTable norm(*this);
  Matrix adj = Matrix::Zero(num_nodes(), num_nodes());
  for (auto [a, b] : explicit_edges()) {
    const double c = norm(a, b);
    adj(a, b) = c;
    adj(b, a) = c;
  }
  if (options_.self_loops) {
    for (int i = 0; i < num_nodes(); ++i) adj(i, i) = norm(i, i);
  }
  return adj;
}

// ---------------------------------------------------------------------------
// NormalizationTable

NormalizationTable::NormalizationTable(const Topology& topology) : topology_(topology) {
  for (auto a : kMagnifications) {
    for (auto b : kMagnifications) {
      const bool edge = (a == b) ? (topology.m() > 1 || topology.options().self_loops)
                                 : topology.linked(a, b);
      if (!edge || !topology.options().mask.contains(a)) continue;
      double c = 0.0;
      if (topology.options().norm == NormMode::Uniform) {
        c = 1.0 / topology.m();
      } else {
        c = 1.0 / std::sqrt(static_cast<double>(topology.block_degree(a)) *
                            static_cast<double>(topology.block_degree(b)));
      }
      table_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = c;
    }
  }
}

double NormalizationTable::operator()(int i, int j) const {
  if (!topology_.adjacent(i, j)) {
    throw ContractError("normalization coefficient requested for non-adjacent nodes " +
                        std::to_string(i) + " and " + std::to_string(j));
  }
  return between(topology_.magnification_of(i), topology_.magnification_of(j));
}

double NormalizationTable::between(Magnification a, Magnification b) const {
  return table_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
}

NormalizationTable normalization_table(int m, const GraphOptions& options) {
  return NormalizationTable(Topology(m, options));
}

// ---------------------------------------------------------------------------

PyramidGraph build_graph(const EmbeddingPyramid& pyramid, const GraphOptions& options) {
  pyramid.validate();
  PyramidGraph graph{Topology(pyramid.m(), options), Matrix(), pyramid.label, pyramid.slide_id,
                     pyramid.group_id};
  graph.node_feats.resize(graph.topology.num_nodes(), pyramid.d());
  for (auto mag : options.mask.kept()) {
    graph.node_feats.middleRows(graph.topology.node_index(mag, 0), pyramid.m()) =
        pyramid.block(mag).cast<double>();
  }
  return graph;
}

std::vector<std::pair<int, int>> explicit_edges(const PyramidGraph& graph) {
  return graph.topology.explicit_edges();
}

}  // namespace grasp
