// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pyramid graph construction.
//
// A slide contributes m index-aligned triplets (h_i, h'_i, h''_i), one
// embedding per magnification. The graph has one fully connected clique per
// magnification and a chain h_i -- h'_i -- h''_i for every triplet, so the
// whole topology is a function of m alone. Node i in [0, m) is the 5x node of
// triplet i, node m + i the 10x node and node 2m + i the 20x node. When a
// magnification mask drops blocks, the kept blocks stay in that order.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "grasp/types.hpp"

namespace grasp {

enum class Magnification : int { M1 = 0, M2 = 1, M3 = 2 };

inline constexpr std::array<Magnification, 3> kMagnifications = {
    Magnification::M1, Magnification::M2, Magnification::M3};

/// "5x", "10x" or "20x".
std::string_view zoom_label(Magnification mag);

/// "M1", "M2" or "M3".
std::string_view magnification_name(Magnification mag);

/// Nonempty subset of {M1, M2, M3}. Also used for consulted sets.
class MagnificationMask {
 public:
  constexpr MagnificationMask() = default;  // all three

  static MagnificationMask from_bits(unsigned bits);
  static constexpr MagnificationMask all() { return MagnificationMask(); }
  static MagnificationMask only(Magnification mag) { return from_bits(1u << static_cast<int>(mag)); }

  /// Accepts "all", "M2", "M1+M3", "M1&M3", "m1,m2" (case-insensitive).
  static MagnificationMask parse(std::string_view text);

  bool contains(Magnification mag) const { return (bits_ >> static_cast<int>(mag)) & 1u; }
  unsigned bits() const { return bits_; }
  int count() const;
  std::vector<Magnification> kept() const;

  /// Position of `mag` among the kept blocks, or -1.
  int block_index(Magnification mag) const;

  /// "M1&M3" style name.
  std::string name() const;
  /// "5x&20x" style name.
  std::string zoom_name() const;

  friend bool operator==(MagnificationMask, MagnificationMask) = default;

 private:
  constexpr explicit MagnificationMask(unsigned bits) : bits_(bits) {}
  unsigned bits_ = 0b111;
};

enum class TripletLink { Chain, Triangle };
enum class NormMode { Exact, Uniform };

struct GraphOptions {
  TripletLink triplet = TripletLink::Chain;
  bool self_loops = false;
  // Exact: 1/c_ji = 1/sqrt(deg(i) deg(j)). Uniform: every c_ji = m.
  NormMode norm = NormMode::Exact;
  MagnificationMask mask = MagnificationMask::all();

  friend bool operator==(const GraphOptions&, const GraphOptions&) = default;
};

/// One slide's three m x d embedding blocks.
struct EmbeddingPyramid {
  std::string slide_id;
  std::string group_id;
  int label = 0;
  std::array<FloatMatrix, 3> blocks;  // M1, M2, M3

  int m() const { return static_cast<int>(blocks[0].rows()); }
  int d() const { return static_cast<int>(blocks[0].cols()); }
  FloatMatrix& block(Magnification mag) { return blocks[static_cast<int>(mag)]; }
  const FloatMatrix& block(Magnification mag) const { return blocks[static_cast<int>(mag)]; }

  /// Throws ShapeError on mismatched blocks, ValidationError on empty or
  /// non-finite data.
  void validate() const;
};

/// Implicit topology of a (possibly masked) pyramid graph.
class Topology {
 public:
  explicit Topology(int m, GraphOptions options = {});

  int m() const { return m_; }
  const GraphOptions& options() const { return options_; }
  int num_blocks() const { return options_.mask.count(); }
  int num_nodes() const { return m_ * num_blocks(); }

  /// Undirected non-loop edge count.
  std::int64_t num_edges() const;

  Magnification magnification_of(int node) const;
  int triplet_of(int node) const { return node % m_; }
  /// Node index of (mag, triplet), or -1 when `mag` is masked out.
  int node_index(Magnification mag, int triplet) const;

  /// True when the two magnifications are linked triplet-wise.
  bool linked(Magnification a, Magnification b) const;

  /// |N(i)| for every node of magnification `mag` (self-loop included when enabled).
  int block_degree(Magnification mag) const;
  int degree(int node) const { return block_degree(magnification_of(node)); }
  std::vector<int> degrees() const;

  bool adjacent(int a, int b) const;

  /// Sorted, deduplicated (a, b) pairs with a < b. Self-loops are not listed.
  std::vector<std::pair<int, int>> explicit_edges() const;

  /// Longest shortest path by BFS over the explicit edges; -1 if disconnected.
  int diameter() const;

  /// Sum_{j in N(i)} (1/c_ji) x_j for every node i, in O(num_nodes * cols).
  /// The operator is symmetric, so this is also its own adjoint.
  Matrix aggregate(const Matrix& x) const;

  /// Dense num_nodes x num_nodes normalized adjacency (reference path).
  Matrix dense_normalized_adjacency() const;

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  int m_;
  GraphOptions options_;
};

/// Per-edge 1/c_ji lookup. At most one distinct value per pair of magnifications.
class NormalizationTable {
 public:
  explicit NormalizationTable(const Topology& topology);

  /// Coefficient for an adjacent (i, j); ContractError otherwise.
  double operator()(int i, int j) const;

  /// Coefficient between linked blocks (a == b means clique or self-loop).
  double between(Magnification a, Magnification b) const;

 private:
  Topology topology_;
  std::array<std::array<double, 3>, 3> table_{};
};

NormalizationTable normalization_table(int m, const GraphOptions& options = {});

struct PyramidGraph {
  Topology topology;
  Matrix node_feats;  // num_nodes x d
  int label = 0;
  std::string slide_id;
  std::string group_id;

  int m() const { return topology.m(); }
  int d() const { return static_cast<int>(node_feats.cols()); }
  int num_nodes() const { return topology.num_nodes(); }
  std::vector<int> degrees() const { return topology.degrees(); }
};

/// Builds the graph for `pyramid`, validating it first.
PyramidGraph build_graph(const EmbeddingPyramid& pyramid, const GraphOptions& options = {});

std::vector<std::pair<int, int>> explicit_edges(const PyramidGraph& graph);

}  // namespace grasp
