// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "grasp/errors.hpp"
#include "grasp/graph.hpp"
#include "support.hpp"

using namespace grasp;
using grasp::testing::enumerate_edges;
using grasp::testing::random_pyramid;

TEST_CASE("edge count closed form for m in [1, 512]") {
  for (int m = 1; m <= 512; ++m) {
    Topology t(m);
    const std::int64_t expected = static_cast<std::int64_t>(m) * (3 * m + 1) / 2;
    REQUIRE(t.num_edges() == expected);
    if (m <= 48) REQUIRE(static_cast<std::int64_t>(t.explicit_edges().size()) == expected);
  }
}

TEST_CASE("explicit edges match pairwise enumeration") {
  for (int m : {1, 2, 3, 5, 9, 17}) {
    const auto edges = Topology(m).explicit_edges();
    const auto oracle = enumerate_edges(m);
    CHECK(std::vector<std::pair<int, int>>(oracle.begin(), oracle.end()) == edges);
    CHECK(std::is_sorted(edges.begin(), edges.end()));
  }
  CHECK(Topology(1).explicit_edges() == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});
  const auto m2 = Topology(2).explicit_edges();
  CHECK(m2 == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 5}, {4, 5}});
  CHECK(Topology(4).explicit_edges().size() == 26);
}

TEST_CASE("degree table") {
  CHECK(Topology(3).degrees() == std::vector<int>{3, 3, 3, 4, 4, 4, 3, 3, 3});
  for (int m = 1; m <= 128; ++m) {
    Topology t(m);
    std::vector<int> counted(static_cast<std::size_t>(t.num_nodes()), 0);
    for (auto [a, b] : t.explicit_edges()) {
      ++counted[static_cast<std::size_t>(a)];
      ++counted[static_cast<std::size_t>(b)];
    }
    REQUIRE(counted == t.degrees());
    REQUIRE(t.block_degree(Magnification::M1) == m);
    REQUIRE(t.block_degree(Magnification::M2) == m + 1);
    REQUIRE(t.block_degree(Magnification::M3) == m);
  }
}

TEST_CASE("diameter") {
  CHECK(Topology(1).diameter() == 2);
  for (int m = 2; m <= 64; ++m) REQUIRE(Topology(m).diameter() == 3);
}

TEST_CASE("triangle and self-loop options") {
  GraphOptions tri;
  tri.triplet = TripletLink::Triangle;
  for (int m : {1, 4, 7}) {
    Topology t(m, tri);
    const auto oracle = enumerate_edges(m, true);
    CHECK(t.explicit_edges().size() == oracle.size());
    CHECK(t.block_degree(Magnification::M1) == m + 1);
  }
  GraphOptions loops;
  loops.self_loops = true;
  Topology t(5, loops);
  CHECK(t.num_edges() == 5 * 16 / 2);
  CHECK(t.block_degree(Magnification::M2) == 7);
  CHECK(t.adjacent(3, 3));
  CHECK_FALSE(Topology(5).adjacent(3, 3));
}

TEST_CASE("normalization coefficients") {
  const auto t4 = normalization_table(4);
  CHECK(t4(0, 1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(t4(0, 4) == doctest::Approx(1.0 / std::sqrt(20.0)).epsilon(1e-12));
  CHECK(t4(0, 4) == doctest::Approx(0.2236).epsilon(1e-4));
  const auto t1 = normalization_table(1);
  CHECK(t1(0, 1) == doctest::Approx(0.7071).epsilon(1e-4));
  CHECK_THROWS_AS(t4(0, 8), ContractError);  // M1 and M3 are not chained
  CHECK_THROWS_AS(t4(0, 5), ContractError);  // different triplet across blocks
  CHECK_THROWS_AS(t4(0, 0), ContractError);

  GraphOptions uni;
  uni.norm = NormMode::Uniform;
  const auto tu = normalization_table(4, uni);
  CHECK(tu(0, 1) == 0.25);
  CHECK(tu(0, 4) == 0.25);
}

TEST_CASE("aggregate matches dense normalized adjacency") {
  std::mt19937_64 rng(11);
  for (int m : {1, 2, 3, 8, 21}) {
    for (int variant = 0; variant < 4; ++variant) {
      GraphOptions o;
      o.triplet = variant & 1 ? TripletLink::Triangle : TripletLink::Chain;
      o.self_loops = variant & 2;
      Topology t(m, o);
      Matrix x = Matrix::Random(t.num_nodes(), 5);
      const Matrix a = t.dense_normalized_adjacency();
      CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
      // Dense adjacency from the pair enumeration, independent of Topology.
      Matrix oracle = Matrix::Zero(t.num_nodes(), t.num_nodes());
      for (auto [i, j] : enumerate_edges(m, o.triplet == TripletLink::Triangle)) {
        const double c = 1.0 / std::sqrt(static_cast<double>(t.degree(i)) * t.degree(j));
        oracle(i, j) = oracle(j, i) = c;
      }
      if (o.self_loops)
        for (int i = 0; i < t.num_nodes(); ++i) oracle(i, i) = 1.0 / t.degree(i);
      CHECK((a - oracle).cwiseAbs().maxCoeff() < 1e-15);
      CHECK((t.aggregate(x) - oracle * x).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("magnification masks") {
  CHECK(MagnificationMask::parse("all") == MagnificationMask::all());
  CHECK(MagnificationMask::parse("M1+M3").bits() == 0b101);
  CHECK(MagnificationMask::parse("5x&20x").bits() == 0b101);
  CHECK(MagnificationMask::parse("m2").name() == "M2");
  CHECK(MagnificationMask::from_bits(0b011).zoom_name() == "5x&10x");
  CHECK_THROWS(MagnificationMask::parse("M4"));
  CHECK_THROWS(MagnificationMask::from_bits(0));

  GraphOptions only1;
  only1.mask = MagnificationMask::only(Magnification::M1);
  Topology t(4, only1);
  CHECK(t.num_nodes() == 4);
  CHECK(t.num_edges() == 6);
  CHECK(t.diameter() == 1);
  CHECK(t.node_index(Magnification::M2, 0) == -1);

  GraphOptions m13;
  m13.mask = MagnificationMask::parse("M1+M3");
  Topology t13(3, m13);
  CHECK(t13.num_edges() == 6);  // two cliques, no chain between M1 and M3
  CHECK(t13.diameter() == -1);
}

TEST_CASE("build_graph is pure and validates") {
  std::mt19937_64 rng(3);
  auto pyr = random_pyramid(6, 4, rng);
  const auto g1 = build_graph(pyr);
  const auto g2 = build_graph(pyr);
  CHECK(g1.node_feats == g2.node_feats);
  CHECK(g1.topology == g2.topology);
  CHECK(g1.num_nodes() == 18);
  CHECK(g1.node_feats(7, 2) == static_cast<double>(pyr.blocks[1](1, 2)));

  auto bad = pyr;
  bad.blocks[2].resize(5, 4);
  CHECK_THROWS_AS(build_graph(bad), ShapeError);
  auto nan = pyr;
  nan.blocks[0](0, 0) = std::nanf("");
  CHECK_THROWS_AS(build_graph(nan), ValidationError);
}

TEST_CASE("triplet permutation gives an isomorphic graph") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 12);
    std::vector<int> pi(static_cast<std::size_t>(m));
    std::iota(pi.begin(), pi.end(), 0);
    std::shuffle(pi.begin(), pi.end(), rng);
    Topology t(m);
    auto relabel = [&](int node) { return (node / m) * m + pi[static_cast<std::size_t>(node % m)]; };
    std::vector<std::pair<int, int>> moved;
    for (auto [a, b] : t.explicit_edges()) {
      int x = relabel(a), y = relabel(b);
      moved.emplace_back(std::min(x, y), std::max(x, y));
    }
    std::sort(moved.begin(), moved.end());
    REQUIRE(moved == t.explicit_edges());
  }
}
