// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "grasp/errors.hpp"
#include "grasp/metrics.hpp"

using namespace grasp;

namespace {

ConfusionMatrix random_cm(std::mt19937_64& rng, int c) {
  ConfusionMatrix cm(c);
  for (int i = 0; i < c; ++i) {
    cm.add(i, i, 1);  // every class present
    for (int j = 0; j < c; ++j) cm.add(i, j, static_cast<std::int64_t>(rng() % 9));
  }
  return cm;
}

}  // namespace

TEST_CASE("worked confusion matrix") {
  const auto cm = ConfusionMatrix::from_rows({{8, 2}, {4, 6}});
  CHECK(balanced_accuracy(cm) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(macro_f1(cm) == doctest::Approx((16.0 / 22.0 + 12.0 / 18.0) / 2).epsilon(1e-15));
  CHECK(macro_f1(cm) == doctest::Approx(0.6970).epsilon(1e-4));
  CHECK(f1_score(cm, F1Average::Weighted) == doctest::Approx(0.6970).epsilon(1e-4));  // equal supports
  CHECK(cm.total() == 20);
  CHECK(cm.predicted_count(0) == 12);
}

TEST_CASE("trivial cases") {
  CHECK(balanced_accuracy(ConfusionMatrix::from_rows({{5, 0}, {0, 3}})) == 1.0);
  CHECK(macro_f1(ConfusionMatrix::from_rows({{5, 0}, {0, 3}})) == 1.0);
  CHECK(macro_f1(ConfusionMatrix::from_rows({{0, 5}, {3, 0}})) == 0.0);
  ConfusionMatrix constant(5);
  const std::int64_t sizes[] = {410, 167, 237, 69, 65};
  for (int c = 0; c < 5; ++c) constant.add(c, 2, sizes[c]);
  CHECK(balanced_accuracy(constant) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_THROWS_AS(balanced_accuracy(ConfusionMatrix::from_rows({{1, 0}, {0, 0}})), MetricError);
  CHECK_THROWS_AS(ConfusionMatrix::from_rows({{1, 0}, {0}}), ShapeError);
  CHECK(balanced_accuracy_present(ConfusionMatrix::from_rows({{3, 1, 0}, {0, 0, 0}, {1, 0, 1}})) ==
        doctest::Approx((0.75 + 0.5) / 2).epsilon(1e-15));
  CHECK_THROWS_AS(balanced_accuracy_present(ConfusionMatrix(2)), MetricError);
}

TEST_CASE("argmax ties go to the lowest index") {
  CHECK(argmax_predict(std::vector<double>{0.1, 0.7, 0.2}) == 1);
  CHECK(argmax_predict(std::vector<double>{0.5, 0.5}) == 0);
  CHECK(argmax_predict(std::vector<double>(5, 0.2)) == 0);
}

TEST_CASE("summary uses population std") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto s = summarize(v);
  CHECK(s.mean == 2.5);
  CHECK(s.std == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
  CHECK(summarize(std::vector<double>{0.9}).std == 0.0);
}

TEST_CASE("metric properties on random matrices") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    const int c = 2 + static_cast<int>(rng() % 5);
    const auto cm = random_cm(rng, c);
    const double ba = balanced_accuracy(cm);
    const double f1 = macro_f1(cm);
    const double wf1 = f1_score(cm, F1Average::Weighted);
    REQUIRE(ba >= 0.0);
    REQUIRE(ba <= 1.0);
    REQUIRE(f1 >= 0.0);
    REQUIRE(f1 <= 1.0);
    REQUIRE(wf1 >= 0.0);
    REQUIRE(wf1 <= 1.0);

    // Duplicating one class's samples keeps every recall.
    const int dup = static_cast<int>(rng() % static_cast<unsigned>(c));
    auto doubled = cm;
    for (int j = 0; j < c; ++j) doubled.add(dup, j, cm.at(dup, j));
    REQUIRE(balanced_accuracy(doubled) == doctest::Approx(ba).epsilon(1e-14));

    // Relabelling classes consistently on both axes.
    std::vector<int> pi(static_cast<std::size_t>(c));
    std::iota(pi.begin(), pi.end(), 0);
    std::shuffle(pi.begin(), pi.end(), rng);
    ConfusionMatrix moved(c);
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < c; ++j) moved.add(pi[static_cast<std::size_t>(i)], pi[static_cast<std::size_t>(j)], cm.at(i, j));
    REQUIRE(balanced_accuracy(moved) == doctest::Approx(ba).epsilon(1e-14));
    REQUIRE(macro_f1(moved) == doctest::Approx(f1).epsilon(1e-14));
  }
}
