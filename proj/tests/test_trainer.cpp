// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <map>
#include <numeric>
#include <random>
#include <set>

#include "grasp/errors.hpp"
#include "grasp/trainer.hpp"
#include "support.hpp"

using namespace grasp;
using namespace grasp::testing;

namespace {

std::vector<SlideKey> keys_from_sizes(const std::vector<int>& sizes) {
  std::vector<SlideKey> out;
  for (std::size_t g = 0; g < sizes.size(); ++g)
    for (int s = 0; s < sizes[g]; ++s)
      out.push_back({"g" + std::to_string(g) + "_s" + std::to_string(s), "g" + std::to_string(g), 0});
  return out;
}

TrainConfig small_config() {
  TrainConfig c;
  c.gcn_widths = {16, 16, 8};
  c.classifier_hidden = 8;
  c.epochs = 5;
  c.seeds = {0, 1};
  return c;
}

Dataset tiny_dataset(std::uint64_t seed) {
  SynthSpec s;
  s.m = 6;
  s.d = 5;
  s.slides_per_class = 9;
  s.groups_per_class = 6;
  s.seed = seed;
  return make_dataset(generate_synthetic(s), {"class0", "class1"});
}

}  // namespace

TEST_CASE("class weights") {
  std::vector<int> balanced(100);
  for (int i = 0; i < 100; ++i) balanced[static_cast<std::size_t>(i)] = i % 2;
  const auto w2 = make_class_weights(balanced, 2, ClassWeightMode::InverseFrequency);
  CHECK(w2[0] == doctest::Approx(1.0));
  CHECK(w2[1] == doctest::Approx(1.0));

  std::vector<int> labels;
  const int counts[] = {410, 167, 237, 69, 65};
  for (int c = 0; c < 5; ++c) labels.insert(labels.end(), static_cast<std::size_t>(counts[c]), c);
  const auto w = make_class_weights(labels, 5, ClassWeightMode::InverseFrequency);
  // Proportional to 1/n_c with mean 1.
  double inv_sum = 0.0;
  for (int n : counts) inv_sum += 1.0 / n;
  for (int c = 0; c < 5; ++c) CHECK(w[static_cast<std::size_t>(c)] == doctest::Approx(5.0 / (counts[c] * inv_sum)).epsilon(1e-12));
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) / 5 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w[0] == doctest::Approx(0.2868).epsilon(1e-3));
  CHECK(w[4] == doctest::Approx(1.8090).epsilon(1e-3));

  for (double u : make_class_weights(labels, 5, ClassWeightMode::Uniform)) CHECK(u == 1.0);
  CHECK_THROWS_AS(make_class_weights(std::vector<int>{0, 0, 2}, 3, ClassWeightMode::InverseFrequency), ConfigError);
  const std::vector<double> ex{2.0, 0.5};
  CHECK(make_class_weights(balanced, 2, ClassWeightMode::Explicit, ex) == ex);
}

TEST_CASE("group k-fold examples") {
  const auto six = keys_from_sizes({1, 1, 1, 1, 1, 1});
  CHECK(group_kfold(six, 3, 0).fold_sizes() == std::vector<int>{2, 2, 2});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = group_kfold(keys_from_sizes({3, 1, 1, 1}), 2, seed);
    auto sizes = f.fold_sizes();
    CHECK(sizes == std::vector<int>{3, 3});
  }
  const auto a = group_kfold(keys_from_sizes({4, 2, 2, 3, 1, 5, 1}), 3, 9);
  const auto b = group_kfold(keys_from_sizes({4, 2, 2, 3, 1, 5, 1}), 3, 9);
  CHECK(a.fold_of_slide == b.fold_of_slide);
  CHECK_THROWS_AS(group_kfold(keys_from_sizes({1, 1}), 3, 0), ConfigError);
}

TEST_CASE("group integrity under random inputs") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const int groups = 3 + static_cast<int>(rng() % 20);
    std::vector<int> sizes;
    for (int g = 0; g < groups; ++g) sizes.push_back(1 + static_cast<int>(rng() % 6));
    const int k = 2 + static_cast<int>(rng() % static_cast<unsigned>(std::min(groups - 1, 5)));
    const auto keys = keys_from_sizes(sizes);
    const auto f = group_kfold(keys, k, rng());
    std::map<std::string, std::set<int>> seen;
    for (std::size_t i = 0; i < keys.size(); ++i) seen[keys[i].group_id].insert(f.fold_of_slide[i]);
    for (const auto& [g, folds] : seen) REQUIRE(folds.size() == 1);
    int total = 0;
    for (int fold = 0; fold < k; ++fold) {
      REQUIRE(f.test_indices(fold).size() + f.train_indices(fold).size() == keys.size());
      total += static_cast<int>(f.test_indices(fold).size());
    }
    REQUIRE(total == static_cast<int>(keys.size()));
  }
}

TEST_CASE("decoupled decay shrinks weights geometrically under zero gradients") {
  std::mt19937_64 rng(1);
  ModelShape s;
  s.input_dim = 3;
  s.gcn_widths = {4, 4, 4};
  s.hidden = 4;
  const auto start = random_params(s, rng);
  TrainConfig c;
  c.learning_rate = 0.05;
  c.weight_decay = 0.1;
  auto p = start;
  AdamW opt(p, c);
  const auto zero = ModelParams::zeros(s);
  for (int t = 0; t < 7; ++t) opt.step(p, zero);
  const double factor = std::pow(1.0 - 0.05 * 0.1, 7);
  const auto a = start.tensors();
  const auto b = p.tensors();
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t i = 0; i < a[k].values.size(); ++i) {
      const double expected = a[k].is_weight ? a[k].values[i] * factor : a[k].values[i];
      REQUIRE(b[k].values[i] == doctest::Approx(expected).epsilon(1e-13));
    }
  }

  // Zero decay reduces to plain Adam: first step moves each coordinate by lr.
  c.weight_decay = 0.0;
  auto q = start;
  AdamW plain(q, c);
  auto g = ModelParams::zeros(s);
  g.hidden.weight.setConstant(3.0);
  plain.step(q, g);
  CHECK(q.hidden.weight(0, 0) == doctest::Approx(start.hidden.weight(0, 0) - 0.05).epsilon(1e-9));
  CHECK(q.gcn[0].weight == start.gcn[0].weight);
}

TEST_CASE("zero learning rate keeps the loss curve flat") {
  const auto ds = tiny_dataset(2);
  auto c = small_config();
  c.learning_rate = 0.0;
  const auto r = train(ds, c, 3);
  const auto init = init_params(c.shape(ds.dim(), ds.classes()), 3);
  CHECK(r.params.gcn[1].weight == init.gcn[1].weight);
  for (double l : r.loss_curve) CHECK(l == r.loss_curve.front());
}

TEST_CASE("memorizes a single graph") {
  std::mt19937_64 rng(5);
  auto pyr = random_pyramid(8, 6, rng);
  pyr.label = 1;
  const auto ds = make_dataset(std::vector<EmbeddingPyramid>{pyr}, {"a", "b"});
  auto c = small_config();
  c.class_weights = ClassWeightMode::Uniform;
  c.epochs = 200;
  const auto r = train(ds, c, 0);
  CHECK(r.loss_curve.back() < 0.01);
  CHECK(r.loss_curve.back() < r.loss_curve.front());
}

TEST_CASE("divergence raises a training error") {
  std::mt19937_64 rng(6);
  const auto ds = make_dataset(std::vector<EmbeddingPyramid>{random_pyramid(4, 3, rng)}, {"a"});
  auto c = small_config();
  c.class_weights = ClassWeightMode::Uniform;
  c.learning_rate = 1e300;
  CHECK_THROWS_AS(train(ds, c, 0), Error);
}

TEST_CASE("cross validation replays exactly") {
  const auto ds = tiny_dataset(4);
  auto c = small_config();
  const auto a = cross_validate(ds, c);
  c.jobs = 3;
  const auto b = cross_validate(ds, c);
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.loss_csv() == b.loss_csv());
  CHECK(a.runs.size() == 6);
  CHECK(a.balanced_accuracy.mean >= 0.0);
  CHECK(a.balanced_accuracy.mean <= 1.0);
}

TEST_CASE("config json round trip and validation") {
  auto c = small_config();
  c.decay_mode = DecayMode::Coupled;
  c.class_weights = ClassWeightMode::Uniform;
  const auto back = TrainConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  CHECK(back.to_json() == c.to_json());
  CHECK_THROWS_AS(TrainConfig::from_json(nlohmann::json{{"epochz", 3}}), ConfigError);
  auto bad = c;
  bad.folds = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.seeds.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
