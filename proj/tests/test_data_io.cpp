// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "grasp/data_io.hpp"
#include "grasp/errors.hpp"
#include "support.hpp"

using namespace grasp;
using namespace grasp::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

bool bit_equal(const EmbeddingPyramid& a, const EmbeddingPyramid& b) {
  if (a.slide_id != b.slide_id || a.group_id != b.group_id || a.label != b.label) return false;
  for (int k = 0; k < 3; ++k) {
    if (a.blocks[k].rows() != b.blocks[k].rows() || a.blocks[k].cols() != b.blocks[k].cols()) return false;
    if (std::memcmp(a.blocks[k].data(), b.blocks[k].data(), sizeof(float) * static_cast<std::size_t>(a.blocks[k].size())) != 0)
      return false;
  }
  return true;
}

// Mean over the rows of one magnification, for the linear baseline below.
Eigen::VectorXd block_mean(const EmbeddingPyramid& p, Magnification mag) {
  return p.block(mag).cast<double>().colwise().mean().transpose();
}

// Full-batch gradient-descent logistic regression; returns held-out accuracy
// on the odd-indexed slides after training on the even-indexed ones.
double logistic_accuracy(const std::vector<EmbeddingPyramid>& pyrs, Magnification mag) {
  const int d = pyrs.front().d();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  for (int it = 0; it < 2000; ++it) {
    Eigen::VectorXd gw = Eigen::VectorXd::Zero(d);
    double gb = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < pyrs.size(); i += 2) {
      const auto x = block_mean(pyrs[i], mag);
      const double p = 1.0 / (1.0 + std::exp(-(w.dot(x) + b)));
      gw += (p - pyrs[i].label) * x;
      gb += p - pyrs[i].label;
      ++n;
    }
    w -= 0.5 * gw / n;
    b -= 0.5 * gb / n;
  }
  int correct = 0, total = 0;
  for (std::size_t i = 1; i < pyrs.size(); i += 2) {
    const int pred = w.dot(block_mean(pyrs[i], mag)) + b > 0.0 ? 1 : 0;
    correct += pred == pyrs[i].label;
    ++total;
  }
  return static_cast<double>(correct) / total;
}

}  // namespace

TEST_CASE("pyramid round trip is bit exact") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<float> wild(-1e30f, 1e30f);
  for (int i = 0; i < 1000; ++i) {
    const int m = 1 + static_cast<int>(rng() % 9);
    const int d = 1 + static_cast<int>(rng() % 17);
    auto p = random_pyramid(m, d, rng);
    if (i % 5 == 0) p.blocks[1](0, 0) = wild(rng);
    if (i % 7 == 0) p.blocks[2](m - 1, d - 1) = -0.0f;
    p.slide_id = "slide_" + std::to_string(i);
    p.group_id = i % 3 ? "pat\xc3\xa9" : "";
    p.group_id += std::to_string(i / 4);
    p.label = static_cast<int>(rng() % 5);
    const auto bytes = encode_pyramid(p);
    REQUIRE(bytes.size() == pyramid_file_size(m, d, p.group_id.size(), p.slide_id.size()));
    REQUIRE(bit_equal(decode_pyramid(bytes), p));
  }
}

TEST_CASE("file size arithmetic") {
  CHECK(pyramid_file_size(400, 1024, 0, 0) == 22 + 3u * 400 * 1024 * 4 + 4);
  TempDir dir("grasp_io_size");
  std::mt19937_64 rng(1);
  auto p = random_pyramid(4, 3, rng);
  write_pyramid(dir.path / "a.gpyr", p);
  CHECK(fs::file_size(dir.path / "a.gpyr") == pyramid_file_size(4, 3, 1, 1));
  CHECK(bit_equal(read_pyramid(dir.path / "a.gpyr"), p));
}

TEST_CASE("corruption is rejected") {
  std::mt19937_64 rng(2);
  auto p = random_pyramid(3, 4, rng);
  const auto good = encode_pyramid(p);

  // Every single-byte flip in the label, strings, payload or trailer must be
  // caught. Flips in m or d change the declared size and surface as length errors.
  for (std::size_t i = 14; i < good.size(); ++i) {
    if (i == 18 || i == 19 || i == 21 || i == 22) continue;  // string lengths
    auto bad = good;
    bad[i] ^= 0x10;
    REQUIRE_THROWS_AS(decode_pyramid(bad), ChecksumError);
  }
  auto bad = good;
  bad[1] = 'Q';
  CHECK_THROWS_AS(decode_pyramid(bad), BadMagicError);
  bad = good;
  bad[4] = 7;
  CHECK_THROWS_AS(decode_pyramid(bad), BadVersionError);
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, good.size() - 1}) {
    CHECK_THROWS_AS(decode_pyramid(std::span<const std::uint8_t>(good.data(), cut)), TruncatedError);
  }
  bad = good;
  bad.push_back(0);
  CHECK_THROWS_AS(decode_pyramid(bad), FormatError);
}

TEST_CASE("manifest") {
  TempDir dir("grasp_io_manifest");
  std::mt19937_64 rng(3);
  auto a = random_pyramid(2, 3, rng);
  auto b = random_pyramid(2, 3, rng);
  write_pyramid(dir.path / "a.gpyr", a);
  write_pyramid(dir.path / "b.gpyr", b);
  const std::vector<ManifestRow> rows{{"s1", "a.gpyr", "UCC", "p1"}, {"s2", "b.gpyr", "MicroP", "p2"}};
  write_manifest(dir.path / "manifest.csv", rows);
  const auto man = load_manifest(dir.path / "manifest.csv");
  CHECK(man.size() == 2);
  CHECK(man.labels() == std::vector<std::string>{"MicroP", "UCC"});
  CHECK(man.label_index("UCC") == 1);
  const auto loaded = man.load_all();
  CHECK(loaded[0].label == 1);
  CHECK(loaded[1].label == 0);
  CHECK(loaded[0].slide_id == "s1");
  CHECK(loaded[0].group_id == "p1");

  auto dup = rows;
  dup[1].slide_id = "s1";
  try {
    Manifest(dup, dir.path);
    FAIL("duplicate accepted");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("s1") != std::string::npos);
  }
  auto nogroup = rows;
  nogroup[0].group.clear();
  CHECK_THROWS_AS(Manifest(nogroup, dir.path), ValidationError);
  auto missing = rows;
  missing[0].path = "nope.gpyr";
  CHECK_THROWS_AS(Manifest(missing, dir.path), ValidationError);

  std::ofstream(dir.path / "bad.csv") << "id,path,label,group\n";
  CHECK_THROWS(load_manifest(dir.path / "bad.csv"));
}

TEST_CASE("synthetic generator") {
  SynthSpec s;
  s.slides_per_class = 10;
  s.groups_per_class = 4;
  s.seed = 5;
  const auto a = generate_synthetic(s);
  const auto b = generate_synthetic(s);
  REQUIRE(a.size() == 20);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(encode_pyramid(a[i]) == encode_pyramid(b[i]));
  CHECK(a[0].slide_id == "c0_s0");
  CHECK(a[13].group_id == "c1_g3");
  s.seed = 6;
  CHECK(encode_pyramid(generate_synthetic(s)[0]) != encode_pyramid(a[0]));

  const auto back = SynthSpec::from_json(nlohmann::json::parse(s.to_json().dump()));
  CHECK(back.to_json() == s.to_json());
  CHECK_THROWS_AS(SynthSpec::from_json(nlohmann::json{{"snrr", 1}}), ConfigError);
}

TEST_CASE("planted signal is linearly visible in M2 means only") {
  SynthSpec s;
  s.seed = 17;
  const auto pyrs = generate_synthetic(s);
  CHECK(logistic_accuracy(pyrs, Magnification::M2) >= 0.95);
  const double m1 = logistic_accuracy(pyrs, Magnification::M1);
  CHECK(m1 > 0.3);
  CHECK(m1 < 0.7);

  s.snr = 0.0;
  const double null = logistic_accuracy(generate_synthetic(s), Magnification::M2);
  CHECK(null > 0.3);
  CHECK(null < 0.7);
}

TEST_CASE("label shuffle and occlusion") {
  SynthSpec s;
  s.slides_per_class = 8;
  s.groups_per_class = 4;
  auto pyrs = generate_synthetic(s);
  auto shuffled = pyrs;
  shuffle_labels(shuffled, 1);
  int ones = 0;
  for (const auto& p : shuffled) ones += p.label;
  CHECK(ones == 8);
  occlude(pyrs, Magnification::M3);
  CHECK(pyrs[3].blocks[2].cwiseAbs().maxCoeff() == 0.0f);
  CHECK(pyrs[3].blocks[1].cwiseAbs().maxCoeff() > 0.0f);
}
