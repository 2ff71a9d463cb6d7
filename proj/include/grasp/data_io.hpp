// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Embedding pyramid files, manifests and the planted-signal generator.
//
// .gpyr layout (integers and floats little-endian):
//   "GPYR"  u16 version (=1)  u32 m  u32 d  u32 label
//   u16 group-id length, UTF-8 group id
//   u16 slide-id length, UTF-8 slide id
//   3 x (m x d) f32 blocks, M1 then M2 then M3, row-major
//   u32 CRC-32 (IEEE) of every preceding byte

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "grasp/graph.hpp"

namespace grasp {

inline constexpr std::uint16_t kPyramidVersion = 1;

std::vector<std::uint8_t> encode_pyramid(const EmbeddingPyramid& pyramid);
EmbeddingPyramid decode_pyramid(std::span<const std::uint8_t> bytes);

void write_pyramid(const std::filesystem::path& path, const EmbeddingPyramid& pyramid);
EmbeddingPyramid read_pyramid(const std::filesystem::path& path);

/// Exact encoded size in bytes.
std::size_t pyramid_file_size(int m, int d, std::size_t group_id_bytes, std::size_t slide_id_bytes);

// ---------------------------------------------------------------------------

struct ManifestRow {
  std::string slide_id;
  std::filesystem::path path;  // as written; relative paths resolve against the manifest directory
  std::string label;
  std::string group;
};

/// Validated manifest. Labels are indexed by their sorted order.
class Manifest {
 public:
  Manifest(std::vector<ManifestRow> rows, std::filesystem::path base_dir);

  const std::vector<ManifestRow>& rows() const { return rows_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return rows_.size(); }
  int label_index(std::string_view label) const;
  std::filesystem::path resolve(std::size_t i) const;

  /// Reads slide i; label and ids come from the manifest row.
  EmbeddingPyramid load(std::size_t i) const;
  std::vector<EmbeddingPyramid> load_all() const;

 private:
  std::vector<ManifestRow> rows_;
  std::filesystem::path base_dir_;
  std::vector<std::string> labels_;
};

/// CSV with header `slide_id,path,label,group`.
Manifest load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestRow> rows);

// ---------------------------------------------------------------------------

struct SynthSpec {
  int classes = 2;
  int m = 100;
  int d = 32;
  // Magnifications carrying each class's offset; one entry applies to all classes.
  std::vector<MagnificationMask> signal{MagnificationMask::only(Magnification::M2)};
  double snr = 4.0;        // norm of the class-mean offset
  double fraction = 0.2;   // share of triplets per slide carrying the offset
  int slides_per_class = 60;
  int groups_per_class = 20;
  std::uint64_t seed = 0;

  MagnificationMask signal_for(int cls) const;
  void validate() const;

  static SynthSpec from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

std::string synth_class_name(int cls);

/// Slides ordered class-major; ids "c<class>_s<index>", groups "c<class>_g<index>".
std::vector<EmbeddingPyramid> generate_synthetic(const SynthSpec& spec);

/// Permutes labels across slides (the label-shuffled null control).
void shuffle_labels(std::vector<EmbeddingPyramid>& pyramids, std::uint64_t seed);

/// Zeroes one magnification of every slide.
void occlude(std::vector<EmbeddingPyramid>& pyramids, Magnification mag);

/// In-memory collection of graphs ready for training.
struct Dataset {
  std::vector<PyramidGraph> graphs;
  std::vector<std::string> class_names;

  int classes() const { return static_cast<int>(class_names.size()); }
  int dim() const { return graphs.empty() ? 0 : graphs.front().d(); }
  std::vector<int> labels() const;
};

Dataset make_dataset(std::span<const EmbeddingPyramid> pyramids, std::vector<std::string> class_names,
                     const GraphOptions& options = {});

}  // namespace grasp
