// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Model checkpoints.
//
// Layout (all integers little-endian):
//   "GRSP"  u16 version (=1)
//   u32 input_dim, u32 gcn_layer_count, u32 gcn_width[gcn_layer_count],
//   u32 hidden, u32 classes
//   f64 tensors, row-major, in ModelParams::tensors() order
// A JSON sidecar (<path>.json) carries config and training metadata.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "grasp/gcn.hpp"

namespace grasp {

inline constexpr std::uint16_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const ModelParams& params);
ModelParams decode_checkpoint(std::span<const std::uint8_t> bytes);

/// Writes `path` and `<path>.json` (metadata plus the model shape).
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const nlohmann::ordered_json& metadata = nlohmann::ordered_json::object());
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace grasp
