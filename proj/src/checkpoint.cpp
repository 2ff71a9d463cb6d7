// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "grasp/checkpoint.hpp"

#include <fstream>

#include "byte_io.hpp"
#include "grasp/errors.hpp"

namespace grasp {

namespace {

constexpr std::string_view kMagic = "GRSP";

nlohmann::ordered_json shape_json(const ModelShape& shape) {
  nlohmann::ordered_json j;
  j["input_dim"] = shape.input_dim;
  j["gcn_widths"] = shape.gcn_widths;
  j["hidden"] = shape.hidden;
  j["classes"] = shape.classes;
  j["parameters"] = shape.count();
  return j;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ModelParams& params) {
  detail::ByteWriter w;
  w.put_bytes(kMagic);
  w.put<std::uint16_t>(kCheckpointVersion);
  const auto& shape = params.shape;
  w.put<std::uint32_t>(static_cast<std::uint32_t>(shape.input_dim));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(shape.gcn_widths.size()));
  for (int width : shape.gcn_widths) w.put<std::uint32_t>(static_cast<std::uint32_t>(width));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(shape.hidden));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(shape.classes));
  for (const auto& t : params.tensors()) {
    for (double v : t.values) w.put<double>(v);
  }
  return std::move(w.bytes());
}

ModelParams decode_checkpoint(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "checkpoint");
  if (r.get_bytes(kMagic.size()) != kMagic) throw BadMagicError("checkpoint: bad magic, expected GRSP");
  const auto version = r.get<std::uint16_t>();
  if (version != kCheckpointVersion) {
    throw BadVersionError("checkpoint: unsupported version " + std::to_string(version));
  }
  ModelShape shape;
  shape.input_dim = static_cast<int>(r.get<std::uint32_t>());
  const auto layers = r.get<std::uint32_t>();
  if (layers < 1 || layers > 6) throw FormatError("checkpoint: bad layer count " + std::to_string(layers));
  shape.gcn_widths.clear();
  for (std::uint32_t l = 0; l < layers; ++l) shape.gcn_widths.push_back(static_cast<int>(r.get<std::uint32_t>()));
  shape.hidden = static_cast<int>(r.get<std::uint32_t>());
  shape.classes = static_cast<int>(r.get<std::uint32_t>());

  ModelParams params = ModelParams::zeros(shape);
  r.need(static_cast<std::size_t>(params.count()) * sizeof(double));
  for (auto& t : params.tensors()) {
    for (double& v : t.values) v = r.get<double>();
  }
  if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes");
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const nlohmann::ordered_json& metadata) {
  detail::write_file(path, encode_checkpoint(params));
  nlohmann::ordered_json sidecar;
  sidecar["format"] = "GRSP";
  sidecar["version"] = kCheckpointVersion;
  sidecar["shape"] = shape_json(params.shape);
  sidecar["metadata"] = metadata;
  std::ofstream out(path.string() + ".json");
  out << sidecar.dump(2) << '\n';
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(detail::read_file(path));
}

}  // namespace grasp
