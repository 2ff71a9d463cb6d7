// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "grasp/data_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "byte_io.hpp"
#include "grasp/errors.hpp"

namespace grasp {

namespace {

constexpr std::string_view kPyramidMagic = "GPYR";

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large payloads.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - pos, 1u << 30));
    crc = crc32(crc, bytes.data() + pos, chunk);
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

// ---------------------------------------------------------------------------
// .gpyr

std::size_t pyramid_file_size(int m, int d, std::size_t group_id_bytes, std::size_t slide_id_bytes) {
  const std::size_t header = 4 + 2 + 4 + 4 + 4 + 2 + group_id_bytes + 2 + slide_id_bytes;
  return header + 3 * static_cast<std::size_t>(m) * static_cast<std::size_t>(d) * sizeof(float) + 4;
}

std::vector<std::uint8_t> encode_pyramid(const EmbeddingPyramid& pyramid) {
  pyramid.validate();
  detail::ByteWriter w;
  w.bytes().reserve(pyramid_file_size(pyramid.m(), pyramid.d(), pyramid.group_id.size(),
                                      pyramid.slide_id.size()));
  w.put_bytes(kPyramidMagic);
  w.put<std::uint16_t>(kPyramidVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(pyramid.m()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(pyramid.d()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(pyramid.label));
  w.put_string16(pyramid.group_id);
  w.put_string16(pyramid.slide_id);
  for (const auto& block : pyramid.blocks) {
    for (Eigen::Index i = 0; i < block.size(); ++i) w.put<float>(block.data()[i]);
  }
  w.put<std::uint32_t>(crc32_of(w.bytes()));
  return std::move(w.bytes());
}

EmbeddingPyramid decode_pyramid(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "pyramid file");
  if (bytes.size() < kPyramidMagic.size()) throw TruncatedError("pyramid file: shorter than its magic");
  if (r.get_bytes(kPyramidMagic.size()) != kPyramidMagic) {
    throw BadMagicError("pyramid file: bad magic, expected GPYR");
  }
  const auto version = r.get<std::uint16_t>();
  if (version != kPyramidVersion) {
    throw BadVersionError("pyramid file: unsupported version " + std::to_string(version));
  }
  const auto m = r.get<std::uint32_t>();
  const auto d = r.get<std::uint32_t>();
  const auto label = r.get<std::uint32_t>();
  EmbeddingPyramid pyr;
  pyr.group_id = r.get_string16();
  pyr.slide_id = r.get_string16();
  pyr.label = static_cast<int>(label);

  const std::uint64_t payload = 3ull * m * d * sizeof(float);
  if (payload + 4 > r.remaining()) {
    throw TruncatedError("pyramid file: header declares m=" + std::to_string(m) + ", d=" +
                         std::to_string(d) + " but only " + std::to_string(r.remaining()) +
                         " bytes follow");
  }
  if (payload + 4 < r.remaining()) throw FormatError("pyramid file: trailing bytes after checksum");

  const std::size_t body = r.position() + payload;
  const auto stored = [&] {
    detail::ByteReader tail(bytes.subspan(body), "pyramid file");
    return tail.get<std::uint32_t>();
  }();
  if (stored != crc32_of(bytes.first(body))) throw ChecksumError("pyramid file: CRC mismatch");
  if (m == 0 || d == 0) throw ValidationError("pyramid file: m and d must be positive");

  for (auto& block : pyr.blocks) {
    block.resize(m, d);
    for (Eigen::Index i = 0; i < block.size(); ++i) block.data()[i] = r.get<float>();
  }
  pyr.validate();
  return pyr;
}

void write_pyramid(const std::filesystem::path& path, const EmbeddingPyramid& pyramid) {
  detail::write_file(path, encode_pyramid(pyramid));
}

EmbeddingPyramid read_pyramid(const std::filesystem::path& path) {
  return decode_pyramid(detail::read_file(path));
}

// ---------------------------------------------------------------------------
// Manifest

Manifest::Manifest(std::vector<ManifestRow> rows, std::filesystem::path base_dir)
    : rows_(std::move(rows)), base_dir_(std::move(base_dir)) {
  std::set<std::string> seen;
  std::set<std::string> labels;
  for (const auto& row : rows_) {
    if (row.slide_id.empty()) throw ValidationError("manifest: empty slide_id");
    if (!seen.insert(row.slide_id).second) {
      throw ValidationError("manifest: duplicate slide_id '" + row.slide_id + "'");
    }
    if (row.group.empty()) throw ValidationError("manifest: empty group for slide '" + row.slide_id + "'");
    if (row.label.empty()) throw ValidationError("manifest: empty label for slide '" + row.slide_id + "'");
    labels.insert(row.label);
  }
  labels_.assign(labels.begin(), labels.end());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (!std::filesystem::is_regular_file(resolve(i))) {
      throw ValidationError("manifest: unknown file '" + rows_[i].path.string() + "' for slide '" +
                            rows_[i].slide_id + "'");
    }
  }
}

int Manifest::label_index(std::string_view label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) {
    throw ValidationError("manifest: unknown label '" + std::string(label) + "'");
  }
  return static_cast<int>(it - labels_.begin());
}

std::filesystem::path Manifest::resolve(std::size_t i) const {
  const auto& p = rows_.at(i).path;
  return p.is_absolute() ? p : base_dir_ / p;
}

EmbeddingPyramid Manifest::load(std::size_t i) const {
  EmbeddingPyramid pyr = read_pyramid(resolve(i));
  const auto& row = rows_.at(i);
  pyr.slide_id = row.slide_id;
  pyr.group_id = row.group;
  pyr.label = label_index(row.label);
  return pyr;
}

std::vector<EmbeddingPyramid> Manifest::load_all() const {
  std::vector<EmbeddingPyramid> out;
  out.reserve(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) out.push_back(load(i));
  return out;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line) != "slide_id,path,label,group") {
    throw ValidationError("manifest '" + path.string() + "': header must be slide_id,path,label,group");
  }
  std::vector<ManifestRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv(trim(line));
    if (fields.size() != 4) {
      throw ValidationError("manifest '" + path.string() + "' line " + std::to_string(line_no) +
                            ": expected 4 fields, got " + std::to_string(fields.size()));
    }
    rows.push_back({fields[0], fields[1], fields[2], fields[3]});
  }
  return Manifest(std::move(rows), path.parent_path());
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestRow> rows) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open manifest '" + path.string() + "' for writing");
  out << "slide_id,path,label,group\n";
  for (const auto& row : rows) {
    out << row.slide_id << ',' << row.path.generic_string() << ',' << row.label << ',' << row.group << '\n';
  }
}

// ---------------------------------------------------------------------------
// Synthetic data

MagnificationMask SynthSpec::signal_for(int cls) const {
  return signal.size() == 1 ? signal.front() : signal.at(static_cast<std::size_t>(cls));
}

void SynthSpec::validate() const {
  if (classes < 2) throw ConfigError("synth: need at least 2 classes");
  if (m < 1 || d < 1) throw ConfigError("synth: m and d must be positive");
  if (signal.size() != 1 && signal.size() != static_cast<std::size_t>(classes)) {
    throw ConfigError("synth: signal needs one mask or one per class");
  }
  if (!(snr >= 0.0) || !std::isfinite(snr)) throw ConfigError("synth: snr must be finite and >= 0");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("synth: fraction must be in (0, 1]");
  if (slides_per_class < 2) throw ConfigError("synth: need at least 2 slides per class");
  if (groups_per_class < 1 || groups_per_class > slides_per_class) {
    throw ConfigError("synth: groups_per_class must be in [1, slides_per_class]");
  }
}

SynthSpec SynthSpec::from_json(const nlohmann::json& j) {
  SynthSpec s;
  s.classes = j.value("classes", s.classes);
  s.m = j.value("m", s.m);
  s.d = j.value("d", s.d);
  s.snr = j.value("snr", s.snr);
  s.fraction = j.value("fraction", s.fraction);
  s.slides_per_class = j.value("slides_per_class", s.slides_per_class);
  s.groups_per_class = j.value("groups_per_class", s.groups_per_class);
  s.seed = j.value("seed", s.seed);
  if (j.contains("signal")) {
    s.signal.clear();
    const auto& sig = j.at("signal");
    if (sig.is_string()) {
      s.signal.push_back(MagnificationMask::parse(sig.get<std::string>()));
    } else {
      for (const auto& e : sig) s.signal.push_back(MagnificationMask::parse(e.get<std::string>()));
    }
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    static const std::set<std::string> known{"classes", "m", "d", "snr", "fraction", "slides_per_class",
                                             "groups_per_class", "seed", "signal"};
    if (!known.count(it.key())) throw ConfigError("synth spec: unknown key '" + it.key() + "'");
  }
  s.validate();
  return s;
}

nlohmann::ordered_json SynthSpec::to_json() const {
  nlohmann::ordered_json j;
  j["classes"] = classes;
  j["m"] = m;
  j["d"] = d;
  std::vector<std::string> sig;
  for (auto mask : signal) sig.push_back(mask.name());
  j["signal"] = sig;
  j["snr"] = snr;
  j["fraction"] = fraction;
  j["slides_per_class"] = slides_per_class;
  j["groups_per_class"] = groups_per_class;
  j["seed"] = seed;
  return j;
}

std::string synth_class_name(int cls) { return "class" + std::to_string(cls); }

std::vector<EmbeddingPyramid> generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<RowVector> offsets;
  for (int c = 0; c < spec.classes; ++c) {
    RowVector v(spec.d);
    for (int k = 0; k < spec.d; ++k) v(k) = normal(rng);
    offsets.push_back(v.normalized() * spec.snr);
  }

  const int carriers = std::clamp(static_cast<int>(std::lround(spec.fraction * spec.m)), 1, spec.m);
  std::vector<int> order(static_cast<std::size_t>(spec.m));
  std::vector<EmbeddingPyramid> out;
  out.reserve(static_cast<std::size_t>(spec.classes * spec.slides_per_class));
  for (int c = 0; c < spec.classes; ++c) {
    const auto mask = spec.signal_for(c);
    for (int s = 0; s < spec.slides_per_class; ++s) {
      EmbeddingPyramid pyr;
      pyr.slide_id = "c" + std::to_string(c) + "_s" + std::to_string(s);
      pyr.group_id = "c" + std::to_string(c) + "_g" + std::to_string(s % spec.groups_per_class);
      pyr.label = c;
      for (auto& block : pyr.blocks) {
        block.resize(spec.m, spec.d);
        for (Eigen::Index i = 0; i < block.size(); ++i) block.data()[i] = static_cast<float>(normal(rng));
      }
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      for (int t = 0; t < carriers; ++t) {
        const int row = order[static_cast<std::size_t>(t)];
        for (auto mag : mask.kept()) {
          auto& block = pyr.block(mag);
          block.row(row) = (block.row(row).cast<double>() + offsets[static_cast<std::size_t>(c)]).cast<float>();
        }
      }
      out.push_back(std::move(pyr));
    }
  }
  return out;
}

void shuffle_labels(std::vector<EmbeddingPyramid>& pyramids, std::uint64_t seed) {
  std::vector<int> labels;
  for (const auto& p : pyramids) labels.push_back(p.label);
  std::mt19937_64 rng(seed);
  std::shuffle(labels.begin(), labels.end(), rng);
  for (std::size_t i = 0; i < pyramids.size(); ++i) pyramids[i].label = labels[i];
}

void occlude(std::vector<EmbeddingPyramid>& pyramids, Magnification mag) {
  for (auto& p : pyramids) p.block(mag).setZero();
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(g.label);
  return out;
}

Dataset make_dataset(std::span<const EmbeddingPyramid> pyramids, std::vector<std::string> class_names,
                     const GraphOptions& options) {
  Dataset ds;
  ds.class_names = std::move(class_names);
  ds.graphs.reserve(pyramids.size());
  for (const auto& p : pyramids) {
    if (p.label >= ds.classes()) {
      throw ValidationError("slide '" + p.slide_id + "' has label " + std::to_string(p.label) +
                            " but only " + std::to_string(ds.classes()) + " classes are declared");
    }
    ds.graphs.push_back(build_graph(p, options));
    if (ds.graphs.back().d() != ds.graphs.front().d()) {
      throw ShapeError("slide '" + p.slide_id + "' has d=" + std::to_string(p.d()) +
                       ", expected " + std::to_string(ds.graphs.front().d()));
    }
  }
  return ds;
}

}  // namespace grasp
