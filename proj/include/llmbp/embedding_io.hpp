#pragma once

// Binary matrix file: 16-byte header of four little-endian uint32 values
// (magic "LBPE", version, rows, cols) followed by rows*cols little-endian
// IEEE-754 float32 values in row-major order.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmbp/embedding.hpp"
#include "llmbp/error.hpp"
#include "llmbp/graph_io.hpp"

namespace llmbp {

inline constexpr std::uint32_t kMatrixMagic = 0x4550424cU;  // bytes "LBPE"
inline constexpr std::uint32_t kMatrixVersion = 1;

namespace detail {

inline std::uint32_t byteswap32(std::uint32_t x) noexcept {
  return (x >> 24) | ((x >> 8) & 0xff00U) | ((x << 8) & 0xff0000U) | (x << 24);
}

inline std::uint32_t to_le(std::uint32_t x) noexcept {
  if constexpr (std::endian::native == std::endian::big) return byteswap32(x);
  return x;
}

inline void put_u32(std::ostream& out, std::uint32_t x) {
  x = to_le(x);
  out.write(reinterpret_cast<const char*>(&x), sizeof x);
}

inline bool get_u32(std::istream& in, std::uint32_t& x) {
  if (!in.read(reinterpret_cast<char*>(&x), sizeof x)) return false;
  x = to_le(x);
  return true;
}

}  // namespace detail

struct MatrixHeader {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
};

/// Reads a matrix in the binary format; rejects short payloads and
/// non-finite values.
inline EmbeddingMatrix read_matrix(std::istream& in, std::string_view source = "<matrix>") {
  std::uint32_t magic = 0, version = 0, rows = 0, cols = 0;
  if (!detail::get_u32(in, magic) || !detail::get_u32(in, version) || !detail::get_u32(in, rows) ||
      !detail::get_u32(in, cols)) {
    throw Error(ErrorKind::format, std::string(source) + ": truncated header");
  }
  if (magic != kMatrixMagic) throw Error(ErrorKind::format, std::string(source) + ": bad magic");
  if (version != kMatrixVersion) {
    throw Error(ErrorKind::format,
                std::string(source) + ": unsupported version " + std::to_string(version));
  }
  const std::size_t count = std::size_t{rows} * cols;
  std::vector<std::uint32_t> raw(count);
  if (count > 0 && !in.read(reinterpret_cast<char*>(raw.data()),
                            static_cast<std::streamsize>(count * sizeof(std::uint32_t)))) {
    throw Error(ErrorKind::format, std::string(source) + ": payload shorter than " +
                                       std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::format, std::string(source) + ": trailing bytes after payload");
  }
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    values[k] = static_cast<double>(std::bit_cast<float>(detail::to_le(raw[k])));
  }
  return EmbeddingMatrix(rows, cols, std::move(values));  // validates finiteness
}

inline void write_matrix(std::ostream& out, std::size_t rows, std::size_t cols,
                         std::span<const double> values) {
  if (values.size() != rows * cols) throw Error(ErrorKind::shape, "matrix payload size mismatch");
  detail::put_u32(out, kMatrixMagic);
  detail::put_u32(out, kMatrixVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(rows));
  detail::put_u32(out, static_cast<std::uint32_t>(cols));
  for (double v : values) {
    const auto bits = detail::to_le(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
}

inline void write_matrix(std::ostream& out, const EmbeddingMatrix& m) {
  write_matrix(out, m.rows(), m.dim(), m.values());
}

inline EmbeddingMatrix load_embeddings(const fs::path& path) {
  auto in = open_input(path);
  return read_matrix(in, path.string());
}

inline void save_matrix(const fs::path& path, const EmbeddingMatrix& m) {
  write_atomically(path, [&](std::ostream& o) { write_matrix(o, m); });
}

inline nlohmann::json class_embeddings_sidecar(const ClassEmbeddings& ce) {
  nlohmann::json j;
  j["provenance"] = std::string(to_string(ce.provenance));
  j["class_count"] = ce.class_count();
  j["dim"] = ce.dim();
  j["seed"] = ce.seed;
  j["k_top"] = ce.k_top;
  j["sampled_nodes"] = ce.sampled_nodes;
  j["sampled_labels"] = ce.sampled_labels;
  j["resample_rounds"] = ce.resample_rounds;
  j["class_name_fallbacks"] = ce.class_name_fallbacks;
  return j;
}

/// Writes `<stem>.bin` and `<stem>.json`.
inline void save_class_embeddings(const fs::path& bin_path, const ClassEmbeddings& ce) {
  save_matrix(bin_path, ce.matrix);
  auto sidecar = bin_path;
  sidecar.replace_extension(".json");
  write_atomically(sidecar,
                   [&](std::ostream& o) { o << class_embeddings_sidecar(ce).dump(2) << '\n'; });
}

inline ClassEmbeddings load_class_embeddings(const fs::path& bin_path) {
  ClassEmbeddings ce;
  ce.matrix = load_embeddings(bin_path);
  ce.provenance = ClassEmbeddingProvenance::external;
  auto sidecar = bin_path;
  sidecar.replace_extension(".json");
  if (fs::exists(sidecar)) {
    auto in = open_input(sidecar);
    nlohmann::json j;
    try {
      in >> j;
      const auto p = j.value("provenance", std::string("external"));
      if (p == "zero_shot_clustered") ce.provenance = ClassEmbeddingProvenance::zero_shot_clustered;
      if (p == "few_shot_averaged") ce.provenance = ClassEmbeddingProvenance::few_shot_averaged;
      ce.seed = j.value("seed", std::uint64_t{0});
      ce.k_top = j.value("k_top", std::size_t{0});
      ce.sampled_nodes = j.value("sampled_nodes", std::vector<NodeId>{});
      ce.sampled_labels = j.value("sampled_labels", std::vector<ClassId>{});
      ce.resample_rounds = j.value("resample_rounds", std::size_t{0});
      ce.class_name_fallbacks = j.value("class_name_fallbacks", std::vector<ClassId>{});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::parse, sidecar.string() + ": " + e.what());
    }
  }
  return ce;
}

}  // namespace llmbp
