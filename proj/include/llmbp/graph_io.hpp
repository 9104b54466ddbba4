#pragma once

// On-disk dataset layout:
//   meta.json    node_count, class_count, class_names, task_description and
//                relative paths of the files below
//   edges.txt    "<src> <dst>" per line; '#' comments and blank lines allowed
//   labels.txt   one class id per line (-1 = unlabeled), line k = node k
//   texts.txt    one JSON string literal per line, line k = node k

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmbp/error.hpp"
#include "llmbp/graph.hpp"

namespace llmbp {

namespace fs = std::filesystem;

struct GraphMetadata {
  std::size_t node_count = 0;
  std::size_t class_count = 0;
  std::vector<std::string> class_names;
  std::string task_description;
  std::optional<std::string> edges_file;
  std::optional<std::string> labels_file;
  std::optional<std::string> texts_file;
  std::optional<std::string> embeddings_file;
  std::optional<std::string> class_embeddings_file;
  std::optional<std::string> class_name_embeddings_file;
};

inline GraphMetadata parse_metadata(const nlohmann::json& j) {
  GraphMetadata meta;
  try {
    meta.node_count = j.at("node_count").get<std::size_t>();
    meta.class_count = j.at("class_count").get<std::size_t>();
    if (j.contains("class_names")) meta.class_names = j["class_names"].get<std::vector<std::string>>();
    if (j.contains("task_description")) meta.task_description = j["task_description"].get<std::string>();
    auto opt = [&](const char* key, std::optional<std::string>& field) {
      if (j.contains(key) && !j[key].is_null()) field = j[key].get<std::string>();
    };
    opt("edges", meta.edges_file);
    opt("labels", meta.labels_file);
    opt("texts", meta.texts_file);
    opt("embeddings", meta.embeddings_file);
    opt("class_embeddings", meta.class_embeddings_file);
    opt("class_name_embeddings", meta.class_name_embeddings_file);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, std::string("metadata: ") + e.what());
  }
  if (meta.class_count == 0) throw Error(ErrorKind::format, "metadata: class_count must be positive");
  if (!meta.class_names.empty() && meta.class_names.size() != meta.class_count) {
    throw Error(ErrorKind::format, "metadata: class_names length differs from class_count");
  }
  return meta;
}

inline nlohmann::json metadata_to_json(const GraphMetadata& meta) {
  nlohmann::json j;
  j["node_count"] = meta.node_count;
  j["class_count"] = meta.class_count;
  j["class_names"] = meta.class_names;
  j["task_description"] = meta.task_description;
  auto opt = [&](const char* key, const std::optional<std::string>& field) {
    if (field) j[key] = *field;
  };
  opt("edges", meta.edges_file);
  opt("labels", meta.labels_file);
  opt("texts", meta.texts_file);
  opt("embeddings", meta.embeddings_file);
  opt("class_embeddings", meta.class_embeddings_file);
  opt("class_name_embeddings", meta.class_name_embeddings_file);
  return j;
}

inline std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return in;
}

inline GraphMetadata load_metadata(const fs::path& path) {
  auto in = open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
  return parse_metadata(j);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <class Int>
bool parse_int(std::string_view token, Int& out) {
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

inline std::string location(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

}  // namespace detail

/// Reads whitespace-separated id pairs. Ids are range-checked against
/// node_count here so the error can carry the offending line.
inline std::vector<std::pair<NodeId, NodeId>> read_edge_list(std::istream& in,
                                                             std::size_t node_count,
                                                             std::string_view source = "<edges>") {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::istringstream tokens{std::string(body)};
    std::string a, b, extra;
    if (!(tokens >> a >> b) || (tokens >> extra)) {
      throw Error(ErrorKind::parse, detail::location(source, line_no) +
                                        ": expected '<src> <dst>', got '" + std::string(body) + "'");
    }
    std::uint64_t src = 0, dst = 0;
    if (!detail::parse_int(a, src) || !detail::parse_int(b, dst)) {
      throw Error(ErrorKind::parse, detail::location(source, line_no) +
                                        ": node ids must be non-negative integers");
    }
    if (src >= node_count || dst >= node_count) {
      throw Error(ErrorKind::out_of_range, detail::location(source, line_no) + ": node id " +
                                               std::to_string(std::max(src, dst)) +
                                               " >= node_count " + std::to_string(node_count));
    }
    pairs.emplace_back(static_cast<NodeId>(src), static_cast<NodeId>(dst));
  }
  return pairs;
}

inline std::vector<ClassId> read_labels(std::istream& in, std::size_t node_count,
                                        std::size_t class_count,
                                        std::string_view source = "<labels>") {
  std::vector<ClassId> labels;
  labels.reserve(node_count);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() && labels.size() == node_count) continue;
    ClassId y = 0;
    if (!detail::parse_int(body, y)) {
      throw Error(ErrorKind::parse, detail::location(source, line_no) + ": bad class id '" +
                                        std::string(body) + "'");
    }
    if (y != kUnlabeled && (y < 0 || static_cast<std::size_t>(y) >= class_count)) {
      throw Error(ErrorKind::out_of_range, detail::location(source, line_no) + ": class id " +
                                               std::to_string(y) + " >= class_count " +
                                               std::to_string(class_count));
    }
    labels.push_back(y);
  }
  if (labels.size() != node_count) {
    throw Error(ErrorKind::format, std::string(source) + ": " + std::to_string(labels.size()) +
                                       " labels for " + std::to_string(node_count) + " nodes");
  }
  return labels;
}

inline std::vector<std::string> read_texts(std::istream& in, std::size_t node_count,
                                           std::string_view source = "<texts>") {
  std::vector<std::string> texts;
  texts.reserve(node_count);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty() && texts.size() == node_count) continue;
    try {
      auto value = nlohmann::json::parse(line);
      if (!value.is_string()) throw Error(ErrorKind::parse, "not a string");
      texts.push_back(value.get<std::string>());
    } catch (const std::exception&) {
      throw Error(ErrorKind::parse,
                  detail::location(source, line_no) + ": expected a JSON string literal");
    }
  }
  if (texts.size() != node_count) {
    throw Error(ErrorKind::format, std::string(source) + ": " + std::to_string(texts.size()) +
                                       " texts for " + std::to_string(node_count) + " nodes");
  }
  return texts;
}

struct LoadedGraph {
  TagGraph graph;
  CanonicalizeStats stats;
};

/// Parses the edge file and canonicalizes it (symmetrize, dedupe, drop self-loops).
inline LoadedGraph load_graph(std::istream& edges, const GraphMetadata& meta,
                              std::string_view source = "<edges>") {
  const auto pairs = read_edge_list(edges, meta.node_count, source);
  LoadedGraph out;
  out.graph = TagGraph::from_pairs(meta.node_count, meta.class_count, pairs, &out.stats);
  out.graph.set_class_names(meta.class_names);
  out.graph.set_task_description(meta.task_description);
  return out;
}

inline LoadedGraph load_graph(const fs::path& edge_path, const GraphMetadata& meta) {
  auto in = open_input(edge_path);
  return load_graph(in, meta, edge_path.string());
}

struct Dataset {
  fs::path directory;
  GraphMetadata meta;
  TagGraph graph;
  CanonicalizeStats stats;

  std::optional<fs::path> resolve(const std::optional<std::string>& file) const {
    if (!file) return std::nullopt;
    fs::path p(*file);
    return p.is_absolute() ? p : directory / p;
  }
};

/// Loads graph, labels and texts referenced by a metadata file. Paths in the
/// metadata are resolved relative to the metadata file.
inline Dataset load_dataset(const fs::path& meta_path) {
  Dataset ds;
  ds.directory = meta_path.parent_path();
  ds.meta = load_metadata(meta_path);
  const auto edges = ds.resolve(ds.meta.edges_file);
  if (!edges) throw Error(ErrorKind::format, meta_path.string() + ": metadata names no edges file");
  auto loaded = load_graph(*edges, ds.meta);
  ds.graph = std::move(loaded.graph);
  ds.stats = loaded.stats;
  if (const auto p = ds.resolve(ds.meta.labels_file)) {
    auto in = open_input(*p);
    ds.graph.set_labels(read_labels(in, ds.meta.node_count, ds.meta.class_count, p->string()));
  }
  if (const auto p = ds.resolve(ds.meta.texts_file)) {
    auto in = open_input(*p);
    ds.graph.set_texts(read_texts(in, ds.meta.node_count, p->string()));
  }
  return ds;
}

inline void write_edge_list(std::ostream& out, const TagGraph& graph) {
  for (const Edge& e : graph.edges()) out << e.u << ' ' << e.v << '\n';
}

inline void write_labels(std::ostream& out, std::span<const ClassId> labels) {
  for (ClassId y : labels) out << y << '\n';
}

inline void write_texts(std::ostream& out, const std::vector<std::string>& texts) {
  for (const auto& t : texts) {
    out << nlohmann::json(t).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

inline std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  return out;
}

/// Writes a file by renaming a fully written temporary into place.
template <class Writer>
void write_atomically(const fs::path& path, Writer&& writer) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    auto out = open_output(tmp);
    writer(out);
    out.flush();
    if (!out) throw Error(ErrorKind::io, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// Writes graph, labels (when any node is labeled) and texts in canonical
/// form plus a meta.json; returns the metadata written. Extra file
/// references already present in `extra` (embeddings etc.) are preserved.
inline GraphMetadata save_dataset(const TagGraph& graph, const fs::path& directory,
                                  GraphMetadata extra = {}) {
  fs::create_directories(directory);
  GraphMetadata meta = std::move(extra);
  meta.node_count = graph.node_count();
  meta.class_count = graph.class_count();
  meta.class_names = graph.class_names();
  meta.task_description = graph.task_description();
  meta.edges_file = "edges.txt";
  write_atomically(directory / "edges.txt", [&](std::ostream& o) { write_edge_list(o, graph); });
  if (graph.any_labeled()) {
    meta.labels_file = "labels.txt";
    write_atomically(directory / "labels.txt",
                     [&](std::ostream& o) { write_labels(o, graph.labels()); });
  } else {
    meta.labels_file.reset();
  }
  if (graph.texts()) {
    meta.texts_file = "texts.txt";
    write_atomically(directory / "texts.txt",
                     [&](std::ostream& o) { write_texts(o, *graph.texts()); });
  } else {
    meta.texts_file.reset();
  }
  write_atomically(directory / "meta.json",
                   [&](std::ostream& o) { o << metadata_to_json(meta).dump(2) << '\n'; });
  return meta;
}

}  // namespace llmbp
