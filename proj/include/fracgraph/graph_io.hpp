#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracgraph/errors.hpp"
#include "fracgraph/graph.hpp"

namespace fracgraph {

/// Parses {"vertices":[{"id":..,"mu":..}], "edges":[{"u":..,"v":..,"w":..}]}.
/// Duplicate edges, self-loops and unknown vertex ids are rejected here; the
/// remaining invariants are checked by require_valid.
inline Graph graph_from_json(const nlohmann::json& doc) {
  using nlohmann::json;
  try {
    const json& vertices = doc.at("vertices");
    const json& edges = doc.at("edges");
    if (!vertices.is_array() || !edges.is_array()) throw Error(ErrorKind::ParseError, "vertices/edges must be arrays");

    std::vector<double> mu;
    std::vector<std::string> labels;
    std::map<std::string, std::size_t> index;
    for (const json& v : vertices) {
      const std::string id = v.at("id").is_string() ? v.at("id").get<std::string>() : v.at("id").dump();
      if (!index.emplace(id, labels.size()).second) throw Error(ErrorKind::ParseError, "duplicate vertex id " + id);
      labels.push_back(id);
      mu.push_back(v.at("mu").get<double>());
    }

    std::vector<Edge> list;
    for (const json& e : edges) {
      auto lookup = [&](const char* key) {
        const std::string id = e.at(key).is_string() ? e.at(key).get<std::string>() : e.at(key).dump();
        const auto it = index.find(id);
        if (it == index.end()) throw Error(ErrorKind::ParseError, "edge references unknown vertex " + id);
        return it->second;
      };
      const std::size_t u = lookup("u");
      const std::size_t v = lookup("v");
      const double w = e.at("w").get<double>();
      if (u == v) throw Error(ErrorKind::SelfLoop, "self-loop at " + labels[u]);
      if (!(w > 0.0)) {
        throw Error(ErrorKind::NonPositiveWeight, "edge " + labels[u] + "-" + labels[v] + " has weight " + std::to_string(w));
      }
      list.push_back({u, v, w});
    }
    Graph g = Graph::from_edges(std::move(mu), list, std::move(labels));
    require_valid(g);
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

inline nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json doc;
  doc["vertices"] = nlohmann::json::array();
  for (std::size_t x = 0; x < g.size(); ++x) doc["vertices"].push_back({{"id", g.labels()[x]}, {"mu", g.measure(x)}});
  doc["edges"] = nlohmann::json::array();
  for (const Edge& e : g.edges()) doc["edges"].push_back({{"u", g.labels()[e.u]}, {"v", g.labels()[e.v]}, {"w", e.w}});
  return doc;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
}

inline Graph load_graph(const std::string& path) { return graph_from_json(read_json_file(path)); }

}  // namespace fracgraph
