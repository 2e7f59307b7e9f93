#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracgraph/errors.hpp"
#include "fracgraph/numeric.hpp"

namespace fracgraph {

/// One real value per vertex, indexed like the owning Graph.
using VertexFunction = std::vector<double>;

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  double w = 0.0;
};

struct Neighbor {
  std::size_t vertex;
  double weight;
};

struct ValidationIssue {
  ErrorKind kind;
  std::vector<std::size_t> vertices;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  bool has(ErrorKind kind) const {
    return std::any_of(issues.begin(), issues.end(),
                       [kind](const ValidationIssue& i) { return i.kind == kind; });
  }
};

/// Finite weighted graph G = (V, E, mu, w) with dense vertex indices.
///
/// Weights are kept as a dense n x n table; a zero entry means "no edge".
/// Construction does not validate; call validate() or require_valid().
class Graph {
 public:
  Graph() = default;

  Graph(std::vector<double> mu, Matrix weights, std::vector<std::string> labels = {})
      : mu_(std::move(mu)), weights_(std::move(weights)), labels_(std::move(labels)) {
    detail::require_length(weights_.rows(), mu_.size(), "weight matrix rows");
    detail::require_length(weights_.cols(), mu_.size(), "weight matrix cols");
    if (labels_.empty()) {
      labels_.reserve(mu_.size());
      for (std::size_t i = 0; i < mu_.size(); ++i) labels_.push_back(std::to_string(i));
    }
    detail::require_length(labels_.size(), mu_.size(), "labels");
    build_adjacency();
  }

  /// Builds a symmetric graph from an undirected edge list. Repeated pairs are
  /// rejected; self-loops are stored so that validate() can report them.
  static Graph from_edges(std::vector<double> mu, std::span<const Edge> edges,
                          std::vector<std::string> labels = {}) {
    const std::size_t n = mu.size();
    Matrix w(n, n);
    Matrix seen(n, n);
    for (const Edge& e : edges) {
      detail::require(e.u < n && e.v < n, ErrorKind::InvalidConfig,
                      "edge endpoint out of range: " + std::to_string(e.u) + "-" + std::to_string(e.v));
      detail::require(seen(e.u, e.v) == 0.0, ErrorKind::DuplicateEdge,
                      "edge " + std::to_string(e.u) + "-" + std::to_string(e.v) + " listed twice");
      seen(e.u, e.v) = seen(e.v, e.u) = 1.0;
      w(e.u, e.v) = e.w;
      w(e.v, e.u) = e.w;
    }
    return Graph(std::move(mu), std::move(w), std::move(labels));
  }

  std::size_t size() const { return mu_.size(); }
  double measure(std::size_t x) const { return mu_[x]; }
  std::span<const double> measures() const { return mu_; }
  double weight(std::size_t x, std::size_t y) const { return weights_(x, y); }
  const Matrix& weights() const { return weights_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::span<const Neighbor> neighbors(std::size_t x) const { return adjacency_[x]; }

  /// Weighted degree sum_y w_xy (self-loops excluded).
  double degree(std::size_t x) const {
    CompensatedSum acc;
    for (const Neighbor& nb : adjacency_[x]) acc += nb.weight;
    return acc.value();
  }

  double volume() const {
    CompensatedSum acc;
    for (double m : mu_) acc += m;
    return acc.value();
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t x = 0; x < size(); ++x) {
      for (std::size_t y = x + 1; y < size(); ++y) {
        if (weights_(x, y) != 0.0) out.push_back({x, y, weights_(x, y)});
      }
    }
    return out;
  }

 private:
  void build_adjacency() {
    adjacency_.assign(size(), {});
    for (std::size_t x = 0; x < size(); ++x) {
      for (std::size_t y = 0; y < size(); ++y) {
        if (x != y && weights_(x, y) != 0.0) adjacency_[x].push_back({y, weights_(x, y)});
      }
    }
  }

  std::vector<double> mu_;
  Matrix weights_;
  std::vector<std::string> labels_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

inline ValidationReport validate(const Graph& g) {
  ValidationReport report;
  const std::size_t n = g.size();
  if (n < 2) {
    report.issues.push_back({ErrorKind::Disconnected, {}, "graph needs at least two vertices"});
    return report;
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (!(g.measure(x) > 0.0) || !std::isfinite(g.measure(x))) {
      report.issues.push_back({ErrorKind::NonPositiveMeasure, {x},
                               "mu(" + g.labels()[x] + ") = " + std::to_string(g.measure(x))});
    }
    if (g.weight(x, x) != 0.0) {
      report.issues.push_back({ErrorKind::SelfLoop, {x}, "self-loop at " + g.labels()[x]});
    }
  }
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      const double a = g.weight(x, y);
      const double b = g.weight(y, x);
      const std::string pair = g.labels()[x] + "-" + g.labels()[y];
      if (a != b) {
        report.issues.push_back({ErrorKind::AsymmetricWeight, {x, y},
                                 "w(" + pair + ") = " + std::to_string(a) + " but w(reverse) = " +
                                     std::to_string(b)});
      }
      if (a < 0.0 || b < 0.0 || !std::isfinite(a) || !std::isfinite(b)) {
        report.issues.push_back({ErrorKind::NonPositiveWeight, {x, y},
                                 "edge " + pair + " has weight " + std::to_string(std::min(a, b))});
      }
    }
  }

  // Breadth-first search over positive-weight edges from vertex 0.
  std::vector<bool> reached(n, false);
  std::queue<std::size_t> frontier;
  reached[0] = true;
  frontier.push(0);
  while (!frontier.empty()) {
    const std::size_t x = frontier.front();
    frontier.pop();
    for (const Neighbor& nb : g.neighbors(x)) {
      if (nb.weight > 0.0 && !reached[nb.vertex]) {
        reached[nb.vertex] = true;
        frontier.push(nb.vertex);
      }
    }
  }
  std::vector<std::size_t> unreached;
  for (std::size_t x = 0; x < n; ++x) {
    if (!reached[x]) unreached.push_back(x);
  }
  if (!unreached.empty()) {
    std::string names;
    for (std::size_t x : unreached) names += (names.empty() ? "" : ",") + g.labels()[x];
    report.issues.push_back({ErrorKind::Disconnected, unreached,
                             "not reachable from " + g.labels()[0] + ": " + names});
  }
  return report;
}

/// Throws the first validation issue, if any.
inline void require_valid(const Graph& g) {
  const ValidationReport report = validate(g);
  if (!report.ok()) throw Error(report.issues.front().kind, report.issues.front().message);
}

/// Sum_x f(x) mu(x).
inline double integrate(const Graph& g, std::span<const double> f) {
  detail::require_length(f.size(), g.size(), "vertex function");
  CompensatedSum acc;
  for (std::size_t x = 0; x < g.size(); ++x) acc += f[x] * g.measure(x);
  return acc.value();
}

/// <f, h>_mu = sum_x f(x) h(x) mu(x).
inline double inner_product(const Graph& g, std::span<const double> f, std::span<const double> h) {
  detail::require_length(f.size(), g.size(), "vertex function");
  detail::require_length(h.size(), g.size(), "vertex function");
  CompensatedSum acc;
  for (std::size_t x = 0; x < g.size(); ++x) acc += f[x] * h[x] * g.measure(x);
  return acc.value();
}

/// (-Delta u)(x) = (1/mu(x)) sum_{y~x} w_xy (u(x) - u(y)).
inline VertexFunction laplacian_apply(const Graph& g, std::span<const double> u) {
  detail::require_length(u.size(), g.size(), "vertex function");
  VertexFunction out(g.size());
  for (std::size_t x = 0; x < g.size(); ++x) {
    CompensatedSum acc;
    for (const Neighbor& nb : g.neighbors(x)) acc += nb.weight * (u[x] - u[nb.vertex]);
    out[x] = acc.value() / g.measure(x);
  }
  return out;
}

/// Operator matrix of -Delta: A[x][x] = deg(x)/mu(x), A[x][y] = -w_xy/mu(x).
inline Matrix laplacian_matrix(const Graph& g) {
  const std::size_t n = g.size();
  Matrix a(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    for (const Neighbor& nb : g.neighbors(x)) a(x, nb.vertex) = -nb.weight / g.measure(x);
    a(x, x) = g.degree(x) / g.measure(x);
  }
  return a;
}

}  // namespace fracgraph
