#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "fracgraph/graph.hpp"

namespace fracgraph {

/// SplitMix64: a counter-based 64-bit generator. The k-th output depends only
/// on (seed, k), which keeps generated instances reproducible across ports.
class SplitMix64 {
 public:
  static constexpr std::string_view kName = "splitmix64";

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  std::size_t index(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(uniform() * static_cast<double>(hi - lo + 1));
  }

  /// Independent stream derived from this one.
  SplitMix64 split() { return SplitMix64(next()); }

 private:
  std::uint64_t state_;
};

inline VertexFunction random_uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
  SplitMix64 rng(seed);
  VertexFunction u(n);
  for (double& v : u) v = rng.uniform(lo, hi);
  return u;
}

struct RandomGraphSpec {
  std::size_t n = 8;
  double min_value = 0.2;    // bounds for both weights and measures
  double max_value = 5.0;
  double extra_edge_probability = 0.3;
};

/// Connected random graph: a random spanning tree (each vertex attaches to an
/// earlier one) plus independent extra edges.
inline Graph random_connected_graph(const RandomGraphSpec& spec, SplitMix64& rng) {
  const std::size_t n = spec.n;
  std::vector<double> mu(n);
  for (double& m : mu) m = rng.uniform(spec.min_value, spec.max_value);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(0, i - 1)]);

  Matrix w(n, n);
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t a = perm[i];
    const std::size_t b = perm[rng.index(0, i - 1)];
    w(a, b) = w(b, a) = rng.uniform(spec.min_value, spec.max_value);
  }
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      if (w(x, y) == 0.0 && rng.uniform() < spec.extra_edge_probability) {
        w(x, y) = w(y, x) = rng.uniform(spec.min_value, spec.max_value);
      }
    }
  }
  return Graph(std::move(mu), std::move(w));
}

/// Complete graph K_n with unit weights and measures.
inline Graph complete_graph(std::size_t n) {
  Matrix w(n, n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      if (x != y) w(x, y) = 1.0;
  return Graph(std::vector<double>(n, 1.0), std::move(w));
}

/// Path P_n with unit weights and measures.
inline Graph path_graph(std::size_t n) {
  Matrix w(n, n);
  for (std::size_t x = 0; x + 1 < n; ++x) w(x, x + 1) = w(x + 1, x) = 1.0;
  return Graph(std::vector<double>(n, 1.0), std::move(w));
}

}  // namespace fracgraph
