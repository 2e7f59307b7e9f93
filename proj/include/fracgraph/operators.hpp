#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fracgraph/errors.hpp"
#include "fracgraph/graph.hpp"
#include "fracgraph/numeric.hpp"
#include "fracgraph/spectral.hpp"

namespace fracgraph {

/// The exponent s together with the dense weights W_s and the vertex measure
/// they were built for. Diagonal entries of W are zero and never read.
struct FractionalKernel {
  double s = 0.5;
  Matrix W;
  std::vector<double> mu;

  std::size_t size() const { return mu.size(); }
};

inline FractionalKernel make_kernel(const SpectralDecomposition& dec, double s) {
  return FractionalKernel{s, kernel_weights(dec, s), dec.mu};
}

inline FractionalKernel make_kernel(const Graph& g, double s) { return make_kernel(decompose(g), s); }

namespace detail {

inline void check_p(double p, double lower_exclusive) {
  require(p > lower_exclusive && std::isfinite(p), ErrorKind::ExponentOutOfRange,
          "p = " + std::to_string(p));
}

}  // namespace detail

/// |grad^s u|(x)^2 = (1/(2 mu(x))) sum_{y != x} W_s(x,y) (u(x) - u(y))^2 at every vertex.
inline VertexFunction frac_gradient_sq(const FractionalKernel& k, std::span<const double> u) {
  detail::require_length(u.size(), k.size(), "vertex function");
  const std::size_t n = k.size();
  VertexFunction out(n);
  for (std::size_t x = 0; x < n; ++x) {
    CompensatedSum acc;
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x) continue;
      const double d = u[x] - u[y];
      acc += k.W(x, y) * d * d;
    }
    out[x] = acc.value() / (2.0 * k.mu[x]);
  }
  return out;
}

inline double frac_gradient_norm(const FractionalKernel& k, std::span<const double> u, std::size_t x) {
  detail::require_length(u.size(), k.size(), "vertex function");
  detail::require(x < k.size(), ErrorKind::LengthMismatch, "vertex index out of range");
  CompensatedSum acc;
  for (std::size_t y = 0; y < k.size(); ++y) {
    if (y == x) continue;
    const double d = u[x] - u[y];
    acc += k.W(x, y) * d * d;
  }
  return std::sqrt(acc.value() / (2.0 * k.mu[x]));
}

/// (-Delta)^s u(x) = (1/mu(x)) sum_{y != x} W_s(x,y) (u(x) - u(y)).
///
/// Differences are taken as u(x) - u(y). This is the orientation under which
/// <(-Delta)^s u, u>_mu >= 0 and the kernel form matches the spectral form.
inline VertexFunction frac_laplacian(const FractionalKernel& k, std::span<const double> u) {
  detail::require_length(u.size(), k.size(), "vertex function");
  const std::size_t n = k.size();
  VertexFunction out(n);
  for (std::size_t x = 0; x < n; ++x) {
    CompensatedSum acc;
    for (std::size_t y = 0; y < n; ++y) {
      if (y != x) acc += k.W(x, y) * (u[x] - u[y]);
    }
    out[x] = acc.value() / k.mu[x];
  }
  return out;
}

/// Per-vertex factors g(x)^{p-2}, with g^2 = |grad^s u|^2 + eps_reg^2.
/// Entries may be +inf when p < 2 and g vanishes.
inline VertexFunction p_factors(const FractionalKernel& k, std::span<const double> u, double p, double eps_reg) {
  VertexFunction f = frac_gradient_sq(k, u);
  for (double& v : f) v = std::pow(v + eps_reg * eps_reg, 0.5 * (p - 2.0));
  return f;
}

/// (-Delta)_p^s u(x) = (1/(2 mu(x))) sum_{y != x} (g(y)^{p-2} + g(x)^{p-2}) W_s(x,y) (u(x) - u(y)).
///
/// p = 2 returns frac_laplacian exactly. Pairs with u(x) = u(y) contribute
/// nothing even when a factor is infinite (0 * inf := 0).
inline VertexFunction frac_p_laplacian(const FractionalKernel& k, std::span<const double> u, double p,
                                       double eps_reg = 1e-12) {
  detail::check_p(p, 1.0);
  detail::require(eps_reg >= 0.0, ErrorKind::InvalidConfig, "eps_reg must be non-negative");
  if (p == 2.0) return frac_laplacian(k, u);
  const VertexFunction f = p_factors(k, u, p, eps_reg);
  const std::size_t n = k.size();
  VertexFunction out(n);
  for (std::size_t x = 0; x < n; ++x) {
    CompensatedSum acc;
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x) continue;
      const double d = u[x] - u[y];
      if (d == 0.0) continue;
      acc += (f[y] + f[x]) * k.W(x, y) * d;
    }
    out[x] = acc.value() / (2.0 * k.mu[x]);
  }
  return out;
}

/// sum_x |grad^s u|(x)^p mu(x).
inline double dirichlet_p_energy(const FractionalKernel& k, std::span<const double> u, double p) {
  detail::require(p >= 1.0, ErrorKind::ExponentOutOfRange, "p = " + std::to_string(p));
  const VertexFunction g2 = frac_gradient_sq(k, u);
  CompensatedSum acc;
  for (std::size_t x = 0; x < k.size(); ++x) {
    const double term = p == 2.0 ? g2[x] : std::pow(g2[x], 0.5 * p);
    acc += term * k.mu[x];
  }
  return acc.value();
}

inline double sobolev_norm(const FractionalKernel& k, std::span<const double> u, double p) {
  const double grad = dirichlet_p_energy(k, u, p);
  CompensatedSum acc;
  for (std::size_t x = 0; x < k.size(); ++x) acc += std::pow(std::abs(u[x]), p) * k.mu[x];
  return std::pow(grad + acc.value(), 1.0 / p);
}

struct IbpTerms {
  double lhs = 0.0;  // int v (-Delta)_p^s u dmu
  double rhs = 0.0;  // int |grad u|^{p-2} grad u . grad v dmu
  double residual() const { return std::abs(lhs - rhs); }
};

/// Both sides of the integration-by-parts identity, with the same
/// regularized factors on each side.
inline IbpTerms ibp_terms(const FractionalKernel& k, std::span<const double> u, std::span<const double> v,
                          double p, double eps_reg = 1e-12) {
  detail::require_length(v.size(), k.size(), "vertex function");
  const VertexFunction lap = frac_p_laplacian(k, u, p, eps_reg);
  const std::size_t n = k.size();
  IbpTerms out;
  CompensatedSum lhs;
  for (std::size_t x = 0; x < n; ++x) lhs += v[x] * lap[x] * k.mu[x];
  out.lhs = lhs.value();

  VertexFunction f(n, 1.0);
  if (p != 2.0) f = p_factors(k, u, p, eps_reg);
  CompensatedSum rhs;
  for (std::size_t x = 0; x < n; ++x) {
    CompensatedSum dot;
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x) continue;
      const double du = u[x] - u[y];
      if (du == 0.0) continue;
      dot += k.W(x, y) * du * (v[x] - v[y]);
    }
    // mu(x) cancels against the 1/(2 mu(x)) of the gradient inner product.
    rhs += f[x] * dot.value() / 2.0;
  }
  out.rhs = rhs.value();
  return out;
}

inline double ibp_residual(const FractionalKernel& k, std::span<const double> u, std::span<const double> v,
                           double p, double eps_reg = 1e-12) {
  return ibp_terms(k, u, v, p, eps_reg).residual();
}

}  // namespace fracgraph
