#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fracgraph/errors.hpp"
#include "fracgraph/graph.hpp"
#include "fracgraph/numeric.hpp"

namespace fracgraph {

/// Gamma function restricted to (0, 2), the range needed for Gamma(1 - s).
inline double gamma(double z) {
  detail::require(z > 0.0 && z < 2.0, ErrorKind::DomainError,
                  "gamma argument " + std::to_string(z) + " outside (0, 2)");
  return std::tgamma(z);
}

struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;  // column k is the eigenvector for values[k]
  int sweeps = 0;
  bool converged = false;
};

/// Cyclic Jacobi rotations for a dense symmetric matrix. Stops once the
/// off-diagonal Frobenius norm falls below rel_tol * ||a||_F.
inline SymmetricEigen jacobi_eigen(Matrix a, double rel_tol = 1e-13, int max_sweeps = 50) {
  const std::size_t n = a.rows();
  SymmetricEigen out;
  out.vectors = Matrix::identity(n);
  Matrix& v = out.vectors;
  const double threshold = rel_tol * a.frobenius_norm();

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  while (true) {
    if (off_norm() <= threshold) {
      out.converged = true;
      break;
    }
    if (out.sweeps >= max_sweeps) break;
    ++out.sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
  return out;
}

/// Eigenpairs of -Delta, orthonormal in the mu-inner product.
///
/// Row i of `eigenfunctions` holds phi_i; eigenvalues ascend and the first is
/// exactly zero.
struct SpectralDecomposition {
  std::vector<double> eigenvalues;
  Matrix eigenfunctions;
  std::vector<double> mu;

  std::size_t size() const { return mu.size(); }
  std::span<const double> phi(std::size_t i) const { return eigenfunctions.row(i); }
};

struct DecomposeOptions {
  double tol = 1e-13;
  int max_sweeps = 50;
  double zero_snap = 1e-10;  // relative to the largest eigenvalue
};

inline SpectralDecomposition decompose(const Graph& g, const DecomposeOptions& opts = {}) {
  require_valid(g);
  const std::size_t n = g.size();

  // Symmetric conjugate M^{1/2} A M^{-1/2} of the operator matrix.
  Matrix sym(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    sym(x, x) = g.degree(x) / g.measure(x);
    for (const Neighbor& nb : g.neighbors(x)) {
      sym(x, nb.vertex) = -nb.weight / std::sqrt(g.measure(x) * g.measure(nb.vertex));
    }
  }
  SymmetricEigen eig = jacobi_eigen(std::move(sym), opts.tol, opts.max_sweeps);
  if (!eig.converged) {
    throw Error(ErrorKind::NoConvergence,
                "Jacobi iteration exceeded " + std::to_string(opts.max_sweeps) + " sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return eig.values[a] < eig.values[b]; });

  SpectralDecomposition dec;
  dec.mu.assign(g.measures().begin(), g.measures().end());
  dec.eigenvalues.resize(n);
  dec.eigenfunctions = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t col = order[i];
    dec.eigenvalues[i] = eig.values[col];
    std::span<double> phi = dec.eigenfunctions.row(i);
    std::size_t lead = 0;
    for (std::size_t x = 0; x < n; ++x) {
      phi[x] = eig.vectors(x, col) / std::sqrt(g.measure(x));
      if (std::abs(phi[x]) > std::abs(phi[lead])) lead = x;
    }
    if (phi[lead] < 0.0) {
      for (double& v : phi) v = -v;
    }
  }

  const double lambda_max = dec.eigenvalues.back();
  if (!(std::abs(dec.eigenvalues[0]) < opts.zero_snap * lambda_max)) {
    throw Error(ErrorKind::NoConvergence,
                "smallest eigenvalue " + std::to_string(dec.eigenvalues[0]) + " is not numerically zero");
  }
  dec.eigenvalues[0] = 0.0;
  if (!(dec.eigenvalues[1] > opts.zero_snap * lambda_max)) {
    throw Error(ErrorKind::NoConvergence, "second eigenvalue is not positive");
  }
  return dec;
}

/// h(t, x, y) = sum_i exp(-lambda_i t) phi_i(x) phi_i(y).
inline double heat_kernel(const SpectralDecomposition& dec, double t, std::size_t x, std::size_t y) {
  detail::require(t >= 0.0, ErrorKind::NegativeTime, "t = " + std::to_string(t));
  CompensatedSum acc;
  for (std::size_t i = 0; i < dec.size(); ++i) {
    acc += std::exp(-dec.eigenvalues[i] * t) * dec.phi(i)[x] * dec.phi(i)[y];
  }
  return acc.value();
}

namespace detail {

inline void require_open_unit(double s) {
  require(s > 0.0 && s < 1.0, ErrorKind::ExponentOutOfRange,
          "s = " + std::to_string(s) + " outside (0, 1)");
}

}  // namespace detail

/// -mu(x) mu(y) sum_i lambda_i^s phi_i(x) phi_i(y) for x != y, for any s in
/// [0, 1]. No range or sign checks; at s = 1 this reproduces the edge weights.
inline Matrix spectral_weights(const SpectralDecomposition& dec, double s) {
  const std::size_t n = dec.size();
  std::vector<double> powers(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (dec.eigenvalues[i] > 0.0) powers[i] = std::pow(dec.eigenvalues[i], s);
  }
  Matrix w(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      CompensatedSum acc;
      for (std::size_t i = 0; i < n; ++i) acc += powers[i] * dec.phi(i)[x] * dec.phi(i)[y];
      w(x, y) = w(y, x) = -dec.mu[x] * dec.mu[y] * acc.value();
    }
  }
  return w;
}

/// Fractional kernel W_s for s in (0, 1). Throws PositivityViolation when an
/// off-diagonal entry falls below -1e-12 times the largest entry.
inline Matrix kernel_weights(const SpectralDecomposition& dec, double s) {
  detail::require_open_unit(s);
  Matrix w = spectral_weights(dec, s);
  const double scale = w.max_abs();
  for (std::size_t x = 0; x < dec.size(); ++x) {
    for (std::size_t y = x + 1; y < dec.size(); ++y) {
      if (w(x, y) < -1e-12 * scale) {
        throw Error(ErrorKind::PositivityViolation,
                    "W_s(" + std::to_string(x) + "," + std::to_string(y) + ") = " + std::to_string(w(x, y)));
      }
    }
  }
  return w;
}

struct QuadratureConfig {
  double tau_min = -40.0;
  double tau_max = 40.0;
  int panels = 8192;       // Simpson panels; must be even
  double rel_tol = 1e-8;   // allowed disagreement with the half-resolution rule
};

namespace detail {

/// Simpson weights on a uniform tau grid, for N and N/2 panels.
struct LogGrid {
  std::vector<double> t;
  std::vector<double> fine;
  std::vector<double> coarse;
};

/// Nodes t_k = exp(tau_k) and weights for int f(t) t^{-1-s} dt = int f(e^tau) e^{-s tau} dtau.
inline LogGrid make_log_grid(const QuadratureConfig& cfg, double s) {
  require(cfg.panels >= 4 && cfg.panels % 4 == 0, ErrorKind::InvalidConfig,
          "panel count must be a positive multiple of 4");
  require(cfg.tau_min < cfg.tau_max, ErrorKind::InvalidConfig, "empty tau range");
  const int n = cfg.panels;
  const double h = (cfg.tau_max - cfg.tau_min) / n;
  LogGrid grid;
  grid.t.resize(n + 1);
  grid.fine.resize(n + 1);
  grid.coarse.assign(n + 1, 0.0);
  for (int k = 0; k <= n; ++k) {
    const double tau = cfg.tau_min + k * h;
    const double jac = std::exp(-s * tau);
    grid.t[k] = std::exp(tau);
    const double cf = (k == 0 || k == n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    grid.fine[k] = cf * h / 3.0 * jac;
    if (k % 2 == 0) {
      const int j = k / 2;
      const int m = n / 2;
      const double cc = (j == 0 || j == m) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      grid.coarse[k] = cc * 2.0 * h / 3.0 * jac;
    }
  }
  return grid;
}

}  // namespace detail

/// (s / Gamma(1-s)) int_0^inf (1 - e^{-lambda t}) t^{-1-s} dt, which equals
/// lambda^s. Both truncated tails are added in closed form.
inline double fractional_power_quadrature(double lambda, double s, const QuadratureConfig& cfg = {}) {
  detail::require_open_unit(s);
  detail::require(lambda >= 0.0, ErrorKind::DomainError, "negative eigenvalue");
  const detail::LogGrid grid = detail::make_log_grid(cfg, s);
  CompensatedSum fine, coarse;
  for (std::size_t k = 0; k < grid.t.size(); ++k) {
    const double f = -std::expm1(-lambda * grid.t[k]);
    fine += grid.fine[k] * f;
    coarse += grid.coarse[k] * f;
  }
  const double t_lo = std::exp(cfg.tau_min);
  const double t_hi = std::exp(cfg.tau_max);
  const double lower = lambda * std::pow(t_lo, 1.0 - s) / (1.0 - s) -
                       0.5 * lambda * lambda * std::pow(t_lo, 2.0 - s) / (2.0 - s);
  const double upper = lambda > 0.0 ? std::pow(t_hi, -s) / s : 0.0;
  const double scale = s / gamma(1.0 - s);
  const double value = scale * (fine.value() + lower + upper);
  const double alt = scale * (coarse.value() + lower + upper);
  if (std::abs(value - alt) > cfg.rel_tol * std::max(std::abs(value), 1e-300)) {
    throw Error(ErrorKind::QuadratureNotConverged, "power quadrature did not settle");
  }
  return value;
}

/// W_s by direct quadrature of the heat kernel,
///   W_s(x,y) = (s / Gamma(1-s)) mu(x) mu(y) int_0^inf h(t,x,y) t^{-1-s} dt.
///
/// For x != y the heat kernel is evaluated as sum_i expm1(-lambda_i t)
/// phi_i(x) phi_i(y), which stays accurate as t -> 0 where h(t,x,y) = O(t).
/// The pieces below t = e^{tau_min} and above t = e^{tau_max} are added from
/// the two-term Taylor expansion and the constant-mode limit respectively.
inline Matrix kernel_weights_oracle(const SpectralDecomposition& dec, double s, const QuadratureConfig& cfg = {}) {
  detail::require_open_unit(s);
  const std::size_t n = dec.size();
  const detail::LogGrid grid = detail::make_log_grid(cfg, s);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y) pairs.emplace_back(x, y);

  // prod(p, i) = phi_i(x) phi_i(y) for pair p.
  Matrix prod(pairs.size(), n);
  for (std::size_t p = 0; p < pairs.size(); ++p)
    for (std::size_t i = 0; i < n; ++i)
      prod(p, i) = dec.phi(i)[pairs[p].first] * dec.phi(i)[pairs[p].second];

  std::vector<CompensatedSum> fine(pairs.size()), coarse(pairs.size());
  std::vector<double> decay(n);
  for (std::size_t k = 0; k < grid.t.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) decay[i] = std::expm1(-dec.eigenvalues[i] * grid.t[k]);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      double h = 0.0;
      for (std::size_t i = 0; i < n; ++i) h += decay[i] * prod(p, i);
      fine[p] += grid.fine[k] * h;
      if (grid.coarse[k] != 0.0) coarse[p] += grid.coarse[k] * h;
    }
  }

  const double t_lo = std::exp(cfg.tau_min);
  const double t_hi = std::exp(cfg.tau_max);
  const double scale = s / gamma(1.0 - s);
  Matrix w(n, n);
  Matrix w_coarse(n, n);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    CompensatedSum c1, c2, limit;
    for (std::size_t i = 0; i < n; ++i) {
      const double lam = dec.eigenvalues[i];
      c1 += -lam * prod(p, i);
      c2 += 0.5 * lam * lam * prod(p, i);
      if (lam > 0.0) limit += -prod(p, i);
    }
    const double lower = c1.value() * std::pow(t_lo, 1.0 - s) / (1.0 - s) +
                         c2.value() * std::pow(t_lo, 2.0 - s) / (2.0 - s);
    const double upper = limit.value() * std::pow(t_hi, -s) / s;
    const auto [x, y] = pairs[p];
    const double mass = scale * dec.mu[x] * dec.mu[y];
    w(x, y) = w(y, x) = mass * (fine[p].value() + lower + upper);
    w_coarse(x, y) = mass * (coarse[p].value() + lower + upper);
  }

  const double floor = 1e-6 * w.max_abs();
  for (const auto& [x, y] : pairs) {
    if (std::abs(w(x, y) - w_coarse(x, y)) > cfg.rel_tol * std::max(std::abs(w(x, y)), floor)) {
      throw Error(ErrorKind::QuadratureNotConverged,
                  "entry (" + std::to_string(x) + "," + std::to_string(y) + ") did not settle");
    }
  }
  return w;
}

/// sum_i lambda_i^s <u, phi_i>_mu phi_i.
inline VertexFunction fractional_laplacian_spectral(const SpectralDecomposition& dec, double s,
                                                    std::span<const double> u) {
  detail::require_open_unit(s);
  const std::size_t n = dec.size();
  detail::require_length(u.size(), n, "vertex function");
  std::vector<double> coeff(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (dec.eigenvalues[i] <= 0.0) continue;
    CompensatedSum c;
    for (std::size_t x = 0; x < n; ++x) c += u[x] * dec.phi(i)[x] * dec.mu[x];
    coeff[i] = std::pow(dec.eigenvalues[i], s) * c.value();
  }
  VertexFunction out(n);
  for (std::size_t x = 0; x < n; ++x) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < n; ++i) acc += coeff[i] * dec.phi(i)[x];
    out[x] = acc.value();
  }
  return out;
}

}  // namespace fracgraph
