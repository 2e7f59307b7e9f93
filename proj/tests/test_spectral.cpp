#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fracgraph/fracgraph.hpp"
#include "oracles.hpp"

using namespace fracgraph;

namespace {

Graph k2() { return complete_graph(2); }

double mean(const Graph& g, std::span<const double> u) { return integrate(g, u) / g.volume(); }

}  // namespace

TEST(Gamma, ClassicalValues) {
  EXPECT_NEAR(fracgraph::gamma(1.0), 1.0, 1e-12);
  EXPECT_NEAR(fracgraph::gamma(0.5), 1.7724538509, 1e-10);
  EXPECT_NEAR(fracgraph::gamma(1.5), 0.8862269255, 1e-10);
  EXPECT_THROW(fracgraph::gamma(0.0), Error);
  EXPECT_THROW(fracgraph::gamma(2.0), Error);
}

TEST(Decompose, ClosedFormSpectra) {
  const SpectralDecomposition a = decompose(k2());
  EXPECT_EQ(a.eigenvalues[0], 0.0);
  EXPECT_NEAR(a.eigenvalues[1], 2.0, 1e-12);

  const SpectralDecomposition b = decompose(path_graph(3));
  EXPECT_EQ(b.eigenvalues[0], 0.0);
  EXPECT_NEAR(b.eigenvalues[1], 1.0, 1e-12);
  EXPECT_NEAR(b.eigenvalues[2], 3.0, 1e-12);
}

TEST(Decompose, GroundStateIsConstant) {
  const Graph g = oracle::random_graph(9, 4);
  const SpectralDecomposition d = decompose(g);
  const double c = 1.0 / std::sqrt(g.volume());
  for (double v : d.phi(0)) EXPECT_NEAR(v, c, 1e-12);
}

TEST(Decompose, OrthonormalAndReconstructs) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    SplitMix64 pick(seed);
    const Graph g = oracle::random_graph(pick.index(2, 12), seed * 31);
    const SpectralDecomposition d = decompose(g);
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double ip = inner_product(g, d.phi(i), d.phi(j));
        EXPECT_NEAR(ip, i == j ? 1.0 : 0.0, 1e-10) << "seed " << seed;
      }
    }
    const VertexFunction u = random_uniform(n, -2, 2, seed);
    const VertexFunction lu = laplacian_apply(g, u);
    VertexFunction rec(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double c = d.eigenvalues[i] * inner_product(g, u, d.phi(i));
      for (std::size_t x = 0; x < n; ++x) rec[x] += c * d.phi(i)[x];
    }
    EXPECT_LE(max_abs_diff(rec, lu), 1e-10 * std::max(1.0, max_abs(lu))) << "seed " << seed;
  }
}

TEST(Decompose, EigenSignConvention) {
  const SpectralDecomposition d = decompose(oracle::random_graph(8, 77));
  for (std::size_t i = 0; i < d.size(); ++i) {
    double best = 0.0;
    for (double v : d.phi(i))
      if (std::abs(v) > std::abs(best)) best = v;
    EXPECT_GT(best, 0.0);
  }
}

TEST(HeatKernel, Examples) {
  const SpectralDecomposition d = decompose(k2());
  EXPECT_NEAR(heat_kernel(d, 1.0, 0, 1), 0.4323323584, 1e-10);
  EXPECT_NEAR(heat_kernel(d, 60.0, 0, 1), 0.5, 1e-12);
  EXPECT_THROW(heat_kernel(d, -1.0, 0, 1), Error);

  const Graph g = oracle::random_graph(6, 5);
  const SpectralDecomposition e = decompose(g);
  for (std::size_t x = 0; x < 6; ++x)
    for (std::size_t y = 0; y < 6; ++y)
      EXPECT_NEAR(heat_kernel(e, 0.0, x, y), x == y ? 1.0 / g.measure(y) : 0.0, 1e-12);
}

TEST(HeatKernel, Semigroup) {
  const Graph g = oracle::random_graph(7, 12);
  const SpectralDecomposition d = decompose(g);
  const double t = 0.37, r = 1.4;
  for (std::size_t x = 0; x < 7; ++x) {
    for (std::size_t y = 0; y < 7; ++y) {
      double acc = 0.0;
      for (std::size_t z = 0; z < 7; ++z) acc += heat_kernel(d, t, x, z) * heat_kernel(d, r, z, y) * g.measure(z);
      EXPECT_NEAR(heat_kernel(d, t + r, x, y), acc, 1e-10);
    }
  }
}

TEST(Kernel, TwoPointClosedForm) {
  const SpectralDecomposition d = decompose(k2());
  for (double s : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    const Matrix w = kernel_weights(d, s);
    EXPECT_NEAR(w(0, 1), std::pow(2.0, s - 1.0), 1e-12);
    EXPECT_EQ(w(0, 0), 0.0);
  }
  EXPECT_NEAR(kernel_weights_oracle(d, 0.5)(0, 1), 0.7071067812, 1e-10);
}

TEST(Kernel, RangeChecked) {
  const SpectralDecomposition d = decompose(k2());
  EXPECT_THROW(kernel_weights(d, 0.0), Error);
  EXPECT_THROW(kernel_weights(d, 1.0), Error);
  EXPECT_THROW(kernel_weights(d, 1.5), Error);
}

TEST(Kernel, PositiveAndSymmetricOnRandomGraphs) {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const Graph g = oracle::random_graph(8, seed);
    const SpectralDecomposition d = decompose(g);
    for (double s : {0.1, 0.5, 0.9}) {
      const Matrix w = kernel_weights(d, s);
      for (std::size_t x = 0; x < 8; ++x) {
        for (std::size_t y = 0; y < 8; ++y) {
          if (x == y) continue;
          EXPECT_GT(w(x, y), 0.0);
          EXPECT_EQ(w(x, y), w(y, x));
        }
      }
    }
  }
}

// Kernel from the Balakrishnan integral of A^s, no eigensolver involved.
TEST(Kernel, MatchesMatrixPowerOracle) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Graph g = oracle::random_graph(3 + seed, seed * 13);
    const SpectralDecomposition d = decompose(g);
    for (double s : {0.25, 0.5, 0.75}) {
      const Matrix w = kernel_weights(d, s);
      const Matrix ref = oracle::kernel_from_power(g, s);
      for (std::size_t x = 0; x < g.size(); ++x)
        for (std::size_t y = 0; y < g.size(); ++y)
          if (x != y) {
            EXPECT_NEAR(w(x, y), ref(x, y), 1e-9 * std::max(1.0, std::abs(ref(x, y))));
          }
    }
  }
}

TEST(Quadrature, ScalarPower) {
  EXPECT_NEAR(fractional_power_quadrature(2.0, 0.5), std::sqrt(2.0), 1e-10);
  for (double lambda : {1e-3, 0.4, 7.0, 250.0})
    for (double s : {0.1, 0.5, 0.9})
      EXPECT_NEAR(fractional_power_quadrature(lambda, s) / std::pow(lambda, s), 1.0, 1e-9);
}

TEST(Quadrature, OracleAgreesWithSpectralKernel) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Graph g = oracle::random_graph(2 + seed, seed * 101);
    const SpectralDecomposition d = decompose(g);
    for (double s : {0.1, 0.9}) {
      const Matrix a = kernel_weights(d, s);
      const Matrix b = kernel_weights_oracle(d, s);
      for (std::size_t x = 0; x < g.size(); ++x)
        for (std::size_t y = 0; y < g.size(); ++y)
          if (x != y) {
            EXPECT_LE(std::abs(a(x, y) - b(x, y)), 1e-6 * b(x, y));
          }
    }
  }
}

TEST(Quadrature, TooCoarseGridReported) {
  QuadratureConfig cfg;
  cfg.panels = 16;
  try {
    kernel_weights_oracle(decompose(oracle::random_graph(5, 2)), 0.3, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::QuadratureNotConverged);
  }
}

TEST(Kernel, UnitOrderCollapse) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Graph g = oracle::random_graph(2 + seed % 11, seed * 7);
    const SpectralDecomposition d = decompose(g);
    const Matrix w1 = spectral_weights(d, 1.0);
    double wmax = 0.0;
    for (const Edge& e : g.edges()) wmax = std::max(wmax, e.w);
    for (std::size_t x = 0; x < g.size(); ++x)
      for (std::size_t y = 0; y < g.size(); ++y)
        if (x != y) {
          EXPECT_NEAR(w1(x, y), g.weight(x, y), 1e-10 * wmax);
        }
  }
}

TEST(FractionalLaplacianSpectral, ConstantAndLimits) {
  const Graph g = oracle::random_graph(7, 21);
  const SpectralDecomposition d = decompose(g);
  const VertexFunction c(7, 2.5);
  EXPECT_LE(max_abs(fractional_laplacian_spectral(d, 0.4, c)), 1e-12);

  const VertexFunction u = random_uniform(7, -1, 1, 8);
  VertexFunction centered = u;
  const double m = mean(g, u);
  for (double& v : centered) v -= m;
  const VertexFunction lap = laplacian_apply(g, u);

  EXPECT_LE(max_abs_diff(fractional_laplacian_spectral(d, 0.001, u), centered), 0.02);
  EXPECT_LE(max_abs_diff(fractional_laplacian_spectral(d, 0.999, u), lap), 0.02 * max_abs(lap));

  // Monotone approach in 0.1 steps toward each end.
  double prev = INFINITY;
  for (double s = 0.9; s > 0.0; s -= 0.1) {
    const double err = max_abs_diff(fractional_laplacian_spectral(d, s, u), centered);
    EXPECT_LT(err, prev) << "s = " << s;
    prev = err;
  }
  prev = INFINITY;
  for (double s = 0.1; s < 1.0; s += 0.1) {
    const double err = max_abs_diff(fractional_laplacian_spectral(d, s, u), lap);
    EXPECT_LT(err, prev) << "s = " << s;
    prev = err;
  }
}

TEST(FractionalLaplacianSpectral, MatchesKernelForm) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Graph g = oracle::random_graph(2 + seed % 10, seed * 3);
    const SpectralDecomposition d = decompose(g);
    const VertexFunction u = random_uniform(g.size(), -2, 2, seed);
    for (double s : {0.2, 0.6}) {
      const VertexFunction a = fractional_laplacian_spectral(d, s, u);
      const VertexFunction b = frac_laplacian(make_kernel(d, s), u);
      EXPECT_LE(max_abs_diff(a, b), 1e-12 * std::max(1.0, max_abs(a)));
    }
  }
}
