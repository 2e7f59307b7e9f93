// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fracgraph/fracgraph.hpp"

using namespace fracgraph;

namespace {

constexpr std::uint64_t kSeed = 20240611;
const double kS[] = {0.1, 0.25, 0.5, 0.75, 0.9};
const double kP[] = {1.5, 2.0, 3.0};
const double kQ[] = {0.5, 1.0, 2.0};

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Graph draw_graph(SplitMix64& rng, std::size_t lo, std::size_t hi) {
  RandomGraphSpec spec;
  spec.n = rng.index(lo, hi);
  SplitMix64 sub = rng.split();
  return random_connected_graph(spec, sub);
}

std::vector<Graph> kernel_instances() {
  SplitMix64 rng(kSeed);
  std::vector<Graph> out;
  for (int i = 0; i < 50; ++i) out.push_back(draw_graph(rng, 2, 12));
  return out;
}

struct FlowInstance {
  Graph g;
  double s, p, q;
  VertexFunction u0;
};

std::vector<FlowInstance> flow_instances() {
  SplitMix64 rng(kSeed + 1);
  std::vector<FlowInstance> out;
  for (int i = 0; i < 20; ++i) {
    FlowInstance f;
    f.g = draw_graph(rng, 2, 8);
    f.s = kS[rng.index(0, 4)];
    f.p = kP[rng.index(0, 2)];
    f.q = kQ[rng.index(0, 2)];
    f.u0 = random_uniform(f.g.size(), 0.5, 2.0, rng.next());
    out.push_back(std::move(f));
  }
  return out;
}

FlowConfig flow_config(double s, double p, double q, double T, double dt_out = 0.0) {
  FlowConfig c;
  c.s = s;
  c.p = p;
  c.q = q;
  c.T = T;
  c.dt_out = dt_out;
  return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome kernel_positivity() {
  const auto t0 = std::chrono::steady_clock::now();
  double min_ratio = INFINITY, worst_asym = 0.0;
  bool ok = true;
  for (const Graph& g : kernel_instances()) {
    const SpectralDecomposition d = decompose(g);
    for (double s : kS) {
      const Matrix w = kernel_weights(d, s);
      const double scale = w.max_abs();
      for (std::size_t x = 0; x < g.size(); ++x) {
        for (std::size_t y = 0; y < g.size(); ++y) {
          if (x == y) continue;
          min_ratio = std::min(min_ratio, w(x, y) / scale);
          const double asym = std::abs(w(x, y) - w(y, x)) / scale;
          worst_asym = std::max(worst_asym, asym);
          ok = ok && w(x, y) > 0.0 && asym <= 1e-12;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 10.0, fmt("min W/max W=%.3e", min_ratio) + fmt(" asym=%.1e", worst_asym) +
                                 fmt(" time=%.2fs", secs)};
}

Outcome kernel_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const Graph& g : kernel_instances()) {
    const SpectralDecomposition d = decompose(g);
    for (double s : kS) {
      const Matrix a = kernel_weights(d, s);
      const Matrix b = kernel_weights_oracle(d, s);
      for (std::size_t x = 0; x < g.size(); ++x)
        for (std::size_t y = 0; y < g.size(); ++y)
          if (x != y) worst = std::max(worst, std::abs(a(x, y) - b(x, y)) / std::abs(b(x, y)));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs < 60.0, fmt("max rel dev=%.2e", worst) + fmt(" time=%.2fs", secs)};
}

Outcome unit_order_collapse() {
  double worst = 0.0;
  bool monotone = true;
  for (const Graph& g : kernel_instances()) {
    const SpectralDecomposition d = decompose(g);
    double wmax = 0.0;
    for (const Edge& e : g.edges()) wmax = std::max(wmax, e.w);
    auto deviation = [&](double s) {
      const Matrix w = spectral_weights(d, s);
      double dev = 0.0;
      for (std::size_t x = 0; x < g.size(); ++x)
        for (std::size_t y = 0; y < g.size(); ++y)
          if (x != y) dev = std::max(dev, std::abs(w(x, y) - g.weight(x, y)));
      return dev;
    };
    worst = std::max(worst, deviation(1.0) / wmax);
    monotone = monotone && deviation(0.999) <= deviation(0.99);
  }
  return {worst <= 1e-10 && monotone,
          fmt("max |W_1-w|/max w=%.2e", worst) + (monotone ? " monotone" : " NOT monotone")};
}

Outcome integration_by_parts() {
  SplitMix64 rng(kSeed + 2);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Graph g = draw_graph(rng, 2, 12);
    const FractionalKernel k = make_kernel(g, kS[rng.index(0, 4)]);
    const VertexFunction u = random_uniform(g.size(), -2, 2, rng.next());
    const VertexFunction v = random_uniform(g.size(), -2, 2, rng.next());
    const double p = kP[i % 3];
    const IbpTerms t = ibp_terms(k, u, v, p, 1e-12);
    worst = std::max(worst, t.residual() / (std::abs(t.lhs) + std::abs(t.rhs) + 1.0));
  }
  return {worst <= 1e-10, fmt("max scaled residual=%.2e", worst)};
}

Outcome quadratic_reduction() {
  SplitMix64 rng(kSeed + 3);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Graph g = draw_graph(rng, 2, 12);
    const FractionalKernel k = make_kernel(g, kS[rng.index(0, 4)]);
    const VertexFunction u = random_uniform(g.size(), -2, 2, rng.next());
    worst = std::max(worst, max_abs_diff(frac_p_laplacian(k, u, 2.0), frac_laplacian(k, u)));
  }
  return {worst <= 1e-14, fmt("max diff=%.2e", worst)};
}

struct FlowRuns {
  std::vector<FlowInstance> instances;
  std::vector<Trajectory> trajectories;
  double seconds = 0.0;
};

const FlowRuns& short_runs() {
  static const FlowRuns runs = [] {
    FlowRuns r;
    const auto t0 = std::chrono::steady_clock::now();
    r.instances = flow_instances();
    for (const FlowInstance& f : r.instances) {
      r.trajectories.push_back(evolve_direct(make_kernel(f.g, f.s), f.u0, flow_config(f.s, f.p, f.q, 5.0)));
    }
    r.seconds = seconds_since(t0);
    return r;
  }();
  return runs;
}

Outcome maximum_principle() {
  const FlowRuns& r = short_runs();
  double worst = 0.0;
  for (std::size_t i = 0; i < r.instances.size(); ++i) {
    worst = std::max(worst, max_principle_check(r.trajectories[i], r.instances[i].u0));
  }
  return {worst <= 1e-9 && r.seconds < 120.0, fmt("max violation=%.2e", worst) + fmt(" time=%.2fs", r.seconds)};
}

Outcome energy_identity() {
  const FractionalKernel k = make_kernel(complete_graph(5), 0.5);
  const VertexFunction u0 = random_uniform(5, 0.5, 2.0, kSeed + 4);
  auto residual = [&](double dt) {
    return energy_identity_residual(evolve_direct(k, u0, flow_config(0.5, 2, 2, 1, dt)), k, 2, 2);
  };
  const double a = residual(1e-3);
  const double b = residual(5e-4);
  return {a <= 1e-4 && a / b >= 3.5, fmt("residual(1e-3)=%.3e", a) + fmt(" residual(5e-4)=%.3e", b) +
                                         fmt(" ratio=%.2f", a / b)};
}

Outcome dissipation_bound() {
  double worst = -INFINITY;
  bool ok = true;
  for (const FlowInstance& f : flow_instances()) {
    const FractionalKernel k = make_kernel(f.g, f.s);
    const FlowConfig c = flow_config(f.s, f.p, f.q, 20.0, 1e-4);
    const DissipationCheck d = dissipation_check(evolve_direct(k, f.u0, c), k, f.p, f.q, c.eps_reg);
    ok = ok && d.satisfied;
    worst = std::max(worst, (d.lhs - d.rhs) / (d.rhs + 1.0));
  }
  return {ok, fmt("max (lhs-rhs)/(rhs+1)=%.3e", worst) + " allowance 1e-6"};
}

Outcome steady_state_and_decay() {
  double err = 0.0, energy = 0.0, deriv = 0.0;
  std::uint64_t seed = kSeed + 5;
  for (const Graph& g : {complete_graph(2), path_graph(3), complete_graph(5)}) {
    const FractionalKernel k = make_kernel(g, 0.5);
    const VertexFunction u0 = random_uniform(g.size(), 0.5, 2.0, seed++);
    const FlowConfig c = flow_config(0.5, 2, 2, 100);
    const DiagnosticsReport r = run_diagnostics(g, k, evolve_direct(k, u0, c), c);
    err = std::max(err, r.steady_state_error);
    energy = std::max(energy, r.final_gradient_energy);
    deriv = std::max(deriv, r.final_time_derivative);
  }
  return {err <= 1e-6 && energy <= 1e-8 && deriv <= 1e-6,
          fmt("steady err=%.2e", err) + fmt(" final energy=%.2e", energy) + fmt(" max|du/dt|=%.2e", deriv)};
}

Outcome picard_equivalence() {
  const FractionalKernel k = make_kernel(complete_graph(5), 0.5);
  const VertexFunction u0 = random_uniform(5, 0.5, 2.0, kSeed + 6);
  const FlowConfig c = flow_config(0.5, 2.5, 1.5, 1.0);
  const PicardResult r = picard_solve(k, u0, c);
  const double dist = trajectory_distance(r.trajectory, evolve_direct(k, u0, c));
  bool decreasing = true;
  for (std::size_t i = 3; i < r.history.size(); ++i) decreasing = decreasing && r.history[i] < r.history[i - 1];
  return {dist <= 1e-5 && r.iterations <= 100 && decreasing,
          fmt("sup dist=%.2e", dist) + fmt(" iterations=%.0f", r.iterations) +
              (decreasing ? " history decreasing" : " history NOT decreasing")};
}

Outcome mass_conservation() {
  const FlowRuns& r = short_runs();
  double worst = 0.0;
  for (std::size_t i = 0; i < r.instances.size(); ++i) {
    const FlowInstance& f = r.instances[i];
    const double m0 = mass(f.g, f.u0, f.q);
    for (const VertexFunction& u : r.trajectories[i].states) {
      worst = std::max(worst, std::abs(mass(f.g, u, f.q) - m0) / m0);
    }
  }
  return {worst <= 1e-8, fmt("max relative drift=%.2e", worst)};
}

Outcome eigensolver() {
  std::vector<Graph> graphs = kernel_instances();
  for (FlowInstance& f : flow_instances()) graphs.push_back(std::move(f.g));
  graphs.push_back(complete_graph(2));
  graphs.push_back(path_graph(3));
  graphs.push_back(complete_graph(5));
  double orth = 0.0, recon = 0.0;
  SplitMix64 rng(kSeed + 7);
  for (const Graph& g : graphs) {
    const SpectralDecomposition d = decompose(g);
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        orth = std::max(orth, std::abs(inner_product(g, d.phi(i), d.phi(j)) - (i == j ? 1.0 : 0.0)));
    const VertexFunction u = random_uniform(n, -1, 1, rng.next());
    const VertexFunction lu = laplacian_apply(g, u);
    VertexFunction rec(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double c = d.eigenvalues[i] * inner_product(g, u, d.phi(i));
      for (std::size_t x = 0; x < n; ++x) rec[x] += c * d.phi(i)[x];
    }
    recon = std::max(recon, max_abs_diff(rec, lu) / std::max(1.0, max_abs(lu)));
  }
  const SpectralDecomposition a = decompose(complete_graph(2));
  const SpectralDecomposition b = decompose(path_graph(3));
  const double closed = std::max({std::abs(a.eigenvalues[0]), std::abs(a.eigenvalues[1] - 2.0),
                                  std::abs(b.eigenvalues[0]), std::abs(b.eigenvalues[1] - 1.0),
                                  std::abs(b.eigenvalues[2] - 3.0)});
  return {orth <= 1e-10 && recon <= 1e-10 && closed <= 1e-12,
          fmt("orthonormality=%.1e", orth) + fmt(" reconstruction=%.1e", recon) + fmt(" closed forms=%.1e", closed)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "kernel positivity and symmetry", kernel_positivity},
      {2, "kernel quadrature oracle agreement", kernel_oracle},
      {3, "s=1 collapse to edge weights", unit_order_collapse},
      {4, "integration by parts", integration_by_parts},
      {5, "p=2 reduction", quadratic_reduction},
      {6, "maximum principle", maximum_principle},
      {7, "energy identity", energy_identity},
      {8, "dissipation bound", dissipation_bound},
      {9, "steady state and gradient decay", steady_state_and_decay},
      {10, "Picard and direct solvers agree", picard_equivalence},
      {11, "mass conservation", mass_conservation},
      {12, "eigensolver correctness", eigensolver},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.passed ? 0 : 1;
    std::printf("%s %2d %s: %s\n", o.passed ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
