#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fracgraph/errors.hpp"
#include "fracgraph/flow.hpp"
#include "fracgraph/graph.hpp"
#include "fracgraph/numeric.hpp"
#include "fracgraph/operators.hpp"

namespace fracgraph {

/// int u^q dmu.
inline double mass(std::span<const double> mu, std::span<const double> u, double q) {
  detail::require_length(u.size(), mu.size(), "vertex function");
  const bool integer_q = q == std::floor(q);
  CompensatedSum acc;
  for (std::size_t x = 0; x < u.size(); ++x) {
    detail::require(integer_q || u[x] > 0.0, ErrorKind::NonPositiveState,
                    "u(" + std::to_string(x) + ") must be positive for non-integer q");
    acc += std::pow(u[x], q) * mu[x];
  }
  return acc.value();
}

inline double mass(const Graph& g, std::span<const double> u, double q) { return mass(g.measures(), u, q); }

namespace detail {

/// Composite trapezoid rule on the trajectory grid.
inline double trapezoid(std::span<const double> times, std::span<const double> values) {
  CompensatedSum acc;
  for (std::size_t k = 1; k < times.size(); ++k) acc += 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
  return acc.value();
}

}  // namespace detail

/// int_V |grad^s u(., t)|^p dmu at every grid time.
inline std::vector<double> gradient_decay(const Trajectory& traj, const FractionalKernel& k, double p) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const VertexFunction& u : traj.states) out.push_back(dirichlet_p_energy(k, u, p));
  return out;
}

/// Relative residual of the energy balance
///   q/(q+1) int u(T)^{q+1} + int_0^T int |grad^s u|^p = q/(q+1) int u0^{q+1},
/// with the time integral taken by the trapezoid rule on the output grid.
inline double energy_identity_residual(const Trajectory& traj, const FractionalKernel& k, double p, double q) {
  const double c = q / (q + 1.0);
  const double final_mass = mass(k.mu, traj.final_state(), q + 1.0);
  const double initial_mass = mass(k.mu, traj.states.front(), q + 1.0);
  const std::vector<double> energies = gradient_decay(traj, k, p);
  const double dissipated = detail::trapezoid(traj.times, energies);
  const double lhs = c * final_mass + dissipated;
  const double rhs = c * initial_mass;
  return std::abs(lhs - rhs) / (std::abs(rhs) + 1.0);
}

struct DissipationCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
};

/// int_0^T int (u^{(q-1)/2} du/dt)^2 dmu dt <= (1/(pq)) int |grad^s u0|^p dmu.
///
/// du/dt comes from the right-hand side at each stored state. The left side
/// only grows with T, so truncating the infinite horizon keeps the check valid.
inline DissipationCheck dissipation_check(const Trajectory& traj, const FractionalKernel& k, double p, double q,
                                          double eps_reg = 1e-12, double slack = 1e-6) {
  std::vector<double> integrand(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const VertexFunction& u = traj.states[i];
    const VertexFunction du = rhs_direct(k, u, p, q, eps_reg);
    CompensatedSum acc;
    for (std::size_t x = 0; x < u.size(); ++x) acc += std::pow(u[x], q - 1.0) * du[x] * du[x] * k.mu[x];
    integrand[i] = acc.value();
  }
  DissipationCheck out;
  out.lhs = detail::trapezoid(traj.times, integrand);
  out.rhs = dirichlet_p_energy(k, traj.states.front(), p) / (p * q);
  out.satisfied = out.lhs <= out.rhs + slack * (out.rhs + 1.0);
  return out;
}

/// Largest excursion of the trajectory outside [min u0, max u0].
inline double max_principle_check(const Trajectory& traj, std::span<const double> u0) {
  const auto [lo, hi] = std::minmax_element(u0.begin(), u0.end());
  double worst = 0.0;
  for (const VertexFunction& u : traj.states) {
    for (double v : u) worst = std::max({worst, *lo - v, v - *hi});
  }
  return worst;
}

/// max_x |du/dt(x)| at the last grid time.
inline double final_time_derivative(const Trajectory& traj, const FractionalKernel& k, double p, double q,
                                    double eps_reg = 1e-12) {
  return max_abs(rhs_direct(k, traj.final_state(), p, q, eps_reg));
}

struct DiagnosticsReport {
  double energy_identity_residual = 0.0;
  double dissipation_lhs = 0.0;
  double dissipation_rhs = 0.0;
  double mass_drift = 0.0;  // max_t |mass(t) - mass(0)| / mass(0)
  double bound_violation = 0.0;
  double initial_gradient_energy = 0.0;
  double final_gradient_energy = 0.0;
  double gradient_increase = 0.0;  // largest step-to-step growth of the gradient energy
  double steady_state_error = 0.0;
  double final_time_derivative = 0.0;
};

struct CheckThresholds {
  double energy_residual = 1e-4;
  double dissipation_slack = 1e-6;
  double bound = 1e-9;
  double mass_drift = 1e-8;
  double decay_slack = 1e-8;  // relative to the initial gradient energy plus one
};

struct CheckLine {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

inline DiagnosticsReport run_diagnostics(const Graph& g, const FractionalKernel& k, const Trajectory& traj,
                                         const FlowConfig& cfg) {
  const VertexFunction& u0 = traj.states.front();
  DiagnosticsReport r;
  r.energy_identity_residual = energy_identity_residual(traj, k, cfg.p, cfg.q);
  const DissipationCheck diss = dissipation_check(traj, k, cfg.p, cfg.q, cfg.eps_reg);
  r.dissipation_lhs = diss.lhs;
  r.dissipation_rhs = diss.rhs;
  const double m0 = mass(g, u0, cfg.q);
  for (const VertexFunction& u : traj.states) {
    r.mass_drift = std::max(r.mass_drift, std::abs(mass(g, u, cfg.q) - m0) / m0);
  }
  r.bound_violation = max_principle_check(traj, u0);
  const std::vector<double> energies = gradient_decay(traj, k, cfg.p);
  r.initial_gradient_energy = energies.front();
  r.final_gradient_energy = energies.back();
  for (std::size_t i = 1; i < energies.size(); ++i) {
    r.gradient_increase = std::max(r.gradient_increase, energies[i] - energies[i - 1]);
  }
  const double c = steady_state(g, u0, cfg.q);
  for (double v : traj.final_state()) r.steady_state_error = std::max(r.steady_state_error, std::abs(v - c));
  r.final_time_derivative = final_time_derivative(traj, k, cfg.p, cfg.q, cfg.eps_reg);
  return r;
}

inline std::vector<CheckLine> evaluate_checks(const DiagnosticsReport& r, const CheckThresholds& th = {}) {
  std::vector<CheckLine> lines;
  lines.push_back({"energy_identity", r.energy_identity_residual, th.energy_residual,
                   r.energy_identity_residual <= th.energy_residual});
  const double diss_excess = r.dissipation_lhs - r.dissipation_rhs;
  const double diss_allow = th.dissipation_slack * (r.dissipation_rhs + 1.0);
  lines.push_back({"dissipation_bound", diss_excess, diss_allow, diss_excess <= diss_allow});
  lines.push_back({"max_principle", r.bound_violation, th.bound, r.bound_violation <= th.bound});
  lines.push_back({"mass_conservation", r.mass_drift, th.mass_drift, r.mass_drift <= th.mass_drift});
  const double decay_allow = th.decay_slack * (r.initial_gradient_energy + 1.0);
  lines.push_back({"gradient_decay", r.gradient_increase, decay_allow, r.gradient_increase <= decay_allow});
  return lines;
}

}  // namespace fracgraph
