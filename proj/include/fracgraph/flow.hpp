#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracgraph/errors.hpp"
#include "fracgraph/graph.hpp"
#include "fracgraph/numeric.hpp"
#include "fracgraph/operators.hpp"

namespace fracgraph {

/// Solver parameters for d/dt u^q + (-Delta)_p^s u = 0.
struct FlowConfig {
  double s = 0.5;
  double p = 2.0;
  double q = 1.0;
  double T = 1.0;
  double dt_out = 0.0;  // output grid spacing; 0 selects T / 200
  double atol = 1e-9;
  double rtol = 1e-9;
  double eps_reg = 1e-12;
  double picard_tol = 1e-10;
  int picard_max = 100;

  void validate() const {
    detail::require(s > 0.0 && s < 1.0, ErrorKind::ExponentOutOfRange, "s must lie in (0, 1)");
    detail::require(p > 1.0 && std::isfinite(p), ErrorKind::ExponentOutOfRange, "p must exceed 1");
    detail::require(q > 0.0 && std::isfinite(q), ErrorKind::ExponentOutOfRange, "q must be positive");
    detail::require(T > 0.0 && std::isfinite(T), ErrorKind::InvalidConfig, "T must be positive");
    detail::require(dt_out >= 0.0 && dt_out <= T, ErrorKind::InvalidConfig, "dt_out must lie in [0, T]");
    detail::require(atol > 0.0 && rtol >= 0.0, ErrorKind::InvalidConfig, "tolerances must be positive");
    detail::require(eps_reg >= 0.0, ErrorKind::InvalidConfig, "eps_reg must be non-negative");
    detail::require(picard_tol > 0.0 && picard_max >= 1, ErrorKind::InvalidConfig, "bad Picard settings");
  }

  /// Uniform output grid 0 = t_0 < ... < t_K = T with spacing close to dt_out.
  std::vector<double> output_grid() const {
    const double spacing = dt_out > 0.0 ? dt_out : T / 200.0;
    const double ratio = T / spacing;
    auto count = static_cast<std::size_t>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(count)) > 1e-9 * ratio) {
      count = static_cast<std::size_t>(std::ceil(ratio));
    }
    count = std::max<std::size_t>(count, 1);
    std::vector<double> grid(count + 1);
    for (std::size_t k = 0; k <= count; ++k) grid[k] = T * static_cast<double>(k) / static_cast<double>(count);
    grid.back() = T;
    return grid;
  }
};

struct FlowState {
  double t = 0.0;
  VertexFunction u;
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double max_error = 0.0;  // largest accepted error, as a fraction of the tolerance
};

/// States sampled on a uniform output grid.
struct Trajectory {
  std::vector<double> times;
  std::vector<VertexFunction> states;
  StepStats stats;
  std::vector<double> mesh;  // end times of the accepted steps

  std::size_t size() const { return times.size(); }
  FlowState state(std::size_t k) const { return {times[k], states[k]}; }
  const VertexFunction& final_state() const { return states.back(); }
};

/// a(x, t) = q u_prev(x, t)^{q-1}, linear in t between output-grid samples.
class FrozenCoefficient {
 public:
  FrozenCoefficient(const Trajectory& prev, double q) : times_(prev.times) {
    values_.reserve(prev.size());
    for (const VertexFunction& u : prev.states) values_.push_back(coefficient(u, q));
    init_bound(q, prev);
  }

  /// Coefficient frozen at u0 for the whole horizon; the first Picard iterate.
  static FrozenCoefficient from_initial(std::span<const double> u0, double q, double T) {
    Trajectory flat;
    flat.times = {0.0, T};
    flat.states = {VertexFunction(u0.begin(), u0.end()), VertexFunction(u0.begin(), u0.end())};
    return FrozenCoefficient(flat, q);
  }

  /// Writes a(., t) into out.
  void eval(double t, std::span<double> out) const {
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - times_.begin());
    if (hi == 0) hi = 1;
    if (hi >= times_.size()) hi = times_.size() - 1;
    const std::size_t lo = hi - 1;
    const double theta = std::clamp((t - times_[lo]) / (times_[hi] - times_[lo]), 0.0, 1.0);
    const VertexFunction& a0 = values_[lo];
    const VertexFunction& a1 = values_[hi];
    for (std::size_t x = 0; x < out.size(); ++x) out[x] = a0[x] + theta * (a1[x] - a0[x]);
  }

  double at(double t, std::size_t x) const {
    VertexFunction buf(values_.front().size());
    eval(t, buf);
    return buf[x];
  }

  /// C = q max(max u0^{q-1}, min u0^{q-1}).
  double bound() const { return bound_; }
  double min_value() const { return min_; }

 private:
  static VertexFunction coefficient(std::span<const double> u, double q) {
    VertexFunction a(u.size());
    for (std::size_t x = 0; x < u.size(); ++x) {
      detail::require(u[x] > 0.0, ErrorKind::NonPositiveState, "previous iterate is not positive");
      a[x] = q * std::pow(u[x], q - 1.0);
    }
    return a;
  }

  void init_bound(double q, const Trajectory& prev) {
    const VertexFunction& u0 = prev.states.front();
    const auto [lo, hi] = std::minmax_element(u0.begin(), u0.end());
    bound_ = q * std::max(std::pow(*hi, q - 1.0), std::pow(*lo, q - 1.0));
    min_ = std::numeric_limits<double>::infinity();
    for (const auto& a : values_)
      for (double v : a) min_ = std::min(min_, v);
  }

  std::vector<double> times_;
  std::vector<VertexFunction> values_;
  double bound_ = 0.0;
  double min_ = 0.0;
};

namespace detail {

inline void require_positive_state(std::span<const double> u) {
  for (std::size_t x = 0; x < u.size(); ++x) {
    if (!(u[x] > 0.0)) {
      throw Error(ErrorKind::NonPositiveState, "u(" + std::to_string(x) + ") = " + std::to_string(u[x]));
    }
  }
}

}  // namespace detail

/// du/dt(x) = -(-Delta)_p^s u(x) / (q u(x)^{q-1}).
inline VertexFunction rhs_direct(const FractionalKernel& k, std::span<const double> u, double p, double q,
                                 double eps_reg = 1e-12) {
  detail::require_length(u.size(), k.size(), "vertex function");
  detail::require_positive_state(u);
  VertexFunction out = frac_p_laplacian(k, u, p, eps_reg);
  for (std::size_t x = 0; x < out.size(); ++x) out[x] = -out[x] / (q * std::pow(u[x], q - 1.0));
  return out;
}

/// du/dt(x) = -(-Delta)_p^s u(x) / a(x, t).
inline VertexFunction rhs_frozen(const FractionalKernel& k, const FrozenCoefficient& a, double t,
                                 std::span<const double> u, double p, double eps_reg = 1e-12) {
  detail::require_length(u.size(), k.size(), "vertex function");
  detail::require_positive_state(u);
  VertexFunction coeff(u.size());
  a.eval(t, coeff);
  VertexFunction out = frac_p_laplacian(k, u, p, eps_reg);
  for (std::size_t x = 0; x < out.size(); ++x) out[x] = -out[x] / coeff[x];
  return out;
}

/// Right-hand side f(t, u); may throw NonPositiveState.
using OdeRhs = std::function<VertexFunction(double, std::span<const double>)>;

/// Dormand-Prince 5(4) pair with local extrapolation, a standard step-size
/// controller (safety 0.9, growth clamped to [0.2, 5]) and a positivity guard.
class DormandPrinceStepper {
 public:
  DormandPrinceStepper(OdeRhs f, double atol, double rtol, double min_step)
      : f_(std::move(f)), atol_(atol), rtol_(rtol), min_step_(min_step) {}

  struct Trial {
    bool positive = true;
    double error = 0.0;      // max-norm of the embedded error estimate
    double tolerance = 0.0;  // atol + rtol * max(|u|, |u_new|)
    VertexFunction u_new;
    VertexFunction f_new;
    VertexFunction dense;  // quartic correction of the continuous extension
    double ratio() const { return positive ? error / tolerance : std::numeric_limits<double>::infinity(); }
  };

  Trial attempt(double t, std::span<const double> u, std::span<const double> f0, double h) const {
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    const std::size_t n = u.size();
    Trial trial;
    VertexFunction y(n);
    auto stage = [&](double c, auto&& combine) -> std::optional<VertexFunction> {
      for (std::size_t i = 0; i < n; ++i) y[i] = u[i] + h * combine(i);
      try {
        return f_(t + c * h, y);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::NonPositiveState) return std::nullopt;
        throw;
      }
    };
    auto fail = [&] {
      trial.positive = false;
      return trial;
    };

    auto k2 = stage(1.0 / 5.0, [&](std::size_t i) { return a21 * f0[i]; });
    if (!k2) return fail();
    auto k3 = stage(3.0 / 10.0, [&](std::size_t i) { return a31 * f0[i] + a32 * (*k2)[i]; });
    if (!k3) return fail();
    auto k4 = stage(4.0 / 5.0, [&](std::size_t i) { return a41 * f0[i] + a42 * (*k2)[i] + a43 * (*k3)[i]; });
    if (!k4) return fail();
    auto k5 = stage(8.0 / 9.0, [&](std::size_t i) {
      return a51 * f0[i] + a52 * (*k2)[i] + a53 * (*k3)[i] + a54 * (*k4)[i];
    });
    if (!k5) return fail();
    auto k6 = stage(1.0, [&](std::size_t i) {
      return a61 * f0[i] + a62 * (*k2)[i] + a63 * (*k3)[i] + a64 * (*k4)[i] + a65 * (*k5)[i];
    });
    if (!k6) return fail();
    auto k7 = stage(1.0, [&](std::size_t i) {
      return b1 * f0[i] + b3 * (*k3)[i] + b4 * (*k4)[i] + b5 * (*k5)[i] + b6 * (*k6)[i];
    });
    if (!k7) return fail();

    trial.u_new = y;
    trial.f_new = std::move(*k7);
    double err = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ei = h * (e1 * f0[i] + e3 * (*k3)[i] + e4 * (*k4)[i] + e5 * (*k5)[i] + e6 * (*k6)[i] +
                             e7 * trial.f_new[i]);
      err = std::max(err, std::abs(ei));
      scale = std::max({scale, std::abs(u[i]), std::abs(y[i])});
    }
    trial.error = err;
    trial.tolerance = atol_ + rtol_ * scale;

    static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
    trial.dense.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      trial.dense[i] = h * (d1 * f0[i] + d3 * (*k3)[i] + d4 * (*k4)[i] + d5 * (*k5)[i] + d6 * (*k6)[i] +
                            d7 * trial.f_new[i]);
    }
    return trial;
  }

  /// Grows or shrinks h after a trial with the given error ratio.
  static double next_step(double h, double ratio, bool accepted) {
    if (!std::isfinite(ratio)) return 0.5 * h;
    double factor = ratio == 0.0 ? 5.0 : 0.9 * std::pow(ratio, -0.2);
    factor = std::clamp(factor, 0.2, 5.0);
    if (!accepted) factor = std::min(factor, 1.0);
    return h * factor;
  }

  struct Accepted {
    double h = 0.0;
    double h_next = 0.0;
    std::size_t rejected = 0;
    Trial trial;
  };

  /// Retries from (t, u) until a step is accepted, starting from h.
  Accepted advance(double t, std::span<const double> u, std::span<const double> f0, double h) const {
    Accepted out;
    while (true) {
      if (h < min_step_) {
        throw Error(ErrorKind::StepSizeUnderflow, "step size " + std::to_string(h) + " at t = " + std::to_string(t));
      }
      Trial trial = attempt(t, u, f0, h);
      const double ratio = trial.ratio();
      if (ratio <= 1.0) {
        out.h = h;
        out.h_next = next_step(h, ratio, true);
        out.trial = std::move(trial);
        return out;
      }
      ++out.rejected;
      h = next_step(h, ratio, false);
    }
  }

  VertexFunction rhs(double t, std::span<const double> u) const { return f_(t, u); }

  /// Starting step from the usual two-evaluation heuristic.
  double initial_step(double t, std::span<const double> u, std::span<const double> f0, double horizon) const {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double sc = atol_ + rtol_ * std::abs(u[i]);
      d0 = std::max(d0, std::abs(u[i]) / sc);
      d1 = std::max(d1, std::abs(f0[i]) / sc);
    }
    const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    VertexFunction y(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) y[i] = u[i] + h0 * f0[i];
    double d2 = 0.0;
    try {
      const VertexFunction f1 = f_(t + h0, y);
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double sc = atol_ + rtol_ * std::abs(u[i]);
        d2 = std::max(d2, std::abs(f1[i] - f0[i]) / sc / h0);
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonPositiveState) throw;
      return std::min(h0, horizon);
    }
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min({100.0 * h0, h1, horizon});
  }

 private:
  OdeRhs f_;
  double atol_;
  double rtol_;
  double min_step_;
};

namespace detail {

/// Fourth-order continuous extension of the Dormand-Prince step: the cubic
/// Hermite interpolant of (u0, f0, u1, f1) plus a stage-based quartic term.
inline void dense_output(double t0, std::span<const double> u0, std::span<const double> f0, double t1,
                         std::span<const double> u1, std::span<const double> f1, std::span<const double> correction,
                         double t, std::span<double> out) {
  const double h = t1 - t0;
  const double th = (t - t0) / h;
  const double th1 = 1.0 - th;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double diff = u1[i] - u0[i];
    const double slope0 = h * f0[i] - diff;
    const double slope1 = diff - h * f1[i] - slope0;
    out[i] = u0[i] + th * (diff + th1 * (slope0 + th * (slope1 + th1 * correction[i])));
  }
}

/// Optional correction applied to every accepted state u, given the
/// derivative f at u and the step h that produced it (empty f and h = 0 for
/// interpolated output); returns true if it changed the state.
using StateProjector = std::function<bool(std::span<double> u, std::span<const double> f, double h)>;

/// Adaptive integration from t = 0 to grid.back(), sampling at every grid
/// time from the continuous extension of the accepted steps. A nonempty
/// `replay` mesh fixes the step end points; a mesh interval is subdivided
/// only when a single step over it fails the error test.
inline Trajectory integrate_on_grid(const OdeRhs& f, std::span<const double> u0, std::vector<double> grid,
                                    const FlowConfig& cfg, const StateProjector& project = {},
                                    std::span<const double> replay = {}) {
  const double T = grid.back();
  DormandPrinceStepper stepper(f, cfg.atol, cfg.rtol, 1e-14 * T);
  Trajectory traj;
  traj.times = std::move(grid);
  traj.states.reserve(traj.times.size());
  traj.states.emplace_back(u0.begin(), u0.end());

  double t = 0.0;
  VertexFunction u(u0.begin(), u0.end());
  VertexFunction fu = stepper.rhs(t, u);
  double h = stepper.initial_step(t, u, fu, T);
  if (!replay.empty()) {
    require(replay.back() == T, ErrorKind::InvalidConfig, "replay mesh must end at the horizon");
  }
  std::size_t next = 1;
  std::size_t mesh_next = 0;
  bool on_mesh = true;  // t sits on a replay mesh point
  while (next < traj.times.size()) {
    const double target = replay.empty() ? T : replay[mesh_next];
    const double remaining = target - t;
    bool last = false;
    if (on_mesh && !replay.empty()) h = remaining;
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    auto acc = stepper.advance(t, u, fu, h);
    traj.stats.rejected += acc.rejected;
    ++traj.stats.accepted;
    traj.stats.max_error = std::max(traj.stats.max_error, acc.trial.ratio());
    const bool reached = last && acc.h == h;
    const double t_new = reached ? target : t + acc.h;
    if (!replay.empty()) {
      on_mesh = reached;
      if (reached) ++mesh_next;
    }
    traj.mesh.push_back(t_new);
    if (project && project(acc.trial.u_new, acc.trial.f_new, acc.h)) acc.trial.f_new = stepper.rhs(t_new, acc.trial.u_new);
    while (next < traj.times.size() && traj.times[next] <= t_new) {
      if (traj.times[next] == t_new) {
        traj.states.push_back(acc.trial.u_new);
      } else {
        VertexFunction out(u.size());
        dense_output(t, u, fu, t_new, acc.trial.u_new, acc.trial.f_new, acc.trial.dense, traj.times[next], out);
        if (project) project(out, {}, 0.0);
        traj.states.push_back(std::move(out));
      }
      ++next;
    }
    t = t_new;
    u = std::move(acc.trial.u_new);
    fu = std::move(acc.trial.f_new);
    h = acc.h_next;
  }
  return traj;
}

inline void check_bounds(const Trajectory& traj, std::span<const double> u0, double slack) {
  const auto [lo, hi] = std::minmax_element(u0.begin(), u0.end());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    for (double v : traj.states[k]) {
      if (v < *lo - slack || v > *hi + slack) {
        throw Error(ErrorKind::BoundViolation, "u = " + std::to_string(v) + " at t = " +
                                                   std::to_string(traj.times[k]) + " leaves [min u0, max u0]");
      }
    }
  }
}

inline void check_initial(const FractionalKernel& k, std::span<const double> u0) {
  require_length(u0.size(), k.size(), "u0");
  require_positive_state(u0);
}

}  // namespace detail

struct StepResult {
  FlowState state;
  double error_estimate = 0.0;  // max-norm local error estimate of the accepted step
  double tolerance = 0.0;       // atol + rtol * ||u||_inf used for acceptance
  double dt_taken = 0.0;
  double dt_next = 0.0;
  std::size_t rejected = 0;
};

/// One accepted step starting from dt, shrinking it as needed. With `frozen`
/// the coefficient a(x, t) replaces q u^{q-1}.
inline StepResult step(const FractionalKernel& k, const FlowState& state, double dt, const FlowConfig& cfg,
                       const FrozenCoefficient* frozen = nullptr) {
  detail::check_initial(k, state.u);
  detail::require(dt > 0.0, ErrorKind::InvalidConfig, "dt must be positive");
  OdeRhs f;
  if (frozen != nullptr) {
    f = [&k, frozen, &cfg](double t, std::span<const double> u) { return rhs_frozen(k, *frozen, t, u, cfg.p, cfg.eps_reg); };
  } else {
    f = [&k, &cfg](double, std::span<const double> u) { return rhs_direct(k, u, cfg.p, cfg.q, cfg.eps_reg); };
  }
  DormandPrinceStepper stepper(f, cfg.atol, cfg.rtol, 1e-14 * cfg.T);
  const VertexFunction f0 = stepper.rhs(state.t, state.u);
  auto acc = stepper.advance(state.t, state.u, f0, dt);
  StepResult out;
  out.state = {state.t + acc.h, std::move(acc.trial.u_new)};
  out.error_estimate = acc.trial.error;
  out.tolerance = acc.trial.tolerance;
  out.dt_taken = acc.h;
  out.dt_next = acc.h_next;
  out.rejected = acc.rejected;
  return out;
}

/// Max-principle slack applied to every computed trajectory.
inline constexpr double kBoundSlack = 1e-9;

namespace detail {

/// Rescales u so that int u^q dmu keeps its initial value. Runge-Kutta steps
/// conserve only linear invariants, so for q != 1 the mass drifts by roughly
/// the local tolerance per step without this.
inline StateProjector mass_projector(std::span<const double> mu, std::span<const double> u0, double q) {
  auto q_mass = [mu, q](std::span<const double> u) {
    CompensatedSum acc;
    for (std::size_t x = 0; x < u.size(); ++x) acc += std::pow(u[x], q) * mu[x];
    return acc.value();
  };
  const double target = q_mass(u0);
  return [q_mass, target, q](std::span<double> u, std::span<const double>, double) {
    const double factor = std::pow(target / q_mass(u), 1.0 / q);
    if (factor == 1.0) return false;
    for (double& v : u) v *= factor;
    return true;
  };
}

/// For p < 2 the flow reaches its constant limit in finite time, and near it
/// the regularized operator is stiff: the step controller settles at the
/// explicit stability limit, where the state cycles around the constant and
/// adds spurious dissipation. When one step moves the state by at least its
/// oscillation (h max|du/dt| >= max u - min u) the exact flow becomes
/// constant within about a step, so the state is set to the constant with
/// the same q-mass.
inline StateProjector extinction_snap(std::span<const double> mu, double q) {
  return [mu, q](std::span<double> u, std::span<const double> f, double h) {
    const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
    const double osc = *hi - *lo;
    if (osc == 0.0 || h * max_abs(f) < osc) return false;
    CompensatedSum mass, volume;
    for (std::size_t x = 0; x < u.size(); ++x) {
      mass += std::pow(u[x], q) * mu[x];
      volume += mu[x];
    }
    const double c = std::clamp(std::pow(mass.value() / volume.value(), 1.0 / q), *lo, *hi);
    std::fill(u.begin(), u.end(), c);
    return true;
  };
}

}  // namespace detail

/// Integrates du/dt = -(-Delta)_p^s u / (q u^{q-1}) from u0 over [0, T].
/// For q != 1 each accepted step is projected back onto the conserved mass;
/// for p < 2 the state is set to its constant limit once within tolerance of it.
inline Trajectory evolve_direct(const FractionalKernel& k, std::span<const double> u0, const FlowConfig& cfg) {
  cfg.validate();
  detail::check_initial(k, u0);
  OdeRhs f = [&k, &cfg](double, std::span<const double> u) { return rhs_direct(k, u, cfg.p, cfg.q, cfg.eps_reg); };
  std::vector<detail::StateProjector> parts;
  if (cfg.q != 1.0) parts.push_back(detail::mass_projector(k.mu, u0, cfg.q));
  if (cfg.p < 2.0) parts.push_back(detail::extinction_snap(k.mu, cfg.q));
  detail::StateProjector project;
  if (!parts.empty()) {
    project = [parts](std::span<double> u, std::span<const double> f, double h) {
      bool changed = false;
      for (const auto& part : parts) changed = part(u, f, h) || changed;
      return changed;
    };
  }
  Trajectory traj = detail::integrate_on_grid(f, u0, cfg.output_grid(), cfg, project);
  detail::check_bounds(traj, u0, kBoundSlack);
  return traj;
}

/// Integrates a(x,t) du/dt + (-Delta)_p^s u = 0 from u0 over [0, T]. A
/// nonempty `mesh` (ending at T) replays those step end points.
inline Trajectory solve_frozen(const FractionalKernel& k, const FrozenCoefficient& a, std::span<const double> u0,
                               const FlowConfig& cfg, std::span<const double> mesh = {}) {
  cfg.validate();
  detail::check_initial(k, u0);
  detail::require(a.min_value() > 0.0 && std::isfinite(a.bound()), ErrorKind::InvalidConfig,
                  "frozen coefficient must be positive and bounded");
  OdeRhs f = [&k, &a, &cfg](double t, std::span<const double> u) { return rhs_frozen(k, a, t, u, cfg.p, cfg.eps_reg); };
  Trajectory traj = detail::integrate_on_grid(f, u0, cfg.output_grid(), cfg, {}, mesh);
  detail::check_bounds(traj, u0, kBoundSlack);
  return traj;
}

/// sup over the shared grid of ||a(t) - b(t)||_inf.
inline double trajectory_distance(const Trajectory& a, const Trajectory& b) {
  detail::require_length(a.size(), b.size(), "trajectory");
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, max_abs_diff(a.states[k], b.states[k]));
  return d;
}

struct PicardResult {
  Trajectory trajectory;
  int iterations = 0;
  std::vector<double> history;  // history[n-1] = sup distance between iterates n and n-1
};

class PicardError : public Error {
 public:
  PicardError(const std::string& what, std::vector<double> history)
      : Error(ErrorKind::PicardNotConverged, what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// Iterate distance, in units of the step tolerance, below which the step
/// mesh is frozen.
inline constexpr double kMeshFreeze = 1e3;

/// Frozen-coefficient iteration q u_{n-1}^{q-1} d/dt u_n + (-Delta)_p^s u_n = 0,
/// starting from the time-constant iterate u_0. Iterate 0 is u0 held constant.
/// Adaptive step selection is discontinuous in the coefficient, which leaves
/// the iterates jittering at the step tolerance. Once they are that close,
/// later iterates replay one fixed step mesh, so the iteration contracts to
/// the fixed point of a single discretization.
inline PicardResult picard_solve(const FractionalKernel& k, std::span<const double> u0, const FlowConfig& cfg) {
  cfg.validate();
  detail::check_initial(k, u0);
  const std::vector<double> grid = cfg.output_grid();
  Trajectory prev;
  prev.times = grid;
  prev.states.assign(grid.size(), VertexFunction(u0.begin(), u0.end()));
  const double freeze = kMeshFreeze * (cfg.atol + cfg.rtol * max_abs(u0));
  std::vector<double> mesh;

  PicardResult result;
  for (int n = 1; n <= cfg.picard_max; ++n) {
    const FrozenCoefficient a = n == 1 ? FrozenCoefficient::from_initial(u0, cfg.q, cfg.T)
                                       : FrozenCoefficient(prev, cfg.q);
    Trajectory next = solve_frozen(k, a, u0, cfg, mesh);
    const double dist = trajectory_distance(next, prev);
    result.history.push_back(dist);
    if (mesh.empty() && dist < freeze) mesh = next.mesh;
    // At q = 1 the coefficient does not depend on the iterate, so one solve is exact.
    if (dist < cfg.picard_tol || cfg.q == 1.0) {
      result.trajectory = std::move(next);
      result.iterations = n;
      return result;
    }
    prev = std::move(next);
  }
  throw PicardError("no convergence after " + std::to_string(cfg.picard_max) + " iterations", result.history);
}

/// The constant c with int c^q dmu = int u0^q dmu.
inline double steady_state(const Graph& g, std::span<const double> u0, double q) {
  detail::require_length(u0.size(), g.size(), "u0");
  detail::require_positive_state(u0);
  CompensatedSum mass;
  for (std::size_t x = 0; x < g.size(); ++x) mass += std::pow(u0[x], q) * g.measure(x);
  return std::pow(mass.value() / g.volume(), 1.0 / q);
}

}  // namespace fracgraph
