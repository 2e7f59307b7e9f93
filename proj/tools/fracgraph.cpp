// Command-line front end: kernel, evolve, verify, sweep.
//
// Exit codes: 0 all checks passed, 1 a numerical check or solve failed,
// 2 bad input or usage.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fracgraph/fracgraph.hpp"
#include "fracgraph/graph_io.hpp"
#include "fracgraph/report.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace fracgraph;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr const char* kOutputDirEnv = "FRACGRAPH_OUTPUT_DIR";
constexpr double kOracleTolerance = 1e-6;

struct InitialData {
  std::string generator = "random-uniform";  // explicit | constant | random-uniform
  std::vector<double> values;
  double value = 1.0;
  double lo = 0.5;
  double hi = 2.0;
  std::uint64_t seed = 1;

  VertexFunction build(std::size_t n) const {
    if (generator == "explicit") {
      detail::require_length(values.size(), n, "u0");
      for (double v : values)
        detail::require(std::isfinite(v) && v > 0.0, ErrorKind::InvalidConfig, "u0 entries must be positive");
      return values;
    }
    if (generator == "constant") {
      detail::require(value > 0.0, ErrorKind::InvalidConfig, "constant u0 must be positive");
      return VertexFunction(n, value);
    }
    detail::require(generator == "random-uniform", ErrorKind::InvalidConfig, "unknown u0 generator " + generator);
    detail::require(lo > 0.0 && hi >= lo, ErrorKind::InvalidConfig, "random u0 bounds must satisfy 0 < lo <= hi");
    return random_uniform(n, lo, hi, seed);
  }

  json describe() const {
    json j{{"generator", generator}};
    if (generator == "constant") j["value"] = value;
    if (generator == "random-uniform") {
      j["rng"] = std::string(SplitMix64::kName);
      j["seed"] = seed;
      j["lo"] = lo;
      j["hi"] = hi;
    }
    return j;
  }
};

struct RunConfig {
  std::string graph_path;
  FlowConfig flow;
  bool dt_out_set = false;
  InitialData u0;
  std::string solver = "direct";
  std::string output_dir = ".";
  bool plots = false;
};

// Values given on the command line; unset ones fall back to the config file.
struct Flags {
  std::string config_path;
  std::optional<std::string> graph, solver, output_dir, u0_generator;
  std::optional<double> s, p, q, T, dt_out, atol, rtol, eps_reg, picard_tol, u0_value, u0_lo, u0_hi;
  std::optional<int> picard_max;
  std::optional<std::uint64_t> seed;
  std::vector<double> u0;
  bool plots = false;
};

void add_run_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "config JSON; flags override its fields");
  cmd->add_option("-g,--graph", f.graph, "graph JSON");
  cmd->add_option("--s", f.s, "fractional order in (0,1)");
  cmd->add_option("--p", f.p, "p > 1");
  cmd->add_option("--q", f.q, "q > 0");
  cmd->add_option("--T", f.T, "final time");
  cmd->add_option("--dt-out", f.dt_out, "output grid spacing");
  cmd->add_option("--atol", f.atol, "absolute step tolerance");
  cmd->add_option("--rtol", f.rtol, "relative step tolerance");
  cmd->add_option("--eps-reg", f.eps_reg, "gradient regularization");
  cmd->add_option("--picard-tol", f.picard_tol, "Picard stop threshold on the iterate distance");
  cmd->add_option("--picard-max", f.picard_max, "Picard iteration cap");
  cmd->add_option("--solver", f.solver, "direct or picard")->check(CLI::IsMember({"direct", "picard"}));
  cmd->add_option("--u0", f.u0, "explicit initial values, comma separated")->delimiter(',');
  cmd->add_option("--u0-generator", f.u0_generator, "generated initial data")->check(CLI::IsMember({"constant", "random-uniform"}));
  cmd->add_option("--u0-value", f.u0_value, "value for the constant generator");
  cmd->add_option("--u0-lo", f.u0_lo, "lower bound for random-uniform u0");
  cmd->add_option("--u0-hi", f.u0_hi, "upper bound for random-uniform u0");
  cmd->add_option("--seed", f.seed, "seed for random-uniform u0");
  cmd->add_option("-o,--output-dir", f.output_dir, "output directory");
  cmd->add_flag("--plots", f.plots, "also write SVG plots");
}

double get_number(const json& j, const char* key) {
  detail::require(j.is_number(), ErrorKind::InvalidConfig, std::string(key) + " must be a number");
  return j.get<double>();
}

void apply_u0_json(const json& j, InitialData& u0) {
  if (j.is_array()) {
    u0.generator = "explicit";
    u0.values = j.get<std::vector<double>>();
  } else if (j.is_number()) {
    u0.generator = "constant";
    u0.value = j.get<double>();
  } else if (j.is_object()) {
    for (const auto& [key, v] : j.items()) {
      if (key == "generator") u0.generator = v.get<std::string>();
      else if (key == "value") u0.value = get_number(v, "u0.value");
      else if (key == "lo") u0.lo = get_number(v, "u0.lo");
      else if (key == "hi") u0.hi = get_number(v, "u0.hi");
      else if (key == "seed") u0.seed = v.get<std::uint64_t>();
      else throw Error(ErrorKind::InvalidConfig, "unknown u0 field " + key);
    }
  } else {
    throw Error(ErrorKind::InvalidConfig, "u0 must be an array, a number or an object");
  }
}

void apply_config_file(const std::string& path, RunConfig& rc) {
  const json doc = read_json_file(path);
  detail::require(doc.is_object(), ErrorKind::InvalidConfig, "config must be a JSON object");
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "graph") {
        fs::path g = v.get<std::string>();
        if (g.is_relative()) g = fs::path(path).parent_path() / g;
        rc.graph_path = g.string();
      } else if (key == "s") rc.flow.s = get_number(v, "s");
      else if (key == "p") rc.flow.p = get_number(v, "p");
      else if (key == "q") rc.flow.q = get_number(v, "q");
      else if (key == "T") rc.flow.T = get_number(v, "T");
      else if (key == "dt_out") {
        rc.flow.dt_out = get_number(v, "dt_out");
        rc.dt_out_set = true;
      } else if (key == "atol") rc.flow.atol = get_number(v, "atol");
      else if (key == "rtol") rc.flow.rtol = get_number(v, "rtol");
      else if (key == "eps_reg") rc.flow.eps_reg = get_number(v, "eps_reg");
      else if (key == "picard_tol") rc.flow.picard_tol = get_number(v, "picard_tol");
      else if (key == "picard_max") rc.flow.picard_max = v.get<int>();
      else if (key == "solver") rc.solver = v.get<std::string>();
      else if (key == "u0") apply_u0_json(v, rc.u0);
      else if (key == "output_dir") rc.output_dir = v.get<std::string>();
      else if (key == "plots") rc.plots = v.get<bool>();
      else throw Error(ErrorKind::InvalidConfig, "unknown config field " + key);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, path + ": " + e.what());
  }
}

RunConfig resolve(const Flags& f) {
  RunConfig rc;
  if (!f.config_path.empty()) apply_config_file(f.config_path, rc);
  if (f.graph) rc.graph_path = *f.graph;
  if (f.s) rc.flow.s = *f.s;
  if (f.p) rc.flow.p = *f.p;
  if (f.q) rc.flow.q = *f.q;
  if (f.T) rc.flow.T = *f.T;
  if (f.dt_out) {
    rc.flow.dt_out = *f.dt_out;
    rc.dt_out_set = true;
  }
  if (f.atol) rc.flow.atol = *f.atol;
  if (f.rtol) rc.flow.rtol = *f.rtol;
  if (f.eps_reg) rc.flow.eps_reg = *f.eps_reg;
  if (f.picard_tol) rc.flow.picard_tol = *f.picard_tol;
  if (f.picard_max) rc.flow.picard_max = *f.picard_max;
  if (f.solver) rc.solver = *f.solver;
  if (!f.u0.empty()) {
    rc.u0.generator = "explicit";
    rc.u0.values = f.u0;
  }
  if (f.u0_generator) rc.u0.generator = *f.u0_generator;
  if (f.u0_value) rc.u0.value = *f.u0_value;
  if (f.u0_lo) rc.u0.lo = *f.u0_lo;
  if (f.u0_hi) rc.u0.hi = *f.u0_hi;
  if (f.seed) rc.u0.seed = *f.seed;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') rc.output_dir = env;
  if (f.output_dir) rc.output_dir = *f.output_dir;
  rc.plots = rc.plots || f.plots;

  detail::require(!rc.graph_path.empty(), ErrorKind::InvalidConfig, "no graph given (--graph or config \"graph\")");
  detail::require(rc.solver == "direct" || rc.solver == "picard", ErrorKind::InvalidConfig,
                  "solver must be direct or picard");
  return rc;
}

json flow_json(const FlowConfig& c, const std::string& solver) {
  return {{"s", c.s},           {"p", c.p},           {"q", c.q},
          {"T", c.T},           {"dt_out", c.dt_out}, {"atol", c.atol},
          {"rtol", c.rtol},     {"eps_reg", c.eps_reg}, {"picard_tol", c.picard_tol},
          {"picard_max", c.picard_max}, {"solver", solver}};
}

fs::path prepare_dir(const std::string& dir) {
  fs::path out(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  detail::require(!ec, ErrorKind::IoError, "cannot create " + dir + ": " + ec.message());
  return out;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  detail::require(static_cast<bool>(out), ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out = open_out(path);
  out << doc.dump(2) << '\n';
}

void print_check(const CheckLine& c) {
  std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << format_double(c.value)
            << " threshold=" << format_double(c.threshold) << '\n';
}

json checks_json(const std::vector<CheckLine>& lines) {
  json arr = json::array();
  for (const CheckLine& c : lines) {
    arr.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"passed", c.passed}});
  }
  return arr;
}

bool all_passed(const std::vector<CheckLine>& lines) {
  return std::all_of(lines.begin(), lines.end(), [](const CheckLine& c) { return c.passed; });
}

struct Solved {
  Trajectory traj;
  std::optional<int> picard_iterations;
  std::vector<double> picard_history;
};

Solved solve(const FractionalKernel& k, const VertexFunction& u0, const FlowConfig& cfg, const std::string& solver) {
  Solved out;
  if (solver == "picard") {
    PicardResult r = picard_solve(k, u0, cfg);
    out.traj = std::move(r.trajectory);
    out.picard_iterations = r.iterations;
    out.picard_history = std::move(r.history);
  } else {
    out.traj = evolve_direct(k, u0, cfg);
  }
  return out;
}

void write_plots(const fs::path& dir, const Trajectory& traj, const FractionalKernel& k, double p, double q) {
  PlotSeries lo{"min_u", {}}, hi{"max_u", {}}, ms{"mass", {}}, en{"dirichlet_p_energy", {}};
  for (const VertexFunction& u : traj.states) {
    lo.values.push_back(*std::min_element(u.begin(), u.end()));
    hi.values.push_back(*std::max_element(u.begin(), u.end()));
    ms.values.push_back(mass(k.mu, u, q));
    en.values.push_back(dirichlet_p_energy(k, u, p));
  }
  const std::vector<PlotSeries> bounds{lo, hi};
  std::ofstream a = open_out(dir / "plot_bounds.svg");
  write_svg_plot(a, "min and max of u", traj.times, bounds);
  std::ofstream b = open_out(dir / "plot_mass.svg");
  write_svg_plot(b, "mass", traj.times, std::vector<PlotSeries>{ms});
  std::ofstream c = open_out(dir / "plot_energy.svg");
  write_svg_plot(c, "Dirichlet p-energy", traj.times, std::vector<PlotSeries>{en});
}

// kernel ---------------------------------------------------------------------

int cmd_kernel(const std::string& graph_path, double s, std::optional<std::string> output_dir) {
  const Graph g = load_graph(graph_path);
  std::string dir = ".";
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') dir = env;
  if (output_dir) dir = *output_dir;
  const fs::path out = prepare_dir(dir);

  const SpectralDecomposition dec = decompose(g);
  {
    json eig{{"eigenvalues", dec.eigenvalues}, {"labels", g.labels()}};
    json phi = json::array();
    for (std::size_t i = 0; i < dec.size(); ++i) phi.push_back(dec.phi(i));
    eig["eigenfunctions"] = phi;
    write_json(out / "eigenvalues.json", eig);
  }

  json report{{"s", s}, {"n", g.size()}};
  std::vector<CheckLine> lines;
  try {
    const Matrix w = kernel_weights(dec, s);
    std::ofstream csv = open_out(out / "kernel.csv");
    write_matrix_csv(csv, w, g.labels());

    const std::size_t n = g.size();
    const double scale = w.max_abs();
    double min_off = INFINITY, asym = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        if (x == y) continue;
        min_off = std::min(min_off, w(x, y));
        asym = std::max(asym, std::abs(w(x, y) - w(y, x)));
      }
    }
    lines.push_back({"positivity", min_off, 0.0, min_off > 0.0});
    lines.push_back({"symmetry", asym, 1e-12 * scale, asym <= 1e-12 * scale});

    const Matrix oracle = kernel_weights_oracle(dec, s);
    double rel = 0.0, abs_dev = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        if (x == y) continue;
        const double d = std::abs(w(x, y) - oracle(x, y));
        abs_dev = std::max(abs_dev, d);
        rel = std::max(rel, d / std::abs(oracle(x, y)));
      }
    }
    lines.push_back({"oracle_agreement", rel, kOracleTolerance, rel <= kOracleTolerance});
    report["max_relative_deviation"] = rel;
    report["max_abs_deviation"] = abs_dev;
    report["min_offdiagonal"] = min_off;
    report["symmetry_deviation"] = asym;
  } catch (const Error& e) {
    if (is_input_error(e.kind())) throw;
    report["status"] = std::string(to_string(e.kind()));
    report["message"] = e.what();
    lines.push_back({std::string(to_string(e.kind())), 0.0, 0.0, false});
  }
  report["checks"] = checks_json(lines);
  report["all_passed"] = all_passed(lines);
  write_json(out / "oracle_report.json", report);
  for (const CheckLine& c : lines) print_check(c);
  return all_passed(lines) ? kExitOk : kExitCheckFailed;
}

// evolve / verify ------------------------------------------------------------

json base_summary(const RunConfig& rc, const Graph& g) {
  return {{"graph", rc.graph_path}, {"n", g.size()}, {"config", flow_json(rc.flow, rc.solver)},
          {"u0", rc.u0.describe()}};
}

int cmd_evolve(const Flags& flags) {
  RunConfig rc = resolve(flags);
  const Graph g = load_graph(rc.graph_path);
  rc.flow.validate();
  if (!rc.dt_out_set || rc.flow.dt_out == 0.0) rc.flow.dt_out = rc.flow.T / 200.0;
  const VertexFunction u0 = rc.u0.build(g.size());
  const fs::path out = prepare_dir(rc.output_dir);
  const FractionalKernel k = make_kernel(g, rc.flow.s);

  json summary = base_summary(rc, g);
  summary["u0"]["values"] = u0;
  const double c = steady_state(g, u0, rc.flow.q);
  summary["steady_state"] = c;
  try {
    Solved r = solve(k, u0, rc.flow, rc.solver);
    std::ofstream csv = open_out(out / "trajectory.csv");
    write_trajectory_csv(csv, r.traj, k, rc.flow.p, rc.flow.q);
    double err = 0.0;
    for (double v : r.traj.final_state()) err = std::max(err, std::abs(v - c));
    summary["status"] = "ok";
    summary["steady_state_error"] = err;
    summary["final_state"] = r.traj.final_state();
    summary["final_gradient_energy"] = dirichlet_p_energy(k, r.traj.final_state(), rc.flow.p);
    summary["steps"] = {{"accepted", r.traj.stats.accepted}, {"rejected", r.traj.stats.rejected}};
    summary["picard_iterations"] = r.picard_iterations ? json(*r.picard_iterations) : json(nullptr);
    summary["picard_history"] = r.picard_history;
    if (rc.plots) write_plots(out, r.traj, k, rc.flow.p, rc.flow.q);
    write_json(out / "summary.json", summary);
    std::cout << "wrote " << (out / "trajectory.csv").string() << " (" << r.traj.size() << " rows)\n";
    return kExitOk;
  } catch (const PicardError& e) {
    summary["status"] = std::string(to_string(e.kind()));
    summary["message"] = e.what();
    summary["picard_history"] = e.history();
    write_json(out / "summary.json", summary);
    std::cerr << e.what() << '\n';
    return kExitCheckFailed;
  } catch (const Error& e) {
    if (is_input_error(e.kind())) throw;
    summary["status"] = std::string(to_string(e.kind()));
    summary["message"] = e.what();
    write_json(out / "summary.json", summary);
    std::cerr << e.what() << '\n';
    return kExitCheckFailed;
  }
}

json report_json(const DiagnosticsReport& r) {
  return {{"energy_identity_residual", r.energy_identity_residual},
          {"dissipation_lhs", r.dissipation_lhs},
          {"dissipation_rhs", r.dissipation_rhs},
          {"mass_drift", r.mass_drift},
          {"bound_violation", r.bound_violation},
          {"initial_gradient_energy", r.initial_gradient_energy},
          {"final_gradient_energy", r.final_gradient_energy},
          {"gradient_increase", r.gradient_increase},
          {"steady_state_error", r.steady_state_error},
          {"final_time_derivative", r.final_time_derivative},
          {"horizon_note", "the infinite-horizon dissipation integral is truncated at T"}};
}

// Diagnostics need a fine time grid; T/200 under-resolves long runs.
double verify_dt_out(const RunConfig& rc) {
  if (rc.dt_out_set && rc.flow.dt_out > 0.0) return rc.flow.dt_out;
  return std::min(rc.flow.T / 200.0, 1e-3);
}

struct VerifyResult {
  json doc;
  bool passed = false;
};

VerifyResult run_verify(const Graph& g, const FractionalKernel& k, const RunConfig& rc, const VertexFunction& u0,
                        const fs::path& out, bool write_trajectory) {
  VerifyResult res;
  res.doc = base_summary(rc, g);
  try {
    Solved r = solve(k, u0, rc.flow, rc.solver);
    const DiagnosticsReport rep = run_diagnostics(g, k, r.traj, rc.flow);
    const std::vector<CheckLine> lines = evaluate_checks(rep);
    res.doc["status"] = "ok";
    res.doc["report"] = report_json(rep);
    res.doc["checks"] = checks_json(lines);
    res.doc["picard_iterations"] = r.picard_iterations ? json(*r.picard_iterations) : json(nullptr);
    res.passed = all_passed(lines);
    if (write_trajectory) {
      std::ofstream csv = open_out(out / "trajectory.csv");
      write_trajectory_csv(csv, r.traj, k, rc.flow.p, rc.flow.q);
    }
    if (rc.plots) write_plots(out, r.traj, k, rc.flow.p, rc.flow.q);
  } catch (const Error& e) {
    if (is_input_error(e.kind())) throw;
    res.doc["status"] = std::string(to_string(e.kind()));
    res.doc["message"] = e.what();
    res.passed = false;
  }
  res.doc["all_passed"] = res.passed;
  write_json(out / "diagnostics.json", res.doc);
  return res;
}

int cmd_verify(const Flags& flags) {
  RunConfig rc = resolve(flags);
  const Graph g = load_graph(rc.graph_path);
  rc.flow.validate();
  rc.flow.dt_out = verify_dt_out(rc);
  const VertexFunction u0 = rc.u0.build(g.size());
  const fs::path out = prepare_dir(rc.output_dir);
  const FractionalKernel k = make_kernel(g, rc.flow.s);

  const VerifyResult res = run_verify(g, k, rc, u0, out, false);
  if (res.doc.contains("checks")) {
    for (const json& c : res.doc["checks"]) {
      print_check({c["name"], c["value"], c["threshold"], c["passed"]});
    }
  } else {
    std::cout << "FAIL solve " << res.doc["message"].get<std::string>() << '\n';
  }
  return res.passed ? kExitOk : kExitCheckFailed;
}

// sweep ----------------------------------------------------------------------

std::string short_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

int cmd_sweep(const Flags& flags, std::vector<double> s_list, std::vector<double> p_list, std::vector<double> q_list,
              unsigned jobs) {
  RunConfig base = resolve(flags);
  const Graph g = load_graph(base.graph_path);
  if (s_list.empty()) s_list = {base.flow.s};
  if (p_list.empty()) p_list = {base.flow.p};
  if (q_list.empty()) q_list = {base.flow.q};
  base.flow.dt_out = verify_dt_out(base);
  const VertexFunction u0 = base.u0.build(g.size());
  const fs::path out = prepare_dir(base.output_dir);

  struct Job {
    RunConfig rc;
    std::size_t kernel;
    fs::path dir;
    VerifyResult result;
  };
  std::vector<FractionalKernel> kernels;
  std::vector<Job> work;
  for (std::size_t i = 0; i < s_list.size(); ++i) {
    for (double p : p_list) {
      for (double q : q_list) {
        RunConfig rc = base;
        rc.flow.s = s_list[i];
        rc.flow.p = p;
        rc.flow.q = q;
        rc.flow.validate();
        const std::string name = "s" + short_number(rc.flow.s) + "_p" + short_number(p) + "_q" + short_number(q);
        rc.output_dir = (out / name).string();
        work.push_back({rc, i, out / name, {}});
      }
    }
  }
  for (double s : s_list) kernels.push_back(make_kernel(g, s));
  for (const Job& j : work) prepare_dir(j.dir.string());

  // One solve per configuration; workers only touch their own Job entry.
  std::atomic<std::size_t> next{0};
  std::vector<std::string> failures(work.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      try {
        work[i].result = run_verify(g, kernels[work[i].kernel], work[i].rc, u0, work[i].dir, true);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(work.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  json runs = json::array();
  bool ok = true;
  for (std::size_t i = 0; i < work.size(); ++i) {
    const Job& j = work[i];
    json entry{{"s", j.rc.flow.s}, {"p", j.rc.flow.p}, {"q", j.rc.flow.q}, {"dir", j.dir.filename().string()}};
    if (!failures[i].empty()) {
      entry["status"] = "error";
      entry["message"] = failures[i];
      entry["all_passed"] = false;
    } else {
      entry["status"] = j.result.doc["status"];
      entry["all_passed"] = j.result.passed;
    }
    ok = ok && entry["all_passed"].get<bool>();
    std::cout << (entry["all_passed"].get<bool>() ? "PASS " : "FAIL ") << entry["dir"].get<std::string>() << '\n';
    runs.push_back(entry);
  }
  json doc{{"graph", base.graph_path}, {"u0", base.u0.describe()}, {"jobs", jobs}, {"runs", runs}, {"all_passed", ok}};
  doc["u0"]["values"] = u0;
  write_json(out / "sweep.json", doc);
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional p-Laplacian flows on weighted graphs"};
  app.require_subcommand(1);

  std::string kernel_graph;
  double kernel_s = 0.5;
  std::optional<std::string> kernel_out;
  std::string kernel_config;
  CLI::App* kernel = app.add_subcommand("kernel", "fractional kernel, eigenvalues and quadrature cross-check");
  kernel->add_option("-g,--graph", kernel_graph, "graph JSON");
  kernel->add_option("--s", kernel_s, "fractional order in (0,1)");
  kernel->add_option("--config", kernel_config, "config JSON (graph, s, output_dir)");
  kernel->add_option("-o,--output-dir", kernel_out, "output directory");

  Flags evolve_flags, verify_flags, sweep_flags;
  CLI::App* evolve = app.add_subcommand("evolve", "integrate the flow and write the trajectory");
  add_run_options(evolve, evolve_flags);
  CLI::App* verify = app.add_subcommand("verify", "integrate the flow and check the energy estimates");
  add_run_options(verify, verify_flags);
  CLI::App* sweep = app.add_subcommand("sweep", "verify over the product of s, p and q lists");
  add_run_options(sweep, sweep_flags);
  std::vector<double> s_list, p_list, q_list;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  sweep->add_option("--s-list", s_list, "comma separated s values")->delimiter(',');
  sweep->add_option("--p-list", p_list, "comma separated p values")->delimiter(',');
  sweep->add_option("--q-list", q_list, "comma separated q values")->delimiter(',');
  sweep->add_option("-j,--jobs", jobs, "concurrent solves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (kernel->parsed()) {
      bool kernel_s_set = kernel->count("--s") > 0;
      if (!kernel_config.empty()) {
        const json doc = read_json_file(kernel_config);
        if (kernel_graph.empty() && doc.contains("graph")) {
          fs::path gp = doc["graph"].get<std::string>();
          if (gp.is_relative()) gp = fs::path(kernel_config).parent_path() / gp;
          kernel_graph = gp.string();
        }
        if (!kernel_s_set && doc.contains("s")) kernel_s = doc["s"].get<double>();
        if (!kernel_out && doc.contains("output_dir") && std::getenv(kOutputDirEnv) == nullptr) {
          kernel_out = doc["output_dir"].get<std::string>();
        }
      }
      detail::require(!kernel_graph.empty(), ErrorKind::InvalidConfig, "no graph given");
      return cmd_kernel(kernel_graph, kernel_s, kernel_out);
    }
    if (evolve->parsed()) return cmd_evolve(evolve_flags);
    if (verify->parsed()) return cmd_verify(verify_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_flags, s_list, p_list, q_list, jobs);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_input_error(e.kind()) ? kExitUsage : kExitCheckFailed;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
