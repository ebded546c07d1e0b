#include "excitrans/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "excitrans/errors.hpp"
#include "excitrans/oracle.hpp"
#include "excitrans/parallel.hpp"

namespace excitrans {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kTraceTolerance = 1e-8;
constexpr double kHermiticityTolerance = 1e-10;
constexpr double kEigenvalueTolerance = 1e-8;
constexpr double kMonotoneTolerance = 1e-10;
constexpr double kOracleTolerance = 1e-8;
constexpr double kGradientTolerance = 1e-4;
constexpr double kOracleHorizon = 10.0;

void log_line(const RunOptions& opts, const std::string& line) {
  if (opts.log) *opts.log << line << '\n';
}

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out = open_output(path);
  out << doc.dump(2) << '\n';
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json manifest(const std::string& command, const Scenario& s) {
  return {{"command", command}, {"version", kVersion}, {"scenario", scenario_to_json(s)}};
}

// Convergence of I_P(T_L) for one configuration; throws under
// --strict-convergence when it fails.
json convergence_entry(const std::string& label, const ModelConfig<>& config, const Scenario& s,
                       const RunOptions& opts) {
  const ConvergenceReport r = dt_convergence(config, s.horizon, s.dt);
  json entry = convergence_json(r);
  entry["label"] = label;
  if (!r.converged) {
    const std::string msg = label + ": I_P(T_L) at dt = " + format_number(s.dt) +
                            " differs from dt/2 by " + format_number(r.rel_diff) +
                            " (tolerance " + format_number(kConvergenceTolerance) + ")";
    if (opts.strict_convergence) throw VerificationFailed("not converged: " + msg);
    log_line(opts, "warning: " + msg);
  }
  return entry;
}

json optimization_json(const OptimizeOutcome& o, const Scenario& s) {
  const OptimizationResult& r = o.result;
  json restarts = json::array();
  for (std::size_t i = 0; i < r.restarts.size(); ++i) {
    const RestartResult& rr = r.restarts[i];
    restarts.push_back({{"index", i},
                        {"seed", rr.seed},
                        {"initial_params", vector_json(rr.initial_params)},
                        {"best_params", vector_json(rr.best_params)},
                        {"best_objective", rr.best_objective},
                        {"history", rr.history}});
  }
  return {{"strategy", {{"kind", r.strategy.name()}, {"R", r.strategy.harmonics}}},
          {"parameter_names", parameter_names(r.strategy, s.network.n_sites)},
          {"best_params", vector_json(r.best_params)},
          {"best_objective", r.best_objective},
          {"unoptimized_objective", o.base_objective},
          {"best_restart", r.best_restart},
          {"seed", r.best_seed},
          {"master_seed", s.master_seed},
          {"restarts", restarts}};
}

Strategy require_strategy(const Scenario& s) {
  if (!s.strategy) throw ConfigError("strategy", "this command needs a strategy");
  return *s.strategy;
}

double max_abs_difference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  return (a - b).cwiseAbs().maxCoeff();
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

CheckResult check_oracle(const Scenario& s) {
  CheckResult c{"oracle_equivalence", false, ""};
  const double horizon = s.dt * std::round(std::min(s.t_end, kOracleHorizon) / s.dt);
  FullSpaceConfig full{s.model(), 2};
  if (full.dimension() > full.max_dimension) {
    c.passed = true;
    c.detail = "skipped: full space too large";
    return c;
  }
  const TrajectoryConfig grid{s.dt, horizon, s.record_stride};
  const Trajectory reduced = evolve(full.model, grid, s.initial_state());
  const FullSpaceTrajectory brute = full_space_evolve(full, grid, s.initial_state());
  const double diff = max_abs_difference(reduced.populations, brute.reduced.populations);
  c.passed = diff < kOracleTolerance;
  c.detail = "max |dp| = " + sci(diff) + " over T = " + format_number(horizon) +
             ", leakage " + sci(brute.max_leakage());
  return c;
}

CheckResult check_convergence(const Scenario& s) {
  const ConvergenceReport r = dt_convergence(s.model(), s.horizon, s.dt);
  return {"dt_convergence", r.converged,
          "rel diff " + sci(r.rel_diff) + " at dt = " + format_number(s.dt)};
}

CheckResult check_strategy_gradient(const Scenario& s, const Strategy& strategy) {
  const GradientCheck g =
      check_gradient(s.model(), strategy, gradient_check_point(s, strategy), s.horizon, s.dt);
  return {"gradient_" + strategy.name(), g.max_relative_error < kGradientTolerance,
          "max rel err " + sci(g.max_relative_error)};
}

// Trace, Hermiticity, positivity and sink monotonicity along the full run.
std::vector<CheckResult> check_invariants(const Scenario& s) {
  double trace_err = 0.0, herm_err = 0.0, min_eig = std::numeric_limits<double>::infinity();
  double prev_sink = -std::numeric_limits<double>::infinity(), worst_drop = 0.0;
  double max_sink = 0.0;
  const Eigen::Index sink = BasisMap{s.network.n_sites}.sink();
  evolve(s.model(), s.trajectory(), s.initial_state(), [&](double, const DensityMatrix<>& rho) {
    trace_err = std::max(trace_err, std::abs(rho.trace() - 1.0));
    herm_err = std::max(herm_err, hermiticity_error(rho));
    min_eig = std::min(min_eig, min_eigenvalue(rho));
    const double p = rho.population(sink);
    worst_drop = std::max(worst_drop, prev_sink - p);
    prev_sink = p;
    max_sink = std::max(max_sink, std::abs(p));
  });
  std::vector<CheckResult> out;
  out.push_back({"trace", trace_err <= kTraceTolerance, "max |tr - 1| = " + sci(trace_err)});
  out.push_back(
      {"hermiticity", herm_err <= kHermiticityTolerance, "max |rho - rho^H| = " + sci(herm_err)});
  out.push_back({"positivity", min_eig >= -kEigenvalueTolerance, "min eigenvalue " + sci(min_eig)});
  out.push_back({"sink_monotone", worst_drop <= kMonotoneTolerance,
                 "largest drop " + sci(std::max(0.0, worst_drop))});
  if (s.lambda_sN == 0.0 && s.initial != InitialState::Sink)
    out.push_back({"zero_sink", max_sink == 0.0, "max p_sink " + sci(max_sink)});
  return out;
}

// Runs a check, turning a divergence or configuration problem into a
// failed row.
template <typename Fn>
void run_check(std::vector<CheckResult>& out, const std::string& name, Fn&& fn) {
  try {
    if constexpr (std::is_same_v<decltype(fn()), CheckResult>) {
      out.push_back(fn());
    } else {
      for (auto& c : fn()) out.push_back(std::move(c));
    }
  } catch (const std::exception& e) {
    out.push_back({name, false, e.what()});
  }
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

double sink_ratio(double p_opt, double p_base) {
  return p_base < 1e-12 ? std::numeric_limits<double>::quiet_NaN() : p_opt / p_base;
}

json convergence_json(const ConvergenceReport& r) {
  return {{"dt", r.dt},
          {"I_P_dt", r.coarse},
          {"I_P_half_dt", r.fine},
          {"relative_difference", std::isfinite(r.rel_diff) ? json(r.rel_diff) : json(nullptr)},
          {"tolerance", kConvergenceTolerance},
          {"converged", r.converged}};
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) {
  std::ofstream out = open_output(path);
  const auto dim = traj.populations.cols();
  const BasisMap basis{static_cast<int>(dim) - 3};
  out << 't';
  for (Eigen::Index i = 0; i < dim; ++i) out << ',' << basis.label(i);
  out << ",trace,sink_integral\n";
  for (Eigen::Index r = 0; r < traj.records(); ++r) {
    out << format_number(traj.times[r]);
    for (Eigen::Index i = 0; i < dim; ++i) out << ',' << format_number(traj.populations(r, i));
    out << ',' << format_number(traj.trace[r]) << ',' << format_number(traj.sink_integral[r])
        << '\n';
  }
}

Trajectory simulate(const Scenario& s, const ModelConfig<>& config) {
  return evolve(config, s.trajectory(), s.initial_state());
}

SweepResult sweep_omega(const Scenario& s, int threads) {
  SweepResult r;
  r.omegas = s.sweep.points();
  r.objectives.assign(r.omegas.size(), 0.0);
  const ModelConfig<> base = s.model();
  const DensityMatrix<> rho0 = s.initial_state();
  parallel_for(static_cast<int>(r.omegas.size()), threads, [&](int i) {
    ModelConfig<> c = base;
    c.omega_r = r.omegas[i];
    r.objectives[i] = objective_ip(c, s.horizon, s.dt, rho0);
  });
  for (std::size_t i = 1; i < r.objectives.size(); ++i)
    if (r.objectives[i] > r.objectives[r.argmax]) r.argmax = i;
  return r;
}

OptimizeOutcome optimize_scenario(const Scenario& s, int threads) {
  const Strategy strategy = require_strategy(s);
  if (s.initial != InitialState::Photon)
    throw ConfigError("initial_state", "optimisation starts from the photon state");
  OptimizeOutcome o;
  o.base = s.model();
  o.base_objective = objective_ip(o.base, s.horizon, s.dt);
  o.result = optimize(o.base, strategy, s.adam, s.optimize_settings(threads));
  o.optimized = apply_parameters(strategy, o.base, o.result.best_params);
  return o;
}

CompareResult compare_scenario(const Scenario& s, int threads) {
  if (s.compare.empty()) throw ConfigError("compare", "needs at least one member");
  CompareResult out;
  for (const auto& m : s.compare) {
    CompareMemberResult r;
    r.label = m.label;
    r.scenario = member_scenario(s, m);
    const Scenario& ms = r.scenario;
    if (ms.dt != s.dt || ms.t_end != s.t_end || ms.record_stride != s.record_stride)
      throw ConfigError("compare." + m.label + ".times", "members must share the time grid");
    out.members.push_back(std::move(r));
  }
  const int n = static_cast<int>(out.members.size());
  const int outer = std::clamp(threads, 1, n);
  const int inner = std::max(1, threads / outer);
  parallel_for(n, outer, [&](int i) {
    CompareMemberResult& r = out.members[i];
    r.baseline = simulate(r.scenario, r.scenario.model());
    if (r.scenario.strategy) {
      r.outcome = optimize_scenario(r.scenario, inner);
      r.optimized = simulate(r.scenario, r.outcome->optimized);
    } else {
      r.optimized = r.baseline;
    }
  });
  return out;
}

GradientCheck check_gradient(const ModelConfig<>& config, const Strategy& strategy,
                             const Eigen::VectorXd& params, double horizon, double dt, double h) {
  GradientCheck g;
  g.forward.resize(params.size());
  strategy_objective(config, strategy, params, horizon, dt, &g.forward);
  g.central.resize(params.size());
  g.relative_error.resize(params.size());
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    Eigen::VectorXd up = params, down = params;
    up(k) += h;
    down(k) -= h;
    g.central(k) = (strategy_objective(config, strategy, up, horizon, dt) -
                    strategy_objective(config, strategy, down, horizon, dt)) /
                   (2.0 * h);
    const double scale = std::max(std::abs(g.forward(k)), std::abs(g.central(k)));
    g.relative_error(k) = scale == 0.0 ? 0.0 : std::abs(g.forward(k) - g.central(k)) / scale;
  }
  g.max_relative_error = params.size() ? g.relative_error.maxCoeff() : 0.0;
  return g;
}

Eigen::VectorXd gradient_check_point(const Scenario& s, const Strategy& strategy) {
  return init_parameters(strategy, s.model(), restart_seed(s.master_seed, 0));
}

std::vector<CheckResult> verify_scenario(const Scenario& s, int threads) {
  std::vector<Strategy> strategies{
      s.strategy && s.strategy->kind == Strategy::Kind::Driving ? *s.strategy
                                                                 : Strategy::driving(1),
      Strategy::couplings(), Strategy::site_energies()};
  // Checks are independent; run them on the pool and keep a fixed order.
  std::vector<std::vector<CheckResult>> parts(3 + strategies.size());
  parallel_for(static_cast<int>(parts.size()), threads, [&](int i) {
    auto& out = parts[i];
    if (i == 0) run_check(out, "oracle_equivalence", [&] { return check_oracle(s); });
    if (i == 1) run_check(out, "dt_convergence", [&] { return check_convergence(s); });
    if (i == 2) run_check(out, "invariants", [&] { return check_invariants(s); });
    if (i >= 3) {
      const Strategy& st = strategies[i - 3];
      run_check(out, "gradient_" + st.name(), [&] { return check_strategy_gradient(s, st); });
    }
  });
  std::vector<CheckResult> out;
  for (auto& p : parts)
    for (auto& c : p) out.push_back(std::move(c));
  return out;
}

int run_simulate(const Scenario& s, const RunOptions& opts) {
  const ModelConfig<> config = s.model();
  json m = manifest("simulate", s);
  m["convergence"] = json::array({convergence_entry("scenario", config, s, opts)});
  const Trajectory traj = simulate(s, config);
  write_trajectory_csv(opts.out_dir / "trajectory.csv", traj);
  write_json(opts.out_dir / "manifest.json", m);
  log_line(opts, "final p_sink = " + format_number(traj.p_sink(traj.records() - 1)) +
                     ", I_P(T) = " + format_number(traj.sink_integral.back()));
  return kExitOk;
}

int run_optimize(const Scenario& s, const RunOptions& opts) {
  require_strategy(s);
  json m = manifest("optimize", s);
  json conv = json::array({convergence_entry("unoptimized", s.model(), s, opts)});
  const OptimizeOutcome o = optimize_scenario(s, opts.threads);
  conv.push_back(convergence_entry("optimized", o.optimized, s, opts));
  m["convergence"] = conv;

  const Trajectory base = simulate(s, o.base);
  const Trajectory opt = simulate(s, o.optimized);
  json params = optimization_json(o, s);
  params["final_p_sink"] = {{"unoptimized", base.p_sink(base.records() - 1)},
                            {"optimized", opt.p_sink(opt.records() - 1)}};
  write_json(opts.out_dir / "params.json", params);
  write_trajectory_csv(opts.out_dir / "trajectory_unoptimized.csv", base);
  write_trajectory_csv(opts.out_dir / "trajectory_optimized.csv", opt);
  write_json(opts.out_dir / "manifest.json", m);
  log_line(opts, "I_P(T_L): unoptimized " + format_number(o.base_objective) + ", optimized " +
                     format_number(o.result.best_objective) + " (restart " +
                     std::to_string(o.result.best_restart) + ")");
  log_line(opts, "final p_sink ratio " +
                     format_number(sink_ratio(opt.p_sink(opt.records() - 1),
                                              base.p_sink(base.records() - 1))));
  return kExitOk;
}

int run_sweep(const Scenario& s, const RunOptions& opts) {
  const SweepResult r = sweep_omega(s, opts.threads);
  ModelConfig<> best = s.model();
  best.omega_r = r.omegas[r.argmax];
  json m = manifest("sweep", s);
  m["convergence"] = json::array({convergence_entry("argmax", best, s, opts)});
  m["argmax"] = {{"omega_r", r.omegas[r.argmax]}, {"I_P", r.objectives[r.argmax]}};

  std::ofstream out = open_output(opts.out_dir / "sweep.csv");
  out << "omega_r,I_P\n";
  for (std::size_t i = 0; i < r.omegas.size(); ++i)
    out << format_number(r.omegas[i]) << ',' << format_number(r.objectives[i]) << '\n';
  out.close();
  write_json(opts.out_dir / "manifest.json", m);
  log_line(opts, "argmax omega_r = " + format_number(r.omegas[r.argmax]) +
                     ", I_P(T_L) = " + format_number(r.objectives[r.argmax]));
  return kExitOk;
}

int run_compare(const Scenario& s, const RunOptions& opts) {
  const CompareResult r = compare_scenario(s, opts.threads);
  json m = manifest("compare", s);
  json conv = json::array();
  for (const auto& mr : r.members) {
    conv.push_back(convergence_entry(mr.label + ":unoptimized", mr.scenario.model(), mr.scenario,
                                     opts));
    if (mr.outcome)
      conv.push_back(convergence_entry(mr.label + ":optimized", mr.outcome->optimized,
                                       mr.scenario, opts));
  }
  m["convergence"] = conv;

  const Trajectory& grid = r.members.front().baseline;
  std::ofstream ratio = open_output(opts.out_dir / "ratio.csv");
  std::ofstream sink = open_output(opts.out_dir / "sink.csv");
  ratio << 't';
  sink << 't';
  for (const auto& mr : r.members) {
    ratio << ",ratio_" << mr.label;
    sink << ",unoptimized_" << mr.label << ",optimized_" << mr.label;
  }
  ratio << '\n';
  sink << '\n';
  for (Eigen::Index row = 0; row < grid.records(); ++row) {
    ratio << format_number(grid.times[row]);
    sink << format_number(grid.times[row]);
    for (const auto& mr : r.members) {
      const double pb = mr.baseline.p_sink(row), po = mr.optimized.p_sink(row);
      const double q = sink_ratio(po, pb);
      ratio << ',';
      if (!std::isnan(q)) ratio << format_number(q);
      sink << ',' << format_number(pb) << ',' << format_number(po);
    }
    ratio << '\n';
    sink << '\n';
  }
  ratio.close();
  sink.close();

  for (const auto& mr : r.members) {
    if (!mr.outcome) continue;
    write_json(opts.out_dir / ("params_" + mr.label + ".json"),
               optimization_json(*mr.outcome, mr.scenario));
    const Eigen::Index last = grid.records() - 1;
    log_line(opts, mr.label + ": I_P(T_L) " + format_number(mr.outcome->base_objective) + " -> " +
                       format_number(mr.outcome->result.best_objective) + ", final ratio " +
                       format_number(sink_ratio(mr.optimized.p_sink(last),
                                                mr.baseline.p_sink(last))));
  }
  write_json(opts.out_dir / "manifest.json", m);
  return kExitOk;
}

int run_verify(const Scenario& s, const RunOptions& opts) {
  const std::vector<CheckResult> checks = verify_scenario(s, opts.threads);
  bool ok = true;
  json rows = json::array();
  std::ostringstream table;
  table << std::left << std::setw(22) << "check" << std::setw(8) << "result" << "detail\n";
  for (const auto& c : checks) {
    ok = ok && c.passed;
    table << std::left << std::setw(22) << c.name << std::setw(8) << (c.passed ? "PASS" : "FAIL")
          << c.detail << '\n';
    rows.push_back({{"check", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  json m = manifest("verify", s);
  m["checks"] = rows;
  m["passed"] = ok;
  write_json(opts.out_dir / "manifest.json", m);
  if (opts.log) *opts.log << table.str();
  return ok ? kExitOk : kExitVerification;
}

int run_command(const std::string& command, const Scenario& s, const RunOptions& opts,
                std::ostream& err) {
  try {
    if (command == "simulate") return run_simulate(s, opts);
    if (command == "optimize") return run_optimize(s, opts);
    if (command == "sweep") return run_sweep(s, opts);
    if (command == "compare") return run_compare(s, opts);
    if (command == "verify") return run_verify(s, opts);
    err << "error: unknown command '" << command << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IntegrationDiverged& e) {
    err << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const OptimizerDiverged& e) {
    err << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const VerificationFailed& e) {
    err << "verification failed: " << e.what() << '\n';
    return kExitVerification;
  }
}

}  // namespace excitrans
