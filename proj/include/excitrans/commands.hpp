#ifndef EXCITRANS_COMMANDS_HPP
#define EXCITRANS_COMMANDS_HPP

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "excitrans/dynamics.hpp"
#include "excitrans/optimize.hpp"
#include "excitrans/scenario.hpp"

namespace excitrans {

/// A verification check or a strict convergence requirement failed.
class VerificationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitVerification = 4;

struct RunOptions {
  std::filesystem::path out_dir = "out";
  int threads = 1;
  bool strict_convergence = false;
  std::ostream* log = nullptr;  // progress and summaries; silent when null
};

// Computations. These return data and write nothing.

Trajectory simulate(const Scenario& s, const ModelConfig<>& config);

struct SweepResult {
  std::vector<double> omegas;
  std::vector<double> objectives;  // I_P(T_L) per grid point
  std::size_t argmax = 0;          // first maximum
};
SweepResult sweep_omega(const Scenario& s, int threads);

struct OptimizeOutcome {
  ModelConfig<> base;
  ModelConfig<> optimized;
  OptimizationResult result;
  double base_objective = 0.0;
};
/// Throws ConfigError when the scenario has no strategy.
OptimizeOutcome optimize_scenario(const Scenario& s, int threads);

/// Each member is compared with its own unoptimised counterpart, i.e. the
/// member scenario without a strategy; members with no strategy are their
/// own baseline.
struct CompareMemberResult {
  std::string label;
  Scenario scenario;
  Trajectory baseline;
  Trajectory optimized;
  std::optional<OptimizeOutcome> outcome;
};
struct CompareResult {
  std::vector<CompareMemberResult> members;
};
CompareResult compare_scenario(const Scenario& s, int threads);

struct GradientCheck {
  Eigen::VectorXd forward;  // forward-mode gradient
  Eigen::VectorXd central;  // central differences
  Eigen::VectorXd relative_error;
  double max_relative_error = 0.0;
};
/// Compares the forward-mode gradient of I_P(horizon) with central
/// differences of step h. Component k's error is
/// |forward_k - central_k| / max(|forward_k|, |central_k|); a component where
/// both vanish counts as exact.
GradientCheck check_gradient(const ModelConfig<>& config, const Strategy& strategy,
                             const Eigen::VectorXd& params, double horizon, double dt,
                             double h = 1e-5);

/// Parameters at which `verify` checks the gradient: the first restart's
/// starting point for Driving, the configured values otherwise.
Eigen::VectorXd gradient_check_point(const Scenario& s, const Strategy& strategy);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};
std::vector<CheckResult> verify_scenario(const Scenario& s, int threads);

/// p_opt / p_base, or NaN when p_base < 1e-12.
double sink_ratio(double p_opt, double p_base);

// File emission.

/// Shortest form with 12 significant digits ("%.12g").
std::string format_number(double x);

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

nlohmann::json convergence_json(const ConvergenceReport& r);

/// Each command writes its artifacts plus manifest.json into opts.out_dir
/// and returns the process exit code.
int run_simulate(const Scenario& s, const RunOptions& opts);
int run_optimize(const Scenario& s, const RunOptions& opts);
int run_sweep(const Scenario& s, const RunOptions& opts);
int run_compare(const Scenario& s, const RunOptions& opts);
int run_verify(const Scenario& s, const RunOptions& opts);

/// Dispatch by subcommand name; maps exceptions to exit codes and writes the
/// message to `err`.
int run_command(const std::string& command, const Scenario& s, const RunOptions& opts,
                std::ostream& err);

}  // namespace excitrans

#endif  // EXCITRANS_COMMANDS_HPP
