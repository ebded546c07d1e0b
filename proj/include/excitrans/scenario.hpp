#ifndef EXCITRANS_SCENARIO_HPP
#define EXCITRANS_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "excitrans/dynamics.hpp"
#include "excitrans/model.hpp"
#include "excitrans/optimize.hpp"

namespace excitrans {

/// Where the excitation starts.
enum class InitialState { Photon, Antenna, Sink };

struct SweepGrid {
  double omega_min = 0.05;
  double omega_max = 1.0;
  double omega_step = 0.002;

  /// Grid points omega_min + k * step up to omega_max (inclusive within
  /// half a step). Throws ConfigError for an empty or malformed grid.
  std::vector<double> points() const;
};

/// One member of a comparison: a label and a JSON merge patch applied to the
/// enclosing scenario.
struct CompareMember {
  std::string label;
  nlohmann::json patch;
};

/// Fully resolved experiment description. Omitted JSON fields take the
/// reference values (NN chain, N = 4, omega_r = 0.264, lambda_ar = lambda_a1
/// = 1, lambda_N = 0.1, lambda_sN = 0.05, T_L = 30, T = 1200).
struct Scenario {
  std::string name = "default";

  std::string network_kind = "nn";  // nn | star | fmo | custom
  NetworkSpec<> network;

  double omega_r = 0.264;
  double lambda_ar = 1.0;
  double lambda_a1 = 1.0;
  double lambda_N = 0.1;
  double lambda_sN = 0.05;

  std::vector<DrivingTerm<>> antenna_terms;
  std::vector<DrivingTerm<>> site_terms;

  std::optional<Strategy> strategy;  // empty: no optimisation
  AdamConfig adam;

  double horizon = 30.0;  // T_L
  double t_end = 1200.0;  // T
  double dt = 1e-2;
  int record_stride = 100;

  int restarts = 8;
  std::uint64_t master_seed = 0;
  InitialState initial = InitialState::Photon;

  SweepGrid sweep;
  std::vector<CompareMember> compare;

  /// Optional default output directory; not part of the resolved document.
  std::string output;

  ModelConfig<> model() const;
  TrajectoryConfig trajectory() const { return {dt, t_end, record_stride}; }
  OptimizeSettings optimize_settings(int threads) const;
  DensityMatrix<double> initial_state() const;
};

/// Default step for a network kind: 1e-2 for nn and star, 2e-3 for fmo,
/// 1e-3 for custom networks.
double default_dt(const std::string& network_kind);

/// Parse a scenario document. Unknown keys and malformed values raise
/// ConfigError naming the field path (e.g. "lambda.sN").
Scenario scenario_from_json(const nlohmann::json& doc);

/// Resolved document: every field explicit, so that parsing it again yields
/// the same scenario. The output directory is omitted.
nlohmann::json scenario_to_json(const Scenario& s);

/// Member scenario of a comparison: the resolved document with the member's
/// patch merged in. Its own comparison list is dropped.
Scenario member_scenario(const Scenario& s, const CompareMember& member);

/// Built-in scenario by name (see preset_names). Throws ConfigError for an
/// unknown name.
nlohmann::json preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace excitrans

#endif  // EXCITRANS_SCENARIO_HPP
