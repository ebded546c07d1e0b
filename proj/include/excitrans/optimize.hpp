#ifndef EXCITRANS_OPTIMIZE_HPP
#define EXCITRANS_OPTIMIZE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "excitrans/errors.hpp"
#include "excitrans/model.hpp"

namespace excitrans {

/// Which physical parameters are learned.
///   Driving(R):    (A_i, nu_i, phi_i)_{i<=R} then (B_i, mu_i, theta_i)_{i<=R}
///   Couplings:     (lambda_ar, lambda_a1)
///   SiteEnergies:  (eps_1, ..., eps_N)
struct Strategy {
  enum class Kind { Driving, Couplings, SiteEnergies };

  Kind kind = Kind::Driving;
  int harmonics = 1;  // R, Driving only

  static Strategy driving(int harmonics) { return {Kind::Driving, harmonics}; }
  static Strategy couplings() { return {Kind::Couplings, 0}; }
  static Strategy site_energies() { return {Kind::SiteEnergies, 0}; }

  int parameter_count(int n_sites) const;
  std::string name() const;

  friend bool operator==(const Strategy&, const Strategy&) = default;
};

/// Names of the packed parameters, e.g. antenna_amplitude_1 or epsilon_3.
std::vector<std::string> parameter_names(const Strategy& strategy, int n_sites);

/// "driving", "couplings" or "energies".
Strategy parse_strategy(std::string_view name, int harmonics);

/// Flat parameter vector in the strategy's order. Throws ConfigError when
/// the configuration does not have the expected shape (e.g. a driving with
/// the wrong number of harmonics).
Eigen::VectorXd pack_parameters(const Strategy& strategy, const ModelConfig<>& config);

/// Exact inverse of pack_parameters: overwrite the strategy's fields of
/// `base` with `params`. Driving replaces both term lists with R terms;
/// SiteEnergies keeps the site-N driving base equal to eps_N.
template <typename Scalar>
ModelConfig<Scalar> unpack_parameters(const Strategy& strategy, const ModelConfig<>& base,
                                      std::span<const Scalar> params);

/// Starting point for one restart. Driving draws amplitudes in
/// [0, base/2], frequencies in [0, 2 omega_r] and phases in [0, 2 pi);
/// Couplings and SiteEnergies start from the configured values.
Eigen::VectorXd init_parameters(const Strategy& strategy, const ModelConfig<>& config,
                                std::uint64_t rng_seed);

/// Seed of restart `index` derived from the master seed. Counter-based, so
/// it does not depend on execution order.
std::uint64_t restart_seed(std::uint64_t master_seed, int index);

struct AdamConfig {
  double learning_rate = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int iterations = 400;

  void validate() const;
};

/// Default learning rate per strategy kind.
double default_learning_rate(const Strategy& strategy);

/// One bias-corrected Adam descent step on `params` (iteration >= 1).
/// Throws OptimizerDiverged on a non-finite gradient.
void adam_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grads,
               Eigen::VectorXd& moment1, Eigen::VectorXd& moment2, int iteration,
               const AdamConfig& cfg);

/// Objective value; fills `grad` when non-null.
using GradientObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct AscentTrace {
  Eigen::VectorXd best_params;
  double best_objective = 0.0;
  std::vector<double> history;  // objective at x_0 .. x_iterations
};

/// Gradient ascent with Adam (descent on -f), tracking the best iterate.
/// Runs cfg.iterations gradient evaluations plus one value-only evaluation
/// of the final iterate.
AscentTrace maximize(const GradientObjective& f, Eigen::VectorXd x0, const AdamConfig& cfg);

/// I_P(horizon) for the strategy's parameter vector; fills `grad` (forward
/// mode) when non-null.
double strategy_objective(const ModelConfig<>& base, const Strategy& strategy,
                          const Eigen::VectorXd& params, double horizon, double dt,
                          Eigen::VectorXd* grad = nullptr);

struct RestartResult {
  std::uint64_t seed = 0;
  Eigen::VectorXd initial_params;
  Eigen::VectorXd best_params;
  double best_objective = 0.0;
  std::vector<double> history;
};

struct OptimizationResult {
  Strategy strategy;
  Eigen::VectorXd best_params;
  double best_objective = 0.0;
  int best_restart = 0;
  std::uint64_t best_seed = 0;
  std::vector<RestartResult> restarts;
};

struct OptimizeSettings {
  double horizon = 30.0;  // T_L
  double dt = 1e-2;
  int restarts = 8;
  std::uint64_t master_seed = 0;
  int threads = 1;
};

/// Multi-restart maximisation of I_P(T_L). Restarts are independent and may
/// run on `threads` workers; the result is the best restart (lowest index on
/// ties) and does not depend on the thread count.
OptimizationResult optimize(const ModelConfig<>& config, const Strategy& strategy,
                            const AdamConfig& adam, const OptimizeSettings& settings);

/// Configuration with the learned parameters applied.
ModelConfig<> apply_parameters(const Strategy& strategy, const ModelConfig<>& base,
                               const Eigen::VectorXd& params);

template <typename Scalar>
ModelConfig<Scalar> unpack_parameters(const Strategy& strategy, const ModelConfig<>& base,
                                      std::span<const Scalar> params) {
  const int n = base.n_sites();
  if (static_cast<int>(params.size()) != strategy.parameter_count(n))
    throw ConfigError("parameters", "expected " + std::to_string(strategy.parameter_count(n)) +
                                        " values for strategy " + strategy.name());
  ModelConfig<Scalar> c = cast_config<Scalar>(base);
  switch (strategy.kind) {
    case Strategy::Kind::Driving: {
      const int r = strategy.harmonics;
      c.antenna_driving.terms.assign(r, {});
      c.site_driving.terms.assign(r, {});
      for (int i = 0; i < r; ++i) {
        c.antenna_driving.terms[i] = {params[3 * i], params[3 * i + 1], params[3 * i + 2]};
        c.site_driving.terms[i] = {params[3 * (r + i)], params[3 * (r + i) + 1],
                                   params[3 * (r + i) + 2]};
      }
      break;
    }
    case Strategy::Kind::Couplings:
      c.lambda_ar = params[0];
      c.lambda_a1 = params[1];
      break;
    case Strategy::Kind::SiteEnergies:
      for (int j = 0; j < n; ++j) c.network.site_energies(j) = params[j];
      c.site_driving.base = params[n - 1];
      break;
  }
  return c;
}

}  // namespace excitrans

#endif  // EXCITRANS_OPTIMIZE_HPP
