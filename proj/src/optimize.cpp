#include "excitrans/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "excitrans/dynamics.hpp"
#include "excitrans/errors.hpp"
#include "excitrans/parallel.hpp"

namespace excitrans {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform in [lo, hi) from the top 53 bits; unlike
// std::uniform_real_distribution the sequence is fixed across standard
// library implementations.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

}  // namespace

int Strategy::parameter_count(int n_sites) const {
  switch (kind) {
    case Kind::Driving: return 6 * harmonics;
    case Kind::Couplings: return 2;
    case Kind::SiteEnergies: return n_sites;
  }
  return 0;
}

std::string Strategy::name() const {
  switch (kind) {
    case Kind::Driving: return "driving";
    case Kind::Couplings: return "couplings";
    case Kind::SiteEnergies: return "energies";
  }
  return "?";
}

std::vector<std::string> parameter_names(const Strategy& strategy, int n_sites) {
  std::vector<std::string> names;
  switch (strategy.kind) {
    case Strategy::Kind::Driving:
      for (const char* target : {"antenna", "site"})
        for (int i = 1; i <= strategy.harmonics; ++i)
          for (const char* field : {"amplitude", "frequency", "phase"})
            names.push_back(std::string(target) + "_" + field + "_" + std::to_string(i));
      break;
    case Strategy::Kind::Couplings:
      names = {"lambda_ar", "lambda_a1"};
      break;
    case Strategy::Kind::SiteEnergies:
      for (int j = 1; j <= n_sites; ++j) names.push_back("epsilon_" + std::to_string(j));
      break;
  }
  return names;
}

Strategy parse_strategy(std::string_view name, int harmonics) {
  if (name == "driving") {
    if (harmonics < 1) throw ConfigError("strategy.R", "must be a positive integer");
    if (6 * harmonics > kMaxTangents)
      throw ConfigError("strategy.R", "at most " + std::to_string(kMaxTangents / 6) + " harmonics");
    return Strategy::driving(harmonics);
  }
  if (name == "couplings") return Strategy::couplings();
  if (name == "energies") return Strategy::site_energies();
  throw ConfigError("strategy", "unknown strategy '" + std::string(name) +
                                    "' (expected driving, couplings or energies)");
}

Eigen::VectorXd pack_parameters(const Strategy& strategy, const ModelConfig<>& config) {
  const int n = config.n_sites();
  Eigen::VectorXd p(strategy.parameter_count(n));
  switch (strategy.kind) {
    case Strategy::Kind::Driving: {
      const int r = strategy.harmonics;
      if (config.antenna_driving.harmonics() != r || config.site_driving.harmonics() != r)
        throw ConfigError("driving.R", "configuration has " +
                                           std::to_string(config.antenna_driving.harmonics()) +
                                           " harmonics, strategy expects " + std::to_string(r));
      for (int i = 0; i < r; ++i) {
        const auto& a = config.antenna_driving.terms[i];
        const auto& b = config.site_driving.terms[i];
        p.segment(3 * i, 3) << a.amplitude, a.frequency, a.phase;
        p.segment(3 * (r + i), 3) << b.amplitude, b.frequency, b.phase;
      }
      break;
    }
    case Strategy::Kind::Couplings:
      p << config.lambda_ar, config.lambda_a1;
      break;
    case Strategy::Kind::SiteEnergies:
      if (config.network.site_energies.size() != n)
        throw ConfigError("network.site_energies", "must have n_sites entries");
      p = config.network.site_energies;
      break;
  }
  return p;
}

std::uint64_t restart_seed(std::uint64_t master_seed, int index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(0xA5A5A5A5ULL + std::uint64_t(index)));
}

Eigen::VectorXd init_parameters(const Strategy& strategy, const ModelConfig<>& config,
                                std::uint64_t rng_seed) {
  if (strategy.kind != Strategy::Kind::Driving) {
    if (strategy.kind == Strategy::Kind::Couplings) return pack_parameters(strategy, config);
    return config.network.site_energies;
  }
  std::mt19937_64 rng(rng_seed);
  const int r = strategy.harmonics;
  Eigen::VectorXd p(6 * r);
  const double two_pi = 2.0 * std::numbers::pi;
  auto draw = [&](int offset, double base) {
    for (int i = 0; i < r; ++i) {
      p(offset + 3 * i) = uniform(rng, 0.0, 0.5 * std::abs(base));
      p(offset + 3 * i + 1) = uniform(rng, 0.0, 2.0 * std::abs(config.omega_r));
      p(offset + 3 * i + 2) = uniform(rng, 0.0, two_pi);
    }
  };
  draw(0, config.antenna_driving.base);
  draw(3 * r, config.site_driving.base);
  return p;
}

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("adam.learning_rate", "must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("adam.beta1", "must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("adam.beta2", "must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("adam.epsilon", "must be positive");
  if (iterations < 0) throw ConfigError("adam.iterations", "must be non-negative");
}

double default_learning_rate(const Strategy& strategy) {
  return strategy.kind == Strategy::Kind::Driving ? 0.05 : 0.02;
}

void adam_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grads,
               Eigen::VectorXd& moment1, Eigen::VectorXd& moment2, int iteration,
               const AdamConfig& cfg) {
  if (grads.size() != params.size() || moment1.size() != params.size() ||
      moment2.size() != params.size())
    throw std::invalid_argument("adam_step: vector lengths differ");
  if (iteration < 1) throw std::invalid_argument("adam_step: iteration starts at 1");
  if (!grads.allFinite()) throw OptimizerDiverged(iteration);

  moment1 = cfg.beta1 * moment1 + (1.0 - cfg.beta1) * grads;
  moment2 = cfg.beta2 * moment2 + (1.0 - cfg.beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, iteration);
  const double c2 = 1.0 - std::pow(cfg.beta2, iteration);
  params.array() -= cfg.learning_rate * (moment1.array() / c1) /
                    ((moment2.array() / c2).sqrt() + cfg.epsilon);
}

AscentTrace maximize(const GradientObjective& f, Eigen::VectorXd x0, const AdamConfig& cfg) {
  cfg.validate();
  AscentTrace trace;
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd grad(x.size());
  trace.history.reserve(cfg.iterations + 1);

  auto consider = [&](double value) {
    trace.history.push_back(value);
    if (trace.history.size() == 1 || value > trace.best_objective) {
      trace.best_objective = value;
      trace.best_params = x;
    }
  };

  for (int it = 1; it <= cfg.iterations; ++it) {
    consider(f(x, &grad));
    const Eigen::VectorXd descent = -grad;
    adam_step(x, descent, m1, m2, it, cfg);
  }
  consider(f(x, nullptr));
  return trace;
}

double strategy_objective(const ModelConfig<>& base, const Strategy& strategy,
                          const Eigen::VectorXd& params, double horizon, double dt,
                          Eigen::VectorXd* grad) {
  const std::span<const double> values(params.data(), static_cast<std::size_t>(params.size()));
  if (!grad) {
    return objective_ip(unpack_parameters<double>(strategy, base, values), horizon, dt);
  }
  const int p = static_cast<int>(params.size());
  return with_tangent_capacity(p, [&]<int N>() {
    const std::vector<Dual<N>> seeded = seed_parameters<N>(values);
    const ModelConfig<Dual<N>> config =
        unpack_parameters<Dual<N>>(strategy, base, std::span<const Dual<N>>(seeded));
    const Dual<N> ip = objective_ip(config, horizon, dt);
    *grad = gradient(ip, p);
    return ip.value();
  });
}

ModelConfig<> apply_parameters(const Strategy& strategy, const ModelConfig<>& base,
                               const Eigen::VectorXd& params) {
  return unpack_parameters<double>(
      strategy, base, std::span<const double>(params.data(), static_cast<std::size_t>(params.size())));
}

OptimizationResult optimize(const ModelConfig<>& config, const Strategy& strategy,
                            const AdamConfig& adam, const OptimizeSettings& settings) {
  validate(config);
  adam.validate();
  if (settings.restarts < 1) throw ConfigError("restarts", "must be at least 1");

  const int n_restarts = settings.restarts;
  std::vector<RestartResult> results(n_restarts);
  const bool seeded_init = strategy.kind == Strategy::Kind::Driving;

  auto run = [&](int index) {
    RestartResult& r = results[index];
    r.seed = restart_seed(settings.master_seed, index);
    r.initial_params = init_parameters(strategy, config, r.seed);
    const GradientObjective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
      return strategy_objective(config, strategy, x, settings.horizon, settings.dt, g);
    };
    try {
      AscentTrace trace = maximize(f, r.initial_params, adam);
      r.best_params = std::move(trace.best_params);
      r.best_objective = trace.best_objective;
      r.history = std::move(trace.history);
    } catch (const OptimizerDiverged& e) {
      throw OptimizerDiverged(e.iteration(), index);
    } catch (const IntegrationDiverged& e) {
      throw IntegrationDiverged(e.time(), index);
    }
  };

  // Warm-started strategies have seed-independent starting points, so every
  // restart would retrace the same path; run it once and copy.
  const int distinct = seeded_init ? n_restarts : 1;
  parallel_for(distinct, settings.threads, run);
  for (int i = distinct; i < n_restarts; ++i) {
    const std::uint64_t seed = restart_seed(settings.master_seed, i);
    results[i] = results[0];
    results[i].seed = seed;
  }

  OptimizationResult out;
  out.strategy = strategy;
  for (int i = 0; i < n_restarts; ++i) {
    if (i == 0 || results[i].best_objective > out.best_objective) {
      out.best_objective = results[i].best_objective;
      out.best_restart = i;
    }
  }
  out.best_params = results[out.best_restart].best_params;
  out.best_seed = results[out.best_restart].seed;
  out.restarts = std::move(results);
  return out;
}

}  // namespace excitrans
