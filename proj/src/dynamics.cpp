#include "excitrans/dynamics.hpp"

#include <cmath>
#include <limits>

namespace excitrans {

long TrajectoryConfig::steps() const {
  validate();
  return std::lround(t_end / dt);
}

void TrajectoryConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("times.dt", "must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end))
    throw ConfigError("times.T", "must be non-negative");
  if (record_stride < 1) throw ConfigError("times.record_stride", "must be positive");
  const double n = std::round(t_end / dt);
  if (std::abs(n * dt - t_end) > 1e-12 * std::max(1.0, t_end))
    throw ConfigError("times.dt", "end time must be an integer multiple of dt");
}

Trajectory evolve(const ModelConfig<>& config, const TrajectoryConfig& traj,
                  const DensityMatrix<double>& initial, const TrajectoryObserver& observer) {
  const long steps = traj.steps();
  const LindbladGenerator<double> gen(config);
  Rk4Stepper<double> stepper(gen);
  const Eigen::Index dim = config.dimension();
  if (initial.dimension() != dim) throw ConfigError("initial_state", "dimension mismatch");

  Trajectory out;
  const long n_records = steps / traj.record_stride + 1 + (steps % traj.record_stride ? 1 : 0);
  out.populations.resize(n_records, dim);
  out.times.reserve(n_records);
  out.trace.reserve(n_records);
  out.sink_integral.reserve(n_records);

  auto record = [&](long step, const AugmentedState<double>& y) {
    const double t = double(step) * traj.dt;
    const auto r = static_cast<Eigen::Index>(out.times.size());
    out.times.push_back(t);
    out.populations.row(r) = y.rho.re.diagonal().transpose();
    out.trace.push_back(y.rho.trace());
    out.sink_integral.push_back(y.accumulator);
    if (observer) observer(t, y.rho);
  };

  AugmentedState<double> y{initial, 0.0};
  record(0, y);
  for (long s = 0; s < steps; ++s) {
    stepper.step(double(s) * traj.dt, y, traj.dt);
    if ((s + 1) % traj.record_stride == 0 || s + 1 == steps) record(s + 1, y);
  }
  return out;
}

ConvergenceReport dt_convergence(const ModelConfig<>& config, double horizon, double dt) {
  ConvergenceReport r;
  r.dt = dt;
  try {
    r.coarse = objective_ip(config, horizon, dt);
    r.fine = objective_ip(config, horizon, 0.5 * dt);
  } catch (const IntegrationDiverged&) {
    r.rel_diff = std::numeric_limits<double>::infinity();
    r.converged = false;
    return r;
  }
  const double diff = std::abs(r.coarse - r.fine);
  r.rel_diff = diff == 0.0 ? 0.0 : diff / std::max(std::abs(r.fine), std::abs(r.coarse));
  r.converged = r.rel_diff < kConvergenceTolerance;
  return r;
}

}  // namespace excitrans
