#ifndef EXCITRANS_DYNAMICS_HPP
#define EXCITRANS_DYNAMICS_HPP

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "excitrans/density_matrix.hpp"
#include "excitrans/errors.hpp"
#include "excitrans/model.hpp"

namespace excitrans {

struct TrajectoryConfig {
  double dt = 1e-3;
  double t_end = 0.0;
  int record_stride = 100;

  /// round(t_end / dt); throws ConfigError when the grid is inconsistent.
  long steps() const;
  void validate() const;
};

/// Recorded observables. Row r of `populations` holds the diagonal of rho at
/// `times[r]` in BasisMap order.
struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd populations;
  std::vector<double> trace;
  std::vector<double> sink_integral;  // running integral of p_sink

  Eigen::Index records() const { return static_cast<Eigen::Index>(times.size()); }
  double p_sink(Eigen::Index r) const { return populations(r, populations.cols() - 1); }
  Eigen::VectorXd sink_series() const { return populations.col(populations.cols() - 1); }
};

/// Density matrix together with the running integral of the sink
/// population, integrated as one ODE system.
template <typename Scalar = double>
struct AugmentedState {
  DensityMatrix<Scalar> rho;
  Scalar accumulator{};

  AugmentedState& operator+=(const AugmentedState& o) {
    rho += o.rho;
    accumulator += o.accumulator;
    return *this;
  }
  AugmentedState& operator*=(double s) {
    rho *= s;
    accumulator *= s;
    return *this;
  }
  friend AugmentedState operator+(AugmentedState a, const AugmentedState& b) { return a += b; }
  friend AugmentedState operator*(double s, AugmentedState a) { return a *= s; }
};

/// Classical fourth-order Runge-Kutta step for y' = f(t, y). State must
/// support `State + State` and `double * State`.
template <typename State, typename Derivative>
State rk4_step(const Derivative& f, double t, const State& y, double dt) {
  const double half = 0.5 * dt;
  const State k1 = f(t, y);
  const State k2 = f(t + half, y + half * k1);
  const State k3 = f(t + half, y + half * k2);
  const State k4 = f(t + dt, y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
}

/// Time derivative of the augmented state: (lindblad_rhs, p_sink).
template <typename Scalar>
AugmentedState<Scalar> augmented_rhs(const LindbladGenerator<Scalar>& gen, double t,
                                     const AugmentedState<Scalar>& y) {
  AugmentedState<Scalar> dy;
  gen.apply(t, y.rho, dy.rho);
  const Eigen::Index sink = gen.basis().sink();
  dy.accumulator = y.rho.re(sink, sink);
  return dy;
}

namespace detail {

template <typename Scalar>
void check_finite(const AugmentedState<Scalar>& y, double t) {
  bool ok = std::isfinite(value_of(y.accumulator));
  for (Eigen::Index i = 0; ok && i < y.rho.dimension(); ++i)
    ok = std::isfinite(value_of(y.rho.re(i, i)));
  if (!ok) throw IntegrationDiverged(t);
}

}  // namespace detail

/// Reusable RK4 integrator for the augmented master equation. Holds the
/// stage buffers so repeated steps do not allocate. Not shareable between
/// threads; the generator it references may be.
template <typename Scalar>
class Rk4Stepper {
 public:
  explicit Rk4Stepper(const LindbladGenerator<Scalar>& gen) : gen_(gen) {}

  /// Advance y from t to t + dt in place. Throws IntegrationDiverged if the
  /// result is not finite.
  void step(double t, AugmentedState<Scalar>& y, double dt) {
    const double half = 0.5 * dt;
    eval(t, y, k1_);
    stage(y, half, k1_);
    eval(t + half, tmp_, k2_);
    stage(y, half, k2_);
    eval(t + half, tmp_, k3_);
    stage(y, dt, k3_);
    eval(t + dt, tmp_, k4_);
    const double w = dt / 6.0;
    y.rho.re += w * (k1_.rho.re + 2.0 * (k2_.rho.re + k3_.rho.re) + k4_.rho.re);
    y.rho.im += w * (k1_.rho.im + 2.0 * (k2_.rho.im + k3_.rho.im) + k4_.rho.im);
    y.accumulator += w * (k1_.accumulator + 2.0 * (k2_.accumulator + k3_.accumulator) +
                          k4_.accumulator);
    detail::check_finite(y, t + dt);
  }

 private:
  void eval(double t, const AugmentedState<Scalar>& y, AugmentedState<Scalar>& dy) {
    gen_.apply(t, y.rho, dy.rho, ws_);
    const Eigen::Index sink = gen_.basis().sink();
    dy.accumulator = y.rho.re(sink, sink);
  }
  void stage(const AugmentedState<Scalar>& y, double h, const AugmentedState<Scalar>& k) {
    tmp_.rho.re = y.rho.re + h * k.rho.re;
    tmp_.rho.im = y.rho.im + h * k.rho.im;
    tmp_.accumulator = y.accumulator + h * k.accumulator;
  }

  const LindbladGenerator<Scalar>& gen_;
  typename LindbladGenerator<Scalar>::Workspace ws_;
  AugmentedState<Scalar> k1_, k2_, k3_, k4_, tmp_;
};

/// One RK4 step of the augmented system (dρ/dt = lindblad_rhs,
/// da/dt = p_sink). Throws IntegrationDiverged if the result is not finite.
template <typename Scalar>
AugmentedState<Scalar> rk4_step(const ModelConfig<Scalar>& config, double t,
                                AugmentedState<Scalar> y, double dt) {
  const LindbladGenerator<Scalar> gen(config);
  Rk4Stepper<Scalar> stepper(gen);
  stepper.step(t, y, dt);
  return y;
}

/// Initial state with the photon in the radiation mode and everything else
/// in its ground state.
template <typename Scalar = double>
DensityMatrix<Scalar> initial_state(int n_sites) {
  return DensityMatrix<Scalar>::pure(n_sites + 3, BasisMap::radiation());
}

/// Called at every recorded time with the current density matrix.
using TrajectoryObserver = std::function<void(double t, const DensityMatrix<double>& rho)>;

/// Integrate from `initial` over [0, traj.t_end], recording every
/// record_stride steps (and always the first and last step).
Trajectory evolve(const ModelConfig<>& config, const TrajectoryConfig& traj,
                  const DensityMatrix<double>& initial,
                  const TrajectoryObserver& observer = {});

/// Time-integrated sink population over [0, horizon]. With DiffScalar
/// parameters in `config` the result carries the gradient.
template <typename Scalar>
Scalar objective_ip(const ModelConfig<Scalar>& config, double horizon, double dt,
                    const DensityMatrix<Scalar>& initial) {
  const TrajectoryConfig grid{dt, horizon, 1};
  const long steps = grid.steps();
  const LindbladGenerator<Scalar> gen(config);
  Rk4Stepper<Scalar> stepper(gen);
  AugmentedState<Scalar> y{initial, Scalar(0.0)};
  for (long s = 0; s < steps; ++s) stepper.step(double(s) * dt, y, dt);
  return y.accumulator;
}

template <typename Scalar>
Scalar objective_ip(const ModelConfig<Scalar>& config, double horizon, double dt) {
  return objective_ip(config, horizon, dt, initial_state<Scalar>(config.n_sites()));
}

struct ConvergenceReport {
  bool converged = false;
  double rel_diff = 0.0;
  double coarse = 0.0;  // I_P at dt
  double fine = 0.0;    // I_P at dt / 2
  double dt = 0.0;
};

inline constexpr double kConvergenceTolerance = 1e-5;

/// Step-halving check of I_P(horizon). A diverged integration counts as not
/// converged with an infinite difference.
ConvergenceReport dt_convergence(const ModelConfig<>& config, double horizon, double dt);

}  // namespace excitrans

#endif  // EXCITRANS_DYNAMICS_HPP
