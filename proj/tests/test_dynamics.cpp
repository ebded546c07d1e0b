#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "excitrans/dynamics.hpp"
#include "excitrans/errors.hpp"

namespace excitrans {
namespace {

ModelConfig<> reference_config(NetworkKind kind = NetworkKind::NearestNeighbour, int n = 4,
                               double omega_r = 0.264) {
  return make_config(builtin_network(kind, n), omega_r, 1.0, 1.0, 0.1, 0.05);
}

// No couplings and no dissipation: every population is frozen.
ModelConfig<> static_config() {
  ModelConfig<> c = reference_config();
  c.lambda_ar = c.lambda_a1 = c.lambda_N = c.lambda_sN = 0.0;
  c.network.couplings.setZero();
  return c;
}

// Exact propagator values from a matrix-exponential evaluation of the
// augmented Liouvillian (independent of the RK4 integrator).
constexpr double kReferenceIp30 = 3.52119559931;
constexpr double kReferenceSink30 = 0.224896918429;
constexpr double kReferenceIp1200 = 1073.70759912;
constexpr double kReferenceSink1200 = 0.999886221854;
constexpr double kOffResonantIp30 = 0.015986650002;
constexpr double kFmoOffResonantIp30 = 7.90123286518e-06;

TEST(TrajectoryConfig, GridValidation) {
  EXPECT_EQ((TrajectoryConfig{0.01, 30.0, 1}.steps()), 3000);
  EXPECT_THROW((TrajectoryConfig{0.007, 1.0, 1}.validate()), ConfigError);
  EXPECT_THROW((TrajectoryConfig{0.0, 1.0, 1}.validate()), ConfigError);
  EXPECT_THROW((TrajectoryConfig{0.1, -1.0, 1}.validate()), ConfigError);
  EXPECT_THROW((TrajectoryConfig{0.1, 1.0, 0}.validate()), ConfigError);
  EXPECT_EQ((TrajectoryConfig{0.1, 0.0, 1}.steps()), 0);
}

TEST(Rk4, ScalarExponentialHasFifthOrderLocalError) {
  auto f = [](double, double y) { return y; };
  const double e1 = std::abs(rk4_step(f, 0.0, 1.0, 0.1) - std::exp(0.1));
  const double e2 = std::abs(rk4_step(f, 0.0, 1.0, 0.05) - std::exp(0.05));
  EXPECT_NEAR(e1 / e2, 32.0, 2.0);
}

TEST(Rk4, StaticDiagonalStateUnchanged) {
  DensityMatrix<> rho = DensityMatrix<>::zero(7);
  rho.re.diagonal() << 0.1, 0.2, 0.3, 0.1, 0.1, 0.15, 0.05;
  AugmentedState<> y{rho, 0.0};
  for (int s = 0; s < 100; ++s) y = rk4_step(static_config(), s * 0.1, y, 0.1);
  EXPECT_TRUE(y.rho.re.isApprox(rho.re, 1e-15));
  EXPECT_TRUE(y.rho.im.isZero(0.0));
  EXPECT_NEAR(y.accumulator, 0.05 * 10.0, 1e-14);
}

TEST(Rk4, RabiOscillation) {
  ModelConfig<> c = static_config();
  c.omega_r = 2.0;  // photon and antenna-excited states degenerate at omega_a = 1
  c.lambda_ar = 1.0;
  const Trajectory traj = evolve(c, {1e-3, 1.0, 1000}, initial_state(4));
  EXPECT_NEAR(traj.populations(traj.records() - 1, 1), std::pow(std::sin(1.0), 2), 1e-8);
}

TEST(Rk4, SinkDecay) {
  ModelConfig<> c = static_config();
  c.lambda_sN = 0.05;
  const BasisMap b{4};
  const Trajectory traj = evolve(c, {1e-3, 10.0, 1000}, DensityMatrix<>::pure(7, b.last_site()));
  for (Eigen::Index r = 0; r < traj.records(); ++r)
    EXPECT_NEAR(traj.p_sink(r), 1.0 - std::exp(-0.05 * traj.times[r]), 1e-10);
}

TEST(Rk4, NonFiniteStateThrowsWithTime) {
  ModelConfig<> c = reference_config(NetworkKind::Fmo, 7);
  try {
    objective_ip(c, 30.0, 0.05);
    FAIL() << "expected divergence";
  } catch (const IntegrationDiverged& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_LE(e.time(), 30.0);
  }
}

TEST(Evolve, RecordsFirstStrideAndLast) {
  const Trajectory traj = evolve(reference_config(), {0.1, 1.05 * 10 / 10.5, 4}, initial_state(4));
  // 10 steps with stride 4: steps 0, 4, 8, 10
  ASSERT_EQ(traj.records(), 4);
  EXPECT_DOUBLE_EQ(traj.times[1], 0.4);
  EXPECT_DOUBLE_EQ(traj.times[3], 1.0);
  EXPECT_EQ(traj.populations(0, 0), 1.0);
}

TEST(Evolve, SinkInitialStateIsAbsorbing) {
  const BasisMap b{4};
  const Trajectory traj =
      evolve(reference_config(), {0.01, 50.0, 100}, DensityMatrix<>::pure(7, b.sink()));
  for (Eigen::Index r = 0; r < traj.records(); ++r) EXPECT_EQ(traj.p_sink(r), 1.0);
  // Exact up to rounding in the 5000-step running sum.
  EXPECT_NEAR(traj.sink_integral.back(), 50.0, 1e-11);
}

TEST(Evolve, NoSinkRateMeansNoSinkPopulation) {
  ModelConfig<> c = reference_config();
  c.lambda_sN = 0.0;
  const Trajectory traj = evolve(c, {0.01, 100.0, 10}, initial_state(4));
  EXPECT_TRUE(traj.sink_series().isZero(0.0));
  EXPECT_EQ(traj.sink_integral.back(), 0.0);
}

TEST(Evolve, ReferenceRegression) {
  const Trajectory traj = evolve(reference_config(), {0.01, 1200.0, 100}, initial_state(4));
  const Eigen::Index r30 = 30;
  EXPECT_DOUBLE_EQ(traj.times[r30], 30.0);
  EXPECT_NEAR(traj.sink_integral[r30], kReferenceIp30, 1e-8 * kReferenceIp30);
  EXPECT_NEAR(traj.p_sink(r30), kReferenceSink30, 1e-9);
  EXPECT_NEAR(traj.sink_integral.back(), kReferenceIp1200, 1e-8 * kReferenceIp1200);
  EXPECT_NEAR(traj.p_sink(traj.records() - 1), kReferenceSink1200, 1e-9);
}

TEST(Evolve, InvariantsAlongTrajectory) {
  for (auto [kind, n, dt] : {std::tuple{NetworkKind::NearestNeighbour, 4, 0.01},
                             {NetworkKind::Star, 8, 0.01}, {NetworkKind::Fmo, 7, 0.002}}) {
    double prev = 0.0;
    evolve(reference_config(kind, n), {dt, 100.0, 50}, initial_state(n),
           [&](double, const DensityMatrix<>& rho) {
             EXPECT_LT(std::abs(rho.trace() - 1.0), 1e-8);
             EXPECT_LE(hermiticity_error(rho), 1e-10);
             EXPECT_GE(min_eigenvalue(rho), -1e-8);
             const double p = rho.population(n + 2);
             EXPECT_GE(p, prev - 1e-10);
             prev = p;
             for (Eigen::Index i = 0; i < rho.dimension(); ++i) {
               EXPECT_GE(rho.population(i), -1e-8);
               EXPECT_LE(rho.population(i), 1.0 + 1e-8);
             }
           });
  }
}

TEST(Evolve, AccumulatorMatchesTrapezoidalQuadrature) {
  const double dt = 1e-3;
  const Trajectory traj = evolve(reference_config(), {dt, 30.0, 1}, initial_state(4));
  double trapezoid = 0.0;
  for (Eigen::Index r = 1; r < traj.records(); ++r)
    trapezoid += 0.5 * dt * (traj.p_sink(r - 1) + traj.p_sink(r));
  EXPECT_NEAR(traj.sink_integral.back(), trapezoid, 1e-4);
}

TEST(Objective, ReferenceValues) {
  EXPECT_NEAR(objective_ip(reference_config(), 30.0, 0.01), kReferenceIp30, 1e-8 * kReferenceIp30);
  EXPECT_NEAR(objective_ip(reference_config(NetworkKind::NearestNeighbour, 4, 15.0), 30.0, 0.01),
              kOffResonantIp30, 1e-8 * kOffResonantIp30);
  EXPECT_NEAR(objective_ip(reference_config(NetworkKind::Fmo, 7, 15.0), 30.0, 0.005),
              kFmoOffResonantIp30, 1e-7 * kFmoOffResonantIp30);
}

TEST(Objective, SinkInitialStateIntegratesToHorizon) {
  const BasisMap b{4};
  EXPECT_NEAR(objective_ip(reference_config(), 30.0, 0.01, DensityMatrix<>::pure(7, b.sink())),
              30.0, 1e-11);
}

TEST(Objective, FourthOrderConvergence) {
  const ModelConfig<> c = reference_config();
  const double coarse = 0.2;
  const double reference = objective_ip(c, 30.0, coarse / 8);
  const double e1 = std::abs(objective_ip(c, 30.0, coarse) - reference);
  const double e2 = std::abs(objective_ip(c, 30.0, coarse / 2) - reference);
  EXPECT_GE(e1 / e2, 12.0) << "errors " << e1 << ", " << e2;
}

TEST(Objective, ZeroSinkRateHasZeroValueAndGradient) {
  ModelConfig<> c = reference_config();
  c.lambda_sN = 0.0;
  c.antenna_driving.terms = {{0.3, 0.5, 0.2}};
  ModelConfig<Dual<4>> cd = cast_config<Dual<4>>(c);
  cd.antenna_driving.terms[0].phase = Dual<4>::variable(0.2, 0);
  const Dual<4> ip = objective_ip(cd, 30.0, 0.01);
  EXPECT_EQ(ip.value(), 0.0);
  EXPECT_EQ(ip.derivative(0), 0.0);
}

TEST(Objective, PhaseIsInertAtZeroAmplitude) {
  ModelConfig<> c = reference_config();
  c.antenna_driving.terms = {{0.0, 0.5, 0.2}};
  ModelConfig<Dual<4>> cd = cast_config<Dual<4>>(c);
  cd.antenna_driving.terms[0].amplitude = Dual<4>::variable(0.0, 0);
  cd.antenna_driving.terms[0].phase = Dual<4>::variable(0.2, 1);
  const Dual<4> ip = objective_ip(cd, 30.0, 0.01);
  EXPECT_EQ(ip.derivative(1), 0.0);
  EXPECT_NE(ip.derivative(0), 0.0);
}

TEST(Convergence, ReferenceNetworks) {
  EXPECT_TRUE(dt_convergence(reference_config(), 30.0, 1e-3).converged);
  EXPECT_TRUE(dt_convergence(reference_config(), 30.0, 1e-2).converged);
  const ModelConfig<> fmo = reference_config(NetworkKind::Fmo, 7);
  EXPECT_TRUE(dt_convergence(fmo, 30.0, 5e-3).converged);
  const ConvergenceReport coarse = dt_convergence(fmo, 30.0, 1e-2);
  EXPECT_FALSE(coarse.converged);
  EXPECT_TRUE(std::isinf(coarse.rel_diff));
}

TEST(Convergence, StaticModelIsExact) {
  ModelConfig<> c = static_config();
  c.lambda_sN = 0.05;
  const ConvergenceReport r = dt_convergence(c, 30.0, 0.1);
  EXPECT_EQ(r.rel_diff, 0.0);
  EXPECT_TRUE(r.converged);
}

}  // namespace
}  // namespace excitrans
