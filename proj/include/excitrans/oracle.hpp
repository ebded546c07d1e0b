#ifndef EXCITRANS_ORACLE_HPP
#define EXCITRANS_ORACLE_HPP

#include <vector>

#include <Eigen/Core>

#include "excitrans/density_matrix.hpp"
#include "excitrans/dynamics.hpp"
#include "excitrans/model.hpp"

namespace excitrans {

/// Brute-force simulation in the full tensor-product space
///   radiation (Fock 0..n_max-1) x antenna (g, e) x network (vacuum, 1..N) x sink (g, e)
/// with every jump operator in standard dissipator form. Values only; meant
/// for short horizons and small networks.
struct FullSpaceConfig {
  ModelConfig<> model;
  int n_max = 2;
  Eigen::Index max_dimension = 4096;

  Eigen::Index dimension() const;
  /// Throws ConfigError for n_max < 2, an invalid model, or a dimension
  /// above max_dimension.
  void validate() const;
};

struct FullSpaceTrajectory {
  Trajectory reduced;           // populations of the single-excitation states; trace is the full trace
  std::vector<double> leakage;  // population outside those states, per record

  double max_leakage() const;
};

/// Index in the full space of single-excitation state `i` (BasisMap order).
Eigen::Index full_space_index(const FullSpaceConfig& cfg, Eigen::Index i);

/// Full-space density matrix equal to `reduced` on the single-excitation
/// states and zero elsewhere.
Eigen::MatrixXcd embed(const FullSpaceConfig& cfg, const DensityMatrix<double>& reduced);

FullSpaceTrajectory full_space_evolve(const FullSpaceConfig& cfg, const TrajectoryConfig& traj,
                                      const DensityMatrix<double>& initial);

inline FullSpaceTrajectory full_space_evolve(const FullSpaceConfig& cfg,
                                             const TrajectoryConfig& traj) {
  return full_space_evolve(cfg, traj, initial_state(cfg.model.n_sites()));
}

}  // namespace excitrans

#endif  // EXCITRANS_ORACLE_HPP
