#include "excitrans/oracle.hpp"

#include <algorithm>
#include <complex>

#include <Eigen/Sparse>

namespace excitrans {

namespace {

using cplx = std::complex<double>;
using SparseOp = Eigen::SparseMatrix<cplx>;

SparseOp kron(const SparseOp& a, const SparseOp& b) {
  SparseOp out(a.rows() * b.rows(), a.cols() * b.cols());
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SparseOp::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SparseOp::InnerIterator ib(b, kb); ib; ++ib)
          triplets.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                                ia.value() * ib.value());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

SparseOp kron(const SparseOp& a, const SparseOp& b, const SparseOp& c, const SparseOp& d) {
  return kron(kron(kron(a, b), c), d);
}

SparseOp identity(Eigen::Index n) {
  SparseOp m(n, n);
  m.setIdentity();
  return m;
}

// |row><col| in an n-level space.
SparseOp ket_bra(Eigen::Index n, Eigen::Index row, Eigen::Index col) {
  SparseOp m(n, n);
  m.insert(row, col) = 1.0;
  return m;
}

SparseOp annihilation(Eigen::Index n) {
  SparseOp m(n, n);
  for (Eigen::Index k = 1; k < n; ++k) m.insert(k - 1, k) = std::sqrt(double(k));
  return m;
}

constexpr Eigen::Index kGround = 0;
constexpr Eigen::Index kExcited = 1;
constexpr Eigen::Index kVacuum = 0;

struct FullState {
  Eigen::MatrixXcd rho;
  double accumulator = 0.0;

  FullState& operator+=(const FullState& o) {
    rho += o.rho;
    accumulator += o.accumulator;
    return *this;
  }
  friend FullState operator+(FullState a, const FullState& b) { return a += b; }
  friend FullState operator*(double s, FullState a) {
    a.rho *= s;
    a.accumulator *= s;
    return a;
  }
};

// H(t) = static + w(t) * antenna_part + eN(t) * last_site_part, and the
// jump operators with their rates.
class FullSpaceGenerator {
 public:
  explicit FullSpaceGenerator(const FullSpaceConfig& cfg)
      : antenna_driving_(cfg.model.antenna_driving), site_driving_(cfg.model.site_driving) {
    const ModelConfig<>& m = cfg.model;
    const int n = m.n_sites();
    const Eigen::Index nr = cfg.n_max, nn = n + 1;
    const SparseOp ir = identity(nr), i2 = identity(2), in = identity(nn);

    const SparseOp a = annihilation(nr);
    const SparseOp adag = SparseOp(a.adjoint());
    const SparseOp sigma_plus = ket_bra(2, kExcited, kGround);
    const SparseOp sigma_minus = ket_bra(2, kGround, kExcited);
    const SparseOp sigma_z = ket_bra(2, kExcited, kExcited) - ket_bra(2, kGround, kGround);

    SparseOp network(nn, nn);
    for (int i = 1; i <= n; ++i) {
      if (i < n) network += m.network.site_energies(i - 1) * ket_bra(nn, i, i);
      for (int j = 1; j <= n; ++j)
        if (i != j && m.network.couplings(i - 1, j - 1) != 0.0)
          network += m.network.couplings(i - 1, j - 1) * ket_bra(nn, i, j);
    }

    static_ = m.omega_r * kron(SparseOp(adag * a), i2, in, i2) + kron(ir, i2, network, i2) +
              m.lambda_ar * (kron(a, sigma_plus, in, i2) + kron(adag, sigma_minus, in, i2)) +
              m.lambda_a1 * (kron(ir, sigma_minus, ket_bra(nn, 1, kVacuum), i2) +
                             kron(ir, sigma_plus, ket_bra(nn, kVacuum, 1), i2));
    antenna_part_ = kron(ir, sigma_z, in, i2);
    last_site_part_ = kron(ir, i2, ket_bra(nn, n, n), i2);

    for (int j = 1; j <= n; ++j)
      jumps_.push_back({m.lambda_N, kron(ir, i2, ket_bra(nn, j, j), i2)});
    jumps_.push_back({m.lambda_sN, kron(ir, i2, ket_bra(nn, kVacuum, n), sigma_plus)});

    anti_ = SparseOp(cfg.dimension(), cfg.dimension());
    for (const auto& [rate, op] : jumps_) {
      jump_adjoints_.emplace_back(op.adjoint());
      anti_ += (0.5 * rate) * SparseOp(jump_adjoints_.back() * op);
    }
    sink_index_ = full_space_index(cfg, BasisMap{n}.sink());
  }

  FullState operator()(double t, const FullState& y) const {
    const SparseOp h = static_ + antenna_driving_.value(t) * antenna_part_ +
                       site_driving_.value(t) * last_site_part_;
    // -i[H, rho] - 1/2 {sum L^dag L, rho} + sum L rho L^dag
    const SparseOp heff = cplx(0.0, -1.0) * h - anti_;
    FullState dy;
    const SparseOp heff_adj = heff.adjoint();
    dy.rho = heff * y.rho;
    dy.rho += y.rho * heff_adj;
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
      const auto& [rate, op] = jumps_[k];
      if (rate == 0.0) continue;
      const Eigen::MatrixXcd l_rho = op * y.rho;
      dy.rho += rate * (l_rho * jump_adjoints_[k]);
    }
    dy.accumulator = y.rho(sink_index_, sink_index_).real();
    return dy;
  }

 private:
  DrivingSpec<> antenna_driving_;
  DrivingSpec<> site_driving_;
  SparseOp static_, antenna_part_, last_site_part_, anti_;
  std::vector<std::pair<double, SparseOp>> jumps_;
  std::vector<SparseOp> jump_adjoints_;
  Eigen::Index sink_index_ = 0;
};

}  // namespace

Eigen::Index FullSpaceConfig::dimension() const {
  return Eigen::Index(n_max) * 2 * (model.n_sites() + 1) * 2;
}

void FullSpaceConfig::validate() const {
  excitrans::validate(model);
  if (n_max < 2) throw ConfigError("oracle.n_max", "must be at least 2");
  if (dimension() > max_dimension)
    throw ConfigError("oracle.n_max", "full-space dimension " + std::to_string(dimension()) +
                                          " exceeds the cap of " + std::to_string(max_dimension));
}

double FullSpaceTrajectory::max_leakage() const {
  double m = 0.0;
  for (double l : leakage) m = std::max(m, std::abs(l));
  return m;
}

Eigen::Index full_space_index(const FullSpaceConfig& cfg, Eigen::Index i) {
  const int n = cfg.model.n_sites();
  const BasisMap basis{n};
  const Eigen::Index nn = n + 1;
  auto index = [&](Eigen::Index photons, Eigen::Index antenna, Eigen::Index site,
                   Eigen::Index sink) { return ((photons * 2 + antenna) * nn + site) * 2 + sink; };
  if (i == BasisMap::radiation()) return index(1, kGround, kVacuum, kGround);
  if (i == BasisMap::antenna()) return index(0, kExcited, kVacuum, kGround);
  if (basis.is_site(i)) return index(0, kGround, i - 1, kGround);
  if (i == basis.sink()) return index(0, kGround, kVacuum, kExcited);
  throw std::out_of_range("full_space_index: basis index out of range");
}

Eigen::MatrixXcd embed(const FullSpaceConfig& cfg, const DensityMatrix<double>& reduced) {
  const Eigen::Index dim = cfg.model.dimension();
  if (reduced.dimension() != dim) throw ConfigError("initial_state", "dimension mismatch");
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(cfg.dimension(), cfg.dimension());
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index k = 0; k < dim; ++k)
      full(full_space_index(cfg, i), full_space_index(cfg, k)) =
          cplx(reduced.re(i, k), reduced.im(i, k));
  return full;
}

FullSpaceTrajectory full_space_evolve(const FullSpaceConfig& cfg, const TrajectoryConfig& traj,
                                      const DensityMatrix<double>& initial) {
  cfg.validate();
  const long steps = traj.steps();
  const FullSpaceGenerator gen(cfg);
  const Eigen::Index dim = cfg.model.dimension();
  std::vector<Eigen::Index> sector(dim);
  for (Eigen::Index i = 0; i < dim; ++i) sector[i] = full_space_index(cfg, i);

  FullSpaceTrajectory out;
  Trajectory& r = out.reduced;
  const long n_records = steps / traj.record_stride + 1 + (steps % traj.record_stride ? 1 : 0);
  r.populations.resize(n_records, dim);

  auto record = [&](long step, const FullState& y) {
    const auto row = static_cast<Eigen::Index>(r.times.size());
    r.times.push_back(double(step) * traj.dt);
    double in_sector = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      r.populations(row, i) = y.rho(sector[i], sector[i]).real();
      in_sector += r.populations(row, i);
    }
    const double trace = y.rho.trace().real();
    r.trace.push_back(trace);
    r.sink_integral.push_back(y.accumulator);
    out.leakage.push_back(trace - in_sector);
  };

  FullState y{embed(cfg, initial), 0.0};
  record(0, y);
  for (long s = 0; s < steps; ++s) {
    const double t = double(s) * traj.dt;
    y = rk4_step(gen, t, y, traj.dt);
    if (!y.rho.allFinite() || !std::isfinite(y.accumulator)) throw IntegrationDiverged(t + traj.dt);
    if ((s + 1) % traj.record_stride == 0 || s + 1 == steps) record(s + 1, y);
  }
  return out;
}

}  // namespace excitrans
