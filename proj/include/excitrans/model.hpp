#ifndef EXCITRANS_MODEL_HPP
#define EXCITRANS_MODEL_HPP

#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "excitrans/density_matrix.hpp"
#include "excitrans/diff_scalar.hpp"

namespace excitrans {

/// Sites 1..N of the transport network. The vacuum state is not part of the
/// network description; BasisMap places it.
template <typename Scalar = double>
struct NetworkSpec {
  int n_sites = 0;
  RealMatrix<Scalar> couplings;    // symmetric, zero diagonal
  RealVector<Scalar> site_energies;
  std::string label;
};

enum class NetworkKind { NearestNeighbour, Star, Fmo };

NetworkKind parse_network_kind(std::string_view name);
std::string_view to_string(NetworkKind kind);

/// Nearest-neighbour chain (any N >= 2), eight-site star with hub at site 2,
/// or the seven-site FMO Hamiltonian. Throws ConfigError otherwise.
NetworkSpec<> builtin_network(NetworkKind kind, int n_sites);

/// Throws ConfigError naming the first violated invariant.
void validate(const NetworkSpec<>& network);

template <typename Scalar = double>
struct DrivingTerm {
  Scalar amplitude{};
  Scalar frequency{};
  Scalar phase{};
};

/// base + sum_i amplitude_i * sin(frequency_i * t + phase_i)
template <typename Scalar = double>
struct DrivingSpec {
  Scalar base{};
  std::vector<DrivingTerm<Scalar>> terms;

  Scalar value(double t) const {
    using std::sin;
    Scalar v = base;
    for (const auto& term : terms) v += term.amplitude * sin(term.frequency * t + term.phase);
    return v;
  }
  int harmonics() const { return static_cast<int>(terms.size()); }
};

template <typename Scalar = double>
struct ModelConfig {
  Scalar omega_r{};
  DrivingSpec<Scalar> antenna_driving;  // omega_a(t)
  DrivingSpec<Scalar> site_driving;     // epsilon_N(t)
  Scalar lambda_ar{};
  Scalar lambda_a1{};
  Scalar lambda_N{};
  Scalar lambda_sN{};
  NetworkSpec<Scalar> network;

  int n_sites() const { return network.n_sites; }
  Eigen::Index dimension() const { return network.n_sites + 3; }
};

/// Undriven configuration with the given network and rates, omega_a = 1 and
/// the site-N driving anchored at the network's last site energy.
ModelConfig<> make_config(NetworkSpec<> network, double omega_r, double lambda_ar,
                          double lambda_a1, double lambda_N, double lambda_sN);

/// Throws ConfigError on non-finite values, negative rates, or a site-N
/// driving whose base differs from the last site energy.
void validate(const ModelConfig<>& config);

/// Promote a double configuration to another scalar type; every field
/// becomes a constant.
template <typename Scalar>
ModelConfig<Scalar> cast_config(const ModelConfig<>& c) {
  auto cast_driving = [](const DrivingSpec<>& d) {
    DrivingSpec<Scalar> out;
    out.base = Scalar(d.base);
    for (const auto& t : d.terms)
      out.terms.push_back({Scalar(t.amplitude), Scalar(t.frequency), Scalar(t.phase)});
    return out;
  };
  ModelConfig<Scalar> out;
  out.omega_r = Scalar(c.omega_r);
  out.antenna_driving = cast_driving(c.antenna_driving);
  out.site_driving = cast_driving(c.site_driving);
  out.lambda_ar = Scalar(c.lambda_ar);
  out.lambda_a1 = Scalar(c.lambda_a1);
  out.lambda_N = Scalar(c.lambda_N);
  out.lambda_sN = Scalar(c.lambda_sN);
  out.network.n_sites = c.network.n_sites;
  out.network.couplings = c.network.couplings.template cast<Scalar>();
  out.network.site_energies = c.network.site_energies.template cast<Scalar>();
  out.network.label = c.network.label;
  return out;
}

/// Index layout of the single-excitation sector:
///   0      photon in the radiation mode
///   1      antenna excited
///   1 + j  network site j (j = 1..N)
///   N + 2  sink excited
struct BasisMap {
  int n_sites = 0;

  Eigen::Index dimension() const { return n_sites + 3; }
  static constexpr Eigen::Index radiation() { return 0; }
  static constexpr Eigen::Index antenna() { return 1; }
  Eigen::Index site(int j) const { return 1 + j; }
  Eigen::Index last_site() const { return n_sites + 1; }
  Eigen::Index sink() const { return n_sites + 2; }
  bool is_site(Eigen::Index i) const { return i >= 2 && i <= n_sites + 1; }
  std::string label(Eigen::Index i) const;
};

namespace detail {

inline bool is_structural_zero(double v) { return v == 0.0; }
template <int N>
bool is_structural_zero(const Dual<N>& v) {
  return v.value() == 0.0 && v.tangents().isZero(0.0);
}

}  // namespace detail

/// Right-hand side of the master equation for one configuration. Static
/// pieces (coupling graph, decay rates) are assembled once; only the driven
/// diagonal is re-evaluated per call.
///
/// H is real symmetric, so with rho = A + iB the coherent part splits into
///   d(re)/dt =  [H, B],   d(im)/dt = -[H, A].
/// Dephasing damps the coherence between i and k at
/// lambda_N/2 * (s_i + s_k) for i != k (s = 1 on network sites), and the sink
/// jump |N+2><N+1| damps row/column N+1 at lambda_sN/2 while feeding the sink
/// population.
template <typename Scalar = double>
class LindbladGenerator {
 public:
  struct Coupling {
    Eigen::Index a;
    Eigen::Index b;
    Scalar value;
  };

  explicit LindbladGenerator(const ModelConfig<Scalar>& config)
      : basis_{config.n_sites()},
        omega_r_(config.omega_r),
        antenna_driving_(config.antenna_driving),
        site_driving_(config.site_driving),
        site_energies_(config.network.site_energies),
        lambda_sN_(config.lambda_sN) {
    const int n = config.n_sites();
    const Eigen::Index dim = basis_.dimension();
    adjacency_.resize(dim);
    add_coupling(BasisMap::radiation(), BasisMap::antenna(), config.lambda_ar);
    add_coupling(BasisMap::antenna(), basis_.site(1), config.lambda_a1);
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        add_coupling(basis_.site(i), basis_.site(j), config.network.couplings(i - 1, j - 1));

    decay_ = RealMatrix<Scalar>::Zero(dim, dim);
    const Scalar half_deph = config.lambda_N * 0.5;
    const Scalar half_sink = config.lambda_sN * 0.5;
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index k = 0; k < dim; ++k) {
        Scalar g(0.0);
        if (i != k) {
          const int s = int(basis_.is_site(i)) + int(basis_.is_site(k));
          if (s) g += half_deph * double(s);
        }
        const int l = int(i == basis_.last_site()) + int(k == basis_.last_site());
        if (l) g += half_sink * double(l);
        decay_(i, k) = g;
      }
    }
  }

  const BasisMap& basis() const { return basis_; }
  const std::vector<Coupling>& couplings() const { return couplings_; }

  /// Diagonal of H(t).
  RealVector<Scalar> diagonal(double t) const {
    RealVector<Scalar> d;
    fill_diagonal(t, d);
    return d;
  }

  void fill_diagonal(double t, RealVector<Scalar>& d) const {
    const int n = basis_.n_sites;
    const Scalar w = antenna_driving_.value(t);
    d.resize(basis_.dimension());
    d(0) = omega_r_ - w;
    d(1) = w;
    for (int j = 1; j < n; ++j) d(basis_.site(j)) = site_energies_(j - 1) - w;
    d(basis_.last_site()) = site_driving_.value(t) - w;
    d(basis_.sink()) = -w;
  }

  RealMatrix<Scalar> hamiltonian(double t) const {
    const Eigen::Index dim = basis_.dimension();
    RealMatrix<Scalar> h = RealMatrix<Scalar>::Zero(dim, dim);
    h.diagonal() = diagonal(t);
    for (const auto& c : couplings_) {
      h(c.a, c.b) = c.value;
      h(c.b, c.a) = c.value;
    }
    return h;
  }

  /// Scratch buffers for apply(); one per integrating thread.
  struct Workspace {
    RealVector<Scalar> diag;
  };

  /// Computes the upper triangle and mirrors it, so the output is exactly
  /// Hermitian whenever the input is.
  void apply(double t, const DensityMatrix<Scalar>& rho, DensityMatrix<Scalar>& out,
             Workspace& ws) const {
    const Eigen::Index dim = basis_.dimension();
    fill_diagonal(t, ws.diag);
    const auto& d = ws.diag;
    const auto& A = rho.re;
    const auto& B = rho.im;

    out.re.resize(dim, dim);
    out.im.resize(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      for (Eigen::Index i = 0; i <= k; ++i) {
        const Scalar gap = d(i) - d(k);
        // [V, X]_ik = sum_j V_ij X_jk - X_ij V_jk
        Scalar vb(0.0), va(0.0);
        for (const auto& [j, v] : adjacency_[i]) {
          vb += v * B(j, k);
          va += v * A(j, k);
        }
        for (const auto& [j, v] : adjacency_[k]) {
          vb -= B(i, j) * v;
          va -= A(i, j) * v;
        }
        Scalar re = gap * B(i, k) - decay_(i, k) * A(i, k) + vb;
        Scalar im = -(gap * A(i, k)) - decay_(i, k) * B(i, k) - va;
        if (i == k) {
          out.re(i, i) = re;
          out.im(i, i) = Scalar(0.0);
        } else {
          out.re(k, i) = re;
          out.re(i, k) = std::move(re);
          out.im(k, i) = -im;
          out.im(i, k) = std::move(im);
        }
      }
    }

    const Eigen::Index last = basis_.last_site();
    const Eigen::Index sink = basis_.sink();
    out.re(sink, sink) += lambda_sN_ * A(last, last);
  }

  void apply(double t, const DensityMatrix<Scalar>& rho, DensityMatrix<Scalar>& out) const {
    Workspace ws;
    apply(t, rho, out, ws);
  }

  DensityMatrix<Scalar> apply(double t, const DensityMatrix<Scalar>& rho) const {
    DensityMatrix<Scalar> out;
    apply(t, rho, out);
    return out;
  }

 private:
  void add_coupling(Eigen::Index a, Eigen::Index b, const Scalar& v) {
    if (detail::is_structural_zero(v)) return;
    couplings_.push_back({a, b, v});
    adjacency_[a].emplace_back(b, v);
    adjacency_[b].emplace_back(a, v);
  }

  BasisMap basis_;
  Scalar omega_r_;
  DrivingSpec<Scalar> antenna_driving_;
  DrivingSpec<Scalar> site_driving_;
  RealVector<Scalar> site_energies_;
  Scalar lambda_sN_;
  std::vector<Coupling> couplings_;
  std::vector<std::vector<std::pair<Eigen::Index, Scalar>>> adjacency_;
  RealMatrix<Scalar> decay_;
};

/// H(t) in the single-excitation basis (real symmetric).
template <typename Scalar>
RealMatrix<Scalar> hamiltonian(const ModelConfig<Scalar>& config, double t) {
  return LindbladGenerator<Scalar>(config).hamiltonian(t);
}

/// d(rho)/dt under the master equation.
template <typename Scalar>
DensityMatrix<Scalar> lindblad_rhs(const ModelConfig<Scalar>& config, double t,
                                   const DensityMatrix<Scalar>& rho) {
  return LindbladGenerator<Scalar>(config).apply(t, rho);
}

}  // namespace excitrans

#endif  // EXCITRANS_MODEL_HPP
