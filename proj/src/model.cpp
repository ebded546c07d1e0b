#include "excitrans/model.hpp"

#include <cmath>
#include <string>

#include "excitrans/errors.hpp"

namespace excitrans {

namespace {

NetworkSpec<> empty_network(int n, double energy, std::string label) {
  NetworkSpec<> net;
  net.n_sites = n;
  net.couplings = Eigen::MatrixXd::Zero(n, n);
  net.site_energies = Eigen::VectorXd::Constant(n, energy);
  net.label = std::move(label);
  return net;
}

void connect(NetworkSpec<>& net, int i, int j, double v) {
  net.couplings(i - 1, j - 1) = v;
  net.couplings(j - 1, i - 1) = v;
}

// Hamiltonian of the seven-site FMO complex in units of omega_a (diagonal:
// site energies).
NetworkSpec<> fmo_network() {
  Eigen::Matrix<double, 7, 7> h;
  h << 65.7, -104.1, 5.1, -4.3, 4.7, -15.1, -7.8,
      -104.1, -11.1, 32.6, 7.1, 5.4, 8.3, 0.8,
      5.1, 32.6, -56.1, -46.8, 1.0, -8.1, 5.1,
      -4.3, 7.1, -46.8, -36.2, -70.7, -14.7, -61.5,
      4.7, 5.4, 1.0, -70.7, -30.6, 89.7, -2.5,
      -15.1, 8.3, -8.1, -14.7, 89.7, 55.7, 32.7,
      -7.8, 0.8, 5.1, -61.5, -2.5, 32.7, 4.2;
  NetworkSpec<> net;
  net.n_sites = 7;
  net.site_energies = h.diagonal();
  net.couplings = h;
  net.couplings.diagonal().setZero();
  net.label = "fmo";
  return net;
}

bool finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

NetworkKind parse_network_kind(std::string_view name) {
  if (name == "nn") return NetworkKind::NearestNeighbour;
  if (name == "star") return NetworkKind::Star;
  if (name == "fmo") return NetworkKind::Fmo;
  throw ConfigError("network.kind", "unknown network kind '" + std::string(name) +
                                        "' (expected nn, star or fmo)");
}

std::string_view to_string(NetworkKind kind) {
  switch (kind) {
    case NetworkKind::NearestNeighbour: return "nn";
    case NetworkKind::Star: return "star";
    case NetworkKind::Fmo: return "fmo";
  }
  return "?";
}

NetworkSpec<> builtin_network(NetworkKind kind, int n_sites) {
  switch (kind) {
    case NetworkKind::NearestNeighbour: {
      if (n_sites < 2)
        throw ConfigError("network.n_sites", "nearest-neighbour network needs at least 2 sites");
      NetworkSpec<> net = empty_network(n_sites, 0.5, "nn");
      for (int j = 1; j < n_sites; ++j) connect(net, j, j + 1, 1.0);
      return net;
    }
    case NetworkKind::Star: {
      if (n_sites != 8)
        throw ConfigError("network.n_sites", "star network is defined for 8 sites only");
      NetworkSpec<> net = empty_network(n_sites, 0.5, "star");
      for (int j = 1; j <= n_sites; ++j)
        if (j != 2) connect(net, 2, j, 1.0);
      return net;
    }
    case NetworkKind::Fmo:
      if (n_sites != 7)
        throw ConfigError("network.n_sites", "FMO network is defined for 7 sites only");
      return fmo_network();
  }
  throw ConfigError("network.kind", "unsupported network kind");
}

void validate(const NetworkSpec<>& net) {
  if (net.n_sites < 1) throw ConfigError("network.n_sites", "must be at least 1");
  if (net.couplings.rows() != net.n_sites || net.couplings.cols() != net.n_sites)
    throw ConfigError("network.couplings", "must be an n_sites x n_sites matrix");
  if (net.site_energies.size() != net.n_sites)
    throw ConfigError("network.site_energies", "must have n_sites entries");
  if (!finite(net.couplings)) throw ConfigError("network.couplings", "non-finite entry");
  if (!net.site_energies.allFinite())
    throw ConfigError("network.site_energies", "non-finite entry");
  for (int i = 0; i < net.n_sites; ++i) {
    if (net.couplings(i, i) != 0.0)
      throw ConfigError("network.couplings", "diagonal must be zero (site energies are separate)");
    for (int j = i + 1; j < net.n_sites; ++j)
      if (net.couplings(i, j) != net.couplings(j, i))
        throw ConfigError("network.couplings", "matrix must be symmetric");
  }
}

ModelConfig<> make_config(NetworkSpec<> network, double omega_r, double lambda_ar,
                          double lambda_a1, double lambda_N, double lambda_sN) {
  ModelConfig<> c;
  c.omega_r = omega_r;
  c.antenna_driving.base = 1.0;
  c.site_driving.base = network.n_sites > 0 ? network.site_energies(network.n_sites - 1) : 0.0;
  c.lambda_ar = lambda_ar;
  c.lambda_a1 = lambda_a1;
  c.lambda_N = lambda_N;
  c.lambda_sN = lambda_sN;
  c.network = std::move(network);
  return c;
}

void validate(const ModelConfig<>& c) {
  validate(c.network);
  auto require_finite = [](double v, const char* field) {
    if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  };
  require_finite(c.omega_r, "omega_r");
  require_finite(c.lambda_ar, "lambda.ar");
  require_finite(c.lambda_a1, "lambda.a1");
  require_finite(c.lambda_N, "lambda.N");
  require_finite(c.lambda_sN, "lambda.sN");
  if (c.lambda_N < 0.0) throw ConfigError("lambda.N", "dephasing rate must be non-negative");
  if (c.lambda_sN < 0.0) throw ConfigError("lambda.sN", "sink rate must be non-negative");
  for (const auto* d : {&c.antenna_driving, &c.site_driving}) {
    const char* field = d == &c.antenna_driving ? "driving.antenna" : "driving.site";
    require_finite(d->base, field);
    for (const auto& t : d->terms) {
      require_finite(t.amplitude, field);
      require_finite(t.frequency, field);
      require_finite(t.phase, field);
    }
  }
  if (c.site_driving.base != c.network.site_energies(c.network.n_sites - 1))
    throw ConfigError("driving.site", "base must equal the energy of the last network site");
}

std::string BasisMap::label(Eigen::Index i) const {
  if (i == radiation()) return "p_rad";
  if (i == antenna()) return "p_ant";
  if (i == sink()) return "p_sink";
  return "p_site_" + std::to_string(i - 1);
}

}  // namespace excitrans
