#include "excitrans/density_matrix.hpp"

#include <Eigen/Eigenvalues>

namespace excitrans {

double hermiticity_error(const DensityMatrix<double>& rho) {
  const double re = (rho.re - rho.re.transpose()).cwiseAbs().maxCoeff();
  const double im = (rho.im + rho.im.transpose()).cwiseAbs().maxCoeff();
  return std::max(re, im);
}

Eigen::MatrixXcd to_complex(const DensityMatrix<double>& rho) {
  Eigen::MatrixXcd z(rho.dimension(), rho.dimension());
  z.real() = rho.re;
  z.imag() = rho.im;
  return z;
}

DensityMatrix<double> from_complex(const Eigen::MatrixXcd& rho) {
  return {rho.real(), rho.imag()};
}

double min_eigenvalue(const DensityMatrix<double>& rho) {
  const Eigen::MatrixXcd z = to_complex(rho);
  const Eigen::MatrixXcd herm = 0.5 * (z + z.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace excitrans
