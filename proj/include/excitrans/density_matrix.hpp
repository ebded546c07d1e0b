#ifndef EXCITRANS_DENSITY_MATRIX_HPP
#define EXCITRANS_DENSITY_MATRIX_HPP

#include <Eigen/Core>

#include "excitrans/diff_scalar.hpp"

namespace excitrans {

template <typename Scalar>
using RealMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Density matrix rho = re + i*im, stored as two real matrices so that any
/// real scalar type (double, DiffScalar) can be used. For a Hermitian matrix
/// `re` is symmetric and `im` antisymmetric.
template <typename Scalar = double>
struct DensityMatrix {
  RealMatrix<Scalar> re;
  RealMatrix<Scalar> im;

  static DensityMatrix zero(Eigen::Index dim) {
    return {RealMatrix<Scalar>::Zero(dim, dim), RealMatrix<Scalar>::Zero(dim, dim)};
  }
  /// |k><k|
  static DensityMatrix pure(Eigen::Index dim, Eigen::Index k) {
    DensityMatrix rho = zero(dim);
    rho.re(k, k) = Scalar(1.0);
    return rho;
  }

  Eigen::Index dimension() const { return re.rows(); }
  Scalar trace() const { return re.trace(); }
  Scalar population(Eigen::Index i) const { return re(i, i); }
  Complex<Scalar> operator()(Eigen::Index i, Eigen::Index k) const {
    return {re(i, k), im(i, k)};
  }

  DensityMatrix& operator+=(const DensityMatrix& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  DensityMatrix& operator*=(double s) {
    re *= s;
    im *= s;
    return *this;
  }
  friend DensityMatrix operator+(DensityMatrix a, const DensityMatrix& b) {
    return a += b;
  }
  friend DensityMatrix operator*(double s, DensityMatrix a) { return a *= s; }
};

/// Largest entry of |rho - rho^dagger|.
double hermiticity_error(const DensityMatrix<double>& rho);

/// Smallest eigenvalue of the Hermitian part of rho.
double min_eigenvalue(const DensityMatrix<double>& rho);

Eigen::MatrixXcd to_complex(const DensityMatrix<double>& rho);
DensityMatrix<double> from_complex(const Eigen::MatrixXcd& rho);

template <int N>
DensityMatrix<double> value_of(const DensityMatrix<Dual<N>>& rho) {
  auto v = [](const Dual<N>& s) { return s.value(); };
  return {rho.re.unaryExpr(v), rho.im.unaryExpr(v)};
}
inline const DensityMatrix<double>& value_of(const DensityMatrix<double>& rho) {
  return rho;
}

}  // namespace excitrans

#endif  // EXCITRANS_DENSITY_MATRIX_HPP
