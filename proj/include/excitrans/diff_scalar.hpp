#ifndef EXCITRANS_DIFF_SCALAR_HPP
#define EXCITRANS_DIFF_SCALAR_HPP

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace excitrans {

/// Forward-mode dual number: a value plus the derivatives of that value with
/// respect to up to N seeded parameters.
///
/// N is a storage capacity. A run with P < N active parameters leaves the
/// trailing N - P tangent slots at zero; constants carry all-zero tangents.
/// Keeping N a compile-time constant lets every tangent update compile to a
/// fixed-length vector loop.
template <int N>
class Dual {
 public:
  static_assert(N >= 1, "tangent capacity must be positive");
  using Tangent = Eigen::Matrix<double, N, 1>;
  static constexpr int capacity = N;

  Dual() : tangents_(Tangent::Zero()) {}
  Dual(double value) : value_(value), tangents_(Tangent::Zero()) {}  // NOLINT: constant
  Dual(double value, const Tangent& tangents) : value_(value), tangents_(tangents) {}

  /// Coordinate variable k.
  static Dual variable(double value, int k) {
    Dual d(value);
    d.tangents_[k] = 1.0;
    return d;
  }

  double value() const { return value_; }
  const Tangent& tangents() const { return tangents_; }
  double derivative(int k) const { return tangents_[k]; }

  Dual& operator+=(const Dual& o) {
    value_ += o.value_;
    tangents_ += o.tangents_;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    value_ -= o.value_;
    tangents_ -= o.tangents_;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    // d(ab) = a db + b da
    tangents_ = tangents_ * o.value_ + o.tangents_ * value_;
    value_ *= o.value_;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.value_;
    const double q = value_ * inv;
    // d(a/b) = (da - q db) / b
    tangents_ = (tangents_ - o.tangents_ * q) * inv;
    value_ = q;
    return *this;
  }
  Dual& operator+=(double c) {
    value_ += c;
    return *this;
  }
  Dual& operator-=(double c) {
    value_ -= c;
    return *this;
  }
  Dual& operator*=(double c) {
    value_ *= c;
    tangents_ *= c;
    return *this;
  }
  Dual& operator/=(double c) {
    value_ /= c;
    tangents_ /= c;
    return *this;
  }

  Dual operator-() const { return Dual(-value_, -tangents_); }
  Dual operator+() const { return *this; }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend Dual operator/(Dual a, const Dual& b) { return a /= b; }
  friend Dual operator+(Dual a, double b) { return a += b; }
  friend Dual operator+(double a, Dual b) { return b += a; }
  friend Dual operator-(Dual a, double b) { return a -= b; }
  friend Dual operator-(double a, const Dual& b) { return Dual(a - b.value_, -b.tangents_); }
  friend Dual operator*(Dual a, double b) { return a *= b; }
  friend Dual operator*(double a, Dual b) { return b *= a; }
  friend Dual operator/(Dual a, double b) { return a /= b; }
  friend Dual operator/(double a, const Dual& b) { return Dual(a) /= b; }

  friend bool operator==(const Dual& a, const Dual& b) { return a.value_ == b.value_; }
  friend auto operator<=>(const Dual& a, const Dual& b) { return a.value_ <=> b.value_; }

 private:
  double value_ = 0.0;
  Tangent tangents_;
};

template <int N>
Dual<N> sin(const Dual<N>& x) {
  return Dual<N>(std::sin(x.value()), x.tangents() * std::cos(x.value()));
}
template <int N>
Dual<N> cos(const Dual<N>& x) {
  return Dual<N>(std::cos(x.value()), x.tangents() * -std::sin(x.value()));
}
template <int N>
Dual<N> exp(const Dual<N>& x) {
  const double e = std::exp(x.value());
  return Dual<N>(e, x.tangents() * e);
}
template <int N>
Dual<N> sqrt(const Dual<N>& x) {
  const double r = std::sqrt(x.value());
  return Dual<N>(r, x.tangents() * (0.5 / r));
}
template <int N>
Dual<N> abs(const Dual<N>& x) {
  return x.value() < 0 ? -x : x;
}
template <int N>
Dual<N> abs2(const Dual<N>& x) {
  return x * x;
}
template <int N>
bool isfinite(const Dual<N>& x) {
  return std::isfinite(x.value()) && x.tangents().allFinite();
}

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Dual<N>& x) {
  return x.value();
}

/// Largest supported parameter count (seven harmonics on both drivings).
inline constexpr int kMaxTangents = 48;

/// General-purpose differentiable scalar.
using DiffScalar = Dual<kMaxTangents>;

/// Complex number over a real scalar type. std::complex is only specified
/// for the built-in floating types.
template <typename Scalar>
struct Complex {
  Scalar re{};
  Scalar im{};

  Complex() = default;
  Complex(Scalar r, Scalar i = Scalar(0.0)) : re(std::move(r)), im(std::move(i)) {}

  Complex& operator+=(const Complex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Complex& operator-=(const Complex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  Complex& operator*=(const Complex& o) {
    Scalar r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  Complex& operator*=(const Scalar& s) {
    re *= s;
    im *= s;
    return *this;
  }

  friend Complex operator+(Complex a, const Complex& b) { return a += b; }
  friend Complex operator-(Complex a, const Complex& b) { return a -= b; }
  friend Complex operator*(Complex a, const Complex& b) { return a *= b; }
  friend Complex operator*(Complex a, const Scalar& s) { return a *= s; }
  friend Complex operator*(const Scalar& s, Complex a) { return a *= s; }
  Complex operator-() const { return Complex(-re, -im); }
};

template <typename Scalar>
Complex<Scalar> conj(const Complex<Scalar>& z) {
  return Complex<Scalar>(z.re, -z.im);
}

/// |z|^2
template <typename Scalar>
Scalar norm(const Complex<Scalar>& z) {
  return z.re * z.re + z.im * z.im;
}

using DiffComplex = Complex<DiffScalar>;

/// Independent variables for a flat parameter vector: output k has value
/// values[k] and the k-th standard basis vector as tangent. Throws
/// std::invalid_argument for an empty vector or one exceeding the capacity.
template <int N = kMaxTangents>
std::vector<Dual<N>> seed_parameters(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("seed_parameters: no parameters to seed");
  if (values.size() > static_cast<std::size_t>(N))
    throw std::invalid_argument("seed_parameters: " + std::to_string(values.size()) +
                                " parameters exceed tangent capacity " + std::to_string(N));
  std::vector<Dual<N>> out;
  out.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k)
    out.push_back(Dual<N>::variable(values[k], static_cast<int>(k)));
  return out;
}

/// First n_params tangent entries of an objective.
template <int N>
Eigen::VectorXd gradient(const Dual<N>& objective, int n_params) {
  if (n_params < 0 || n_params > N)
    throw std::invalid_argument("gradient: parameter count exceeds tangent capacity");
  return objective.tangents().head(n_params);
}

/// Calls fn.template operator()<N>() with the smallest tangent capacity N
/// that holds n_params, so cost scales with the active parameter count.
template <typename Fn>
decltype(auto) with_tangent_capacity(int n_params, Fn&& fn) {
  if (n_params <= 4) return fn.template operator()<4>();
  if (n_params <= 8) return fn.template operator()<8>();
  if (n_params <= 16) return fn.template operator()<16>();
  if (n_params <= kMaxTangents) return fn.template operator()<kMaxTangents>();
  throw std::invalid_argument("more than " + std::to_string(kMaxTangents) +
                              " differentiable parameters");
}

}  // namespace excitrans

namespace Eigen {

template <int N>
struct NumTraits<excitrans::Dual<N>> : GenericNumTraits<double> {
  using Real = excitrans::Dual<N>;
  using NonInteger = excitrans::Dual<N>;
  using Nested = excitrans::Dual<N>;
  using Literal = double;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = N,
    MulCost = 2 * N
  };
  static Real epsilon() { return Real(std::numeric_limits<double>::epsilon()); }
  static Real dummy_precision() { return Real(1e-12); }
  static Real highest() { return Real(std::numeric_limits<double>::max()); }
  static Real lowest() { return Real(std::numeric_limits<double>::lowest()); }
  static int digits10() { return std::numeric_limits<double>::digits10; }
};

template <int N, typename BinaryOp>
struct ScalarBinaryOpTraits<excitrans::Dual<N>, double, BinaryOp> {
  using ReturnType = excitrans::Dual<N>;
};
template <int N, typename BinaryOp>
struct ScalarBinaryOpTraits<double, excitrans::Dual<N>, BinaryOp> {
  using ReturnType = excitrans::Dual<N>;
};

}  // namespace Eigen

#endif  // EXCITRANS_DIFF_SCALAR_HPP
