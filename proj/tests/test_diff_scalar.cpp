#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "excitrans/diff_scalar.hpp"

namespace excitrans {
namespace {

TEST(Dual, SeedingGivesStandardBasisTangents) {
  const std::vector<double> v{3.0, 5.0};
  const auto x = seed_parameters<2>(v);
  ASSERT_EQ(x.size(), 2u);
  EXPECT_EQ(x[0].value(), 3.0);
  EXPECT_EQ(x[1].value(), 5.0);
  EXPECT_EQ(x[0].derivative(0), 1.0);
  EXPECT_EQ(x[0].derivative(1), 0.0);
  EXPECT_EQ(x[1].derivative(0), 0.0);
  EXPECT_EQ(x[1].derivative(1), 1.0);
}

TEST(Dual, SingleZeroSeed) {
  const std::vector<double> v{0.0};
  const auto x = seed_parameters<1>(v);
  EXPECT_EQ(x[0].value(), 0.0);
  EXPECT_EQ(x[0].derivative(0), 1.0);
}

TEST(Dual, SeedingRejectsEmptyAndOversized) {
  EXPECT_THROW(seed_parameters<4>(std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(seed_parameters<2>(std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST(Dual, SineGradientAtZero) {
  const auto x = Dual<1>::variable(0.0, 0);
  EXPECT_EQ(gradient(sin(x), 1)(0), 1.0);
}

TEST(Dual, ProductRule) {
  const auto p = seed_parameters<2>(std::vector<double>{2.0, 3.0});
  const Eigen::VectorXd g = gradient(p[0] * p[1], 2);
  EXPECT_EQ(g(0), 3.0);
  EXPECT_EQ(g(1), 2.0);
}

TEST(Dual, QuotientAndMixedDoubleOperands) {
  const auto p = seed_parameters<2>(std::vector<double>{2.0, 4.0});
  const Dual<2> q = p[0] / p[1];  // d/dx = 1/y, d/dy = -x/y^2
  EXPECT_DOUBLE_EQ(q.value(), 0.5);
  EXPECT_DOUBLE_EQ(q.derivative(0), 0.25);
  EXPECT_DOUBLE_EQ(q.derivative(1), -0.125);
  const Dual<2> r = 1.0 / p[0];
  EXPECT_DOUBLE_EQ(r.derivative(0), -0.25);
  const Dual<2> s = 3.0 - p[0] * 2.0 + p[1] / 2.0;
  EXPECT_DOUBLE_EQ(s.value(), 1.0);
  EXPECT_DOUBLE_EQ(s.derivative(0), -2.0);
  EXPECT_DOUBLE_EQ(s.derivative(1), 0.5);
}

TEST(Dual, ElementaryFunctions) {
  const auto x = Dual<1>::variable(0.7, 0);
  EXPECT_DOUBLE_EQ(cos(x).derivative(0), -std::sin(0.7));
  EXPECT_DOUBLE_EQ(exp(x).derivative(0), std::exp(0.7));
  EXPECT_DOUBLE_EQ(sqrt(x).derivative(0), 0.5 / std::sqrt(0.7));
  EXPECT_DOUBLE_EQ(abs(-x).derivative(0), 1.0);
  EXPECT_DOUBLE_EQ(abs2(x).derivative(0), 1.4);
}

TEST(Dual, ComparisonsUseValues) {
  const auto x = Dual<2>::variable(1.0, 0);
  const auto y = Dual<2>::variable(1.0, 1);
  EXPECT_TRUE(x == y);
  EXPECT_TRUE(x < y + 1.0);
}

TEST(Dual, ConstantsHaveZeroTangents) {
  const Dual<4> c(2.5);
  EXPECT_TRUE(c.tangents().isZero(0.0));
}

TEST(Dual, Linearity) {
  const auto p = seed_parameters<2>(std::vector<double>{0.3, -1.1});
  const Dual<2> f = sin(p[0]) * p[1];
  const Dual<2> g = cos(p[1]) / (1.0 + p[0] * p[0]);
  const double a = 2.5, b = -0.75;
  const Eigen::VectorXd lhs = gradient(a * f + b * g, 2);
  const Eigen::VectorXd rhs = a * gradient(f, 2) + b * gradient(g, 2);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Dual, ChainRule) {
  // f(g(x)) with f = sin, g = x^2 + 1: derivative cos(x^2 + 1) * 2x
  for (double x0 : {-1.3, 0.0, 0.4, 2.2}) {
    const auto x = Dual<1>::variable(x0, 0);
    const Dual<1> y = sin(x * x + 1.0);
    EXPECT_NEAR(y.derivative(0), std::cos(x0 * x0 + 1.0) * 2.0 * x0, 1e-15);
  }
}

TEST(Dual, TangentCapacityDispatch) {
  EXPECT_EQ(with_tangent_capacity(1, []<int N>() { return N; }), 4);
  EXPECT_EQ(with_tangent_capacity(6, []<int N>() { return N; }), 8);
  EXPECT_EQ(with_tangent_capacity(12, []<int N>() { return N; }), 16);
  EXPECT_EQ(with_tangent_capacity(42, []<int N>() { return N; }), kMaxTangents);
  EXPECT_THROW(with_tangent_capacity(kMaxTangents + 1, []<int N>() { return N; }),
               std::invalid_argument);
}

TEST(DiffComplex, AbsSquaredTangent) {
  const auto p = seed_parameters<2>(std::vector<double>{0.6, -0.8});
  const Complex<Dual<2>> z(p[0], p[1]);
  const Dual<2> n = norm(z);
  EXPECT_DOUBLE_EQ(n.value(), 1.0);
  EXPECT_DOUBLE_EQ(n.derivative(0), 2.0 * 0.6);
  EXPECT_DOUBLE_EQ(n.derivative(1), 2.0 * -0.8);
}

TEST(DiffComplex, ArithmeticIdentities) {
  const Complex<double> a(1.0, 2.0), b(-0.5, 3.0);
  const Complex<double> prod = a * b;
  EXPECT_DOUBLE_EQ(prod.re, 1.0 * -0.5 - 2.0 * 3.0);
  EXPECT_DOUBLE_EQ(prod.im, 1.0 * 3.0 + 2.0 * -0.5);
  const Complex<double> c = a * conj(a);
  EXPECT_DOUBLE_EQ(c.re, norm(a));
  EXPECT_DOUBLE_EQ(c.im, 0.0);
  const Complex<double> d = (a + b) - b;
  EXPECT_DOUBLE_EQ(d.re, a.re);
  EXPECT_DOUBLE_EQ(d.im, a.im);
}

// Random expression trees over {+, -, *, /, sin, cos} in two variables.
struct Node {
  enum Op { Var0, Var1, Const, Add, Sub, Mul, Div, Sin, Cos } op;
  double c = 0.0;
  std::unique_ptr<Node> l, r;
};

std::unique_ptr<Node> random_tree(std::mt19937_64& rng, int depth) {
  auto n = std::make_unique<Node>();
  std::uniform_int_distribution<int> leaf(0, 2), inner(3, 8);
  const bool make_leaf = depth == 0 || std::uniform_real_distribution<>(0, 1)(rng) < 0.2;
  n->op = static_cast<Node::Op>(make_leaf ? leaf(rng) : inner(rng));
  if (n->op == Node::Const) n->c = std::uniform_real_distribution<>(-2.0, 2.0)(rng);
  if (n->op >= Node::Add) n->l = random_tree(rng, depth - 1);
  if (n->op >= Node::Add && n->op <= Node::Div) n->r = random_tree(rng, depth - 1);
  return n;
}

// `ok` turns false near a singular quotient or on overflow.
template <typename S>
S eval(const Node& n, const S& x, const S& y, bool& ok) {
  using std::cos;
  using std::sin;
  switch (n.op) {
    case Node::Var0: return x;
    case Node::Var1: return y;
    case Node::Const: return S(n.c);
    case Node::Add: return eval(*n.l, x, y, ok) + eval(*n.r, x, y, ok);
    case Node::Sub: return eval(*n.l, x, y, ok) - eval(*n.r, x, y, ok);
    case Node::Mul: return eval(*n.l, x, y, ok) * eval(*n.r, x, y, ok);
    case Node::Div: {
      const S den = eval(*n.r, x, y, ok);
      if (std::abs(value_of(den)) < 0.25) ok = false;
      return eval(*n.l, x, y, ok) / den;
    }
    case Node::Sin: return sin(eval(*n.l, x, y, ok));
    case Node::Cos: return cos(eval(*n.l, x, y, ok));
  }
  return S(0.0);
}

// Central differences extrapolated to zero step over a shrinking sequence
// (Ridders); returns the estimate and its error bound.
template <typename F>
std::pair<double, double> ridders(F f, double h = 0.02) {
  constexpr int kSteps = 10;
  constexpr double kShrink = 1.4, kShrink2 = kShrink * kShrink;
  double table[kSteps][kSteps];
  table[0][0] = (f(h) - f(-h)) / (2 * h);
  double best = table[0][0], err = std::numeric_limits<double>::infinity();
  for (int i = 1; i < kSteps; ++i) {
    h /= kShrink;
    table[0][i] = (f(h) - f(-h)) / (2 * h);
    double factor = kShrink2;
    for (int j = 1; j <= i; ++j) {
      table[j][i] = (table[j - 1][i] * factor - table[j - 1][i - 1]) / (factor - 1);
      factor *= kShrink2;
      const double e = std::max(std::abs(table[j][i] - table[j - 1][i]),
                                std::abs(table[j][i] - table[j - 1][i - 1]));
      if (e <= err) {
        err = e;
        best = table[j][i];
      }
    }
    if (std::abs(table[i][i] - table[i - 1][i - 1]) >= 2 * err) break;
  }
  return {best, err};
}

TEST(Dual, RandomExpressionTreesMatchCentralDifferences) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<> coord(-1.5, 1.5);
  int checked = 0, unsettled = 0;
  while (checked < 1000) {
    const auto tree = random_tree(rng, 8);
    const double x0 = coord(rng), y0 = coord(rng);
    bool ok = true;
    const auto p = seed_parameters<2>(std::vector<double>{x0, y0});
    const Dual<2> f = eval(*tree, p[0], p[1], ok);
    if (!ok || !isfinite(f) || std::abs(f.value()) > 1e3 ||
        f.tangents().cwiseAbs().maxCoeff() > 1e3)
      continue;

    bool fd_ok = true;
    auto at = [&](double x, double y) { return eval(*tree, x, y, fd_ok); };
    const auto [gx, ex] = ridders([&](double d) { return at(x0 + d, y0); });
    const auto [gy, ey] = ridders([&](double d) { return at(x0, y0 + d); });
    // Skip points where the difference table itself has not settled.
    if (!fd_ok || ex > 1e-9 * std::max(std::abs(gx), 1.0) ||
        ey > 1e-9 * std::max(std::abs(gy), 1.0)) {
      unsettled += fd_ok;
      continue;
    }
    ++checked;
    for (const auto& [ad, fd] : {std::pair{f.derivative(0), gx}, {f.derivative(1), gy}}) {
      const double scale = std::max({std::abs(ad), std::abs(fd), 1.0});
      EXPECT_LT(std::abs(ad - fd) / scale, 1e-6) << "at (" << x0 << ", " << y0 << ")";
    }
  }
  EXPECT_LT(unsettled, 20);
}

}  // namespace
}  // namespace excitrans
