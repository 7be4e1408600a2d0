#include <gtest/gtest.h>

#include "oracles.hpp"
#include "peierls/symbols.hpp"

using namespace peierls;

namespace {
Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST(Symbols, EvaluateKinds) {
  Lattice l2 = Lattice::square(2);
  PeriodicSymbol nr(Nonrelativistic{}, PeriodicPotential::zero(l2));
  EXPECT_DOUBLE_EQ(nr(v2(0, 0), v2(3, 4)), 25.0);
  PeriodicSymbol rel(Relativistic{}, PeriodicPotential::zero(l2));
  EXPECT_DOUBLE_EQ(rel(v2(0, 0), v2(0, 0)), 1.0);
  Lattice l1 = Lattice::square(1);
  PeriodicSymbol mathieu(Nonrelativistic{}, PeriodicPotential::cosine(l1, 1.0));
  EXPECT_NEAR(mathieu(v1(0), v1(0)), 2.0, 1e-15);
  EXPECT_NEAR(mathieu(v1(oracle::pi), v1(0)), -2.0, 1e-14);
}

TEST(Symbols, EvenInMomentum) {
  Lattice l2 = Lattice::square(2);
  PeriodicSymbol rel(Relativistic{}, PeriodicPotential::separable_cosine_2d(l2, 0.7));
  PeriodicSymbol nr(Nonrelativistic{}, PeriodicPotential::separable_cosine_2d(l2, 0.7));
  for (int k = 0; k < 20; ++k) {
    Vec y = v2(0.3 * k, -0.2 * k), eta = v2(std::sin(k), 1.5 * std::cos(2 * k));
    EXPECT_EQ(rel(y, eta), rel(y, Vec(-eta)));
    EXPECT_EQ(nr(y, eta), nr(y, Vec(-eta)));
  }
}

TEST(Symbols, HermitianSymmetryEnforced) {
  Lattice l1 = Lattice::square(1);
  EXPECT_THROW(PeriodicPotential(l1, {{Coeffs{1, 0}, cplx(1, 0)}}), ConfigError);
  EXPECT_NO_THROW(PeriodicPotential(l1, {{Coeffs{1, 0}, cplx(0, 1)}, {Coeffs{-1, 0}, cplx(0, -1)}}));
}

TEST(Symbols, FourierOfConstantAndCosine) {
  Lattice l1 = Lattice::square(1);
  DualShell shell(l1, 5);
  auto c = potential_fourier_coeffs(std::vector<double>(16, 1.0), l1, shell);
  EXPECT_NEAR(std::abs(c[{0, 0}] - 1.0), 0, 1e-14);
  for (int n = 1; n <= 5; ++n) EXPECT_LE(std::abs(c[{n, 0}]), 1e-14);
  std::vector<double> s(16);
  for (int j = 0; j < 16; ++j) s[j] = 2 * std::cos(two_pi * j / 16);
  auto v = potential_fourier_coeffs(s, l1, shell);
  EXPECT_NEAR(std::abs(v[{1, 0}] - 1.0), 0, 1e-14);
  EXPECT_NEAR(std::abs(v[{-1, 0}] - 1.0), 0, 1e-14);
  EXPECT_LE(std::abs(v[{0, 0}]), 1e-14);
}

TEST(Symbols, FourierAliasingRejected) {
  Lattice l1 = Lattice::square(1);
  DualShell shell(l1, 10);
  EXPECT_THROW(potential_fourier_coeffs(std::vector<double>(20, 1.0), l1, shell), ResolutionError);
}

TEST(Symbols, ParsevalAndRoundTripExpCos) {
  Lattice l1 = Lattice::square(1);
  const int m = 64;
  DualShell shell(l1, 31);  // the full set of grid frequencies except Nyquist
  std::vector<double> s(m);
  for (int j = 0; j < m; ++j) s[j] = std::exp(std::cos(two_pi * j / m));
  auto v = potential_fourier_coeffs(s, l1, shell);
  // Parseval on the grid: |E|/m sum |u_j|^2 = |E| sum |u^|^2.
  double lhs = 0, rhs = 0;
  for (double x : s) lhs += x * x / m;
  for (auto& [g, a] : v.coeffs()) rhs += std::norm(a);
  EXPECT_NEAR(lhs, rhs, 1e-10 * lhs);
  for (int j = 0; j < m; ++j) EXPECT_NEAR(v(v1(two_pi * j / m)), s[j], 1e-10);
  // Bessel-type decay, I_n(1) for n = 3 is about 0.0222
  EXPECT_NEAR((v[{3, 0}].real()), std::cyl_bessel_i(3, 1.0), 1e-12);
}

TEST(Symbols, FourierTwoDimensional) {
  Lattice l2 = Lattice::square(2);
  const int m = 12;
  DualShell shell(l2, 3);
  std::vector<double> s(m * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      s[a * m + b] = 2 * std::cos(two_pi * a / m) + 0.5 * std::cos(two_pi * (a + 2 * b) / m);
  auto v = potential_fourier_coeffs(s, l2, shell);
  EXPECT_NEAR((v[{1, 0}].real()), 1.0, 1e-13);
  EXPECT_NEAR((v[{1, 2}].real()), 0.25, 1e-13);
  EXPECT_NEAR((v[{-1, -2}].real()), 0.25, 1e-13);
  EXPECT_LE(std::abs(v[{0, 1}]), 1e-13);
}

TEST(Symbols, Ellipticity) {
  Lattice l1 = Lattice::square(1);
  PeriodicSymbol nr(Nonrelativistic{}, PeriodicPotential::cosine(l1, 1.0));
  auto e = symbol_ellipticity_check(nr, 100, 8);
  EXPECT_TRUE(e.ok);
  EXPECT_NEAR(e.constant, 1.0, 1e-3);
  PeriodicSymbol rel(Relativistic{}, PeriodicPotential::cosine(l1, 1.0));
  e = symbol_ellipticity_check(rel, 1e4, 8);
  EXPECT_TRUE(e.ok);
  EXPECT_NEAR(e.constant, 1.0, 1e-3);

  Polynomial p;
  p.order = 4;
  p.terms = {{{4, 0}, PeriodicPotential::constant(l1, 1.0)}, {{2, 0}, PeriodicPotential::constant(l1, -10.0)}};
  PeriodicSymbol poly(p, PeriodicPotential::zero(l1));
  e = symbol_ellipticity_check(poly, 2, 8);
  EXPECT_FALSE(e.ok);
  EXPECT_NEAR(e.constant, -24.0 / 16.0, 1e-12);  // attained at |eta| = 2
  EXPECT_TRUE(symbol_ellipticity_check(poly, 4, 8).ok);
}

TEST(Symbols, PolynomialValidation) {
  Lattice l1 = Lattice::square(1);
  Polynomial odd;
  odd.order = 3;
  EXPECT_THROW(PeriodicSymbol(odd, PeriodicPotential::zero(l1)), ConfigError);
  Polynomial bad;
  bad.order = 2;
  bad.terms = {{{3, 0}, PeriodicPotential::constant(l1, 1.0)}};
  EXPECT_THROW(PeriodicSymbol(bad, PeriodicPotential::zero(l1)), ConfigError);
}
