#include <gtest/gtest.h>

#include "peierls/section.hpp"

using namespace peierls;

namespace {

FiberOperator mathieu_op(double cutoff = 20) {
  Lattice l = Lattice::square(1);
  return FiberOperator(PeriodicSymbol(Nonrelativistic{}, PeriodicPotential::cosine(l, 1.0)), make_shell(l, cutoff));
}
FiberOperator separable_op(double cutoff = 9) {
  Lattice l = Lattice::square(2);
  return FiberOperator(PeriodicSymbol(Nonrelativistic{}, PeriodicPotential::separable_cosine_2d(l, 1.0)),
                       make_shell(l, cutoff));
}
Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}

}  // namespace

TEST(Riesz, FreeCoordinateProjector) {
  Lattice l = Lattice::square(1);
  FiberOperator op(PeriodicSymbol(Nonrelativistic{}, PeriodicPotential::zero(l)), make_shell(l, 3));
  auto m = op.fiber(v1(0.2));
  auto p = riesz_projection(m, 0, eigh(m.entries, 2));
  const int c = op.shell()->index({0, 0});
  EXPECT_NEAR(std::abs(p.matrix(c, c)), 1.0, 1e-14);
  EXPECT_NEAR(p.trace(), 1.0, 1e-14);
}

TEST(Riesz, ContourMatchesOuterProduct) {
  auto op = mathieu_op();
  for (double xi : {0.0, 0.17, -0.5}) {
    auto m = op.fiber(v1(xi));
    auto e = eigh(m.entries, 3);
    for (int k : {0, 1}) {
      auto outer = riesz_projection(m, k, e);
      auto contour = riesz_projection(m, k, e, ProjectionMode::contour);
      EXPECT_LE(max_abs(outer.matrix - contour.matrix), 1e-8) << xi << " " << k;
    }
  }
  auto m = op.fiber(v1(0));
  auto p = riesz_projection(m, 0, eigh(m.entries, 2));
  EXPECT_NEAR(p.trace(), 1.0, 1e-10);
  EXPECT_LE(p.idempotency_residual(), 1e-10);
  EXPECT_LE(p.hermiticity_residual(), 1e-12);
}

TEST(Riesz, DegeneracyRejected) {
  Lattice l = Lattice::square(1);
  FiberOperator op(PeriodicSymbol(Nonrelativistic{}, PeriodicPotential::zero(l)), make_shell(l, 3));
  auto m = op.fiber(v1(0));
  EXPECT_THROW(riesz_projection(m, 1, eigh(m.entries, 3)), NearDegeneracyError);
}

TEST(Section, FreeBandNearlyCoordinateVector) {
  Lattice l = Lattice::square(1);
  FiberOperator op(PeriodicSymbol(Nonrelativistic{}, PeriodicPotential::zero(l)), make_shell(l, 4));
  // The free band 1 touches band 2 at xi = -1/2, a grid point, so it is not simple there.
  auto bands = compute_bands(op, BZGrid(l, 16), 3, true);
  EXPECT_THROW(transport_section(op, bands, 0), NearDegeneracyError);
  // A weak cosine opens the edge gap.  Inside the zone the section stays on the
  // gamma* = 0 plane wave, and the holonomy is the Zak phase pi of the mixed edge states.
  FiberOperator weak(PeriodicSymbol(Nonrelativistic{}, PeriodicPotential::cosine(l, 1e-3)), make_shell(l, 4));
  auto s = transport_section(weak, compute_bands(weak, BZGrid(l, 16), 3, true), 0);
  const int c = op.shell()->index({0, 0});
  for (int i = 4; i <= 12; ++i) EXPECT_NEAR(std::abs(s.vectors[i][c]), 1.0, 1e-4);
  EXPECT_NEAR(std::abs(std::remainder(s.phases.kappa, two_pi)), std::numbers::pi, 1e-8);
  EXPECT_LE(check_section(s, weak).equivariance, 1e-8);
}

TEST(Section, MathieuInvariants) {
  auto op = mathieu_op();
  double kappa[2];
  int idx = 0;
  for (int r : {32, 64}) {
    auto bands = compute_bands(op, BZGrid(Lattice::square(1), r), 3, true);
    auto s = transport_section(op, bands, 0);
    auto rep = check_section(s, op);
    EXPECT_LE(rep.normalization, 1e-10);
    EXPECT_LE(rep.residual, 1e-8);
    EXPECT_LE(rep.equivariance, 1e-8);
    EXPECT_LE(rep.conjugation, 1e-8);
    EXPECT_GT(rep.min_overlap, 0);
    EXPECT_LE(rep.holonomy, 1e-6);
    kappa[idx++] = s.phases.kappa;
  }
  EXPECT_LE(std::abs(std::remainder(kappa[0] - kappa[1], two_pi)), 1e-6);
}

TEST(Section, SeparableTwoDimensional) {
  auto op = separable_op();
  auto bands = compute_bands(op, BZGrid(Lattice::square(2), 16), 3, true);
  auto s = transport_section(op, bands, 0);
  auto rep = check_section(s, op);
  EXPECT_LE(rep.normalization, 1e-10);
  EXPECT_LE(rep.residual, 1e-8);
  EXPECT_LE(rep.equivariance, 1e-8);
  EXPECT_LE(rep.conjugation, 1e-8);
  EXPECT_GT(rep.min_overlap, 0);
  EXPECT_LE(rep.holonomy, 1e-6);
  EXPECT_LE(s.phases.row_periodicity, 1e-6);
  EXPECT_LE(s.phases.row_evenness, 1e-6);
}

TEST(Section, SmoothingIdentityAndRepair) {
  auto op = mathieu_op();
  auto bands = compute_bands(op, BZGrid(Lattice::square(1), 32), 3, true);
  auto s = transport_section(op, bands, 0);
  auto same = smooth_section(s, 1.0 / 32);
  for (int i = 0; i < 32; ++i) EXPECT_LE((same.vectors[i] - s.vectors[i]).norm(), 1e-10);
  auto sm = smooth_section(s, 2.0 / 32);
  auto rep = check_section(sm, op);
  EXPECT_LE(rep.residual, 1e-8);
  EXPECT_LE(rep.normalization, 1e-10);
  EXPECT_LE(rep.conjugation, 1e-10);
  EXPECT_LE(rep.equivariance, 1e-8);
  auto twice = check_section(smooth_section(sm, 2.0 / 32), op);
  EXPECT_LE(twice.residual, 1e-8);
  EXPECT_LE(twice.conjugation, 1e-10);
  EXPECT_THROW(smooth_section(s, 0.7), ConfigError);
}

TEST(Section, LargeStepRejected) {
  VectorXcd a(2), b(2);
  a << 1, 0;
  b << 0.4, std::sqrt(1 - 0.16);
  Vec xi(1);
  xi << 0.1;
  EXPECT_THROW(detail::transport_step(a, b, xi), TransportStepError);
  b << 0.6, 0.8;
  EXPECT_NEAR(detail::transport_step(a, b, xi).norm(), 1.0, 1e-15);
}
