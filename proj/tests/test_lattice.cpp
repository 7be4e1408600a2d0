#include <gtest/gtest.h>

#include "peierls/lattice.hpp"

using namespace peierls;

namespace {

Mat m2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

void expect_biorthogonal(const Lattice& lat) {
  Mat g = lat.dual().transpose() * lat.basis();
  for (int j = 0; j < lat.dim(); ++j)
    for (int k = 0; k < lat.dim(); ++k) EXPECT_NEAR(g(j, k), j == k ? two_pi : 0.0, 1e-12 * two_pi);
  EXPECT_NEAR(lat.cell_volume() * lat.dual_cell_volume(), std::pow(two_pi, lat.dim()),
              1e-12 * std::pow(two_pi, lat.dim()));
}

}  // namespace

TEST(Lattice, DualOneDimensional) {
  Lattice lat = Lattice::square(1);
  EXPECT_NEAR(lat.dual()(0, 0), 1.0, 1e-15);
  expect_biorthogonal(lat);
}

TEST(Lattice, DualUnitSquare) {
  Lattice lat(Mat::Identity(2, 2));
  EXPECT_NEAR(lat.dual()(0, 0), two_pi, 1e-14);
  EXPECT_NEAR(lat.dual()(1, 1), two_pi, 1e-14);
  EXPECT_NEAR(lat.dual()(0, 1), 0.0, 1e-14);
  expect_biorthogonal(lat);
}

TEST(Lattice, DualTriangular) {
  // columns e1 = (1,0), e2 = (1/2, sqrt3/2); dual by solving the 2x2 system by hand
  Lattice lat(m2(1, 0.5, 0, std::sqrt(3.0) / 2));
  const double s = std::sqrt(3.0);
  // e*_1 = 2pi (1, -1/sqrt3), e*_2 = 2pi (0, 2/sqrt3)
  EXPECT_NEAR(lat.dual()(0, 0), two_pi, 1e-12);
  EXPECT_NEAR(lat.dual()(1, 0), -two_pi / s, 1e-12);
  EXPECT_NEAR(lat.dual()(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(lat.dual()(1, 1), 2 * two_pi / s, 1e-12);
  expect_biorthogonal(lat);
}

TEST(Lattice, DualOfDualIsOriginal) {
  Mat b = m2(1.3, 0.4, -0.2, 0.9);
  Mat back = dual_basis(dual_basis(b));
  EXPECT_LE((back - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Lattice, SingularBasisRejected) {
  EXPECT_THROW(Lattice(m2(1, 2, 2, 4)), DegenerateLatticeError);
  EXPECT_THROW(Lattice::from_rows({{1, 2}, {2, 4}}), DegenerateLatticeError);
}

TEST(Lattice, ReduceOneDimensional) {
  Lattice lat = Lattice::square(1);
  Vec xi(1);
  xi << 0.3;
  auto r = reduce_to_cell(xi, lat);
  EXPECT_NEAR(r.xi0[0], 0.3, 1e-15);
  EXPECT_EQ(r.shift[0], 0);
  xi << 1.3;
  r = reduce_to_cell(xi, lat);
  EXPECT_NEAR(r.xi0[0], 0.3, 1e-14);
  EXPECT_EQ(r.shift[0], 1);
  EXPECT_NEAR(r.gamma[0], 1.0, 1e-15);
}

TEST(Lattice, ReduceSquare) {
  Lattice lat(Mat::Identity(2, 2));
  Vec xi(2);
  xi << two_pi + 0.1, -two_pi - 0.1;
  auto r = reduce_to_cell(xi, lat);
  EXPECT_NEAR(r.xi0[0], 0.1, 1e-14);
  EXPECT_NEAR(r.xi0[1], -0.1, 1e-14);
  EXPECT_NEAR(r.gamma[0], two_pi, 1e-14);
  EXPECT_NEAR(r.gamma[1], -two_pi, 1e-14);
}

TEST(Lattice, ReduceIdempotentAndShiftInvariant) {
  Lattice lat(m2(1.1, 0.3, 0.2, 0.8));
  for (int k = 0; k < 50; ++k) {
    Vec xi(2);
    xi << std::sin(1.7 * k) * 20, std::cos(0.9 * k) * 20;
    auto r = reduce_to_cell(xi, lat);
    auto again = reduce_to_cell(r.xi0, lat);
    EXPECT_LE((again.xi0 - r.xi0).norm(), 1e-12);
    EXPECT_EQ(again.shift, (Coeffs{0, 0}));
    Vec moved = xi + lat.dual_point({3, -2});
    EXPECT_LE((reduce_to_cell(moved, lat).xi0 - r.xi0).norm(), 1e-10);
    EXPECT_LE((r.xi0 + r.gamma - xi).norm(), 1e-12);
  }
}

TEST(Lattice, GridOneDimensional) {
  BZGrid g(Lattice::square(1), 4);
  ASSERT_EQ(g.size(), 4);
  const double expect[] = {-0.5, -0.25, 0, 0.25};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(g.coords_of(i)[0], expect[i], 1e-15);
}

TEST(Lattice, GridCounts) {
  EXPECT_EQ(BZGrid(Lattice::square(2), 3).size(), 9);
  EXPECT_THROW(BZGrid(Lattice::square(1), 1), ConfigError);
}

TEST(Lattice, GridPointsAreReduced) {
  Lattice lat(m2(1, 0.5, 0, std::sqrt(3.0) / 2));
  BZGrid g(lat, 64);
  ASSERT_EQ(g.size(), 4096);
  for (int p = 0; p < g.size(); ++p) {
    auto r = reduce_to_cell(g.point(p), lat);
    ASSERT_EQ(r.shift, (Coeffs{0, 0}));
    ASSERT_LE((r.xi0 - g.point(p)).norm(), 1e-13);
  }
}

TEST(Lattice, ShellClosedUnderNegation) {
  Lattice lat(m2(1, 0.5, 0, std::sqrt(3.0) / 2));
  DualShell s(lat, 40.0);
  ASSERT_GT(s.size(), 10);
  for (auto& c : s.members()) {
    EXPECT_GE(s.index(-c), 0);
    EXPECT_LE(lat.dual_point(c).norm(), 40.0 + 1e-9);
  }
  DualShell one(Lattice::square(1), 1.0);
  ASSERT_EQ(one.size(), 3);
  EXPECT_EQ(one[0][0], -1);
  EXPECT_EQ(one[2][0], 1);
  EXPECT_EQ(one.index({5, 0}), -1);
}
