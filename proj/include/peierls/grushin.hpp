#pragma once

#include <functional>
#include <string>
#include <vector>

#include "section.hpp"

namespace peierls {

struct TrialFamily {
  BZGrid grid;
  ShellPtr shell;
  int n = 0;
  int raw_count = 0;  // candidates before rank filtering
  std::string tag;    // "simple_band" or "spectral_bump"
  std::vector<MatrixXcd> vectors;  // per grid point, M x N with orthonormal columns
  std::function<MatrixXcd(const Vec&)> at;  // the family at any momentum
};

// N = 1 family from a section.  Off-grid momenta: reduce to E*, project the nearest
// section value onto the band there, then apply the equivariance shift.
inline TrialFamily trial_from_section(const BlochSection& s, const FiberOperator& op) {
  TrialFamily f{s.grid, s.shell, 1, 1, "simple_band", {}, {}};
  for (auto& v : s.vectors) f.vectors.emplace_back(v);
  auto shell = s.shell;
  f.at = [s, op, shell](const Vec& xi) -> MatrixXcd {
    const Lattice& lat = s.grid.lattice();
    auto red = reduce_to_cell(xi, lat);
    Vec t = lat.dual_coords(red.xi0);
    const int r = s.res();
    int i0 = static_cast<int>(std::lround((t[0] + 0.5) * r));
    int i1 = t.size() > 1 ? static_cast<int>(std::lround((t[1] + 0.5) * r)) : 0;
    VectorXcd near = s.value(std::clamp(i0, 0, r), std::clamp(i1, 0, r));
    auto bv = band_vector(op, red.xi0, s.band);
    const cplx c = bv.vector.dot(near);
    if (std::abs(c) < 0.5) throw TransportStepError("section too coarse to extend to xi = " + describe_xi(xi));
    VectorXcd v = bv.vector * (c / std::abs(c));
    if (red.shift != Coeffs{0, 0}) v = translate_dual(v, *shell, red.shift);
    return MatrixXcd(v);
  };
  return f;
}

// Squared raised cosine on the central `fraction` of [0, 1) in each lattice coordinate.
struct BumpWindow {
  double fraction = 0.8;

  // int_0^1 b(s) e^{-i w s} ds
  cplx transform_1d(double omega) const {
    const double w = fraction, a = two_pi / w, c = 0.5;
    auto s = [w](double k) {
      const double x = 0.5 * k * w;
      return std::abs(x) < 1e-6 ? w * (1 - x * x / 6) : 2 * std::sin(x) / k;
    };
    const double v = 0.375 * s(omega) + 0.25 * (s(a - omega) + s(a + omega)) + 0.0625 * (s(2 * a - omega) + s(2 * a + omega));
    return std::exp(cplx(0, -omega * c)) * v;
  }
  double value_1d(double s) const {
    const double u = s - 0.5;
    if (std::abs(u) >= 0.5 * fraction) return 0.0;
    const double r = 0.5 * (1 + std::cos(two_pi * u / fraction));
    return r * r;
  }
  // Fourier transform of chi(x) = prod_j b(s_j), x = sum_j s_j e_j.
  cplx transform(const Lattice& lat, const Vec& k) const {
    cplx v = lat.cell_volume();
    for (int j = 0; j < lat.dim(); ++j) v *= transform_1d(k.dot(lat.basis().col(j)));
    return v;
  }
};

namespace detail {

struct BumpSource {
  Vec xi0;
  VectorXcd coeffs;  // eigenvector at xi0
};

// Plane-wave coefficients of the periodized, bump-localized functions at xi.
inline MatrixXcd bump_raw(const std::vector<BumpSource>& src, const DualShell& shell, const Lattice& lat,
                          const BumpWindow& bump, const Vec& xi) {
  const int m = shell.size();
  MatrixXcd raw(m, static_cast<Eigen::Index>(src.size()));
  const double vol = lat.cell_volume();
  for (size_t j = 0; j < src.size(); ++j) {
    MatrixXcd k(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        k(a, b) = bump.transform(lat, Vec(xi + shell.momentum(a) - src[j].xi0 - shell.momentum(b))) / vol;
    raw.col(static_cast<Eigen::Index>(j)) = k * src[j].coeffs;
  }
  return raw;
}

inline MatrixXcd normalize_columns(MatrixXcd m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double n = m.col(j).norm();
    if (n > 0) m.col(j) /= n;
  }
  return m;
}

// Gram-Schmidt (Cholesky form) with a coverage check.
inline MatrixXcd orthonormal_family(const MatrixXcd& phi, const Vec& xi) {
  MatrixXcd g = phi.adjoint() * phi;
  g = 0.5 * (g + g.adjoint()).eval();
  const double lo = eigvalsh(g, 1)[0];
  if (lo < 1e-6)
    throw CoverageError("trial family loses rank at xi = " + describe_xi(xi) + " (Gram minimum " +
                        std::to_string(lo) + "); add reference points or raise lambda_max");
  Eigen::LLT<MatrixXcd> llt(g);
  MatrixXcd lt = llt.matrixU();  // g = U^H U
  return lt.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(phi);
}

}  // namespace detail

// Trial family from band eigenvectors at reference momenta, localized by a bump in
// position space and periodized with Bloch phases.
inline TrialFamily build_trial_family(const FiberOperator& op, const BZGrid& grid, double lambda_max,
                                      const BumpWindow& bump = {}, int refs_per_direction = 4) {
  if (refs_per_direction < 1) throw ConfigError("need at least one reference point per direction");
  const Lattice& lat = op.lattice();
  const int d = lat.dim();
  std::vector<detail::BumpSource> src;
  const int nref = d == 1 ? refs_per_direction : refs_per_direction * refs_per_direction;
  for (int r = 0; r < nref; ++r) {
    Vec t(d);
    t[0] = -0.5 + ((d == 1 ? r : r / refs_per_direction) + 0.5) / refs_per_direction;
    if (d == 2) t[1] = -0.5 + (r % refs_per_direction + 0.5) / refs_per_direction;
    Vec xi0 = lat.from_dual_coords(t);
    auto e = eigh(op.matrix(xi0));
    for (Eigen::Index j = 0; j < e.values.size() && e.values[j] <= lambda_max; ++j) src.push_back({xi0, e.vectors.col(j)});
  }
  if (src.empty()) throw CoverageError("empty trial family: lambda_max lies below every reference eigenvalue");

  const DualShell& shell = *op.shell();
  std::vector<MatrixXcd> raw(grid.size());
  MatrixXcd avg = MatrixXcd::Zero(static_cast<Eigen::Index>(src.size()), static_cast<Eigen::Index>(src.size()));
  for (int p = 0; p < grid.size(); ++p) {
    raw[p] = detail::normalize_columns(detail::bump_raw(src, shell, lat, bump, grid.point(p)));
    avg += raw[p].adjoint() * raw[p];
  }
  avg /= grid.size();

  // Pivoted Cholesky on the averaged Gram matrix selects a well-conditioned subset.
  std::vector<int> keep;
  {
    const Eigen::Index n = avg.rows();
    MatrixXcd l = MatrixXcd::Zero(n, n);
    VectorXd diag = avg.diagonal().real();
    std::vector<bool> used(n, false);
    for (Eigen::Index step = 0; step < n; ++step) {
      Eigen::Index piv = -1;
      double best = 1e-6;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!used[i] && diag[i] > best) best = diag[piv = i];
      if (piv < 0) break;
      used[piv] = true;
      keep.push_back(static_cast<int>(piv));
      const double root = std::sqrt(diag[piv]);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (used[i]) continue;
        cplx v = avg(i, piv);
        for (Eigen::Index q = 0; q < step; ++q) v -= l(i, q) * std::conj(l(piv, q));
        l(i, step) = v / root;
        diag[i] -= std::norm(l(i, step));
      }
      l(piv, step) = root;
    }
  }
  std::sort(keep.begin(), keep.end());
  std::vector<detail::BumpSource> chosen;
  for (int j : keep) chosen.push_back(src[j]);

  TrialFamily f{grid, op.shell(), static_cast<int>(chosen.size()), static_cast<int>(src.size()), "spectral_bump", {}, {}};
  f.vectors.resize(grid.size());
  for (int p = 0; p < grid.size(); ++p) {
    MatrixXcd sel(raw[p].rows(), static_cast<Eigen::Index>(keep.size()));
    for (size_t j = 0; j < keep.size(); ++j) sel.col(static_cast<Eigen::Index>(j)) = raw[p].col(keep[j]);
    f.vectors[p] = detail::orthonormal_family(sel, grid.point(p));
  }
  auto shell_ptr = op.shell();
  f.at = [chosen, shell_ptr, lat, bump](const Vec& xi) {
    return detail::orthonormal_family(detail::normalize_columns(detail::bump_raw(chosen, *shell_ptr, lat, bump, xi)), xi);
  };
  return f;
}

struct GrushinMatrix {
  Vec xi;
  cplx lambda;
  int m = 0, n = 0;
  MatrixXcd block;  // [[H - lambda, R-], [R+, 0]]
};

inline GrushinMatrix assemble_grushin(const FiberMatrix& h, cplx lambda, const MatrixXcd& family) {
  const int m = static_cast<int>(h.entries.rows());
  if (family.rows() != m) throw ConfigError("trial family and fiber matrix have different plane-wave sizes");
  const int n = static_cast<int>(family.cols());
  GrushinMatrix g{h.xi, lambda, m, n, MatrixXcd::Zero(m + n, m + n)};
  g.block.topLeftCorner(m, m) = h.entries - lambda * MatrixXcd::Identity(m, m);
  g.block.topRightCorner(m, n) = family;
  g.block.bottomLeftCorner(n, m) = family.adjoint();
  return g;
}

inline GrushinMatrix assemble_grushin(const FiberMatrix& h, cplx lambda, const TrialFamily& f) {
  return assemble_grushin(h, lambda, f.at(h.xi));
}

struct GrushinInverse {
  MatrixXcd e, e_plus, e_minus, e_mp;
  double condition = 0;
  double residual = 0;  // max entry of P E - I
};

inline GrushinInverse invert_grushin(const GrushinMatrix& g) {
  const Eigen::Index s = g.block.rows();
  MatrixXcd inv;
  double cond;
  if (g.lambda.imag() == 0) {
    auto e = eigh(g.block);
    const VectorXd a = e.values.cwiseAbs();
    cond = a.maxCoeff() / a.minCoeff();
    if (!(cond <= 1e12)) throw NearSingularError("Grushin matrix condition number " + std::to_string(cond));
    inv = e.vectors * e.values.cwiseInverse().cast<cplx>().asDiagonal() * e.vectors.adjoint();
  } else {
    Eigen::JacobiSVD<MatrixXcd> svd(g.block);
    const VectorXd sv = svd.singularValues();
    cond = sv[0] / sv[sv.size() - 1];
    if (!(cond <= 1e12)) throw NearSingularError("Grushin matrix condition number " + std::to_string(cond));
    inv = g.block.partialPivLu().solve(MatrixXcd::Identity(s, s));
  }
  GrushinInverse r;
  r.condition = cond;
  r.residual = max_abs(g.block * inv - MatrixXcd::Identity(s, s));
  r.e = inv.topLeftCorner(g.m, g.m);
  r.e_plus = inv.topRightCorner(g.m, g.n);
  r.e_minus = inv.bottomLeftCorner(g.n, g.m);
  r.e_mp = inv.bottomRightCorner(g.n, g.n);
  return r;
}

// lambda - lambda_k(xi) on the grid: E_-+ of the simple-band family without inversion.
inline std::vector<double> effective_symbol_zero_field(const BandStructure& b, int k, double lambda) {
  if (k < 0 || k >= b.n_bands()) throw ConfigError("band index out of range");
  std::vector<double> out(b.values.rows());
  for (Eigen::Index p = 0; p < b.values.rows(); ++p) out[p] = lambda - b.values(p, k);
  return out;
}

}  // namespace peierls
