#pragma once

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <Eigen/Dense>
#include <Eigen/QR>
#include <algorithm>
#include <functional>
#include <random>
#include <string>

#include "errors.hpp"

namespace peierls {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

struct EigenPairs {
  VectorXd values;   // ascending
  MatrixXcd vectors;  // columns, empty when not requested
};

// Lowest `count` eigenpairs of a Hermitian matrix (all when count < 0).  Only the
// lower triangle of h is read.
inline EigenPairs eigh(const MatrixXcd& h, int count = -1, bool vectors = true) {
  const lapack_int n = static_cast<lapack_int>(h.rows());
  if (h.cols() != n) throw NumericError("eigh: matrix not square");
  EigenPairs out;
  if (n == 0) return out;
  if (count < 0 || count > n) count = n;
  if (count == 0) return out;
  MatrixXcd a = h;
  VectorXd w(n);
  MatrixXcd z;
  if (vectors) z.resize(n, count);
  std::vector<lapack_int> support(2 * static_cast<size_t>(std::max<lapack_int>(count, 1)));
  lapack_int found = 0;
  const char range = count == n ? 'A' : 'I';
  lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', range, 'L', n, a.data(), n, 0.0, 0.0,
                                   1, count, 0.0, &found, w.data(), vectors ? z.data() : nullptr,
                                   vectors ? n : 1, support.data());
  if (info != 0) throw NumericError("zheevr failed, info = " + std::to_string(info));
  out.values = w.head(found);
  if (vectors) out.vectors = z.leftCols(found);
  return out;
}

inline VectorXd eigvalsh(const MatrixXcd& h, int count = -1) { return eigh(h, count, false).values; }

// Eigenvalues in (lo, hi] only.
inline VectorXd eigvalsh_range(const MatrixXcd& h, double lo, double hi) {
  const lapack_int n = static_cast<lapack_int>(h.rows());
  if (h.cols() != n) throw NumericError("eigvalsh_range: matrix not square");
  if (n == 0 || !(hi > lo)) return VectorXd();
  MatrixXcd a = h;
  VectorXd w(n);
  std::vector<lapack_int> support(2 * static_cast<size_t>(n));
  lapack_int found = 0;
  cplx dummy;
  lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'N', 'V', 'L', n, a.data(), n, lo, hi, 1, n, 0.0, &found,
                                   w.data(), &dummy, 1, support.data());
  if (info != 0) throw NumericError("zheevr failed, info = " + std::to_string(info));
  return w.head(found);
}

// Hermitian f(H) via the spectral decomposition.
template <class F>
MatrixXcd hermitian_function(const MatrixXcd& h, F&& f) {
  auto e = eigh(h);
  VectorXcd fw(e.values.size());
  for (Eigen::Index i = 0; i < fw.size(); ++i) fw[i] = f(e.values[i]);
  return e.vectors * fw.asDiagonal() * e.vectors.adjoint();
}

inline double spectral_norm_hermitian(const MatrixXcd& h) {
  auto w = eigvalsh(h);
  return std::max(std::abs(w.minCoeff()), std::abs(w.maxCoeff()));
}

inline double max_abs(const MatrixXcd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double hermiticity_defect(const MatrixXcd& m) { return max_abs(m - m.adjoint()); }

// Applies a Hermitian operator to a block of columns.
using BlockOperator = std::function<void(const MatrixXcd& in, MatrixXcd& out)>;

struct ChebyshevOptions {
  int degree = 24;
  int max_iterations = 400;
  double tolerance = 1e-10;  // relative residual of each wanted Ritz pair
  unsigned seed = 12345;
};

struct LowestEigen {
  VectorXd values;
  MatrixXcd vectors;
  int iterations = 0;
  double residual = 0;
};

// Orthonormal basis of the column span (Householder QR, thin Q).
inline MatrixXcd orthonormalize(const MatrixXcd& x) {
  Eigen::HouseholderQR<MatrixXcd> qr(x);
  return qr.householderQ() * MatrixXcd::Identity(x.rows(), x.cols());
}

namespace detail {

// x <- T_m(H) x with the Chebyshev polynomial mapping [cut, upper] to [-1, 1], scaled so the
// component at lo stays O(1).
inline MatrixXcd chebyshev_filter(const BlockOperator& apply, const MatrixXcd& x, const MatrixXcd& hx, double lo,
                                  double cut, double upper, int degree) {
  const double e = 0.5 * (upper - cut), c = 0.5 * (upper + cut);
  double sigma = e / (lo - c);
  const double tau = 2.0 / sigma;
  MatrixXcd y = (hx - c * x) * (sigma / e);
  MatrixXcd prev = x, hy(x.rows(), x.cols()), tmp;
  for (int k = 2; k <= degree; ++k) {
    const double sigma_next = 1.0 / (tau - sigma);
    apply(y, hy);
    tmp = (hy - c * y) * (2.0 * sigma_next / e) - (sigma * sigma_next) * prev;
    prev.swap(y);
    y.swap(tmp);
    sigma = sigma_next;
  }
  return y;
}

inline VectorXd rayleigh_ritz(const BlockOperator& apply, MatrixXcd& basis, MatrixXcd& hbasis) {
  hbasis.resize(basis.rows(), basis.cols());
  apply(basis, hbasis);
  MatrixXcd small = basis.adjoint() * hbasis;
  small = 0.5 * (small + small.adjoint()).eval();
  auto e = eigh(small);
  basis = (basis * e.vectors).eval();
  hbasis = (hbasis * e.vectors).eval();
  return e.values;
}

inline MatrixXcd random_block(Eigen::Index n, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  MatrixXcd x(n, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = cplx(gauss(rng), gauss(rng));
  return x;
}

}  // namespace detail

// Lowest `wanted` eigenpairs of a Hermitian operator of dimension n by Chebyshev-filtered
// subspace iteration.  `upper` must bound the spectrum from above.
inline LowestEigen chebyshev_lowest(const BlockOperator& apply, Eigen::Index n, int wanted, double upper,
                                    const ChebyshevOptions& opt = {}) {
  if (wanted <= 0) return {};
  const int block = static_cast<int>(std::min<Eigen::Index>(n, wanted + std::max(4, wanted / 4)));
  if (block >= n || n <= 64) {
    throw NumericError("chebyshev_lowest: problem too small for subspace iteration");
  }
  std::mt19937_64 rng(opt.seed);
  MatrixXcd x = orthonormalize(detail::random_block(n, block, rng)), hx;
  VectorXd theta = detail::rayleigh_ritz(apply, x, hx);
  LowestEigen out;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const double cut = theta[block - 1];
    if (!(upper > cut)) throw NumericError("chebyshev_lowest: upper bound below Ritz values");
    x = orthonormalize(detail::chebyshev_filter(apply, x, hx, theta[0], cut, upper, opt.degree));
    theta = detail::rayleigh_ritz(apply, x, hx);
    double worst = 0;
    for (int j = 0; j < wanted; ++j) {
      const double r = (hx.col(j) - theta[j] * x.col(j)).norm() / std::max(1.0, std::abs(theta[j]));
      worst = std::max(worst, r);
    }
    out.iterations = it;
    out.residual = worst;
    if (worst <= opt.tolerance) break;
  }
  if (out.residual > opt.tolerance)
    throw NumericError("chebyshev_lowest: no convergence, residual " + std::to_string(out.residual));
  out.values = theta.head(wanted);
  out.vectors = x.leftCols(wanted);
  return out;
}

// Every eigenvalue <= threshold.  The block grows while it cannot hold them all plus two;
// done when those Ritz pairs have converged and the next one has settled above threshold.
inline VectorXd chebyshev_below(const BlockOperator& apply, Eigen::Index n, double threshold, double upper, int block,
                                const ChebyshevOptions& opt = {}) {
  block = static_cast<int>(std::min<Eigen::Index>(std::max(block, 4), n));
  std::mt19937_64 rng(opt.seed);
  MatrixXcd x = orthonormalize(detail::random_block(n, block, rng)), hx;
  VectorXd theta = detail::rayleigh_ritz(apply, x, hx);
  double worst = 0;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const double cut = theta[block - 1];
    if (!(upper > cut)) throw NumericError("chebyshev_below: upper bound below Ritz values");
    x = orthonormalize(detail::chebyshev_filter(apply, x, hx, theta[0], cut, upper, opt.degree));
    theta = detail::rayleigh_ritz(apply, x, hx);
    int m = 0;
    while (m < block && theta[m] <= threshold) ++m;
    if (m + 2 > block) {
      if (block >= n / 2) throw NumericError("chebyshev_below: too many eigenvalues below the threshold");
      const int grow = static_cast<int>(std::min<Eigen::Index>(n / 2, std::max(2 * block, m + 8))) - block;
      MatrixXcd bigger(n, block + grow);
      bigger << x, detail::random_block(n, grow, rng);
      block += grow;
      x = orthonormalize(bigger);
      theta = detail::rayleigh_ritz(apply, x, hx);
      continue;
    }
    worst = 0;
    bool next_ok = true;
    for (int j = 0; j <= m; ++j) {
      const double r = (hx.col(j) - theta[j] * x.col(j)).norm() / std::max(1.0, std::abs(theta[j]));
      if (j < m) worst = std::max(worst, r);
      else next_ok = r <= std::sqrt(opt.tolerance) && theta[j] - r > threshold;
    }
    if (worst <= opt.tolerance && next_ok) return theta.head(m);
  }
  throw NumericError("chebyshev_below: no convergence, residual " + std::to_string(worst));
}

}  // namespace peierls
