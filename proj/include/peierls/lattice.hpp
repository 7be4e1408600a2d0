#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "errors.hpp"

namespace peierls {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Small fixed-capacity vectors: every lattice here has d <= 2.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 2, 2>;

// Integer coordinates with respect to a basis.  Unused slot is 0 when d == 1.
using Coeffs = std::array<int, 2>;

inline Coeffs operator+(Coeffs a, Coeffs b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Coeffs operator-(Coeffs a, Coeffs b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Coeffs operator-(Coeffs a) { return {-a[0], -a[1]}; }

// Columns of the result are the dual vectors e*_j, with <e*_j, e_k> = 2 pi delta_jk.
inline Mat dual_basis(const Mat& basis) {
  const auto d = basis.cols();
  if (d < 1 || d > 2 || basis.rows() != d) throw DegenerateLatticeError("basis must be d x d with d in {1,2}");
  const double det = basis.determinant();
  const double scale = basis.cwiseAbs().maxCoeff();
  if (!std::isfinite(det) || std::abs(det) <= 1e-12 * std::pow(scale, static_cast<double>(d)))
    throw DegenerateLatticeError("basis vectors are linearly dependent");
  return two_pi * basis.inverse().transpose();
}

class Lattice {
 public:
  // basis: columns are the generators e_j.
  explicit Lattice(const Mat& basis) : basis_(basis), dual_(dual_basis(basis)) {}

  // Rows are the generators, the layout used in configuration files.
  static Lattice from_rows(const std::vector<std::vector<double>>& rows) {
    const int d = static_cast<int>(rows.size());
    if (d < 1 || d > 2) throw DegenerateLatticeError("lattice dimension must be 1 or 2");
    Mat b(d, d);
    for (int j = 0; j < d; ++j) {
      if (static_cast<int>(rows[j].size()) != d) throw DegenerateLatticeError("basis row has wrong length");
      for (int i = 0; i < d; ++i) b(i, j) = rows[j][i];
    }
    return Lattice(b);
  }

  // 2 pi Z^d, the lattice used by most fixtures; its dual is Z^d.
  static Lattice square(int d, double period = two_pi) {
    Mat b = Mat::Identity(d, d) * period;
    return Lattice(b);
  }

  int dim() const { return static_cast<int>(basis_.cols()); }
  const Mat& basis() const { return basis_; }
  const Mat& dual() const { return dual_; }
  double cell_volume() const { return std::abs(basis_.determinant()); }
  double dual_cell_volume() const { return std::abs(dual_.determinant()); }
  // Signed volume, fixes the orientation used for fluxes.
  double oriented_volume() const { return basis_.determinant(); }

  Vec point(const Coeffs& c) const {
    Vec v = Vec::Zero(dim());
    for (int j = 0; j < dim(); ++j) v += c[j] * basis_.col(j);
    return v;
  }
  Vec dual_point(const Coeffs& c) const {
    Vec v = Vec::Zero(dim());
    for (int j = 0; j < dim(); ++j) v += c[j] * dual_.col(j);
    return v;
  }
  // t with xi = sum_j t_j e*_j.
  Vec dual_coords(const Vec& xi) const { return basis_.transpose() * xi / two_pi; }
  Vec coords(const Vec& x) const { return dual_.transpose() * x / two_pi; }
  Vec from_dual_coords(const Vec& t) const { return dual_ * t; }

 private:
  Mat basis_;
  Mat dual_;
};

struct Reduced {
  Vec xi0;
  Vec gamma;   // the dual lattice vector
  Coeffs shift;  // its coefficients
};

// xi = xi0 + gamma*, xi0 with dual coordinates in [-1/2, 1/2).
inline Reduced reduce_to_cell(const Vec& xi, const Lattice& lat) {
  Vec t = lat.dual_coords(xi);
  Coeffs n{0, 0};
  // The slack keeps points that sit on the lower face up to rounding inside the cell.
  for (int j = 0; j < lat.dim(); ++j)
    n[j] = static_cast<int>(std::floor(t[j] + 0.5 + 1e-12 * std::max(1.0, std::abs(t[j]))));
  Vec g = lat.dual_point(n);
  return {xi - g, g, n};
}

// Uniform tensor grid on E*.  Flat index i = i_0 * R + i_1 for d = 2.
class BZGrid {
 public:
  BZGrid(Lattice lat, int resolution) : lat_(std::move(lat)), res_(resolution) {
    if (resolution < 2) throw ConfigError("Brillouin-zone resolution must be >= 2");
  }
  const Lattice& lattice() const { return lat_; }
  int resolution() const { return res_; }
  int dim() const { return lat_.dim(); }
  int size() const { return dim() == 1 ? res_ : res_ * res_; }

  int flat(int i0, int i1 = 0) const { return dim() == 1 ? i0 : i0 * res_ + i1; }
  std::array<int, 2> multi(int flat_index) const {
    if (dim() == 1) return {flat_index, 0};
    return {flat_index / res_, flat_index % res_};
  }
  // Dual coordinate along one axis for index i (also valid outside [0, R)).
  double coord(int i) const { return -0.5 + static_cast<double>(i) / res_; }

  Vec coords_of(int flat_index) const {
    auto m = multi(flat_index);
    Vec t(dim());
    for (int j = 0; j < dim(); ++j) t[j] = coord(m[j]);
    return t;
  }
  Vec point(int flat_index) const { return lat_.from_dual_coords(coords_of(flat_index)); }
  Vec point_at(int i0, int i1 = 0) const {
    Vec t(dim());
    t[0] = coord(i0);
    if (dim() == 2) t[1] = coord(i1);
    return lat_.from_dual_coords(t);
  }

 private:
  Lattice lat_;
  int res_;
};

inline BZGrid bz_grid(const Lattice& lat, int resolution) { return BZGrid(lat, resolution); }

// Members of Gamma* with |gamma*| <= cutoff, ordered lexicographically by coefficients.
class DualShell {
 public:
  DualShell(const Lattice& lat, double cutoff) : dim_(lat.dim()), cutoff_(cutoff) {
    if (!(cutoff >= 0)) throw ConfigError("shell cutoff must be nonnegative");
    // Bound each coefficient: |c_j| <= cutoff * |e_j| / 2 pi.
    std::array<int, 2> bound{0, 0};
    for (int j = 0; j < dim_; ++j)
      bound[j] = static_cast<int>(std::ceil(cutoff * lat.basis().col(j).norm() / two_pi)) + 1;
    lo_ = {-bound[0], dim_ == 2 ? -bound[1] : 0};
    span_ = {2 * bound[0] + 1, dim_ == 2 ? 2 * bound[1] + 1 : 1};
    lookup_.assign(static_cast<size_t>(span_[0]) * span_[1], -1);
    const double lim = cutoff * (1 + 1e-12) + 1e-14;
    for (int a = -bound[0]; a <= bound[0]; ++a) {
      for (int b = lo_[1]; b <= -lo_[1]; ++b) {
        Coeffs c{a, b};
        if (lat.dual_point(c).norm() <= lim) {
          lookup_[slot(c)] = static_cast<int>(members_.size());
          members_.push_back(c);
          momenta_.push_back(lat.dual_point(c));
        }
      }
    }
  }

  int size() const { return static_cast<int>(members_.size()); }
  int dim() const { return dim_; }
  double cutoff() const { return cutoff_; }
  const std::vector<Coeffs>& members() const { return members_; }
  const Coeffs& operator[](int i) const { return members_[i]; }
  const Vec& momentum(int i) const { return momenta_[i]; }

  // Position of c in the shell, or -1.
  int index(const Coeffs& c) const {
    const int a = c[0] - lo_[0], b = c[1] - lo_[1];
    if (a < 0 || b < 0 || a >= span_[0] || b >= span_[1]) return -1;
    return lookup_[static_cast<size_t>(a) * span_[1] + b];
  }

 private:
  size_t slot(const Coeffs& c) const {
    return static_cast<size_t>(c[0] - lo_[0]) * span_[1] + (c[1] - lo_[1]);
  }
  int dim_;
  double cutoff_;
  Coeffs lo_{};
  std::array<int, 2> span_{};
  std::vector<int> lookup_;
  std::vector<Coeffs> members_;
  std::vector<Vec> momenta_;
};

}  // namespace peierls
