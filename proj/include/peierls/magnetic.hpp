#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <optional>
#include <string>

#include "quadrature.hpp"
#include "symbols.hpp"

namespace peierls {

// Magnetic 2-form in d = 2, B_eps = eps * B.
class MagneticField {
 public:
  enum class Kind { constant, smooth };

  static MagneticField constant(double b12, double epsilon = 1.0) {
    Mat b(2, 2);
    b << 0, b12, -b12, 0;
    return from_matrix(b, epsilon);
  }
  static MagneticField from_matrix(const Mat& b, double epsilon = 1.0) {
    if (b.rows() != 2 || b.cols() != 2) throw ConfigError("magnetic field needs d = 2");
    if (b(0, 1) != -b(1, 0) || b(0, 0) != 0 || b(1, 1) != 0)
      throw ConfigError("H.1: magnetic field matrix must be antisymmetric (B12 = -B21)");
    MagneticField f;
    f.b12_ = b(0, 1);
    f.eps_ = epsilon;
    return f;
  }
  // Catalog of smooth profiles: "cos_x1" gives B12(x) = amplitude cos(wavenumber x1).
  static MagneticField smooth(const std::string& profile, double amplitude, double wavenumber, double epsilon = 1.0) {
    if (profile != "cos_x1") throw ConfigError("unknown smooth field profile '" + profile + "'");
    MagneticField f;
    f.kind_ = Kind::smooth;
    f.b12_ = amplitude;
    f.k_ = wavenumber;
    f.eps_ = epsilon;
    return f;
  }

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::constant; }
  double epsilon() const { return eps_; }
  double amplitude() const { return b12_; }
  double wavenumber() const { return k_; }
  // eps * B12 for constant fields.
  double strength() const { return eps_ * b12_; }
  double b12(const Vec& x) const { return is_constant() ? eps_ * b12_ : eps_ * b12_ * std::cos(k_ * x[0]); }
  MagneticField with_epsilon(double e) const {
    MagneticField f = *this;
    f.eps_ = e;
    return f;
  }
  // Flux through one cell, b |E| with the orientation of the basis.
  double flux_per_cell(const Lattice& lat) const {
    if (!is_constant()) throw ConfigError("flux per cell needs a constant field");
    return strength() * lat.oriented_volume();
  }

 private:
  Kind kind_ = Kind::constant;
  double b12_ = 0, k_ = 0, eps_ = 1;
};

// Gauge functions chi: quadratic polynomials or a single harmonic amp sin(k . x).
struct GaugeFunction {
  enum class Kind { quadratic, harmonic } kind = Kind::quadratic;
  double c1 = 0, c2 = 0, c11 = 0, c12 = 0, c22 = 0;
  double amp = 0, k1 = 0, k2 = 0;

  static GaugeFunction linear(double a, double b) { return {Kind::quadratic, a, b}; }
  static GaugeFunction quadratic(double a, double b, double aa, double ab, double bb) {
    return {Kind::quadratic, a, b, aa, ab, bb};
  }
  static GaugeFunction harmonic(double amplitude, double kx, double ky) {
    GaugeFunction g;
    g.kind = Kind::harmonic;
    g.amp = amplitude;
    g.k1 = kx;
    g.k2 = ky;
    return g;
  }
  bool is_linear() const { return kind == Kind::quadratic && c11 == 0 && c12 == 0 && c22 == 0; }
  double operator()(const Vec& x) const {
    if (kind == Kind::harmonic) return amp * std::sin(k1 * x[0] + k2 * x[1]);
    return c1 * x[0] + c2 * x[1] + c11 * x[0] * x[0] + c12 * x[0] * x[1] + c22 * x[1] * x[1];
  }
  Vec gradient(const Vec& x) const {
    Vec g(2);
    if (kind == Kind::harmonic) {
      const double c = amp * std::cos(k1 * x[0] + k2 * x[1]);
      g << c * k1, c * k2;
    } else {
      g << c1 + 2 * c11 * x[0] + c12 * x[1], c2 + c12 * x[0] + 2 * c22 * x[1];
    }
    return g;
  }
};

// A_j(x) = -sum_k x_k int_0^1 B_jk(s x) s ds.
inline Vec transversal_gauge(const MagneticField& f, const Vec& x) {
  double m;
  if (f.is_constant()) {
    m = 0.5 * f.strength();
  } else {
    m = 0;
    const auto& q = gauss16();
    for (size_t i = 0; i < q.x.size(); ++i) m += q.w[i] * q.x[i] * f.b12(Vec(q.x[i] * x));
  }
  // B12 = m-weighted, B21 = -B12
  Vec a(2);
  a << -m * x[1], m * x[0];
  return a;
}

class VectorPotential {
 public:
  explicit VectorPotential(MagneticField f, std::optional<GaugeFunction> chi = std::nullopt)
      : field_(std::move(f)), chi_(std::move(chi)) {}

  const MagneticField& field() const { return field_; }
  const std::optional<GaugeFunction>& chi() const { return chi_; }
  VectorPotential with_epsilon(double e) const { return VectorPotential(field_.with_epsilon(e), chi_); }
  VectorPotential with_chi(std::optional<GaugeFunction> c) const { return VectorPotential(field_, std::move(c)); }

  Vec operator()(const Vec& x) const {
    Vec a = transversal_gauge(field_, x);
    if (chi_) a += chi_->gradient(x);
    return a;
  }
  // Linear A = M x + c, needed by magnetic translations.
  bool linear() const { return field_.is_constant() && (!chi_ || chi_->is_linear()); }

  // int_[x,y] A, closed form where A is linear in x plus the exact gradient part.
  double line_integral(const Vec& x, const Vec& y) const {
    double v;
    if (field_.is_constant()) {
      v = 0.5 * field_.strength() * (x[0] * y[1] - x[1] * y[0]);
    } else {
      v = line_integral_quadrature(x, y, false);
    }
    if (chi_) v += (*chi_)(y) - (*chi_)(x);
    return v;
  }
  // 16-node Gauss-Legendre along the segment (optionally including the gradient part).
  double line_integral_quadrature(const Vec& x, const Vec& y, bool with_chi = true) const {
    const auto& q = gauss16();
    const Vec d = y - x;
    double v = 0;
    for (size_t i = 0; i < q.x.size(); ++i) {
      Vec p = x + q.x[i] * d;
      Vec a = transversal_gauge(field_, p);
      if (with_chi && chi_) a += chi_->gradient(p);
      v += q.w[i] * a.dot(d);
    }
    return v;
  }

 private:
  MagneticField field_;
  std::optional<GaugeFunction> chi_;
};

// omega_A(x, y) = exp(-i int_[x,y] A).
inline cplx line_phase(const VectorPotential& a, const Vec& x, const Vec& y) {
  return std::polar(1.0, -a.line_integral(x, y));
}

// Flux of B through the triangle <x-y+z, x-y-z, x+y-z> (signed by orientation).
inline double triangle_flux(const MagneticField& f, const Vec& x, const Vec& y, const Vec& z) {
  const Vec p1 = x - y + z, p2 = x - y - z, p3 = x + y - z;
  const Vec e1 = p2 - p1, e2 = p3 - p1;
  const double area = 0.5 * (e1[0] * e2[1] - e1[1] * e2[0]);
  if (f.is_constant()) return f.strength() * area;
  // Duffy map of the unit square onto the triangle, tensor Gauss rule.
  const auto& q = gauss16();
  double s = 0;
  for (size_t i = 0; i < q.x.size(); ++i)
    for (size_t j = 0; j < q.x.size(); ++j) {
      const double u = q.x[i], v = q.x[j];
      Vec p = p1 + u * (e1 + v * (e2 - e1));
      s += q.w[i] * q.w[j] * u * f.b12(p);
    }
  return 2 * area * s;
}

// e^{i <A(a), x>}, the multiplier of the magnetic translation T_a = sigma_{A(a)} tau_a.
inline cplx magnetic_translation_phase(const VectorPotential& a, const Vec& shift, const Vec& x) {
  if (!a.linear()) throw ConfigError("magnetic translations need a constant field in a linear gauge");
  return std::polar(1.0, a(shift).dot(x));
}

// Uniform box grid x = h (i_0, i_1), i_j in [0, n).  Flat index i_0 * n + i_1.
struct BoxGrid {
  int dim = 2;
  int n = 8;
  double h = 1;

  int size() const { return dim == 1 ? n : n * n; }
  Vec point(int flat) const {
    Vec x(dim);
    if (dim == 1) {
      x[0] = h * flat;
    } else {
      x << h * (flat / n), h * (flat % n);
    }
    return x;
  }
  // Discrete momenta 2 pi m / (n h), m in [-n/2, n - n/2).
  double momentum(int m) const { return two_pi * m / (n * h); }
  int m_lo() const { return -(n / 2); }
};

struct QuantizedOperator {
  BoxGrid grid;
  MatrixXcd matrix;
};

namespace detail {

inline void check_box(const BoxGrid& g) {
  if (g.n < 8) throw ConfigError("quantization box needs at least 8 points per direction");
  if (g.dim != 1 && g.dim != 2) throw ConfigError("quantization box dimension must be 1 or 2");
  if (!(g.h > 0)) throw ConfigError("box spacing must be positive");
}

inline cplx box_phase(const VectorPotential* a, const Vec& x, const Vec& y) {
  return a ? line_phase(*a, x, y) : cplx(1);
}

}  // namespace detail

// Op^A(f) for a symbol depending on momentum only: omega_A(x, y) K(x - y).
inline QuantizedOperator quantize_momentum(const std::function<double(const Vec&)>& f, const VectorPotential* a,
                                           const BoxGrid& g) {
  detail::check_box(g);
  if (a && g.dim != 2) throw ConfigError("magnetic quantization needs d = 2");
  const int n = g.n, d = g.dim, span = 2 * n - 1;
  const double norm = std::pow(static_cast<double>(n), -d);
  // K on differences delta in (-n, n) per axis.
  std::vector<cplx> k(d == 1 ? span : span * span, 0.0);
  Vec eta(d);
  for (int m0 = g.m_lo(); m0 < g.m_lo() + n; ++m0) {
    for (int m1 = (d == 2 ? g.m_lo() : 0); m1 < (d == 2 ? g.m_lo() + n : 1); ++m1) {
      eta[0] = g.momentum(m0);
      if (d == 2) eta[1] = g.momentum(m1);
      const double fv = f(eta) * norm;
      for (int a0 = 0; a0 < span; ++a0) {
        const cplx e0 = std::polar(fv, two_pi * m0 * (a0 - (n - 1)) / n);
        if (d == 1) {
          k[a0] += e0;
          continue;
        }
        for (int a1 = 0; a1 < span; ++a1) k[a0 * span + a1] += e0 * std::polar(1.0, two_pi * m1 * (a1 - (n - 1)) / n);
      }
    }
  }
  QuantizedOperator q{g, MatrixXcd(g.size(), g.size())};
  for (int i = 0; i < g.size(); ++i)
    for (int j = 0; j < g.size(); ++j) {
      int idx;
      if (d == 1) {
        idx = i - j + n - 1;
      } else {
        idx = (i / n - j / n + n - 1) * span + (i % n - j % n + n - 1);
      }
      q.matrix(i, j) = detail::box_phase(a, g.point(i), g.point(j)) * k[idx];
    }
  return q;
}

// General symbol p(x, eta), direct sum over the momentum grid (O(N^3) per dimension).
inline QuantizedOperator quantize_on_grid(const std::function<double(const Vec&, const Vec&)>& p,
                                          const VectorPotential* a, const BoxGrid& g) {
  detail::check_box(g);
  if (a && g.dim != 2) throw ConfigError("magnetic quantization needs d = 2");
  const int n = g.n, d = g.dim;
  const double norm = std::pow(static_cast<double>(n), -d);
  std::vector<Vec> etas;
  for (int m0 = g.m_lo(); m0 < g.m_lo() + n; ++m0)
    for (int m1 = (d == 2 ? g.m_lo() : 0); m1 < (d == 2 ? g.m_lo() + n : 1); ++m1) {
      Vec e(d);
      e[0] = g.momentum(m0);
      if (d == 2) e[1] = g.momentum(m1);
      etas.push_back(e);
    }
  QuantizedOperator q{g, MatrixXcd(g.size(), g.size())};
  for (int i = 0; i < g.size(); ++i)
    for (int j = 0; j < g.size(); ++j) {
      const Vec x = g.point(i), y = g.point(j), mid = 0.5 * (x + y);
      cplx s = 0;
      for (auto& e : etas) s += std::polar(p(mid, e), e.dot(x - y));
      q.matrix(i, j) = detail::box_phase(a, x, y) * s * norm;
    }
  return q;
}

// Periodic symbols: kinetic part through the momentum path, potential on the diagonal
// (the Weyl midpoint of (x, x) is x, and off-diagonal momentum sums of a constant vanish).
inline QuantizedOperator quantize_on_grid(const PeriodicSymbol& s, const VectorPotential* a, const BoxGrid& g) {
  if (s.polynomial()) return quantize_on_grid([&s](const Vec& x, const Vec& e) { return s(x, e); }, a, g);
  auto q = quantize_momentum([&s](const Vec& e) { return s.kinetic(e); }, a, g);
  for (int i = 0; i < g.size(); ++i) q.matrix(i, i) += s.potential()(g.point(i));
  return q;
}

struct SqrtComparison {
  double epsilon;
  double deviation;  // spectral norm of sqrt(M_NR) - M_R
  double min_eigenvalue;  // of M_NR
};

inline std::vector<SqrtComparison> relativistic_sqrt_compare(const VectorPotential& a, const BoxGrid& g,
                                                             const std::vector<double>& eps) {
  std::vector<SqrtComparison> out;
  for (double e : eps) {
    VectorPotential ae = a.with_epsilon(e);
    auto nr = quantize_momentum([](const Vec& k) { return 1.0 + k.squaredNorm(); }, &ae, g).matrix;
    auto rel = quantize_momentum([](const Vec& k) { return std::sqrt(1.0 + k.squaredNorm()); }, &ae, g).matrix;
    nr = 0.5 * (nr + nr.adjoint()).eval();
    auto spec = eigh(nr);
    if (spec.values[0] <= 0)
      throw NumericError("M_NR is not positive definite on the grid (min eigenvalue " +
                         std::to_string(spec.values[0]) + ")");
    MatrixXcd root = spec.vectors * spec.values.cwiseSqrt().cast<cplx>().asDiagonal() * spec.vectors.adjoint();
    MatrixXcd diff = root - rel;
    diff = 0.5 * (diff + diff.adjoint()).eval();
    out.push_back({e, spectral_norm_hermitian(diff), spec.values[0]});
  }
  return out;
}

}  // namespace peierls
