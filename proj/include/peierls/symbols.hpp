#pragma once

#include <cmath>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "lattice.hpp"
#include "linalg.hpp"

namespace peierls {

// Real Gamma-periodic function stored by its Fourier coefficients on Gamma*.
class PeriodicPotential {
 public:
  using Table = std::map<Coeffs, cplx>;

  PeriodicPotential(Lattice lat, Table coeffs, double tol = 1e-12) : lat_(std::move(lat)), coeffs_(std::move(coeffs)) {
    double scale = 0;
    for (auto& [g, v] : coeffs_) scale = std::max(scale, std::abs(v));
    for (auto& [g, v] : coeffs_) {
      if (lat_.dim() == 1 && g[1] != 0) throw ConfigError("1d potential with a 2d coefficient index");
      auto it = coeffs_.find(-g);
      cplx partner = it == coeffs_.end() ? cplx(0) : it->second;
      if (std::abs(partner - std::conj(v)) > tol * std::max(1.0, scale))
        throw ConfigError("H.6: potential coefficients lack Hermitian symmetry, V would not be real");
    }
  }

  static PeriodicPotential zero(const Lattice& lat) { return PeriodicPotential(lat, {}); }
  static PeriodicPotential constant(const Lattice& lat, double c) { return PeriodicPotential(lat, {{Coeffs{0, 0}, c}}); }
  // V(y) = 2 a cos<e*_1, y>.
  static PeriodicPotential cosine(const Lattice& lat, double a) {
    return PeriodicPotential(lat, {{Coeffs{1, 0}, a}, {Coeffs{-1, 0}, a}});
  }
  // V(y) = 2 a (cos<e*_1, y> + cos<e*_2, y>).
  static PeriodicPotential separable_cosine_2d(const Lattice& lat, double a) {
    if (lat.dim() != 2) throw ConfigError("separable_cosine_2d needs a 2d lattice");
    return PeriodicPotential(lat, {{Coeffs{1, 0}, a}, {Coeffs{-1, 0}, a}, {Coeffs{0, 1}, a}, {Coeffs{0, -1}, a}});
  }

  const Lattice& lattice() const { return lat_; }
  const Table& coeffs() const { return coeffs_; }
  cplx operator[](const Coeffs& g) const {
    auto it = coeffs_.find(g);
    return it == coeffs_.end() ? cplx(0) : it->second;
  }

  double operator()(const Vec& y) const {
    cplx s = 0;
    for (auto& [g, v] : coeffs_) s += v * std::exp(cplx(0, lat_.dual_point(g).dot(y)));
    return s.real();
  }

  // Largest |gamma*| with a nonzero coefficient.
  double support_radius() const {
    double r = 0;
    for (auto& [g, v] : coeffs_)
      if (v != cplx(0)) r = std::max(r, lat_.dual_point(g).norm());
    return r;
  }

  PeriodicPotential operator+(const PeriodicPotential& o) const {
    Table t = coeffs_;
    for (auto& [g, v] : o.coeffs_) t[g] += v;
    return PeriodicPotential(lat_, t);
  }
  PeriodicPotential scaled(double s) const {
    Table t = coeffs_;
    for (auto& [g, v] : t) v *= s;
    return PeriodicPotential(lat_, t);
  }

 private:
  Lattice lat_;
  Table coeffs_;
};

struct Nonrelativistic {};
struct Relativistic {};
struct PolyTerm {
  Coeffs power;  // multi-index alpha
  PeriodicPotential coeff;
};
struct Polynomial {
  std::vector<PolyTerm> terms;
  int order = 2;
};
using SymbolKind = std::variant<Nonrelativistic, Relativistic, Polynomial>;

inline double japanese(double r2) { return std::sqrt(1.0 + r2); }

inline double monomial(const Vec& eta, const Coeffs& alpha) {
  double v = std::pow(eta[0], alpha[0]);
  if (eta.size() > 1) v *= std::pow(eta[1], alpha[1]);
  return v;
}

// p0(y, eta) = kinetic part + V(y).
class PeriodicSymbol {
 public:
  PeriodicSymbol(SymbolKind kind, PeriodicPotential potential)
      : kind_(std::move(kind)), potential_(std::move(potential)) {
    if (auto* p = std::get_if<Polynomial>(&kind_)) {
      if (p->order <= 0) throw ConfigError("H.2: symbol order must be positive");
      if (p->order % 2 != 0) throw ConfigError("H.5: polynomial symbols must have even order");
      for (auto& t : p->terms) {
        if (t.power[0] < 0 || t.power[1] < 0 || t.power[0] + t.power[1] > p->order)
          throw ConfigError("H.2: polynomial term exceeds the declared order");
        if (dim() == 1 && t.power[1] != 0) throw ConfigError("polynomial term uses eta_2 in 1d");
      }
    }
  }

  const SymbolKind& kind() const { return kind_; }
  const PeriodicPotential& potential() const { return potential_; }
  const Lattice& lattice() const { return potential_.lattice(); }
  int dim() const { return lattice().dim(); }
  bool nonrelativistic() const { return std::holds_alternative<Nonrelativistic>(kind_); }
  bool relativistic() const { return std::holds_alternative<Relativistic>(kind_); }
  bool polynomial() const { return std::holds_alternative<Polynomial>(kind_); }

  int order() const {
    if (nonrelativistic()) return 2;
    if (relativistic()) return 1;
    return std::get<Polynomial>(kind_).order;
  }

  // Even in eta, the precondition of the conjugation construction for sections.
  bool even() const {
    if (!polynomial()) return true;
    for (auto& t : std::get<Polynomial>(kind_).terms)
      if ((t.power[0] + t.power[1]) % 2 != 0) return false;
    return true;
  }

  // Kinetic part alone at momentum k (no potential), for the diagonal kinds.
  double kinetic(const Vec& k) const {
    if (nonrelativistic()) return k.squaredNorm();
    if (relativistic()) return japanese(k.squaredNorm());
    throw ConfigError("kinetic(): polynomial symbols have position-dependent kinetic terms");
  }

  double operator()(const Vec& y, const Vec& eta) const {
    double v = potential_(y);
    if (nonrelativistic()) return eta.squaredNorm() + v;
    if (relativistic()) return japanese(eta.squaredNorm()) + v;
    for (auto& t : std::get<Polynomial>(kind_).terms) v += t.coeff(y) * monomial(eta, t.power);
    return v;
  }

  PeriodicSymbol with_potential(PeriodicPotential v) const { return PeriodicSymbol(kind_, std::move(v)); }

 private:
  SymbolKind kind_;
  PeriodicPotential potential_;
};

inline double evaluate_symbol(const PeriodicSymbol& s, const Vec& y, const Vec& eta) { return s(y, eta); }

// Samples on the uniform grid y = sum_j (i_j / M) e_j, i_j in [0, M).  For d = 2 the
// sample (i0, i1) is stored at i0 * M + i1.
inline PeriodicPotential potential_fourier_coeffs(const std::vector<double>& samples, const Lattice& lat,
                                                  const DualShell& shell) {
  const int d = lat.dim();
  const int m = d == 1 ? static_cast<int>(samples.size())
                       : static_cast<int>(std::lround(std::sqrt(static_cast<double>(samples.size()))));
  if ((d == 1 ? m : m * m) != static_cast<int>(samples.size()) || m == 0)
    throw ResolutionError("sample count is not a full tensor grid");
  int maxc = 0;
  for (auto& g : shell.members()) maxc = std::max({maxc, std::abs(g[0]), std::abs(g[1])});
  if (m < 2 * maxc + 1)
    throw ResolutionError("potential grid of " + std::to_string(m) + " points aliases shell coefficient " +
                          std::to_string(maxc));
  PeriodicPotential::Table t;
  const double norm = 1.0 / static_cast<double>(samples.size());
  for (auto& g : shell.members()) {
    cplx s = 0;
    for (int i0 = 0; i0 < m; ++i0) {
      if (d == 1) {
        s += samples[i0] * std::exp(cplx(0, -two_pi * g[0] * i0 / m));
      } else {
        for (int i1 = 0; i1 < m; ++i1)
          s += samples[i0 * m + i1] * std::exp(cplx(0, -two_pi * (g[0] * i0 + g[1] * i1) / static_cast<double>(m)));
      }
    }
    t[g] = s * norm;
  }
  // Restore exact Hermitian symmetry lost to rounding.
  for (auto& [g, v] : t) {
    auto it = t.find(-g);
    if (it != t.end() && !(it->first < g)) {
      cplx a = 0.5 * (v + std::conj(it->second));
      v = a;
      it->second = std::conj(a);
    }
  }
  return PeriodicPotential(lat, t, 1e-9);
}

struct Ellipticity {
  bool ok;
  double constant;
};

// min p0(y, eta) / |eta|^m over y on a samples^d grid of E and |eta| in [R, 10 R].
inline Ellipticity symbol_ellipticity_check(const PeriodicSymbol& s, double radius, int samples) {
  if (!(radius > 0)) throw ConfigError("ellipticity radius must be positive");
  samples = std::max(samples, 2);
  const int d = s.dim();
  const int m = s.order();
  double best = std::numeric_limits<double>::infinity();
  const int ny = d == 1 ? samples : samples * samples;
  const int ndir = d == 1 ? 2 : samples;
  for (int iy = 0; iy < ny; ++iy) {
    Vec c(d);
    c[0] = (d == 1 ? iy : iy / samples) / static_cast<double>(samples);
    if (d == 2) c[1] = (iy % samples) / static_cast<double>(samples);
    Vec y = s.lattice().basis() * c;
    for (int ir = 0; ir < samples; ++ir) {
      const double r = radius * std::pow(10.0, ir / static_cast<double>(samples - 1));
      for (int k = 0; k < ndir; ++k) {
        Vec eta(d);
        if (d == 1) {
          eta[0] = k == 0 ? r : -r;
        } else {
          const double a = two_pi * k / ndir;
          eta << r * std::cos(a), r * std::sin(a);
        }
        best = std::min(best, s(y, eta) / std::pow(r, m));
      }
    }
  }
  return {best > 0, best};
}

}  // namespace peierls
