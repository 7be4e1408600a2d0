#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "bloch.hpp"

namespace peierls {

// phi(xi + g) from phi(xi): coefficient G of the result is phi_{G+g}.  Entries that
// leave the shell are dropped.
inline VectorXcd translate_dual(const VectorXcd& v, const DualShell& shell, const Coeffs& g) {
  VectorXcd out = VectorXcd::Zero(v.size());
  for (int i = 0; i < shell.size(); ++i) {
    const int j = shell.index(shell[i] + g);
    if (j >= 0) out[i] = v[j];
  }
  return out;
}

// (C v)_G = conj(v_{-G}): complex conjugation of the periodic function in position space.
inline VectorXcd conjugate_reflect(const VectorXcd& v, const DualShell& shell) {
  VectorXcd out(v.size());
  for (int i = 0; i < shell.size(); ++i) out[i] = std::conj(v[shell.index(-shell[i])]);
  return out;
}

inline std::string describe_xi(const Vec& xi) {
  std::string s = "(";
  for (Eigen::Index j = 0; j < xi.size(); ++j) s += (j ? ", " : "") + std::to_string(xi[j]);
  return s + ")";
}

// Eigenpair of band k (0-based) at xi with the isolation checked against gap_tol.
struct BandVector {
  double energy;
  VectorXcd vector;
  double gap_below, gap_above;
};

inline BandVector band_vector(const FiberOperator& op, const Vec& xi, int k, double gap_tol = 1e-6) {
  auto e = eigh(op.matrix(xi), k + 2, true);
  BandVector b{e.values[k], e.vectors.col(k), k > 0 ? e.values[k] - e.values[k - 1] : INFINITY,
               e.values[k + 1] - e.values[k]};
  if (std::min(b.gap_below, b.gap_above) <= gap_tol)
    throw NearDegeneracyError("band " + std::to_string(k + 1) + " is not isolated at xi = " + describe_xi(xi));
  return b;
}

struct RieszProjector {
  Vec xi;
  MatrixXcd matrix;
  int band = 0;

  double idempotency_residual() const { return max_abs(matrix * matrix - matrix); }
  double hermiticity_residual() const { return hermiticity_defect(matrix); }
  double trace() const { return matrix.trace().real(); }
};

enum class ProjectionMode { outer, contour };

// Projector onto the eigenspace of band k (0-based).  `eig` must hold at least the k+2
// lowest eigenpairs of m.
inline RieszProjector riesz_projection(const FiberMatrix& m, int k, const EigenPairs& eig,
                                       ProjectionMode mode = ProjectionMode::outer, double gap_tol = 1e-6) {
  if (eig.values.size() < k + 2 || eig.vectors.cols() < k + 1)
    throw ConfigError("riesz_projection needs eigenpairs up to band k+1");
  const double below = k > 0 ? eig.values[k] - eig.values[k - 1] : INFINITY;
  const double above = eig.values[k + 1] - eig.values[k];
  if (std::min(below, above) <= gap_tol)
    throw NearDegeneracyError("band " + std::to_string(k + 1) + " is not isolated at xi = " + describe_xi(m.xi));
  RieszProjector p{m.xi, {}, k};
  if (mode == ProjectionMode::outer) {
    p.matrix = eig.vectors.col(k) * eig.vectors.col(k).adjoint();
    return p;
  }
  // -(1/2 pi i) contour integral of (H - z)^-1 over a circle around lambda_k,
  // trapezoid rule in the angle.
  const int nodes = 32;
  const double radius = 0.5 * std::min(below, above);
  const double center = eig.values[k];
  const Eigen::Index n = m.entries.rows();
  p.matrix = MatrixXcd::Zero(n, n);
  const MatrixXcd id = MatrixXcd::Identity(n, n);
  for (int j = 0; j < nodes; ++j) {
    const cplx w = std::exp(cplx(0, two_pi * (j + 0.5) / nodes));
    const cplx z = center + radius * w;
    MatrixXcd res = (m.entries - z * id).partialPivLu().solve(id);
    p.matrix -= (radius / nodes) * w * res;
  }
  return p;
}

struct PhaseLog {
  double kappa = 0;                 // holonomy of the base axis
  std::vector<double> kappa_rows;   // d = 2: kappa'(t_0) for i0 = 0..R (unwrapped)
  double row_periodicity = 0;       // |kappa'(-1/2) - kappa'(1/2)|
  double row_evenness = 0;          // max |kappa'(-t) - kappa'(t)|
};

struct BlochSection {
  BZGrid grid;
  ShellPtr shell;
  int band = 0;
  std::vector<VectorXcd> vectors;  // grid order
  std::vector<double> energies;
  // Values on the upper faces t_j = +1/2, indexed by the other coordinate.  d = 1 uses
  // edge0[0] only.
  std::vector<VectorXcd> edge0, edge1;
  std::vector<double> edge0_energy, edge1_energy;
  PhaseLog phases;

  int res() const { return grid.resolution(); }

  // Value at grid-aligned indices i in [0, R] per axis (R is the upper face).
  VectorXcd value(int i0, int i1 = 0) const {
    const int r = res();
    if (grid.dim() == 1) return i0 == r ? edge0[0] : vectors[i0];
    if (i0 == r && i1 == r) return translate_dual(edge1[0], *shell, {1, 0});
    if (i0 == r) return edge0[i1];
    if (i1 == r) return edge1[i0];
    return vectors[grid.flat(i0, i1)];
  }
  double energy(int i0, int i1 = 0) const {
    const int r = res();
    if (grid.dim() == 1) return i0 == r ? edge0_energy[0] : energies[i0];
    if (i0 == r && i1 == r) return edge1_energy[0];
    if (i0 == r) return edge0_energy[i1];
    if (i1 == r) return edge1_energy[i0];
    return energies[grid.flat(i0, i1)];
  }
  // Any integer indices, continued by the equivariance relation from the grid values.
  VectorXcd extended(int i0, int i1 = 0) const {
    const int r = res();
    auto fdiv = [r](int i) { return i >= 0 ? i / r : -((-i + r - 1) / r); };
    const int l0 = fdiv(i0), l1 = grid.dim() == 2 ? fdiv(i1) : 0;
    const VectorXcd& base = vectors[grid.flat(i0 - l0 * r, grid.dim() == 2 ? i1 - l1 * r : 0)];
    if (l0 == 0 && l1 == 0) return base;
    return translate_dual(base, *shell, {l0, l1});
  }
};

namespace detail {

inline double wrap_angle(double a) { return std::remainder(a, two_pi); }

// psi_{next} = Pi(xi) psi / |Pi(xi) psi| with Pi the rank-one projector on `target`.
inline VectorXcd transport_step(const VectorXcd& psi, const VectorXcd& target, const Vec& xi) {
  const cplx c = target.dot(psi);
  if (std::abs(c) < 0.5)
    throw TransportStepError("projection norm " + std::to_string(std::abs(c)) + " < 1/2 at xi = " + describe_xi(xi) +
                             "; refine the Brillouin-zone grid");
  return target * (c / std::abs(c));
}

// Seed with C psi = psi, from C psi = e^{if} psi.
inline VectorXcd real_seed(const VectorXcd& psi, const DualShell& shell) {
  const cplx f = psi.dot(conjugate_reflect(psi, shell));
  return psi * std::exp(cplx(0, 0.5 * std::arg(f)));
}

// arg <b, a>, the phase with a = e^{i k} b.
inline double relative_phase(const VectorXcd& a, const VectorXcd& b) { return std::arg(b.dot(a)); }

}  // namespace detail

// Parallel transport of band k (0-based) over the zone, with holonomy correction and
// conjugation symmetry built in.  `bands` must carry eigenvectors.
inline BlochSection transport_section(const FiberOperator& op, const BandStructure& bands, int k,
                                      double gap_tol = 1e-6) {
  if (!bands.has_vectors()) throw ConfigError("transport_section needs band eigenvectors");
  if (!op.symbol().even()) throw ConfigError("conjugation construction needs a symbol even in eta");
  if (k + 2 > bands.n_bands()) throw ConfigError("transport_section needs bands up to k+1 for the gap check");
  const BZGrid& grid = bands.grid;
  const int r = grid.resolution();
  if (r % 2 != 0) throw ConfigError("transport_section needs an even grid resolution");
  const DualShell& shell = *op.shell();
  const int d = grid.dim();
  const int mid = r / 2;

  auto grid_vector = [&](int i0, int i1) -> BandVector {
    const int p = grid.flat(i0, i1);
    const double below = k > 0 ? bands.values(p, k) - bands.values(p, k - 1) : INFINITY;
    const double above = bands.values(p, k + 1) - bands.values(p, k);
    if (std::min(below, above) <= gap_tol)
      throw NearDegeneracyError("band " + std::to_string(k + 1) + " is not isolated at xi = " +
                                describe_xi(grid.point(p)));
    return {bands.values(p, k), bands.vectors[p].col(k), below, above};
  };
  // Eigenvector at indices in [0, R] (R meaning the upper face).
  auto target = [&](int i0, int i1) -> BandVector {
    if (i0 < r && i1 < r) return grid_vector(i0, i1);
    return band_vector(op, grid.point_at(i0, i1), k, gap_tol);
  };

  BlochSection s{grid, op.shell(), k, std::vector<VectorXcd>(grid.size()), std::vector<double>(grid.size()),
                 {}, {}, {}, {}, {}};

  // Base axis: t_1 = 0 (or the whole zone for d = 1).
  const int base_row = d == 2 ? mid : 0;
  std::vector<VectorXcd> psi(r + 1);
  std::vector<double> en(r + 1);
  {
    auto seed = target(mid, base_row);
    psi[mid] = detail::real_seed(seed.vector, shell);
    en[mid] = seed.energy;
    for (int i = mid + 1; i <= r; ++i) {
      auto t = target(i, base_row);
      psi[i] = detail::transport_step(psi[i - 1], t.vector, grid.point_at(i, base_row));
      en[i] = t.energy;
    }
    for (int i = 0; i < mid; ++i) {
      psi[i] = conjugate_reflect(psi[r - i], shell);
      en[i] = en[r - i];
    }
  }
  const double kappa = detail::relative_phase(translate_dual(psi[0], shell, {1, 0}), psi[r]);
  s.phases.kappa = kappa;
  std::vector<VectorXcd> base(r + 1);
  for (int i = 0; i <= r; ++i) base[i] = psi[i] * std::exp(cplx(0, kappa * grid.coord(i)));

  if (d == 1) {
    for (int i = 0; i < r; ++i) {
      s.vectors[i] = base[i];
      s.energies[i] = en[i];
    }
    s.edge0 = {base[r]};
    s.edge0_energy = {en[r]};
    return s;
  }

  // Rows: transport along t_1 from the base axis, half zone, then reflect.
  std::vector<std::vector<VectorXcd>> rows(r + 1, std::vector<VectorXcd>(r + 1));
  std::vector<std::vector<double>> row_en(r + 1, std::vector<double>(r + 1));
  for (int i0 = 0; i0 <= r; ++i0) {
    rows[i0][mid] = base[i0];
    row_en[i0][mid] = en[i0];
    for (int i1 = mid + 1; i1 <= r; ++i1) {
      auto t = target(i0, i1);
      rows[i0][i1] = detail::transport_step(rows[i0][i1 - 1], t.vector, grid.point_at(i0, i1));
      row_en[i0][i1] = t.energy;
    }
  }
  for (int i0 = 0; i0 <= r; ++i0)
    for (int i1 = 0; i1 < mid; ++i1) {
      rows[i0][i1] = conjugate_reflect(rows[r - i0][r - i1], shell);
      row_en[i0][i1] = row_en[r - i0][r - i1];
    }
  std::vector<double> kp(r + 1);
  for (int i0 = 0; i0 <= r; ++i0)
    kp[i0] = detail::relative_phase(translate_dual(rows[i0][0], shell, {0, 1}), rows[i0][r]);
  // Continuous branch, unwrapped outward from t_0 = 0.
  for (int i0 = mid + 1; i0 <= r; ++i0) kp[i0] = kp[i0 - 1] + detail::wrap_angle(kp[i0] - kp[i0 - 1]);
  for (int i0 = mid - 1; i0 >= 0; --i0) kp[i0] = kp[i0 + 1] + detail::wrap_angle(kp[i0] - kp[i0 + 1]);
  s.phases.kappa_rows = kp;
  s.phases.row_periodicity = std::abs(kp[0] - kp[r]);
  for (int i0 = 0; i0 <= r; ++i0) s.phases.row_evenness = std::max(s.phases.row_evenness, std::abs(kp[i0] - kp[r - i0]));

  s.edge0.resize(r);
  s.edge1.resize(r);
  s.edge0_energy.resize(r);
  s.edge1_energy.resize(r);
  for (int i0 = 0; i0 <= r; ++i0)
    for (int i1 = 0; i1 <= r; ++i1) {
      if (i0 == r && i1 == r) continue;
      VectorXcd v = rows[i0][i1] * std::exp(cplx(0, kp[i0] * grid.coord(i1)));
      if (i0 == r) {
        s.edge0[i1] = std::move(v);
        s.edge0_energy[i1] = row_en[i0][i1];
      } else if (i1 == r) {
        s.edge1[i0] = std::move(v);
        s.edge1_energy[i0] = row_en[i0][i1];
      } else {
        s.vectors[grid.flat(i0, i1)] = std::move(v);
        s.energies[grid.flat(i0, i1)] = row_en[i0][i1];
      }
    }
  return s;
}

// Raised-cosine mollifier of half-width delta (in dual coordinates), followed by
// re-projection on the band and renormalization.
inline BlochSection smooth_section(const BlochSection& in, double delta) {
  const int r = in.res();
  if (!(delta > 0) || delta >= 0.5) throw ConfigError("mollifier width must lie in (0, 1/2)");
  const double h = delta * r;  // half-width in grid cells
  std::vector<double> w;
  const int reach = static_cast<int>(std::ceil(h));
  for (int m = -reach; m <= reach; ++m)
    w.push_back(std::abs(m) < h ? 0.5 * (1 + std::cos(std::numbers::pi * m / h)) : 0.0);
  double total = 0;
  const int d = in.grid.dim();
  for (double a : w)
    for (double b : (d == 2 ? w : std::vector<double>{1.0})) total += a * b;

  auto convolve = [&](int i0, int i1) {
    VectorXcd acc = VectorXcd::Zero(in.vectors[0].size());
    for (int m0 = -reach; m0 <= reach; ++m0) {
      const double a = w[m0 + reach];
      if (a == 0) continue;
      if (d == 1) {
        acc += a * in.extended(i0 + m0);
        continue;
      }
      for (int m1 = -reach; m1 <= reach; ++m1) {
        const double b = w[m1 + reach];
        if (b != 0) acc += (a * b) * in.extended(i0 + m0, i1 + m1);
      }
    }
    return VectorXcd(acc / total);
  };
  auto reproject = [&](const VectorXcd& raw, const VectorXcd& eig, int i0, int i1) {
    const cplx c = eig.dot(raw);
    if (std::abs(c) < 0.5)
      throw TransportStepError("mollified vector has projection norm " + std::to_string(std::abs(c)) +
                               " < 1/2 at grid index (" + std::to_string(i0) + ", " + std::to_string(i1) +
                               "); reduce the mollifier width");
    return VectorXcd(eig * (c / std::abs(c)));
  };

  BlochSection out = in;
  for (int p = 0; p < in.grid.size(); ++p) {
    auto m = in.grid.multi(p);
    out.vectors[p] = reproject(convolve(m[0], m[1]), in.vectors[p], m[0], m[1]);
  }
  for (size_t i = 0; i < in.edge0.size(); ++i)
    out.edge0[i] = reproject(convolve(r, static_cast<int>(i)), in.edge0[i], r, static_cast<int>(i));
  for (size_t i = 0; i < in.edge1.size(); ++i)
    out.edge1[i] = reproject(convolve(static_cast<int>(i), r), in.edge1[i], static_cast<int>(i), r);
  return out;
}

struct SectionReport {
  double normalization = 0;   // max | |phi| - 1 |
  double residual = 0;        // max |(H - lambda_k) phi|
  double equivariance = 0;    // across both zone faces
  double conjugation = 0;     // phi(-xi) vs C phi(xi)
  double min_overlap = 0;     // min Re <phi_i, phi_{i+1}> along grid lines
  double holonomy = 0;        // |arg(loop product) - kappa| over all lines
};

inline SectionReport check_section(const BlochSection& s, const FiberOperator& op) {
  SectionReport rep;
  rep.min_overlap = INFINITY;
  const int r = s.res();
  const int d = s.grid.dim();
  const DualShell& shell = *s.shell;
  const int n1 = d == 2 ? r : 0;
  for (int i0 = 0; i0 <= r; ++i0)
    for (int i1 = 0; i1 <= n1; ++i1) {
      if (d == 2 && i0 == r && i1 == r) continue;
      VectorXcd v = s.value(i0, i1);
      rep.normalization = std::max(rep.normalization, std::abs(v.norm() - 1.0));
      MatrixXcd h = op.matrix(s.grid.point_at(i0, i1));
      rep.residual = std::max(rep.residual, (h * v - s.energy(i0, i1) * v).norm());
      // mirror point -xi
      VectorXcd mirror = s.value(r - i0, d == 2 ? r - i1 : 0);
      rep.conjugation = std::max(rep.conjugation, (mirror - conjugate_reflect(v, shell)).norm());
    }
  // faces
  for (int i = 0; i < (d == 2 ? r : 1); ++i) {
    if (d == 1) {
      rep.equivariance = (s.value(r) - translate_dual(s.value(0), shell, {1, 0})).norm();
      break;
    }
    rep.equivariance = std::max(rep.equivariance, (s.value(r, i) - translate_dual(s.value(0, i), shell, {1, 0})).norm());
    rep.equivariance = std::max(rep.equivariance, (s.value(i, r) - translate_dual(s.value(i, 0), shell, {0, 1})).norm());
  }
  // Lines: overlaps, and on transport lines the loop product against the recorded holonomy.
  auto line = [&](auto at, const double* kappa) {
    cplx loop = 1;
    for (int i = 0; i < r; ++i) {
      const cplx o = at(i).dot(at(i + 1));
      rep.min_overlap = std::min(rep.min_overlap, o.real());
      loop *= o;
    }
    if (kappa) rep.holonomy = std::max(rep.holonomy, std::abs(detail::wrap_angle(std::arg(loop) - *kappa)));
  };
  if (d == 1) {
    line([&](int i) { return s.value(i); }, &s.phases.kappa);
  } else {
    for (int i1 = 0; i1 <= r; ++i1)
      line([&](int i) { return s.value(i, i1); }, i1 == r / 2 ? &s.phases.kappa : nullptr);
    for (int i0 = 0; i0 <= r; ++i0) line([&](int i) { return s.value(i0, i); }, &s.phases.kappa_rows[i0]);
  }
  return rep;
}

}  // namespace peierls
