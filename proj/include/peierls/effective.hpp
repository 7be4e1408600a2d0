#pragma once

#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "magnetic.hpp"
#include "spectra.hpp"

namespace peierls {

// Exact flux per cell / 2 pi.
struct RationalFlux {
  long p = 0;
  long q = 1;
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
};

inline RationalFlux parse_flux(const std::string& s) {
  const auto slash = s.find('/');
  try {
    size_t used = 0;
    RationalFlux f;
    if (slash == std::string::npos) {
      f.p = std::stol(s, &used);
      if (used != s.size()) throw ConfigError("");
    } else {
      f.p = std::stol(s.substr(0, slash), &used);
      if (used != slash) throw ConfigError("");
      const std::string den = s.substr(slash + 1);
      f.q = std::stol(den, &used);
      if (used != den.size()) throw ConfigError("");
    }
    if (f.q <= 0) throw ConfigError("");
    return f;
  } catch (const std::exception&) {
    throw ConfigError("flux must be an exact rational 'p/q' with q > 0, got '" + s + "'");
  }
}

// Fourier coefficients q^_alpha of a Gamma*-periodic N x N symbol, alpha in Gamma with
// |alpha_j| <= radius in lattice coordinates.
struct HoppingSet {
  Lattice lattice = Lattice::square(1);
  int n = 1;
  int radius = 0;
  std::string tag;
  std::map<Coeffs, MatrixXcd> hoppings;
  double asymmetry = 0;  // before symmetrization

  int dim() const { return lattice.dim(); }
  MatrixXcd at(const Coeffs& a) const {
    auto it = hoppings.find(a);
    return it == hoppings.end() ? MatrixXcd::Zero(n, n) : it->second;
  }
  // sum_alpha q^_alpha e^{i <xi, alpha>}
  MatrixXcd resum(const Vec& xi) const {
    MatrixXcd m = MatrixXcd::Zero(n, n);
    for (auto& [a, h] : hoppings) m += std::polar(1.0, xi.dot(lattice.point(a))) * h;
    return m;
  }
  HoppingSet scaled(double s) const {
    HoppingSet r = *this;
    for (auto& [a, h] : r.hoppings) h *= s;
    return r;
  }
  // adds c * identity to the on-site block
  HoppingSet shifted(double c) const {
    HoppingSet r = *this;
    auto& h0 = r.hoppings[{0, 0}];
    if (h0.size() == 0) h0 = MatrixXcd::Zero(n, n);
    h0 += c * MatrixXcd::Identity(n, n);
    return r;
  }
};

inline HoppingSet fourier_hoppings(const BZGrid& grid, const std::vector<MatrixXcd>& values, int radius,
                                   std::string tag = {}) {
  const int r = grid.resolution(), d = grid.dim();
  if (static_cast<int>(values.size()) != grid.size()) throw ConfigError("one symbol value per grid point required");
  if (radius < 0) throw ConfigError("hopping radius must be nonnegative");
  if (r < 2 * radius + 1)
    throw ResolutionError("grid resolution " + std::to_string(r) + " aliases hopping radius " + std::to_string(radius) +
                          " (need >= " + std::to_string(2 * radius + 1) + ")");
  const int n = static_cast<int>(values[0].rows());
  HoppingSet h;
  h.lattice = grid.lattice();
  h.n = n;
  h.radius = radius;
  h.tag = std::move(tag);
  const int r1 = d == 2 ? radius : 0;
  const double norm = 1.0 / grid.size();
  for (int a0 = -radius; a0 <= radius; ++a0)
    for (int a1 = -r1; a1 <= r1; ++a1) {
      Coeffs a{a0, a1};
      MatrixXcd s = MatrixXcd::Zero(n, n);
      for (int p = 0; p < grid.size(); ++p) {
        const Vec t = grid.coords_of(p);
        double ph = t[0] * a0 + (d == 2 ? t[1] * a1 : 0.0);
        s += std::polar(norm, -two_pi * ph) * values[p];
      }
      h.hoppings[a] = s;
    }
  for (auto& [a, m] : h.hoppings) h.asymmetry = std::max(h.asymmetry, max_abs(m - h.hoppings.at(-a).adjoint()));
  if (h.asymmetry > 1e-6)
    throw InconsistentSymbolError("symbol is not Hermitian: hopping asymmetry " + std::to_string(h.asymmetry));
  auto sym = h.hoppings;
  for (auto& [a, m] : sym) m = 0.5 * (h.hoppings.at(a) + h.hoppings.at(-a).adjoint());
  h.hoppings = std::move(sym);
  return h;
}

inline HoppingSet fourier_hoppings(const BZGrid& grid, const std::vector<double>& values, int radius,
                                   std::string tag = {}) {
  std::vector<MatrixXcd> m;
  m.reserve(values.size());
  for (double v : values) m.push_back(MatrixXcd::Constant(1, 1, v));
  return fourier_hoppings(grid, m, radius, std::move(tag));
}

// Hoppings of the band function lambda_k itself; lambda - lambda_k is shifted(lambda) of scaled(-1).
inline HoppingSet band_hoppings(const BandStructure& b, int k, int radius) {
  if (k < 0 || k >= b.n_bands()) throw ConfigError("band index out of range");
  std::vector<double> v(b.values.rows());
  for (Eigen::Index p = 0; p < b.values.rows(); ++p) v[p] = b.values(p, k);
  return fourier_hoppings(b.grid, v, radius, "lambda_" + std::to_string(k + 1));
}

struct DecayFit {
  int k = 4;
  double constant = 0;  // max_alpha |q^_alpha| <alpha>^k
  double max_norm = 0;
};

inline DecayFit decay_fit(const HoppingSet& h, int k = 4) {
  DecayFit f;
  f.k = k;
  for (auto& [a, m] : h.hoppings) {
    const double nrm = m.norm();
    const double bracket = std::sqrt(1.0 + static_cast<double>(a[0]) * a[0] + static_cast<double>(a[1]) * a[1]);
    f.max_norm = std::max(f.max_norm, nrm);
    f.constant = std::max(f.constant, nrm * std::pow(bracket, k));
  }
  return f;
}

struct EffectiveMode {
  enum class Kind { box, magnetic_bloch } kind = Kind::box;
  int box = 0;          // sites with |c_j| <= box
  RationalFlux flux{};  // magnetic_bloch only

  static EffectiveMode make_box(int l) { return {Kind::box, l, {}}; }
  static EffectiveMode magnetic_bloch(RationalFlux f) { return {Kind::magnetic_bloch, 0, f}; }
};

class EffectiveLatticeOperator {
 public:
  EffectiveLatticeOperator(HoppingSet h, std::optional<VectorPotential> a, EffectiveMode mode)
      : h_(std::move(h)), a_(std::move(a)), mode_(mode) {
    if (a_) {
      if (h_.dim() != 2) throw ConfigError("a magnetic field needs a 2d lattice");
      if (!a_->field().is_constant()) throw ConfigError("the lattice reduction needs a constant field");
    }
    if (mode_.kind == EffectiveMode::Kind::box) {
      if (mode_.box < h_.radius)
        throw ConfigError("box half-width " + std::to_string(mode_.box) + " is smaller than the hopping radius " +
                          std::to_string(h_.radius));
      const int l = mode_.box, l1 = h_.dim() == 2 ? l : 0;
      for (int i = -l; i <= l; ++i)
        for (int j = -l1; j <= l1; ++j) sites_.push_back({i, j});
    } else {
      if (h_.dim() != 2 && (mode_.flux.p != 0 || a_))
        throw ConfigError("magnetic_bloch mode with a field needs a 2d lattice");
      if (mode_.flux.q < 1) throw ConfigError("flux denominator must be positive");
      const double phi = a_ ? a_->field().flux_per_cell(h_.lattice) / two_pi : 0.0;
      if (std::abs(phi - mode_.flux.value()) > 1e-12 * std::max(1.0, std::abs(phi)))
        throw ConfigError("field flux per cell / 2pi = " + std::to_string(phi) + " does not equal the declared " +
                          std::to_string(mode_.flux.p) + "/" + std::to_string(mode_.flux.q));
      if (a_ && a_->chi() && !a_->chi()->is_linear()) throw ConfigError("magnetic_bloch mode needs a linear gauge");
    }
  }

  const HoppingSet& hoppings() const { return h_; }
  const EffectiveMode& mode() const { return mode_; }
  const std::optional<VectorPotential>& potential() const { return a_; }
  const std::vector<Coeffs>& sites() const { return sites_; }
  int block() const { return h_.n; }

  // omega_A(-gamma, -alpha) q^_{gamma - alpha}
  MatrixXcd entry(const Coeffs& g, const Coeffs& a) const {
    MatrixXcd m = h_.at(g - a);
    if (a_) m *= line_phase(*a_, -h_.lattice.point(g), -h_.lattice.point(a));
    return m;
  }

  MatrixXcd box_matrix() const {
    if (mode_.kind != EffectiveMode::Kind::box) throw ConfigError("box_matrix needs box mode");
    const int s = static_cast<int>(sites_.size()), n = h_.n;
    MatrixXcd m = MatrixXcd::Zero(s * n, s * n);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) {
        const Coeffs d = sites_[i] - sites_[j];
        if (std::abs(d[0]) > h_.radius || std::abs(d[1]) > h_.radius) continue;
        m.block(i * n, j * n, n, n) = entry(sites_[i], sites_[j]);
      }
    return m;
  }

  // Magnetic-Bloch matrix for k1 in [0, 2 pi / q), k2 in [0, 2 pi).  After the gauge change
  // u(m) -> e^{i pi phi m1 m2} u(m) the hoppings depend on m1 mod q only.
  MatrixXcd bloch_matrix(double k1, double k2) const {
    if (mode_.kind != EffectiveMode::Kind::magnetic_bloch) throw ConfigError("bloch_matrix needs magnetic_bloch mode");
    const long q = mode_.flux.q;
    const int n = h_.n;
    const double phi = mode_.flux.value();
    MatrixXcd m = MatrixXcd::Zero(q * n, q * n);
    for (auto& [d, hop] : h_.hoppings) {
      cplx gauge = 1;
      if (a_ && a_->chi()) gauge = std::polar(1.0, (*a_->chi())(-h_.lattice.point(d)) - (*a_->chi())(Vec::Zero(2)));
      const cplx bloch = std::polar(1.0, -(k1 * d[0] + k2 * d[1]));
      for (long a = 0; a < q; ++a) {
        const long b = (((a - d[0]) % q) + q) % q;
        const double ph = two_pi * phi * a * d[1] - std::numbers::pi * phi * d[0] * d[1];
        m.block(a * n, b * n, n, n) += gauge * bloch * std::polar(1.0, ph) * hop;
      }
    }
    return m;
  }

  // max |entry(m + s, n + s) - D(m) entry(m, n) conj(D(n))| over a patch, D(m) = e^{i <A(s), m>}
  double translation_residual(const Coeffs& s, int patch) const {
    if (!a_) return 0;
    const Vec shift = h_.lattice.point(s);
    const Vec as = transversal_gauge(a_->field(), shift);
    double r = 0;
    for (int m0 = -patch; m0 <= patch; ++m0)
      for (int m1 = -patch; m1 <= patch; ++m1)
        for (auto& [d, hop] : h_.hoppings) {
          const Coeffs m{m0, m1}, n = m - d;
          const cplx dm = std::polar(1.0, as.dot(h_.lattice.point(m)));
          const cplx dn = std::polar(1.0, as.dot(h_.lattice.point(n)));
          r = std::max(r, max_abs(entry(m + s, n + s) - dm * std::conj(dn) * entry(m, n)));
        }
    return r;
  }

 private:
  HoppingSet h_;
  std::optional<VectorPotential> a_;
  EffectiveMode mode_;
  std::vector<Coeffs> sites_;
};

inline EffectiveLatticeOperator assemble_effective(HoppingSet h, std::optional<VectorPotential> a, EffectiveMode mode) {
  return EffectiveLatticeOperator(std::move(h), std::move(a), mode);
}

// Constant field with the given exact flux per cell / 2 pi.
inline MagneticField field_for_flux(const Lattice& lat, RationalFlux f) {
  if (lat.dim() != 2) throw ConfigError("flux needs a 2d lattice");
  return MagneticField::constant(two_pi * f.value() / lat.oriented_volume());
}

// Magnetic Brillouin zone sample: k1 = (2 pi / q)(i / nk), k2 = 2 pi j / nk (k2 = 0 when d = 1).
inline std::vector<std::array<double, 2>> magnetic_k_grid(long q, int nk, int dim = 2) {
  if (nk < 1) throw ConfigError("k-grid size must be positive");
  std::vector<std::array<double, 2>> ks;
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < (dim == 2 ? nk : 1); ++j)
      ks.push_back({two_pi * i / (q * static_cast<double>(nk)), two_pi * j / nk});
  return ks;
}

// Sorted eigenvalues of the operator: box matrix (one row) or one row per magnetic k point.
inline std::vector<VectorXd> effective_eigenvalues(const EffectiveLatticeOperator& op, int nk) {
  std::vector<VectorXd> out;
  if (op.mode().kind == EffectiveMode::Kind::box) {
    out.push_back(eigvalsh(op.box_matrix()));
    return out;
  }
  for (auto& k : magnetic_k_grid(op.mode().flux.q, nk, op.hoppings().dim())) out.push_back(eigvalsh(op.bloch_matrix(k[0], k[1])));
  return out;
}

inline SpectrumSet effective_spectrum(const EffectiveLatticeOperator& op, Interval window, int nk, double merge_tol) {
  std::vector<double> pts;
  for (auto& row : effective_eigenvalues(op, nk)) pts.insert(pts.end(), row.data(), row.data() + row.size());
  return SpectrumSet(pts, window, merge_tol);
}

struct ScanPoint {
  double lambda;
  double margin;
};

struct LambdaScan {
  std::vector<ScanPoint> points;
  double tolerance = 0;
  // runs of grid points with margin <= tolerance; on the linear path the margin is a distance
  // function, so each sample also clears the ball of radius margin - tolerance around it
  std::vector<Interval> reconstructed;
};

inline std::vector<double> lambda_grid(Interval window, int count) {
  if (count < 2) throw ConfigError("lambda grid needs at least 2 points");
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = window.lo + window.width() * i / (count - 1);
  return g;
}

namespace detail {

// Sorted eigenvalue branches are continuous in k: a sign change of one branch between
// neighbouring k points means 0 is attained in between.
inline double scan_margin(const std::vector<VectorXd>& rows, int nk, bool periodic_grid, double shift) {
  double m = std::numeric_limits<double>::infinity();
  for (auto& r : rows)
    for (Eigen::Index j = 0; j < r.size(); ++j) m = std::min(m, std::abs(shift - r[j]));
  if (m == 0 || !periodic_grid) return m;
  const int n2 = static_cast<int>(rows.size()) / nk;
  auto crosses = [&](const VectorXd& a, const VectorXd& b) {
    for (Eigen::Index j = 0; j < a.size(); ++j)
      if ((shift - a[j]) * (shift - b[j]) <= 0) return true;
    return false;
  };
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < n2; ++j) {
      const auto& a = rows[i * n2 + j];
      if (crosses(a, rows[((i + 1) % nk) * n2 + j])) return 0;
      if (n2 > 1 && crosses(a, rows[i * n2 + (j + 1) % n2])) return 0;
    }
  return m;
}

inline LambdaScan finish_scan(LambdaScan s) {
  for (size_t i = 0; i < s.points.size(); ++i) {
    if (s.points[i].margin > s.tolerance) continue;
    const double l = s.points[i].lambda;
    if (i > 0 && s.points[i - 1].margin <= s.tolerance && !s.reconstructed.empty()) {
      s.reconstructed.back().hi = l;
    } else {
      s.reconstructed.push_back({l, l});
    }
  }
  return s;
}

// margin is 1-Lipschitz here: keep whatever no sample excludes.
inline LambdaScan finish_scan_distance(LambdaScan s) {
  if (s.points.empty()) return s;
  std::vector<Interval> cut;
  for (auto& p : s.points) {
    const double r = p.margin - s.tolerance;
    if (r > 0) cut.push_back({p.lambda - r, p.lambda + r});
  }
  std::sort(cut.begin(), cut.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  double at = s.points.front().lambda;
  const double end = s.points.back().lambda;
  for (auto& c : cut) {
    if (c.lo >= at && at <= end) s.reconstructed.push_back({at, std::min(c.lo, end)});
    at = std::max(at, c.hi);
  }
  if (at <= end) s.reconstructed.push_back({at, end});
  return s;
}

}  // namespace detail

// E_-+ = lambda - H with H the Peierls operator of a band: eigenvalues are computed once and
// margin(lambda) = min |lambda - spec| with the sign-change refinement along k.
inline LambdaScan lambda_scan(const EffectiveLatticeOperator& band_op, const std::vector<double>& lambdas, int nk,
                              double tolerance) {
  const auto rows = effective_eigenvalues(band_op, nk);
  const bool periodic = band_op.mode().kind == EffectiveMode::Kind::magnetic_bloch;
  LambdaScan s;
  s.tolerance = tolerance;
  for (double l : lambdas) s.points.push_back({l, detail::scan_margin(rows, nk, periodic, l)});
  return detail::finish_scan_distance(std::move(s));
}

// General E_-+(lambda) from a hopping factory: margin = min |eig| over the k grid.
inline LambdaScan lambda_scan(const std::function<HoppingSet(double)>& factory, const std::optional<VectorPotential>& a,
                              EffectiveMode mode, const std::vector<double>& lambdas, int nk, double tolerance) {
  LambdaScan s;
  s.tolerance = tolerance;
  for (double l : lambdas) {
    EffectiveLatticeOperator op(factory(l), a, mode);
    const auto rows = effective_eigenvalues(op, nk);
    s.points.push_back({l, detail::scan_margin(rows, nk, mode.kind == EffectiveMode::Kind::magnetic_bloch, 0.0)});
  }
  return detail::finish_scan(std::move(s));
}

inline SpectrumSet reconstructed_spectrum(const LambdaScan& s, Interval window, double merge_tol) {
  return SpectrumSet::from_intervals(s.reconstructed, window, merge_tol);
}

// Subband groups: clusters of per-branch ranges that overlap by more than tol (touching
// branches, as at the Dirac points of even q, stay separate).
inline int count_subband_groups(const std::vector<VectorXd>& rows, double tol = 1e-9) {
  if (rows.empty() || rows[0].size() == 0) return 0;
  std::vector<Interval> branch(rows[0].size(), {std::numeric_limits<double>::infinity(),
                                                -std::numeric_limits<double>::infinity()});
  for (auto& r : rows)
    for (Eigen::Index j = 0; j < r.size(); ++j) {
      branch[j].lo = std::min(branch[j].lo, r[j]);
      branch[j].hi = std::max(branch[j].hi, r[j]);
    }
  int groups = 1;
  double hi = branch[0].hi;
  for (size_t j = 1; j < branch.size(); ++j) {
    if (branch[j].lo > hi - tol) ++groups;
    hi = std::max(hi, branch[j].hi);
  }
  return groups;
}

}  // namespace peierls
