#pragma once

#include <fftw3.h>

#include <Eigen/Sparse>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "effective.hpp"

namespace peierls {

// Periodic spectral -d^2/ds^2 on n points of spacing h, applied by FFT.
class CirculantLaplacian {
 public:
  CirculantLaplacian(int n, double h) : n_(n), mult_(n) {
    buf_ = fftw_alloc_complex(n);
    fwd_ = fftw_plan_dft_1d(n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(n, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    const double len = n * h;
    for (int m = 0; m < n; ++m) {
      const double k = two_pi * (m <= n / 2 ? m : m - n) / len;
      mult_[m] = k * k / n;
      top_ = std::max(top_, k * k);
    }
  }
  ~CirculantLaplacian() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }
  CirculantLaplacian(const CirculantLaplacian&) = delete;
  CirculantLaplacian& operator=(const CirculantLaplacian&) = delete;

  void apply(const cplx* in, cplx* out) const {
    auto* b = reinterpret_cast<cplx*>(buf_);
    std::copy(in, in + n_, b);
    fftw_execute(fwd_);
    for (int m = 0; m < n_; ++m) b[m] *= mult_[m];
    fftw_execute(bwd_);
    std::copy(b, b + n_, out);
  }
  double top() const { return top_; }

 private:
  int n_;
  std::vector<double> mult_;
  double top_ = 0;
  fftw_complex* buf_;
  fftw_plan fwd_, bwd_;
};

// 2^a 3^b 5^c 7^d at or above n.
inline int fft_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int f : {2, 3, 5, 7})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

struct DirectMode {
  enum class Kind { zero_field_bloch, magnetic_bloch, box } kind = Kind::zero_field_bloch;
  // zero_field_bloch: plane-wave shell and BZ grid of the bloch solver
  double cutoff = 8;
  // magnetic_bloch: exact flux per cell / 2 pi and grid points per lattice period
  RationalFlux flux{};
  int ppc = 16;
  double line_tol = 1e-9;  // allowed eigenvalue change when the line grows by one magnetic cell
  // box: n points per direction with spacing h, Dirichlet walls
  int n = 0;
  double h = 0;

  static DirectMode zero_field(double cutoff) {
    DirectMode m;
    m.cutoff = cutoff;
    return m;
  }
  static DirectMode magnetic(RationalFlux f, int ppc = 16) {
    DirectMode m;
    m.kind = Kind::magnetic_bloch;
    m.flux = f;
    m.ppc = ppc;
    return m;
  }
  static DirectMode make_box(int n, double h) {
    DirectMode m;
    m.kind = Kind::box;
    m.n = n;
    m.h = h;
    return m;
  }
};

// One sample of the magnetic Brillouin zone.  For magnetic_bloch: theta = k1 q L1 in [0, 2 pi)
// and k2 in units of 2 pi / L2 within [0, 1/q).  For zero-field modes: dual coordinates t.
struct KPoint {
  double a = 0, b = 0;
};

// Full magnetic Hamiltonian P_eps = Op^{eps A}(p) discretized directly.
//
// magnetic_bloch (d = 2, rectangular lattice, flux p/q per cell): Landau gauge A = (0, b x1),
// magnetic cell of q periods along x1.  Fourier modes n in x2 are unfolded as n = r + p j,
// f_n(x1) = e^{i theta j} F_r(x1 - j q L1), which turns the cell into p functions on a line
// with harmonic confinement (kappa_r - b s)^2; x2-harmonics of V become shifts by q L1.
// With p = 0 the same mode is a pseudo-spectral Bloch grid of ppc points per period.
class DirectDiscretization {
 public:
  DirectDiscretization(PeriodicSymbol symbol, std::optional<MagneticField> field, DirectMode mode)
      : symbol_(std::move(symbol)), field_(std::move(field)), mode_(mode) {
    if (symbol_.polynomial()) throw ConfigError("direct solver supports nonrelativistic and relativistic symbols");
    if (field_ && !field_->is_constant() && mode_.kind != DirectMode::Kind::box)
      throw ConfigError("magnetic_bloch mode needs a constant field");
    const Lattice& lat = symbol_.lattice();
    switch (mode_.kind) {
      case DirectMode::Kind::zero_field_bloch:
        if (field_ && field_->strength() != 0) throw ConfigError("zero_field_bloch mode with a nonzero field");
        shell_ = make_shell(lat, mode_.cutoff);
        break;
      case DirectMode::Kind::magnetic_bloch:
        setup_magnetic();
        break;
      case DirectMode::Kind::box:
        setup_box();
        break;
    }
  }

  const DirectMode& mode() const { return mode_; }
  const PeriodicSymbol& symbol() const { return symbol_; }
  double field_strength() const { return b_; }

  // Sample of the (magnetic) Brillouin zone used by direct_spectrum.
  std::vector<KPoint> k_grid(int nk) const {
    std::vector<KPoint> ks;
    if (mode_.kind == DirectMode::Kind::box) return {KPoint{}};
    const int d = symbol_.dim();
    if (mode_.kind == DirectMode::Kind::magnetic_bloch && mode_.flux.p != 0) {
      for (int i = 0; i < nk; ++i)
        for (int j = 0; j < nk; ++j) ks.push_back({two_pi * i / nk, static_cast<double>(j) / (nk * mode_.flux.q)});
      return ks;
    }
    for (int i = 0; i < nk; ++i)
      for (int j = 0; j < (d == 2 ? nk : 1); ++j) ks.push_back({-0.5 + static_cast<double>(i) / nk, -0.5 + static_cast<double>(j) / nk});
    return ks;
  }

  MatrixXcd matrix(const KPoint& k = {}) const {
    switch (mode_.kind) {
      case DirectMode::Kind::zero_field_bloch:
        return FiberOperator(symbol_, shell_).matrix(xi_of(k));
      case DirectMode::Kind::magnetic_bloch:
        if (mode_.flux.p == 0) return pseudo_spectral(k);
        ensure_line();
        return landau_line(k);
      case DirectMode::Kind::box:
        return box_matrix();
    }
    return {};
  }

  // Every eigenvalue below `upper` at k, ascending (rank-aligned across k).
  VectorXd eigenvalues_below(const KPoint& k, double upper) const {
    if (mode_.kind == DirectMode::Kind::box && box_sparse_.rows() > 1600) return box_lowest(upper);
    reserve_energy(upper);
    if (mode_.kind == DirectMode::Kind::magnetic_bloch && mode_.flux.p != 0) {
      ensure_line();
      return line_below(k, upper);
    }
    return eigvalsh_range(matrix(k), lower_bound() - 1.0, upper);
  }

  // Lower bound of the spectrum: kinetic >= 0 (or 1) plus the smallest potential value.
  double lower_bound() const {
    double v = 0;
    for (auto& [g, a] : symbol_.potential().coeffs()) v -= std::abs(a);
    return v + (symbol_.relativistic() ? 1.0 : 0.0);
  }

  int dimension() const {
    switch (mode_.kind) {
      case DirectMode::Kind::zero_field_bloch:
        return shell_->size();
      case DirectMode::Kind::magnetic_bloch:
        if (mode_.flux.p == 0) return static_cast<int>(std::pow(mode_.ppc, symbol_.dim()));
        ensure_line();
        return static_cast<int>(mode_.flux.p) * ns_;
      case DirectMode::Kind::box:
        return static_cast<int>(box_sparse_.rows());
    }
    return 0;
  }

  // Energies whose eigenfunctions must fit in the line; fixes its length.
  void reserve_energy(double e) const {
    if (mode_.kind == DirectMode::Kind::magnetic_bloch && mode_.flux.p != 0 && e > reserved_) {
      reserved_ = e;
      size_line();
    }
  }

 private:
  Vec xi_of(const KPoint& k) const {
    Vec t(symbol_.dim());
    t[0] = k.a;
    if (t.size() == 2) t[1] = k.b;
    return symbol_.lattice().from_dual_coords(t);
  }

  void check_rectangular() const {
    const Mat& e = symbol_.lattice().basis();
    if (e.cols() == 2 && (e(0, 1) != 0 || e(1, 0) != 0))
      throw ConfigError("magnetic_bloch and box modes need a rectangular lattice");
  }

  void setup_magnetic() {
    const Lattice& lat = symbol_.lattice();
    check_rectangular();
    if (mode_.ppc < 16) throw ConfigError("grid too coarse: " + std::to_string(mode_.ppc) + " points per cell (need >= 16)");
    if (mode_.flux.q < 1) throw ConfigError("flux denominator must be positive");
    const double phi = field_ ? field_->flux_per_cell(lat) / two_pi : 0.0;
    if (std::abs(phi - mode_.flux.value()) > 1e-12 * std::max(1.0, std::abs(phi)))
      throw ConfigError("field flux per cell / 2pi = " + std::to_string(phi) + " does not equal the declared " +
                        std::to_string(mode_.flux.p) + "/" + std::to_string(mode_.flux.q));
    if (mode_.flux.p == 0) return;
    if (lat.dim() != 2) throw ConfigError("a magnetic field needs d = 2");
    // B -> -B is complex conjugation; V is real so the spectrum does not change
    if (mode_.flux.p < 0) mode_.flux.p = -mode_.flux.p;
    l1_ = lat.basis()(0, 0);
    l2_ = lat.basis()(1, 1);
    b_ = two_pi * mode_.flux.value() / (l1_ * l2_);
    h_ = l1_ / mode_.ppc;
    reserved_ = -std::numeric_limits<double>::infinity();
    ns_ = 0;
  }

  void ensure_line() const {
    if (ns_ == 0) size_line();
  }

  // Line length.  Start from the classical turning point of the reserved energy, then add one
  // magnetic cell per side until the eigenvalues below it stop moving.  The tails are not
  // cyclotron tails: far along the line lives the high x2-momentum content of the state.
  void size_line() const {
    const double e = std::max(reserved_, lower_bound() + 1.0);
    const double ell = 1.0 / std::sqrt(b_);
    const double ekin = symbol_.relativistic() ? std::pow(e - lower_bound() + 1.0, 2) : e - lower_bound();
    const double cell = mode_.flux.q * l1_;
    double half = std::sqrt(ekin) / b_ + 4 * ell;
    set_line(half);
    const KPoint probe{1.0, 0.37 / mode_.flux.q};
    VectorXd prev = line_below(probe, e);
    for (int step = 0; step < 64; ++step) {
      half += cell;
      set_line(half);
      VectorXd next = line_below(probe, e);
      const bool same = next.size() == prev.size() && (next.size() == 0 || (next - prev).cwiseAbs().maxCoeff() <= mode_.line_tol);
      if (same) return;
      prev = std::move(next);
    }
    throw NumericError("Landau-gauge line did not converge");
  }

  void set_line(double half) const {
    const double span = mode_.flux.q * l1_;
    ns_ = fft_size(static_cast<int>(std::ceil((2 * half + span) / h_)));
    kinetic_line_.resize(0, 0);
    laplacian_ = std::make_shared<const CirculantLaplacian>(ns_, h_);
  }

  static Eigen::MatrixXd spectral_second_derivative(int n, double h) {
    std::vector<double> t(n, 0.0);
    const double len = n * h;
    for (int d = 0; d < n; ++d) {
      double s = 0;
      for (int m = -(n / 2); m <= n / 2; ++m) {
        double w = (n % 2 == 0 && std::abs(m) == n / 2) ? 0.5 : 1.0;
        const double k = two_pi * m / len;
        s += w * k * k * std::cos(two_pi * m * d / n);
      }
      t[d] = s / n;
    }
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = t[std::abs(i - j)];
    return m;
  }

  // Per-k pieces of the line operator: confinement diagonal and the V couplings, each a
  // shift by `off` grid points from block rs to block rt with a phase e^{i g0 G1 s}.
  struct LineTerms {
    VectorXd diag;
    struct Hop {
      long rt, rs, off;
      cplx amp;
      int g0;
    };
    std::vector<Hop> hops;
    std::map<int, VectorXcd> phase;
    double vsum = 0;
  };

  LineTerms line_terms(const KPoint& k) const {
    const long p = mode_.flux.p, q = mode_.flux.q;
    const int n = ns_;
    const double theta = k.a;
    // orbit centres kappa_r / b, kappa_r = (2 pi / L2)(k2 + r)
    std::vector<double> kappa(p);
    for (long r = 0; r < p; ++r) kappa[r] = two_pi / l2_ * (k.b + r);
    const double mid = 0.5 * (kappa.front() + kappa.back()) / b_;
    const long j_lo = static_cast<long>(std::floor(mid / h_)) - n / 2;
    VectorXd s(n);
    for (int i = 0; i < n; ++i) s[i] = (j_lo + i) * h_;

    LineTerms t;
    t.diag.resize(p * n);
    for (long r = 0; r < p; ++r)
      for (int i = 0; i < n; ++i) t.diag[r * n + i] = std::pow(kappa[r] - b_ * s[i], 2);
    const long shift = q * mode_.ppc;
    const double g1_unit = two_pi / l1_;
    for (auto& [g, v] : symbol_.potential().coeffs()) {
      if (v == cplx(0)) continue;
      t.vsum += std::abs(v);
      if (!t.phase.count(g[0])) t.phase[g[0]] = (s * (g1_unit * g[0])).unaryExpr([](double x) { return std::polar(1.0, x); });
      for (long rt = 0; rt < p; ++rt) {
        const long diff = rt - g[1];
        const long dj = diff >= 0 ? diff / p : -((-diff + p - 1) / p);
        t.hops.push_back({rt, diff - dj * p, shift * dj, v * std::polar(1.0, theta * dj), g[0]});
      }
    }
    return t;
  }

  MatrixXcd landau_line(const KPoint& k) const {
    const long p = mode_.flux.p;
    const int n = ns_;
    if (kinetic_line_.rows() != n) kinetic_line_ = spectral_second_derivative(n, h_);
    const LineTerms t = line_terms(k);
    MatrixXcd hm = MatrixXcd::Zero(p * n, p * n);
    for (long r = 0; r < p; ++r) {
      Eigen::MatrixXd kin = kinetic_line_;
      kin.diagonal() += t.diag.segment(r * n, n);
      if (symbol_.relativistic()) {
        kin.diagonal().array() += 1.0;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kin);
        kin = es.eigenvectors() * es.eigenvalues().cwiseMax(0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
      }
      hm.block(r * n, r * n, n, n) = kin.cast<cplx>();
    }
    for (auto& hop : t.hops) {
      const VectorXcd& ph = t.phase.at(hop.g0);
      for (int i = 0; i < n; ++i) {
        const long src = i - hop.off;
        if (src >= 0 && src < n) hm(hop.rt * n + i, hop.rs * n + src) += hop.amp * ph[i];
      }
    }
    return hm;
  }

  // The same operator applied without forming it.
  void line_apply(const LineTerms& t, const MatrixXcd& in, MatrixXcd& out) const {
    const int n = ns_;
    const long p = mode_.flux.p;
    out.resize(in.rows(), in.cols());
    for (Eigen::Index c = 0; c < in.cols(); ++c)
      for (long r = 0; r < p; ++r) laplacian_->apply(in.col(c).data() + r * n, out.col(c).data() + r * n);
    out += t.diag.cast<cplx>().asDiagonal() * in;
    for (auto& hop : t.hops) {
      const long i0 = std::max(0L, hop.off), i1 = std::min<long>(n, n + hop.off);
      if (i1 <= i0) continue;
      const auto w = (hop.amp * t.phase.at(hop.g0).segment(i0, i1 - i0)).eval();
      out.middleRows(hop.rt * n + i0, i1 - i0) += w.asDiagonal() * in.middleRows(hop.rs * n + i0 - hop.off, i1 - i0);
    }
  }

  // Eigenvalues <= upper on the line: dense for small or relativistic problems, otherwise
  // Chebyshev subspace iteration on the FFT-applied operator.
  VectorXd line_below(const KPoint& k, double upper) const {
    const long dim = mode_.flux.p * ns_;
    if (symbol_.relativistic() || dim <= 400) return eigvalsh_range(landau_line(k), lower_bound() - 1.0, upper);
    const LineTerms t = line_terms(k);
    BlockOperator op = [this, &t](const MatrixXcd& in, MatrixXcd& out) { line_apply(t, in, out); };
    const double top = laplacian_->top() + t.diag.maxCoeff() + t.vsum + 1.0;
    VectorXd w = chebyshev_below(op, dim, upper, top, line_count_ + 6);
    line_count_ = static_cast<int>(w.size());
    return w;
  }

  MatrixXcd pseudo_spectral(const KPoint& k) const {
    const int d = symbol_.dim(), m = mode_.ppc;
    const int size = d == 2 ? m * m : m;
    const Lattice& lat = symbol_.lattice();
    auto freq = [m](int i) { return i - m / 2; };
    auto wrap = [m](int v) { return ((v % m) + m) % m; };
    // aliased coefficients of the sampled potential
    std::map<std::pair<int, int>, cplx> alias;
    for (auto& [g, v] : symbol_.potential().coeffs()) alias[{wrap(g[0]), d == 2 ? wrap(g[1]) : 0}] += v;
    MatrixXcd hm = MatrixXcd::Zero(size, size);
    const Vec xi = xi_of(k);
    for (int a = 0; a < size; ++a) {
      const Coeffs ga{freq(d == 2 ? a / m : a), d == 2 ? freq(a % m) : 0};
      hm(a, a) += symbol_.kinetic(xi + lat.dual_point(ga));
      for (int c = 0; c < size; ++c) {
        const Coeffs gc{freq(d == 2 ? c / m : c), d == 2 ? freq(c % m) : 0};
        auto it = alias.find({wrap(ga[0] - gc[0]), d == 2 ? wrap(ga[1] - gc[1]) : 0});
        if (it != alias.end()) hm(a, c) += it->second;
      }
    }
    return hm;
  }

  // Finite differences on n^d nodes x = h i with Dirichlet walls; each link carries the
  // exact line-integral phase omega_{eps A}(x, x + h e_j).
  void setup_box() {
    const int d = symbol_.dim();
    if (mode_.n < 2 || !(mode_.h > 0)) throw ConfigError("box mode needs n >= 2 and h > 0");
    if (field_ && d != 2) throw ConfigError("a magnetic field needs d = 2");
    check_rectangular();
    for (int j = 0; j < d; ++j) {
      const double period = symbol_.lattice().basis()(j, j);
      if (period / mode_.h < 16 - 1e-9)
        throw ConfigError("grid too coarse: " + std::to_string(period / mode_.h) + " points per cell (need >= 16)");
    }
    if (field_) {
      potential_.emplace(*field_);
      b_ = field_->is_constant() ? field_->strength() : 0;
    }
    rebuild_box();
  }

  void rebuild_box() {
    const int d = symbol_.dim(), n = mode_.n;
    BoxGrid g{d, n, mode_.h};
    const int size = g.size();
    std::vector<Eigen::Triplet<cplx>> trip;
    const double inv = 1.0 / (mode_.h * mode_.h);
    for (int i = 0; i < size; ++i) {
      const Vec x = g.point(i);
      double diag = 2 * d * inv;
      if (!symbol_.relativistic()) diag += symbol_.potential()(x);
      trip.emplace_back(i, i, diag);
      const int c0 = d == 2 ? i / n : i, c1 = d == 2 ? i % n : 0;
      for (int j = 0; j < d; ++j) {
        const int c = j == 0 ? c0 : c1;
        if (c + 1 >= n) continue;
        const int nb = i + (j == 0 ? (d == 2 ? n : 1) : 1);
        const cplx w = potential_ ? line_phase(*potential_, x, g.point(nb)) : cplx(1);
        trip.emplace_back(i, nb, -inv * w);
        trip.emplace_back(nb, i, -inv * std::conj(w));
      }
    }
    box_sparse_.resize(size, size);
    box_sparse_.setFromTriplets(trip.begin(), trip.end());
    upper_ = 4 * d * inv + 1;
    for (auto& [gc, a] : symbol_.potential().coeffs()) upper_ += std::abs(a);
    if (symbol_.relativistic()) upper_ = std::sqrt(upper_ + 1) + 1;
  }

  MatrixXcd box_matrix() const {
    MatrixXcd m = MatrixXcd(box_sparse_);
    if (!symbol_.relativistic()) return m;
    // sqrt(M_kin + 1) + V on the diagonal
    MatrixXcd k = m + MatrixXcd::Identity(m.rows(), m.cols());
    MatrixXcd root = hermitian_function(k, [](double x) { return std::sqrt(std::max(x, 0.0)); });
    BoxGrid g{symbol_.dim(), mode_.n, mode_.h};
    for (int i = 0; i < g.size(); ++i) root(i, i) += symbol_.potential()(g.point(i));
    return root;
  }

  // Large sparse boxes: Chebyshev subspace iteration, growing the block until it passes `upper`.
  // A block edge inside a degenerate cluster (Landau levels) stalls the iteration; then the
  // block grows too, and past a quarter of the dimension we fall back to a dense solve.
  VectorXd box_lowest(double upper) const {
    const auto dense = [&] { return eigvalsh_range(box_matrix(), lower_bound() - 1.0, upper); };
    if (symbol_.relativistic()) return dense();
    const auto& a = box_sparse_;
    BlockOperator apply = [&a](const MatrixXcd& in, MatrixXcd& out) { out = a * in; };
    for (int wanted = 16; 4 * wanted < a.rows(); wanted *= 2) {
      LowestEigen e;
      try {
        e = chebyshev_lowest(apply, a.rows(), wanted, upper_);
      } catch (const NumericError&) {
        continue;
      }
      if (e.values[wanted - 1] > upper) {
        std::vector<double> keep;
        for (int i = 0; i < e.values.size(); ++i)
          if (e.values[i] <= upper) keep.push_back(e.values[i]);
        return Eigen::Map<VectorXd>(keep.data(), keep.size());
      }
    }
    return dense();
  }

  PeriodicSymbol symbol_;
  std::optional<MagneticField> field_;
  DirectMode mode_;
  ShellPtr shell_;
  double b_ = 0, l1_ = 0, l2_ = 0, h_ = 0, upper_ = 0;
  mutable double reserved_ = 0;
  mutable int ns_ = 0;
  mutable Eigen::MatrixXd kinetic_line_;
  mutable std::shared_ptr<const CirculantLaplacian> laplacian_;
  mutable int line_count_ = 10;
  std::optional<VectorPotential> potential_;
  Eigen::SparseMatrix<cplx> box_sparse_;
};

inline DirectDiscretization assemble_direct(const PeriodicSymbol& s, std::optional<MagneticField> field, DirectMode mode) {
  return DirectDiscretization(s, std::move(field), mode);
}

// All eigenvalues below `upper` at every k point; row j starts at the lowest level, so
// rows are rank-aligned where both have entries.
inline std::vector<VectorXd> direct_eigenvalues(DirectDiscretization& disc, double upper, int nk) {
  disc.reserve_energy(upper);
  std::vector<VectorXd> rows;
  for (auto& k : disc.k_grid(nk)) rows.push_back(disc.eigenvalues_below(k, upper));
  return rows;
}

// 3x the largest jump of any branch between neighbouring k points (inside the window).
inline double grid_merge_tol(const std::vector<VectorXd>& rows, int nk, int dim, Interval window) {
  if (rows.size() < 2) return 0;
  const int n2 = dim == 2 ? nk : 1;
  double jump = 0;
  auto visit = [&](const VectorXd& a, const VectorXd& b) {
    for (Eigen::Index j = 0; j < std::min(a.size(), b.size()); ++j)
      if (window.contains(a[j]) || window.contains(b[j])) jump = std::max(jump, std::abs(a[j] - b[j]));
  };
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < n2; ++j) {
      visit(rows[i * n2 + j], rows[((i + 1) % nk) * n2 + j]);
      if (n2 > 1) visit(rows[i * n2 + j], rows[i * n2 + (j + 1) % n2]);
    }
  return 3 * jump;
}

inline SpectrumSet direct_spectrum(DirectDiscretization& disc, Interval window, int nk, double merge_tol) {
  std::vector<double> pts;
  for (auto& r : direct_eigenvalues(disc, window.hi, nk)) pts.insert(pts.end(), r.data(), r.data() + r.size());
  return SpectrumSet(pts, window, merge_tol);
}

}  // namespace peierls
