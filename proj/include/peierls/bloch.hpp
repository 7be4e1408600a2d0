#pragma once

#include <memory>
#include <string>
#include <vector>

#include "symbols.hpp"

namespace peierls {

using ShellPtr = std::shared_ptr<const DualShell>;

inline ShellPtr make_shell(const Lattice& lat, double cutoff) { return std::make_shared<const DualShell>(lat, cutoff); }

struct FiberMatrix {
  Vec xi;
  ShellPtr shell;
  MatrixXcd entries;
};

// Assembles H(xi)[g, b] = kinetic(xi + g) delta_gb + V^(g - b) for one symbol and shell.
// The potential block does not depend on xi and is built once.
class FiberOperator {
 public:
  FiberOperator(PeriodicSymbol symbol, ShellPtr shell) : symbol_(std::move(symbol)), shell_(std::move(shell)) {
    if (!shell_ || shell_->size() == 0) throw ConfigError("empty plane-wave shell");
    if (shell_->dim() != symbol_.dim()) throw ConfigError("shell and symbol dimensions differ");
    potential_ = convolution(symbol_.potential());
  }

  const PeriodicSymbol& symbol() const { return symbol_; }
  const ShellPtr& shell() const { return shell_; }
  const Lattice& lattice() const { return symbol_.lattice(); }
  int size() const { return shell_->size(); }

  MatrixXcd matrix(const Vec& xi) const {
    const int n = size();
    MatrixXcd h = potential_;
    if (!symbol_.polynomial()) {
      for (int i = 0; i < n; ++i) h(i, i) += symbol_.kinetic(xi + shell_->momentum(i));
      return h;
    }
    // Weyl midpoint rule: a_alpha(g - b) (xi + (g + b)/2)^alpha.
    for (auto& t : std::get<Polynomial>(symbol_.kind()).terms) {
      for (auto& [g, a] : t.coeff.coeffs()) {
        if (a == cplx(0)) continue;
        for (int j = 0; j < n; ++j) {
          const int i = shell_->index((*shell_)[j] + g);
          if (i < 0) continue;
          Vec mid = xi + 0.5 * (shell_->momentum(i) + shell_->momentum(j));
          h(i, j) += a * monomial(mid, t.power);
        }
      }
    }
    return h;
  }

  FiberMatrix fiber(const Vec& xi) const { return {xi, shell_, matrix(xi)}; }

  // Matrix of multiplication by a periodic function in the plane-wave basis.
  MatrixXcd convolution(const PeriodicPotential& v) const {
    const int n = size();
    MatrixXcd m = MatrixXcd::Zero(n, n);
    for (auto& [g, a] : v.coeffs()) {
      if (a == cplx(0)) continue;
      for (int j = 0; j < n; ++j) {
        const int i = shell_->index((*shell_)[j] + g);
        if (i >= 0) m(i, j) += a;
      }
    }
    return m;
  }

 private:
  PeriodicSymbol symbol_;
  ShellPtr shell_;
  MatrixXcd potential_;
};

inline FiberMatrix assemble_fiber_matrix(const PeriodicSymbol& s, const Vec& xi, const ShellPtr& shell) {
  return FiberOperator(s, shell).fiber(xi);
}

struct BandStructure {
  BZGrid grid;
  ShellPtr shell;
  Eigen::MatrixXd values;          // (grid point, band)
  std::vector<MatrixXcd> vectors;  // per grid point, shell size x n_bands; empty unless kept

  int n_bands() const { return static_cast<int>(values.cols()); }
  bool has_vectors() const { return !vectors.empty(); }
};

inline BandStructure compute_bands(const FiberOperator& op, const BZGrid& grid, int n_bands, bool keep_vectors) {
  if (n_bands < 1 || n_bands > op.size())
    throw ConfigError("n_bands must lie in [1, shell size = " + std::to_string(op.size()) + "]");
  BandStructure b{grid, op.shell(), Eigen::MatrixXd(grid.size(), n_bands), {}};
  if (keep_vectors) b.vectors.resize(grid.size());
  for (int p = 0; p < grid.size(); ++p) {
    EigenPairs e;
    try {
      e = eigh(op.matrix(grid.point(p)), n_bands, keep_vectors);
    } catch (const NumericError& err) {
      auto t = grid.coords_of(p);
      throw NumericError(std::string("band solve failed at xi coords (") + std::to_string(t[0]) +
                         (t.size() > 1 ? ", " + std::to_string(t[1]) : std::string()) + "): " + err.what());
    }
    b.values.row(p) = e.values.transpose();
    if (keep_vectors) b.vectors[p] = std::move(e.vectors);
  }
  return b;
}

inline BandStructure compute_bands(const PeriodicSymbol& s, const BZGrid& grid, const ShellPtr& shell, int n_bands,
                                   bool keep_vectors) {
  return compute_bands(FiberOperator(s, shell), grid, n_bands, keep_vectors);
}

struct Interval {
  double lo = 0, hi = 0;
  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool operator==(const Interval&) const = default;
};

struct BandIntervals {
  std::vector<Interval> intervals;
  // Simple per H.7 on the grid.  The top computed band cannot be certified (its upper
  // neighbour is unknown) and is always reported false.
  std::vector<bool> simple_flags;
};

inline BandIntervals band_intervals(const BandStructure& b, double gap_tol = 1e-6) {
  const int n = b.n_bands();
  if (n == 0 || b.values.rows() == 0) throw ConfigError("empty band structure");
  BandIntervals out;
  for (int k = 0; k < n; ++k) out.intervals.push_back({b.values.col(k).minCoeff(), b.values.col(k).maxCoeff()});
  for (int k = 0; k < n; ++k) {
    bool simple = k + 1 < n;
    if (simple) simple = (b.values.col(k + 1) - b.values.col(k)).minCoeff() > gap_tol;
    for (int l = 0; l < n && simple; ++l) {
      if (l == k) continue;
      const auto& a = out.intervals[k];
      const auto& c = out.intervals[l];
      if (a.lo <= c.hi && c.lo <= a.hi) simple = false;
    }
    out.simple_flags.push_back(simple);
  }
  return out;
}

// Smallest eigenvalue of H(xi) - lambda.
inline double garding_check(const FiberMatrix& m, double lambda) {
  return eigvalsh(m.entries, 1)[0] - lambda;
}

}  // namespace peierls
