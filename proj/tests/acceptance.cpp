// Acceptance run: one PASS/FAIL line per criterion.  References are the hand-written
// oracles in oracles.hpp or closed forms, never the library path under test.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "oracles.hpp"
#include "peierls/grushin.hpp"
#include "peierls/pipeline.hpp"

using namespace peierls;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const char* what, double value, double bound) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s%s %.3e (bound %.3e)", detail.empty() ? "" : "; ", what, value, bound);
    detail += buf;
    pass = pass && ok;
  }
  void le(const char* what, double value, double bound) { check(value <= bound, what, value, bound); }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Lattice l1() { return Lattice::square(1); }
Lattice l2() { return Lattice::square(2); }
PeriodicSymbol mathieu() { return {Nonrelativistic{}, PeriodicPotential::cosine(l1(), 1.0)}; }
PeriodicSymbol separable() { return {Nonrelativistic{}, PeriodicPotential::separable_cosine_2d(l2(), 1.0)}; }
Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}

// Mathieu J_1 from the oracle: the bottom sits at xi = 0, the top at the zone edge.
Interval mathieu_j(int k, int cutoff) {
  const double a = oracle::mathieu_levels(0.0, cutoff)[k], b = oracle::mathieu_levels(-0.5, cutoff)[k];
  return {std::min(a, b), std::max(a, b)};
}

Outcome c1() {
  Outcome o;
  auto t0 = Clock::now();
  PeriodicSymbol free(Nonrelativistic{}, PeriodicPotential::zero(l1()));
  BZGrid g(l1(), 64);
  auto b = compute_bands(free, g, make_shell(l1(), 8), 3, false);
  double err = 0;
  for (int p = 0; p < g.size(); ++p) {
    auto ref = oracle::free_levels_1d(g.point(p)[0], 3);
    for (int j = 0; j < 3; ++j) err = std::max(err, std::abs(b.values(p, j) - ref[j]));
  }
  o.le("max error", err, 1e-10);
  o.le("seconds", since(t0), 1.0);
  return o;
}

Outcome c2() {
  Outcome o;
  FiberOperator op(mathieu(), make_shell(l1(), 64));
  o.le("|lambda_1(0) - oracle|", std::abs(eigvalsh(op.matrix(v1(0)), 1)[0] - oracle::mathieu_levels(0.0, 128)[0]), 1e-10);
  BZGrid g(l1(), 64);
  auto iv = band_intervals(compute_bands(op, g, 3, false));
  // same grid, oracle levels at cutoff 128
  double dj = 0;
  for (int k = 0; k < 2; ++k) {
    Interval want{1e300, -1e300};
    for (int p = 0; p < g.size(); ++p) {
      const double l = oracle::mathieu_levels(g.point(p)[0], 128)[k];
      want = {std::min(want.lo, l), std::max(want.hi, l)};
    }
    dj = std::max({dj, std::abs(iv.intervals[k].lo - want.lo), std::abs(iv.intervals[k].hi - want.hi)});
  }
  o.le("J_1, J_2 endpoints", dj, 1e-8);
  return o;
}

Outcome c3() {
  Outcome o;
  auto t0 = Clock::now();
  auto b = compute_bands(mathieu(), BZGrid(l1(), 64), make_shell(l1(), 24), 3, false);
  const Interval j1 = mathieu_j(0, 60);
  const Interval window{j1.lo - 0.3, j1.hi + 0.3};
  auto op = assemble_effective(band_hoppings(b, 0, 8), std::nullopt, EffectiveMode::magnetic_bloch({0, 1}));
  auto lambdas = lambda_grid(window, 400);
  const double cell = lambdas[1] - lambdas[0];
  auto scan = lambda_scan(op, lambdas, 64, 1e-9);
  auto rec = reconstructed_spectrum(scan, window, cell).merged_intervals();
  o.check(rec.size() == 1, "intervals", static_cast<double>(rec.size()), 1);
  if (rec.size() == 1) o.le("endpoint offset", std::max(std::abs(rec[0].lo - j1.lo), std::abs(rec[0].hi - j1.hi)), cell);
  o.le("seconds", since(t0), 30.0);
  return o;
}

Outcome c4() {
  Outcome o;
  FiberOperator op(mathieu(), make_shell(l1(), 24));
  auto bands = compute_bands(op, BZGrid(l1(), 32), 3, true);
  auto fam = trial_from_section(transport_section(op, bands, 0), op);
  const Interval j1 = mathieu_j(0, 60);
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> xs(-0.5, 0.5), ls(j1.lo - 0.2, j1.hi + 0.2);
  double res = 0, emp = 0;
  for (int i = 0; i < 20; ++i) {
    const double xi = xs(rng), lambda = ls(rng);
    auto g = assemble_grushin(op.fiber(v1(xi)), lambda, fam);
    auto inv = invert_grushin(g);
    MatrixXcd e(g.m + g.n, g.m + g.n);
    e << inv.e, inv.e_plus, inv.e_minus, inv.e_mp;
    res = std::max(res, (g.block * e - MatrixXcd::Identity(e.rows(), e.cols())).norm());
    emp = std::max(emp, std::abs(inv.e_mp(0, 0) - (lambda - oracle::mathieu_levels(xi, 60)[0])));
  }
  o.le("||P E - I||_F", res, 1e-8);
  o.le("|E_-+ - (lambda - lambda_1)|", emp, 1e-8);
  return o;
}

Outcome c5() {
  Outcome o;
  struct Fixture {
    const char* name;
    PeriodicSymbol symbol;
    double cutoff;
  };
  for (auto& f : {Fixture{"mathieu", mathieu(), 20}, Fixture{"separable", separable(), 9}}) {
    FiberOperator op(f.symbol, make_shell(f.symbol.lattice(), f.cutoff));
    double kappa[2];
    SectionReport worst;
    for (int i = 0; i < 2; ++i) {
      const int r = i == 0 ? 32 : 64;
      auto s = transport_section(op, compute_bands(op, BZGrid(f.symbol.lattice(), r), 3, true), 0);
      auto rep = check_section(s, op);
      worst.normalization = std::max(worst.normalization, rep.normalization);
      worst.residual = std::max(worst.residual, rep.residual);
      worst.equivariance = std::max(worst.equivariance, rep.equivariance);
      worst.conjugation = std::max(worst.conjugation, rep.conjugation);
      kappa[i] = s.phases.kappa;
    }
    o.note(f.name);
    o.le("normalization", worst.normalization, 1e-10);
    o.le("residual", worst.residual, 1e-8);
    o.le("equivariance", worst.equivariance, 1e-8);
    o.le("conjugation", worst.conjugation, 1e-8);
    o.le("kappa drift", std::abs(std::remainder(kappa[0] - kappa[1], two_pi)), 1e-6);
  }
  return o;
}

Outcome c6() {
  Outcome o;
  BoxGrid g{2, 12, 0.5};
  Lattice lat = Lattice::square(2, 3.0);
  PeriodicSymbol s(Nonrelativistic{}, PeriodicPotential::separable_cosine_2d(lat, 0.4));
  VectorPotential a(MagneticField::constant(0.8));
  const VectorXd w0 = eigvalsh(quantize_on_grid(s, &a, g).matrix);
  double dq = 0;
  for (auto chi : {GaugeFunction::quadratic(0.3, -0.2, 0.1, 0.05, -0.07), GaugeFunction::harmonic(0.9, 1.1, 0.4)}) {
    const VectorPotential shifted = a.with_chi(chi);
    dq = std::max(dq, (eigvalsh(quantize_on_grid(s, &shifted, g).matrix) - w0).cwiseAbs().maxCoeff());
  }
  o.le("quantize_on_grid", dq, 1e-9);

  auto b = compute_bands(separable(), BZGrid(l2(), 16), make_shell(l2(), 8), 2, false);
  auto h = band_hoppings(b, 0, 4);
  VectorPotential f(MagneticField::constant(0.05));
  const VectorXd e0 = eigvalsh(assemble_effective(h, f, EffectiveMode::make_box(6)).box_matrix());
  double de = 0;
  for (auto chi : {GaugeFunction::linear(0.3, -1.1), GaugeFunction::linear(-0.7, 0.25)})
    de = std::max(de, (eigvalsh(assemble_effective(h, f.with_chi(chi), EffectiveMode::make_box(6)).box_matrix()) - e0)
                          .cwiseAbs()
                          .maxCoeff());
  o.le("effective box", de, 1e-9);
  return o;
}

// Nearest-neighbour hoppings -1 from the symbol -2cos 2pi t1 - 2cos 2pi t2.
HoppingSet nearest_neighbour() {
  BZGrid g(l2(), 8);
  std::vector<double> v;
  for (int p = 0; p < g.size(); ++p) {
    Vec t = g.coords_of(p);
    v.push_back(-2 * std::cos(two_pi * t[0]) - 2 * std::cos(two_pi * t[1]));
  }
  return fourier_hoppings(g, v, 2, "nn");
}

Outcome c7() {
  Outcome o;
  auto flux_op = [](RationalFlux f) {
    return assemble_effective(nearest_neighbour(), VectorPotential(field_for_flux(l2(), f)), EffectiveMode::magnetic_bloch(f));
  };
  auto half = effective_spectrum(flux_op({1, 2}), {-5, 5}, 16, 0.1);
  const double r = 2 * std::sqrt(2.0);
  o.le("endpoints vs 2 sqrt 2", std::max(std::abs(half.points().front() + r), std::abs(half.points().back() - r)), 1e-8);
  for (RationalFlux f : {RationalFlux{1, 3}, RationalFlux{1, 4}, RationalFlux{2, 5}}) {
    const int groups = count_subband_groups(effective_eigenvalues(flux_op(f), 48));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%ld/%ld: %d groups", f.p, f.q, groups);
    o.note(buf);
    o.pass = o.pass && groups == f.q;
  }
  return o;
}

CompareReport run_compare(double& seconds) {
  auto t0 = Clock::now();
  auto rep = compare(separable(), {0.08, 0.04, 0.02}, {{1, 4}, {1, 8}, {1, 16}}, CompareOptions{});
  seconds = since(t0);
  return rep;
}

Outcome c8(const CompareReport& rep) {
  Outcome o;
  // quadratic floor: d ~ C2 eps^2, least squares through the origin
  double num = 0, den = 0;
  for (auto& p : rep.effective_vs_direct.pairs) {
    num += p.distance * p.epsilon * p.epsilon;
    den += std::pow(p.epsilon, 4);
  }
  const double c2 = num / den;
  char buf[64];
  std::snprintf(buf, sizeof buf, "C2 %.4f", c2);
  o.note(buf);
  for (size_t i = 0; i < rep.runs.size(); ++i) {
    const auto& run = rep.runs[i];
    const double bound = std::max(5 * run.merge_tol, 3 * c2 * run.epsilon * run.epsilon);
    std::snprintf(buf, sizeof buf, "d_H(eps=%.2f)", run.epsilon);
    o.check(run.to_effective.defined() && !run.to_effective.flagged() && run.to_effective.value <= bound, buf,
            run.to_effective.value, bound);
  }
  const bool mono = distances_nonincreasing(rep.effective_vs_direct.pairs, 0.25);
  o.note(mono ? "nonincreasing" : "not nonincreasing");
  o.pass = o.pass && mono;
  return o;
}

Outcome c9(const CompareReport& rep, double seconds) {
  Outcome o;
  const auto& fit = rep.direct_vs_unperturbed.fit;
  o.check(std::isfinite(fit.slope) && fit.slope > 0 && fit.used == 3, "C", fit.slope, INFINITY);
  o.le("fit residual", fit.residual, 0.25);
  // the two smallest eps are the last runs
  int hits = 0;
  for (size_t i = rep.runs.size() - 2; i < rep.runs.size(); ++i) hits += rep.runs[i].gap_hits;
  o.check(hits == 0, "gap window hits", hits, 0);
  o.le("seconds", seconds, 600);
  return o;
}

Outcome c10() {
  Outcome o;
  BoxGrid g1{1, 64, 0.5};
  auto nr = quantize_momentum([](const Vec& k) { return 1.0 + k.squaredNorm(); }, nullptr, g1).matrix;
  auto rel = quantize_momentum([](const Vec& k) { return std::sqrt(1.0 + k.squaredNorm()); }, nullptr, g1).matrix;
  nr = 0.5 * (nr + nr.adjoint()).eval();
  auto e = eigh(nr);
  MatrixXcd root = e.vectors * e.values.cwiseSqrt().cast<cplx>().asDiagonal() * e.vectors.adjoint();
  MatrixXcd diff = root - rel;
  o.le("d=1 eps=0", spectral_norm_hermitian(0.5 * (diff + diff.adjoint())), 1e-9);

  VectorPotential a(MagneticField::constant(1.0));
  auto r = relativistic_sqrt_compare(a, BoxGrid{2, 24, 0.5}, {0.0, 0.01, 0.005, 0.0025, 0.00125});
  o.le("d=2 eps=0", r[0].deviation, 1e-9);
  std::vector<EpsilonDistance> pairs;
  double worst = 0;
  for (size_t i = 1; i < r.size(); ++i) {
    pairs.push_back({r[i].epsilon, r[i].deviation});
    worst = std::max(worst, r[i].deviation / r[i].epsilon);
  }
  o.check(std::isfinite(worst), "max deviation/eps", worst, INFINITY);
  const bool mono = ratios_nonincreasing(pairs, 0.10);
  o.note(mono ? "ratio nonincreasing" : "ratio increases");
  o.pass = o.pass && mono;
  return o;
}

Outcome c11() {
  Outcome o;
  // spectra of three fixtures in a common window
  auto set_of = [](const PeriodicSymbol& s) {
    auto iv = band_intervals(compute_bands(s, BZGrid(l1(), 64), make_shell(l1(), 20), 3, false));
    return SpectrumSet::from_intervals(iv.intervals, {-2, 6}, 0.0);
  };
  std::vector<SpectrumSet> sets{set_of(mathieu()), set_of({Nonrelativistic{}, PeriodicPotential::zero(l1())}),
                                set_of({Nonrelativistic{}, PeriodicPotential::cosine(l1(), 0.5)}),
                                set_of({Relativistic{}, PeriodicPotential::cosine(l1(), 1.0)})};
  double sym = 0, self = 0, tri = 0;
  for (auto& x : sets)
    for (auto& y : sets) {
      const double xy = hausdorff_distance(x, y).value;
      sym = std::max(sym, std::abs(xy - hausdorff_distance(y, x).value));
      if (&x == &y) self = std::max(self, xy);
      if (xy < 0) sym = INFINITY;
      for (auto& z : sets) tri = std::max(tri, hausdorff_distance(x, z).value - xy - hausdorff_distance(y, z).value);
    }
  o.le("symmetry", sym, 1e-12);
  o.le("d(x,x)", self, 1e-12);
  o.le("triangle excess", std::max(tri, 0.0), 1e-12);

  auto b = compute_bands(mathieu(), BZGrid(l1(), 64), make_shell(l1(), 24), 3, false);
  auto h = band_hoppings(b, 0, 8);
  double trip = 0;
  for (int p = 0; p < b.grid.size(); ++p) trip = std::max(trip, std::abs(h.resum(b.grid.point(p))(0, 0).real() - b.values(p, 0)));
  o.le("Fourier round trip", trip, 1e-8);
  const auto fit = decay_fit(h, 4);
  o.check(fit.constant > 0 && std::isfinite(fit.constant), "C_4", fit.constant, INFINITY);
  return o;
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int n, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d: %s  %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };
  report(1, c1);
  report(2, c2);
  report(3, c3);
  report(4, c4);
  report(5, c5);
  report(6, c6);
  report(7, c7);
  double seconds = 0;
  std::optional<CompareReport> rep;
  std::string compare_error;
  try {
    rep = run_compare(seconds);
  } catch (const std::exception& e) {
    compare_error = e.what();
  }
  auto need = [&](auto f) {
    return [&, f]() -> Outcome {
      if (!rep) throw std::runtime_error("compare failed: " + compare_error);
      return f();
    };
  };
  report(8, need([&] { return c8(*rep); }));
  report(9, need([&] { return c9(*rep, seconds); }));
  report(10, c10);
  report(11, c11);
  return failed == 0 ? 0 : 1;
}
