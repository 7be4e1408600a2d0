#pragma once

#include <chrono>
#include <optional>
#include <vector>

#include "direct.hpp"

namespace peierls {

struct CompareOptions {
  int band = 0;  // 0-based
  double cutoff = 10;
  int resolution = 32;
  int n_bands = 4;
  int radius = 8;
  double gap_tol = 1e-6;
  int lambda_points = 400;
  std::optional<double> scan_tol;  // default 1e-6 |I|
  int nk_effective = 64;
  int nk_direct = 4;
  int ppc = 16;
  double line_tol = 1e-9;
  double pad = 0.5;                  // window I = J_k widened by pad * |J_k| (at most half a gap)
  std::optional<double> merge_tol;   // default: 3x the direct k-grid jump
};

struct CompareRun {
  double epsilon = 0;
  RationalFlux flux{};
  double merge_tol = 0;
  std::vector<Interval> effective, direct;  // merged intervals in I
  HausdorffResult to_effective;             // d_H(reconstruction, direct)
  HausdorffResult to_unperturbed;           // d_H(direct, sigma(P_0) within I)
  int gap_hits = 0;                         // direct eigenvalues inside the gap window
  int dimension = 0;
  double seconds = 0;
};

struct CompareReport {
  Interval band, window, gap_window;
  double gap = 0;
  DecayFit decay;
  std::vector<CompareRun> runs;
  HausdorffReport effective_vs_direct, direct_vs_unperturbed;
};

// Shared zero-field data: bands, J_k, window and the gap window above J_k.
struct CompareSetup {
  BandStructure bands;
  HoppingSet hoppings;
  Interval band, window, gap_window;
  double gap = 0;
};

inline CompareSetup compare_setup(const PeriodicSymbol& symbol, const CompareOptions& o) {
  const Lattice& lat = symbol.lattice();
  if (lat.dim() != 2) throw ConfigError("compare needs a 2d lattice");
  if (o.band + 2 > o.n_bands) throw ConfigError("n_bands must exceed the compared band by one");
  auto b = compute_bands(symbol, BZGrid(lat, o.resolution), make_shell(lat, o.cutoff), o.n_bands, false);
  auto iv = band_intervals(b, o.gap_tol);
  if (!iv.simple_flags[o.band])
    throw ConfigError("H.7: band " + std::to_string(o.band + 1) + " is not a simple spectral band on the grid");
  CompareSetup s{b, band_hoppings(b, o.band, o.radius), iv.intervals[o.band], {}, {}, 0};
  s.gap = iv.intervals[o.band + 1].lo - s.band.hi;
  const double below = o.band > 0 ? s.band.lo - iv.intervals[o.band - 1].hi : s.gap;
  const double w = o.pad * s.band.width();
  s.window = {s.band.lo - std::min(w, 0.5 * below), s.band.hi + std::min(w, 0.5 * s.gap)};
  s.gap_window = {s.band.hi + 0.2 * s.gap, s.band.hi + 0.4 * s.gap};
  return s;
}

inline CompareRun compare_one(const PeriodicSymbol& symbol, const CompareSetup& s, double eps, RationalFlux flux,
                              const CompareOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const Lattice& lat = symbol.lattice();
  // the field is fixed by the exact flux; eps only labels the run
  MagneticField field = MagneticField::constant(field_for_flux(lat, flux).strength() / eps, eps);
  CompareRun run;
  run.epsilon = eps;
  run.flux = flux;

  auto mode = DirectMode::magnetic(flux, o.ppc);
  mode.line_tol = o.line_tol;
  auto disc = assemble_direct(symbol, field, mode);
  const double upper = std::max(s.window.hi, s.gap_window.hi);
  auto rows = direct_eigenvalues(disc, upper, o.nk_direct);
  run.dimension = disc.dimension();
  run.merge_tol = o.merge_tol ? *o.merge_tol : grid_merge_tol(rows, o.nk_direct, 2, s.window);
  std::vector<double> pts;
  for (auto& r : rows)
    for (Eigen::Index j = 0; j < r.size(); ++j) {
      pts.push_back(r[j]);
      if (s.gap_window.contains(r[j])) ++run.gap_hits;
    }
  SpectrumSet direct(pts, s.window, run.merge_tol);

  auto op = assemble_effective(s.hoppings, VectorPotential(field), EffectiveMode::magnetic_bloch(flux));
  const double tol = o.scan_tol ? *o.scan_tol : 1e-6 * s.window.width();
  auto scan = lambda_scan(op, lambda_grid(s.window, o.lambda_points), o.nk_effective, tol);
  SpectrumSet effective = reconstructed_spectrum(scan, s.window, run.merge_tol);
  SpectrumSet zero = SpectrumSet::from_intervals({s.band}, s.window, run.merge_tol);

  run.effective = effective.merged_intervals();
  run.direct = direct.merged_intervals();
  run.to_effective = hausdorff_distance(effective, direct);
  run.to_unperturbed = hausdorff_distance(direct, zero);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

inline CompareReport compare(const PeriodicSymbol& symbol, const std::vector<double>& epsilons,
                             const std::vector<RationalFlux>& fluxes, const CompareOptions& o) {
  if (epsilons.size() != fluxes.size()) throw ConfigError("compare needs one flux per epsilon");
  auto s = compare_setup(symbol, o);
  CompareReport rep{s.band, s.window, s.gap_window, s.gap, decay_fit(s.hoppings), {}, {}, {}};
  for (size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0)) throw ConfigError("compare needs positive epsilon values");
    rep.runs.push_back(compare_one(symbol, s, epsilons[i], fluxes[i], o));
    const auto& r = rep.runs.back();
    rep.effective_vs_direct.pairs.push_back({r.epsilon, r.to_effective.value, !r.to_effective.defined() || r.to_effective.flagged()});
    rep.direct_vs_unperturbed.pairs.push_back({r.epsilon, r.to_unperturbed.value, !r.to_unperturbed.defined() || r.to_unperturbed.flagged()});
  }
  if (epsilons.size() >= 3) {
    rep.effective_vs_direct.fit = lipschitz_fit(rep.effective_vs_direct.pairs);
    rep.direct_vs_unperturbed.fit = lipschitz_fit(rep.direct_vs_unperturbed.pairs);
  }
  return rep;
}

}  // namespace peierls
