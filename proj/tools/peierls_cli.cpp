#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>

#include "peierls/config.hpp"
#include "peierls/grushin.hpp"
#include "peierls/io.hpp"

using namespace peierls;
namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config, output;
  std::string flux, mode, window;
  int radius = -1;
};

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

json intervals_json(const std::vector<Interval>& v) {
  json a = json::array();
  for (auto& i : v) a.push_back(interval_json(i));
  return a;
}

json hausdorff_json(const HausdorffResult& r) {
  json j{{"value", r.defined() ? json(r.value) : json(nullptr)}};
  j["status"] = r.status == HausdorffResult::Status::ok ? "ok" : r.defined() ? "one_empty" : "both_empty";
  return j;
}

struct Run {
  RunConfig cfg;
  fs::path out;
  std::string command;

  fs::path file(const std::string& name) const { return out / name; }

  json meta() const { return {{"command", command}, {"config", cfg.raw}}; }

  void sidecar(const CsvWriter& w, json extra) const {
    json m = meta();
    m["rows"] = w.data_rows();
    for (auto& [k, v] : extra.items()) m[k] = v;
    write_json(sidecar_path(w.path()), m);
  }
};

BandStructure bands_for(const RunConfig& c, bool vectors, int n_bands) {
  return compute_bands(c.sym(), BZGrid(c.lattice, c.resolution), make_shell(c.lattice, c.cutoff), n_bands, vectors);
}

// Configured window, otherwise J_k widened by a quarter of the neighbouring gaps.
Interval window_for(const RunConfig& c, const BandStructure& b) {
  if (c.window) return *c.window;
  auto iv = band_intervals(b, c.gap_tol);
  const Interval j = iv.intervals[c.band];
  double above = c.band + 1 < b.n_bands() ? iv.intervals[c.band + 1].lo - j.hi : j.width();
  double below = c.band > 0 ? j.lo - iv.intervals[c.band - 1].hi : above;
  above = std::max(above, 0.0);
  below = std::max(below, 0.0);
  return {j.lo - 0.25 * below, j.hi + 0.25 * above};
}

Interval parse_window_flag(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ConfigError("--window expects lo,hi");
  try {
    json j = json::array({std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))});
    return detail::parse_interval(j, "--window");
  } catch (const std::invalid_argument&) {
    throw ConfigError("--window expects two numbers lo,hi");
  }
}

// The field and declared flux, with the flux filled in from the field when possible.
struct FieldChoice {
  std::optional<VectorPotential> potential;
  std::optional<MagneticField> field;
  RationalFlux flux{0, 1};
};

FieldChoice field_for(const RunConfig& c, const std::optional<RationalFlux>& flux) {
  FieldChoice f;
  if (c.field) {
    f.field = c.field;
    f.potential = c.potential();
  } else if (flux) {
    f.field = field_for_flux(c.lattice, *flux);
    f.potential = VectorPotential(*f.field);
  }
  if (flux) {
    f.flux = *flux;
    if (f.field) {
      const double phi = f.field->flux_per_cell(c.lattice) / two_pi;
      if (std::abs(phi - flux->value()) > 1e-9 * std::max(1.0, std::abs(phi)))
        throw ConfigError("flux " + std::to_string(flux->p) + "/" + std::to_string(flux->q) +
                          " does not match the field (flux per cell / 2pi = " + std::to_string(phi) + ")");
    }
  } else if (f.field && f.field->strength() != 0) {
    throw ConfigError("magnetic_bloch mode needs the rational flux 'p/q' of the field (key flux or --flux)");
  }
  return f;
}

int cmd_bands(const Run& r) {
  const auto& c = r.cfg;
  auto b = bands_for(c, false, c.n_bands);
  auto iv = band_intervals(b, c.gap_tol);
  const int d = c.lattice.dim();
  std::vector<std::string> head{"point", "t1"};
  if (d == 2) head.push_back("t2");
  head.insert(head.end(), {"band", "lambda"});
  CsvWriter w(r.file("bands.csv"), head);
  for (int p = 0; p < b.grid.size(); ++p) {
    const Vec t = b.grid.coords_of(p);
    for (int k = 0; k < b.n_bands(); ++k) {
      std::vector<std::string> cells{csv_number(p), csv_number(t[0])};
      if (d == 2) cells.push_back(csv_number(t[1]));
      cells.push_back(csv_number(k + 1));
      cells.push_back(csv_number(b.values(p, k)));
      w.line(cells);
    }
  }
  json bands = json::array();
  for (size_t k = 0; k < iv.intervals.size(); ++k)
    bands.push_back({{"band", k + 1}, {"interval", interval_json(iv.intervals[k])}, {"simple", bool(iv.simple_flags[k])}});
  json j = r.meta();
  j["intervals"] = bands;
  j["shell_size"] = b.shell->size();
  write_json(r.file("bands_intervals.json"), j);
  r.sidecar(w, {{"resolution", c.resolution}, {"n_bands", c.n_bands}, {"cutoff", c.cutoff}});
  return 0;
}

BlochSection section_for(const RunConfig& c, const FiberOperator& op) {
  auto b = compute_bands(op, BZGrid(c.lattice, c.resolution), std::max(c.n_bands, c.band + 2), true);
  auto iv = band_intervals(b, c.gap_tol);
  if (!iv.simple_flags[c.band])
    throw ConfigError("H.7: band " + std::to_string(c.band + 1) + " is not a simple spectral band on the grid");
  auto s = transport_section(op, b, c.band, c.gap_tol);
  if (c.mollifier) s = smooth_section(s, *c.mollifier);
  return s;
}

int cmd_section(const Run& r) {
  const auto& c = r.cfg;
  FiberOperator op(c.sym(), make_shell(c.lattice, c.cutoff));
  auto s = section_for(c, op);
  auto rep = check_section(s, op);
  const int d = c.lattice.dim(), res = s.res();
  std::vector<std::string> head{"i1"};
  if (d == 2) head.push_back("i2");
  head.insert(head.end(), {"t1"});
  if (d == 2) head.push_back("t2");
  head.insert(head.end(), {"energy", "psi0_re", "psi0_im"});
  CsvWriter w(r.file("section.csv"), head);
  for (int i0 = 0; i0 <= res; ++i0)
    for (int i1 = 0; i1 <= (d == 2 ? res : 0); ++i1) {
      if (d == 2 && i0 == res && i1 == res) continue;
      const VectorXcd v = s.value(i0, i1);
      std::vector<std::string> cells{csv_number(i0)};
      if (d == 2) cells.push_back(csv_number(i1));
      cells.push_back(csv_number(s.grid.coord(i0)));
      if (d == 2) cells.push_back(csv_number(s.grid.coord(i1)));
      cells.push_back(csv_number(s.energy(i0, i1)));
      cells.push_back(csv_number(v[0].real()));
      cells.push_back(csv_number(v[0].imag()));
      w.line(cells);
    }
  json j = r.meta();
  j["band"] = c.band + 1;
  j["kappa"] = s.phases.kappa;
  j["kappa_rows"] = s.phases.kappa_rows;
  j["row_periodicity"] = s.phases.row_periodicity;
  j["row_evenness"] = s.phases.row_evenness;
  j["checks"] = json{{"normalization", rep.normalization}, {"residual", rep.residual},  {"equivariance", rep.equivariance},
                 {"conjugation", rep.conjugation},     {"min_overlap", rep.min_overlap}, {"holonomy", rep.holonomy}};
  write_json(r.file("section_kappa.json"), j);
  r.sidecar(w, {{"band", c.band + 1}, {"mollifier", c.mollifier ? json(*c.mollifier) : json(nullptr)}});
  return 0;
}

int cmd_grushin(const Run& r) {
  const auto& c = r.cfg;
  FiberOperator op(c.sym(), make_shell(c.lattice, c.cutoff));
  auto s = section_for(c, op);
  auto fam = trial_from_section(s, op);
  auto b = bands_for(c, false, std::max(c.n_bands, c.band + 2));
  const Interval win = window_for(c, b);
  const int d = c.lattice.dim();
  std::mt19937_64 rng(c.grushin_seed);
  std::uniform_real_distribution<double> ut(-0.5, 0.5), ul(win.lo, win.hi);
  std::vector<std::string> head{"sample", "t1"};
  if (d == 2) head.push_back("t2");
  head.insert(head.end(), {"lambda", "inverse_residual", "emp_error", "condition"});
  CsvWriter w(r.file("grushin.csv"), head);
  double worst_inv = 0, worst_emp = 0;
  for (int i = 0; i < c.grushin_points; ++i) {
    Vec t(d);
    for (int j = 0; j < d; ++j) t[j] = ut(rng);
    const double lambda = ul(rng);
    const Vec xi = c.lattice.from_dual_coords(t);
    auto inv = invert_grushin(assemble_grushin(op.fiber(xi), lambda, fam));
    const double want = lambda - band_vector(op, xi, c.band, c.gap_tol).energy;
    const double emp = std::abs(inv.e_mp(0, 0) - want);
    worst_inv = std::max(worst_inv, inv.residual);
    worst_emp = std::max(worst_emp, emp);
    std::vector<std::string> cells{csv_number(i), csv_number(t[0])};
    if (d == 2) cells.push_back(csv_number(t[1]));
    for (double x : std::vector<double>{lambda, inv.residual, emp, inv.condition}) cells.push_back(csv_number(x));
    w.line(cells);
  }
  json j = r.meta();
  j["band"] = c.band + 1;
  j["window"] = interval_json(win);
  j["points"] = c.grushin_points;
  j["max_inverse_residual"] = worst_inv;
  j["max_emp_error"] = worst_emp;
  write_json(r.file("grushin.json"), j);
  r.sidecar(w, {{"seed", c.grushin_seed}});
  return 0;
}

struct EffectiveSetup {
  EffectiveMode mode;
  FieldChoice field;
};

EffectiveSetup effective_setup(const RunConfig& c, const Flags& f, int radius) {
  const std::string m = f.mode.empty() ? c.effective_mode : f.mode;
  std::optional<RationalFlux> flux = c.flux;
  if (!f.flux.empty()) flux = parse_flux(f.flux);
  EffectiveSetup s{EffectiveMode::make_box(c.effective_box), field_for(c, flux)};
  if (m == "bloch") {
    s.mode = EffectiveMode::magnetic_bloch(s.field.flux);
  } else if (m == "box") {
    s.mode = EffectiveMode::make_box(std::max(c.effective_box, radius));
  } else {
    throw ConfigError("--mode must be box or bloch");
  }
  return s;
}

int cmd_effective(const Run& r, const Flags& f) {
  const auto& c = r.cfg;
  const int radius = f.radius >= 0 ? f.radius : c.radius;
  auto setup = effective_setup(c, f, radius);
  std::optional<Interval> flag_window;
  if (!f.window.empty()) flag_window = parse_window_flag(f.window);
  auto b = bands_for(c, false, std::max(c.n_bands, c.band + 1));
  const Interval win = flag_window ? *flag_window : window_for(c, b);
  auto op = assemble_effective(band_hoppings(b, c.band, radius), setup.field.potential, setup.mode);
  const auto rows = effective_eigenvalues(op, c.nk);
  const double mtol = c.merge_tol ? *c.merge_tol : grid_merge_tol(rows, c.nk, c.lattice.dim(), win);
  const double tol = c.scan_tol ? *c.scan_tol : 1e-6 * win.width();
  auto scan = lambda_scan(op, lambda_grid(win, c.lambda_points), c.nk, tol);
  auto spec = reconstructed_spectrum(scan, win, mtol);

  CsvWriter w(r.file("effective.csv"), {"lambda", "margin"});
  for (auto& p : scan.points) w.row(p.lambda, p.margin);
  json j = r.meta();
  j["band"] = c.band + 1;
  j["mode"] = setup.mode.kind == EffectiveMode::Kind::box ? "box" : "bloch";
  j["flux"] = std::to_string(setup.field.flux.p) + "/" + std::to_string(setup.field.flux.q);
  j["radius"] = radius;
  j["window"] = interval_json(win);
  j["tolerance"] = tol;
  j["merge_tol"] = mtol;
  j["reconstructed"] = intervals_json(spec.merged_intervals());
  j["decay_k4"] = decay_fit(op.hoppings()).constant;
  write_json(r.file("effective_spectrum.json"), j);
  r.sidecar(w, {{"window", interval_json(win)}, {"tolerance", tol}, {"merge_tol", mtol}});
  return 0;
}

int cmd_direct(const Run& r) {
  const auto& c = r.cfg;
  DirectMode mode;
  std::optional<MagneticField> field = c.field;
  if (c.direct_mode == "zero_field_bloch") {
    mode = DirectMode::zero_field(c.cutoff);
  } else if (c.direct_mode == "magnetic_bloch") {
    auto fc = field_for(c, c.flux);
    field = fc.field;
    mode = DirectMode::magnetic(fc.flux, c.ppc);
    mode.line_tol = c.line_tol;
  } else {
    if (c.box_n < 1 || !(c.box_h > 0)) throw ConfigError("direct box mode needs direct.n >= 1 and direct.h > 0");
    mode = DirectMode::make_box(c.box_n, c.box_h);
  }
  Interval win;
  if (c.window) {
    win = *c.window;
  } else {
    win = window_for(c, bands_for(c, false, std::max(c.n_bands, c.band + 1)));
  }
  auto disc = assemble_direct(c.sym(), field, mode);
  const int nk = mode.kind == DirectMode::Kind::box ? 1 : c.nk_direct;
  auto rows = direct_eigenvalues(disc, win.hi, nk);
  auto ks = disc.k_grid(nk);
  const double mtol = c.merge_tol ? *c.merge_tol : grid_merge_tol(rows, nk, c.lattice.dim(), win);

  CsvWriter w(r.file("direct.csv"), {"k", "ka", "kb", "level", "eigenvalue"});
  for (size_t i = 0; i < rows.size(); ++i)
    for (Eigen::Index j = 0; j < rows[i].size(); ++j)
      w.line({csv_number(static_cast<long>(i)), csv_number(ks[i].a), csv_number(ks[i].b), csv_number(static_cast<long>(j)),
              csv_number(rows[i][j])});
  std::vector<double> pts;
  for (auto& row : rows) pts.insert(pts.end(), row.data(), row.data() + row.size());
  SpectrumSet spec(pts, win, mtol);
  r.sidecar(w, {{"mode", c.direct_mode},
                {"dimension", disc.dimension()},
                {"nk", nk},
                {"window", interval_json(win)},
                {"merge_tol", mtol},
                {"merged", intervals_json(spec.merged_intervals())}});
  return 0;
}

// E_-+(xi, lambda) of the section family by the Schur complement in the eigenbasis of H(xi):
// E_-+ = -(sum_j |<phi, v_j>|^2 / (lambda_j - lambda))^{-1}.
struct SchurData {
  std::vector<VectorXd> energies, weights;
};

SchurData schur_data(const FiberOperator& op, const BlochSection& s) {
  SchurData d;
  for (int p = 0; p < s.grid.size(); ++p) {
    auto e = eigh(op.matrix(s.grid.point(p)), op.size(), true);
    d.energies.push_back(e.values);
    d.weights.push_back((e.vectors.adjoint() * s.vectors[p]).cwiseAbs2());
  }
  return d;
}

int cmd_scan(const Run& r) {
  const auto& c = r.cfg;
  auto fc = field_for(c, c.flux);
  FiberOperator op(c.sym(), make_shell(c.lattice, c.cutoff));
  auto s = section_for(c, op);
  auto sd = schur_data(op, s);
  auto b = bands_for(c, false, std::max(c.n_bands, c.band + 1));
  const Interval win = window_for(c, b);
  const EffectiveMode mode = EffectiveMode::magnetic_bloch(fc.flux);
  std::function<HoppingSet(double)> factory = [&](double lambda) {
    std::vector<double> v(sd.energies.size());
    for (size_t p = 0; p < v.size(); ++p) {
      const VectorXd den = sd.energies[p].array() - lambda;
      v[p] = -1.0 / (sd.weights[p].array() / den.array()).sum();
    }
    return fourier_hoppings(s.grid, v, c.radius, "E_-+");
  };
  const double tol = c.scan_tol ? *c.scan_tol : 1e-6 * win.width();
  auto scan = lambda_scan(factory, fc.potential, mode, lambda_grid(win, c.lambda_points), c.nk, tol);
  const double mtol = c.merge_tol ? *c.merge_tol : 0.0;
  auto spec = reconstructed_spectrum(scan, win, mtol);
  CsvWriter w(r.file("scan.csv"), {"lambda", "margin"});
  for (auto& p : scan.points) w.row(p.lambda, p.margin);
  r.sidecar(w, json{{"band", c.band + 1},
                {"flux", std::to_string(fc.flux.p) + "/" + std::to_string(fc.flux.q)},
                {"window", interval_json(win)},
                {"tolerance", tol},
                {"merge_tol", mtol},
                {"reconstructed", intervals_json(spec.merged_intervals())}});
  return 0;
}

int cmd_compare(const Run& r) {
  const auto& c = r.cfg;
  if (c.epsilons.empty()) throw ConfigError("compare needs compare.epsilons and compare.fluxes");
  // the field of run i is fixed by its flux; a configured B12 must agree with every pair
  if (c.field) {
    for (size_t i = 0; i < c.epsilons.size(); ++i) {
      auto f = c.field->with_epsilon(c.epsilons[i]);
      const double phi = f.flux_per_cell(c.lattice) / two_pi;
      if (std::abs(phi - c.fluxes[i].value()) > 1e-9 * std::max(1.0, std::abs(phi)))
        throw ConfigError("compare: eps = " + std::to_string(c.epsilons[i]) + " with B12 gives flux " + std::to_string(phi) +
                          ", not " + std::to_string(c.fluxes[i].p) + "/" + std::to_string(c.fluxes[i].q));
    }
  }
  auto rep = compare(c.sym(), c.epsilons, c.fluxes, c.compare_options());
  json runs = json::array();
  for (auto& run : rep.runs)
    runs.push_back({{"epsilon", run.epsilon},
                    {"flux", std::to_string(run.flux.p) + "/" + std::to_string(run.flux.q)},
                    {"merge_tol", run.merge_tol},
                    {"effective", intervals_json(run.effective)},
                    {"direct", intervals_json(run.direct)},
                    {"d_effective_direct", hausdorff_json(run.to_effective)},
                    {"d_direct_unperturbed", hausdorff_json(run.to_unperturbed)},
                    {"gap_window_hits", run.gap_hits},
                    {"dimension", run.dimension}});
  auto report = [](const HausdorffReport& h) {
    json pairs = json::array();
    for (auto& p : h.pairs) pairs.push_back({{"epsilon", p.epsilon}, {"distance", p.distance}, {"flagged", p.flagged}});
    return json{{"pairs", pairs},
                {"C", h.fit.slope},
                {"max_ratio", h.fit.max_ratio},
                {"fit_residual", h.fit.residual},
                {"used", h.fit.used}};
  };
  json j = r.meta();
  j["band"] = c.band + 1;
  j["band_interval"] = interval_json(rep.band);
  j["window"] = interval_json(rep.window);
  j["gap_window"] = interval_json(rep.gap_window);
  j["gap"] = rep.gap;
  j["decay"] = {{"k", rep.decay.k}, {"constant", rep.decay.constant}};
  j["runs"] = runs;
  j["effective_vs_direct"] = report(rep.effective_vs_direct);
  j["direct_vs_unperturbed"] = report(rep.direct_vs_unperturbed);
  write_json(r.file("compare.json"), j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Band structure, effective lattice operators and spectral comparison in weak magnetic fields"};
  app.require_subcommand(1);
  Flags f;
  auto add = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("-c,--config", f.config, "JSON run configuration")->required();
    s->add_option("-o,--output", f.output, "output directory (overrides the config key)");
    return s;
  };
  add("bands", "band functions on the zone grid and band intervals");
  add("section", "smooth Bloch section of one band and its phase log");
  add("grushin", "Grushin inverse residuals at random (xi, lambda)");
  auto* eff = add("effective", "lambda scan of the Peierls lattice operator");
  eff->add_option("--flux", f.flux, "rational flux p/q per cell");
  eff->add_option("--mode", f.mode, "box or bloch");
  eff->add_option("--radius", f.radius, "hopping radius");
  eff->add_option("--window", f.window, "lambda window lo,hi");
  add("direct", "eigenvalues of the full magnetic operator");
  add("compare", "Hausdorff comparison of effective and direct spectra over an eps list");
  add("scan", "lambda scan of E_-+ built from the Grushin problem");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  Run run;
  run.command = app.get_subcommands().front()->get_name();
  try {
    run.cfg = load_config_file(f.config);
    run.out = f.output.empty() ? fs::path(run.cfg.output) : fs::path(f.output);
    std::error_code ec;
    fs::create_directories(run.out, ec);
    if (ec) throw ConfigError("cannot create output directory '" + run.out.string() + "'");
    if (run.command == "bands") return cmd_bands(run);
    if (run.command == "section") return cmd_section(run);
    if (run.command == "grushin") return cmd_grushin(run);
    if (run.command == "effective") return cmd_effective(run, f);
    if (run.command == "direct") return cmd_direct(run);
    if (run.command == "compare") return cmd_compare(run);
    return cmd_scan(run);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error in " << run.command << ": " << e.what() << '\n';
    return 3;
  }
}
