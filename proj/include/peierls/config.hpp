#pragma once

#include <fstream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "pipeline.hpp"

namespace peierls {

using json = nlohmann::json;

// Everything a CLI run needs, already validated.  Band indices are 1-based in the file and
// 0-based here.
struct RunConfig {
  Lattice lattice = Lattice::square(1);
  std::optional<PeriodicSymbol> symbol;
  std::optional<MagneticField> field;
  std::optional<GaugeFunction> chi;

  double cutoff = 10;
  int resolution = 32;
  int n_bands = 4;
  double gap_tol = 1e-6;
  int radius = 8;
  std::optional<double> merge_tol, scan_tol;
  int lambda_points = 400;
  int nk = 16;
  int band = 0;
  std::optional<Interval> window;
  std::optional<RationalFlux> flux;

  std::string effective_mode = "bloch";
  int effective_box = 16;

  std::string direct_mode = "magnetic_bloch";
  int ppc = 16;
  int nk_direct = 4;
  double line_tol = 1e-9;
  int box_n = 0;
  double box_h = 0;

  std::vector<double> epsilons;
  std::vector<RationalFlux> fluxes;
  double pad = 0.5;

  std::optional<double> mollifier;
  int grushin_points = 20;
  unsigned grushin_seed = 1;

  std::string output = ".";
  json raw;

  const PeriodicSymbol& sym() const { return *symbol; }
  VectorPotential potential() const {
    if (!field) throw ConfigError("this command needs a magnetic field (keys B12, epsilon)");
    return VectorPotential(*field, chi);
  }
  CompareOptions compare_options() const {
    CompareOptions o;
    o.band = band;
    o.cutoff = cutoff;
    o.resolution = resolution;
    o.n_bands = n_bands;
    o.radius = radius;
    o.gap_tol = gap_tol;
    o.lambda_points = lambda_points;
    o.scan_tol = scan_tol;
    o.nk_effective = nk;
    o.nk_direct = nk_direct;
    o.ppc = ppc;
    o.line_tol = line_tol;
    o.pad = pad;
    o.merge_tol = merge_tol;
    return o;
  }
};

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

inline Lattice parse_lattice(const json& j) {
  if (!j.is_object() || !j.contains("dim")) throw ConfigError("lattice needs 'dim'");
  const int d = get_or(j, "dim", 0);
  if (d != 1 && d != 2) throw DegenerateLatticeError("lattice dim must be 1 or 2");
  if (!j.contains("basis")) return Lattice::square(d, get_or(j, "period", two_pi));
  auto rows = get_or<std::vector<std::vector<double>>>(j, "basis", {});
  if (static_cast<int>(rows.size()) != d) throw DegenerateLatticeError("basis needs dim rows");
  Lattice lat = Lattice::from_rows(rows);
  if (!(lat.cell_volume() > 1e-12)) throw DegenerateLatticeError("lattice basis is degenerate");
  return lat;
}

inline Coeffs parse_index(const json& j, int dim) {
  auto v = j.get<std::vector<int>>();
  if (static_cast<int>(v.size()) != dim) throw ConfigError("coefficient index needs dim entries");
  return {v[0], dim == 2 ? v[1] : 0};
}

// Either a catalog name or a coefficient table.
inline PeriodicPotential parse_potential(const json& j, const Lattice& lat) {
  if (j.is_number()) return PeriodicPotential::constant(lat, j.get<double>());
  if (!j.is_object()) throw ConfigError("potential must be an object");
  if (j.contains("coefficients")) {
    PeriodicPotential::Table t;
    for (auto& e : j.at("coefficients")) {
      if (!e.contains("index")) throw ConfigError("potential coefficient needs 'index'");
      t[parse_index(e.at("index"), lat.dim())] += cplx(get_or(e, "re", 0.0), get_or(e, "im", 0.0));
    }
    return PeriodicPotential(lat, t);
  }
  const std::string name = get_or<std::string>(j, "name", "zero");
  const double a = get_or(j, "amplitude", 1.0);
  if (name == "zero") return PeriodicPotential::zero(lat);
  if (name == "cosine") return PeriodicPotential::cosine(lat, a);
  if (name == "separable_cosine_2d") return PeriodicPotential::separable_cosine_2d(lat, a);
  throw ConfigError("unknown potential '" + name + "' (catalog: cosine, separable_cosine_2d, zero)");
}

inline PeriodicSymbol parse_symbol(const json& j, const PeriodicPotential& v) {
  const std::string kind = get_or<std::string>(j, "kind", "nonrelativistic");
  if (kind == "nonrelativistic") return {Nonrelativistic{}, v};
  if (kind == "relativistic") return {Relativistic{}, v};
  if (kind != "polynomial") throw ConfigError("unknown symbol kind '" + kind + "'");
  Polynomial p;
  p.order = get_or(j, "order", 0);
  if (!j.contains("terms")) throw ConfigError("polynomial symbol needs 'terms'");
  for (auto& t : j.at("terms")) {
    if (!t.contains("power") || !t.contains("coefficient")) throw ConfigError("polynomial term needs power and coefficient");
    auto pw = t.at("power").get<std::vector<int>>();
    pw.resize(2, 0);
    p.terms.push_back({{pw[0], pw[1]}, parse_potential(t.at("coefficient"), v.lattice())});
  }
  return {p, v};
}

inline GaugeFunction parse_chi(const json& j) {
  const std::string kind = get_or<std::string>(j, "kind", "quadratic");
  if (kind == "harmonic") return GaugeFunction::harmonic(get_or(j, "amplitude", 0.0), get_or(j, "k1", 0.0), get_or(j, "k2", 0.0));
  if (kind != "quadratic" && kind != "linear") throw ConfigError("unknown gauge function '" + kind + "'");
  return GaugeFunction::quadratic(get_or(j, "c1", 0.0), get_or(j, "c2", 0.0), get_or(j, "c11", 0.0), get_or(j, "c12", 0.0),
                                  get_or(j, "c22", 0.0));
}

inline MagneticField parse_field(const json& j, const Lattice& lat) {
  if (lat.dim() != 2) throw ConfigError("a magnetic field needs a 2d lattice");
  const double eps = get_or(j, "epsilon", 1.0);
  if (j.contains("profile"))
    return MagneticField::smooth(get_or<std::string>(j, "profile", ""), get_or(j, "B12", 0.0), get_or(j, "wavenumber", 1.0), eps);
  if (!j.contains("B12")) throw ConfigError("field needs 'B12'");
  const double b12 = get_or(j, "B12", 0.0);
  Mat b(2, 2);
  b << get_or(j, "B11", 0.0), b12, get_or(j, "B21", -b12), get_or(j, "B22", 0.0);
  return MagneticField::from_matrix(b, eps);
}

inline Interval parse_interval(const json& j, const char* what) {
  auto v = j.get<std::vector<double>>();
  if (v.size() != 2 || !(v[0] < v[1])) throw ConfigError(std::string(what) + " must be [lo, hi] with lo < hi");
  return {v[0], v[1]};
}

}  // namespace detail

inline RunConfig load_config(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  RunConfig c;
  c.raw = j;
  try {
    c.lattice = detail::parse_lattice(j.value("lattice", json::object({{"dim", 1}})));
    auto v = detail::parse_potential(j.value("potential", json::object()), c.lattice);
    c.symbol = detail::parse_symbol(j.value("symbol", json::object()), v);
    if (j.contains("field")) {
      const json& f = j.at("field");
      c.field = detail::parse_field(f, c.lattice);
      const std::string gauge = detail::get_or<std::string>(f, "gauge", "transversal");
      if (gauge == "transversal_plus_gradient") {
        if (!f.contains("chi")) throw ConfigError("gauge transversal_plus_gradient needs 'chi'");
        c.chi = detail::parse_chi(f.at("chi"));
      } else if (gauge != "transversal") {
        throw ConfigError("unknown gauge '" + gauge + "'");
      }
    }

    const json n = j.value("numerics", json::object());
    c.cutoff = detail::get_or(n, "cutoff", c.cutoff);
    c.resolution = detail::get_or(n, "resolution", c.resolution);
    c.n_bands = detail::get_or(n, "n_bands", c.n_bands);
    c.gap_tol = detail::get_or(n, "gap_tol", c.gap_tol);
    c.radius = detail::get_or(n, "radius", c.radius);
    if (n.contains("merge_tol")) c.merge_tol = detail::get_or(n, "merge_tol", 0.0);
    if (n.contains("scan_tol")) c.scan_tol = detail::get_or(n, "scan_tol", 0.0);
    c.lambda_points = detail::get_or(n, "lambda_points", c.lambda_points);
    c.nk = detail::get_or(n, "nk", c.nk);
    c.ppc = detail::get_or(n, "ppc", c.ppc);
    c.nk_direct = detail::get_or(n, "nk_direct", c.nk_direct);
    c.line_tol = detail::get_or(n, "line_tol", c.line_tol);
    c.pad = detail::get_or(n, "pad", c.pad);
    if (n.contains("mollifier")) c.mollifier = detail::get_or(n, "mollifier", 0.0);

    c.band = detail::get_or(j, "band", 1) - 1;
    if (c.band < 0) throw ConfigError("band is 1-based and must be >= 1");
    if (j.contains("window")) c.window = detail::parse_interval(j.at("window"), "window");
    if (j.contains("flux")) c.flux = parse_flux(detail::get_or<std::string>(j, "flux", ""));

    const json e = j.value("effective", json::object());
    c.effective_mode = detail::get_or<std::string>(e, "mode", c.effective_mode);
    if (c.effective_mode != "bloch" && c.effective_mode != "box") throw ConfigError("effective.mode must be box or bloch");
    c.effective_box = detail::get_or(e, "box", c.effective_box);

    const json d = j.value("direct", json::object());
    c.direct_mode = detail::get_or<std::string>(d, "mode", c.direct_mode);
    if (c.direct_mode != "zero_field_bloch" && c.direct_mode != "magnetic_bloch" && c.direct_mode != "box")
      throw ConfigError("direct.mode must be zero_field_bloch, magnetic_bloch or box");
    c.box_n = detail::get_or(d, "n", c.box_n);
    c.box_h = detail::get_or(d, "h", c.box_h);

    const json cmp = j.value("compare", json::object());
    c.epsilons = detail::get_or<std::vector<double>>(cmp, "epsilons", {});
    for (auto& s : detail::get_or<std::vector<std::string>>(cmp, "fluxes", {})) c.fluxes.push_back(parse_flux(s));

    const json g = j.value("grushin", json::object());
    c.grushin_points = detail::get_or(g, "points", c.grushin_points);
    c.grushin_seed = detail::get_or(g, "seed", c.grushin_seed);

    c.output = detail::get_or<std::string>(j, "output", c.output);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed configuration: ") + ex.what());
  }

  // H.5: ellipticity on a sample of (y, eta), starting beyond the potential's size
  double vmax = 0;
  for (auto& [g, a] : c.symbol->potential().coeffs()) vmax += std::abs(a);
  auto ell = symbol_ellipticity_check(*c.symbol, 1.0 + 2 * vmax, 8);
  if (!ell.ok) throw ConfigError("H.5: symbol is not elliptic on the sample (min p/|eta|^m = " + std::to_string(ell.constant) + ")");
  if (c.resolution < 2 || c.n_bands < 1 || c.cutoff <= 0) throw ConfigError("numerics: resolution >= 2, n_bands >= 1, cutoff > 0");
  if (c.band >= c.n_bands) throw ConfigError("band exceeds n_bands");
  if (c.flux && c.field) {
    const double phi = c.field->flux_per_cell(c.lattice) / two_pi;
    if (std::abs(phi - c.flux->value()) > 1e-9 * std::max(1.0, std::abs(phi)))
      throw ConfigError("flux " + std::to_string(c.flux->p) + "/" + std::to_string(c.flux->q) +
                        " does not match eps * B12 * |E| / 2pi = " + std::to_string(phi));
  }
  if (!c.epsilons.empty() && c.fluxes.size() != c.epsilons.size())
    throw ConfigError("compare.fluxes needs one rational flux per epsilon");
  return c;
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& ex) {
    throw ConfigError("configuration '" + path + "' is not valid JSON: " + ex.what());
  }
  return load_config(j);
}

}  // namespace peierls
