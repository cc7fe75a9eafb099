#pragma once
// Plain-text emission and strict ingestion: JSON for specs, configs, and
// reports; CSV for tables; Matrix Market for assembled operators; SVG for
// line plots. Deterministic on purpose — sorted JSON keys, shortest
// round-trip doubles, %.17g in CSV, fixed plot geometry — so identical runs
// diff clean byte for byte.

#include <array>
#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbarlab/conditions.hpp"
#include "dbarlab/diagnostics.hpp"
#include "dbarlab/operators.hpp"
#include "dbarlab/property_p.hpp"
#include "dbarlab/spectral.hpp"
#include "dbarlab/weight.hpp"

namespace dbarlab {

using json = nlohmann::json;

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& ctx) {
  if (!j.is_object()) throw config_error(ctx + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) { known = true; break; }
    if (!known)
      throw config_error(ctx + ": unknown key \"" + item.key() + "\"");
  }
}

inline const json& require_key(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object()) throw config_error(ctx + ": expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw config_error(ctx + ": missing key \"" + key + "\"");
  return *it;
}

template <class T>
T get_as(const json& j, const char* key, const std::string& ctx) {
  try {
    return require_key(j, key, ctx).get<T>();
  } catch (const json::exception& e) {
    throw config_error(ctx + ": bad value for \"" + key + "\": " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& ctx) {
  if (!j.is_object()) throw config_error(ctx + ": expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw config_error(ctx + ": bad value for \"" + key + "\": " + e.what());
  }
}

// infinities are not representable in JSON; emit them as null
inline json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

} // namespace detail

// ---------------------------------------------------------------------------
// weight / grid / domain / family

inline json json_of(const weight_spec& w) {
  json terms = json::array();
  for (const auto& t : w.terms()) {
    json jt;
    jt["kind"] = (t.kind == term_kind::radial) ? "radial" : "coordinate";
    jt["a"] = t.a;
    jt["m"] = t.m;
    if (t.kind == term_kind::coordinate) jt["j"] = t.j;
    terms.push_back(jt);
  }
  json j;
  j["n"] = w.n();
  j["terms"] = terms;
  return j;
}

inline weight_spec weight_from_json(const json& j, const std::string& ctx = "weight") {
  detail::check_keys(j, {"n", "terms"}, ctx);
  const int n = detail::get_as<int>(j, "n", ctx);
  const json& jt = detail::require_key(j, "terms", ctx);
  if (!jt.is_array() || jt.empty())
    throw config_error(ctx + ": \"terms\" must be a nonempty array");
  std::vector<weight_term> terms;
  for (const auto& e : jt) {
    detail::check_keys(e, {"kind", "a", "m", "j"}, ctx + ".terms");
    weight_term t;
    const auto kind = detail::get_as<std::string>(e, "kind", ctx + ".terms");
    if (kind == "radial") t.kind = term_kind::radial;
    else if (kind == "coordinate") t.kind = term_kind::coordinate;
    else throw config_error(ctx + ": term kind must be \"radial\" or \"coordinate\"");
    t.a = detail::get_as<double>(e, "a", ctx + ".terms");
    t.m = detail::get_as<int>(e, "m", ctx + ".terms");
    t.j = detail::get_or<int>(e, "j", 1, ctx + ".terms");
    terms.push_back(t);
  }
  return weight_spec(n, std::move(terms)); // constructor re-validates
}

inline json json_of(const grid_spec& g) {
  json j;
  j["n"] = g.n;
  j["L"] = g.L;
  j["N"] = g.N;
  return j;
}

inline grid_spec grid_from_json(const json& j, const std::string& ctx = "grid") {
  detail::check_keys(j, {"n", "L", "N"}, ctx);
  grid_spec g;
  g.n = detail::get_as<int>(j, "n", ctx);
  g.L = detail::get_as<double>(j, "L", ctx);
  g.N = detail::get_as<int>(j, "N", ctx);
  return g;
}

inline json json_of(const domain_spec& d) {
  json j;
  j["kind"] = to_string(d.kind);
  j["n"] = d.n;
  switch (d.kind) {
    case domain_kind::ball: j["radius"] = d.radius; break;
    case domain_kind::ellipsoid: j["semi_axes"] = {d.semi_axes[0], d.semi_axes[1]}; break;
    case domain_kind::pball: j["p"] = d.p; break;
  }
  return j;
}

inline domain_spec domain_from_json(const json& j, const std::string& ctx = "domain") {
  detail::check_keys(j, {"kind", "n", "radius", "semi_axes", "p"}, ctx);
  domain_spec d;
  const auto kind = detail::get_as<std::string>(j, "kind", ctx);
  if (kind == "ball") d.kind = domain_kind::ball;
  else if (kind == "ellipsoid") d.kind = domain_kind::ellipsoid;
  else if (kind == "pball") d.kind = domain_kind::pball;
  else throw config_error(ctx + ": kind must be ball | ellipsoid | pball");
  d.n = detail::get_or<int>(j, "n", 2, ctx);
  d.radius = detail::get_or<double>(j, "radius", 1.0, ctx);
  const auto axes = detail::get_or<std::vector<double>>(
      j, "semi_axes", {1.0, 1.0}, ctx);
  if (axes.size() != 2) throw config_error(ctx + ": semi_axes needs two entries");
  d.semi_axes = {axes[0], axes[1]};
  d.p = detail::get_or<int>(j, "p", 1, ctx);
  d.validate();
  return d;
}

inline json json_of(const weight_family& f) {
  json j;
  j["kind"] = to_string(f.kind);
  j["base"] = json_of(f.base);
  return j;
}

inline weight_family family_from_json(const json& j, const std::string& ctx = "family") {
  detail::check_keys(j, {"kind", "base"}, ctx);
  const auto kind = detail::get_as<std::string>(j, "kind", ctx);
  family_kind k;
  if (kind == "scaled") k = family_kind::scaled;
  else if (kind == "fixed") k = family_kind::fixed;
  else throw config_error(ctx + ": family kind must be scaled | fixed");
  return weight_family(k, weight_from_json(detail::require_key(j, "base", ctx),
                                           ctx + ".base"));
}

// ---------------------------------------------------------------------------
// solver / condition / probe configs

inline json json_of(const solver_config& c) {
  json j;
  j["k"] = c.k;
  j["tol"] = c.tol;
  j["max_iter"] = c.max_iter;
  j["dense_fallback_dim"] = c.dense_fallback_dim;
  j["seed"] = c.seed;
  j["count_thresholds"] = c.count_thresholds;
  return j;
}

inline solver_config solver_from_json(const json& j, const std::string& ctx = "solver") {
  detail::check_keys(j, {"k", "tol", "max_iter", "dense_fallback_dim", "seed",
                         "count_thresholds"}, ctx);
  solver_config c;
  c.k = detail::get_or<int>(j, "k", c.k, ctx);
  c.tol = detail::get_or<double>(j, "tol", c.tol, ctx);
  c.max_iter = detail::get_or<int>(j, "max_iter", c.max_iter, ctx);
  c.dense_fallback_dim =
      detail::get_or<int>(j, "dense_fallback_dim", c.dense_fallback_dim, ctx);
  c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed, ctx);
  c.count_thresholds = detail::get_or<std::vector<double>>(
      j, "count_thresholds", c.count_thresholds, ctx);
  c.validate();
  return c;
}

inline json json_of(const condition_config& c) {
  json j;
  j["condition"] = to_string(c.condition);
  j["radii"] = c.radii;
  j["samples_per_sphere"] = c.samples_per_sphere;
  j["star_floor"] = c.star_floor;
  j["growth_ratio"] = c.growth_ratio;
  j["growth_floor"] = c.growth_floor;
  j["seed"] = c.seed;
  return j;
}

inline condition_config condition_from_json(const json& j,
                                            const std::string& ctx = "condition") {
  detail::check_keys(j, {"condition", "radii", "samples_per_sphere", "star_floor",
                         "growth_ratio", "growth_floor", "seed"}, ctx);
  condition_config c;
  const auto cs = detail::get_or<std::string>(j, "condition", "double_star", ctx);
  if (cs == "star") c.condition = growth_condition::star;
  else if (cs == "double_star") c.condition = growth_condition::double_star;
  else throw config_error(ctx + ": condition must be star | double_star");
  c.radii = detail::get_or<std::vector<double>>(j, "radii", c.radii, ctx);
  c.samples_per_sphere =
      detail::get_or<int>(j, "samples_per_sphere", c.samples_per_sphere, ctx);
  c.star_floor = detail::get_or<double>(j, "star_floor", c.star_floor, ctx);
  c.growth_ratio = detail::get_or<double>(j, "growth_ratio", c.growth_ratio, ctx);
  c.growth_floor = detail::get_or<double>(j, "growth_floor", c.growth_floor, ctx);
  c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed, ctx);
  return c;
}

inline json json_of(const probe_config& c) {
  json j;
  j["solver"] = json_of(c.solver);
  j["condition"] = json_of(c.condition);
  j["tail_radii"] = c.tail_radii;
  j["shift_steps"] = c.shift_steps;
  j["decay_threshold"] = c.decay_threshold;
  return j;
}

inline probe_config probe_from_json(const json& j, const std::string& ctx = "probe") {
  detail::check_keys(j, {"solver", "condition", "tail_radii", "shift_steps",
                         "decay_threshold"}, ctx);
  probe_config c;
  if (j.contains("solver")) c.solver = solver_from_json(j["solver"], ctx + ".solver");
  if (j.contains("condition"))
    c.condition = condition_from_json(j["condition"], ctx + ".condition");
  c.tail_radii = detail::get_or<std::vector<double>>(j, "tail_radii", c.tail_radii, ctx);
  c.shift_steps = detail::get_or<std::vector<int>>(j, "shift_steps", c.shift_steps, ctx);
  c.decay_threshold =
      detail::get_or<double>(j, "decay_threshold", c.decay_threshold, ctx);
  return c;
}

// ---------------------------------------------------------------------------
// reports (emission only; a report is re-loadable as generic JSON)

inline json json_of(const condition_verdict& v) {
  json j;
  j["condition"] = to_string(v.condition);
  j["radii"] = v.radii;
  j["inf_per_radius"] = v.inf_per_radius;
  j["axis_min_mu"] = v.axis_min_mu;
  j["verdict"] = to_string(v.verdict);
  j["margin"] = v.margin;
  return j;
}

inline json json_of(const spectrum_report& r) {
  json lambdas = json::array(), residuals = json::array(), mult = json::array();
  for (const auto& p : r.pairs) {
    lambdas.push_back(p.lambda);
    residuals.push_back(p.residual);
    mult.push_back(p.multiplicity);
  }
  json counts = json::array();
  for (const auto& [thr, cnt] : r.counts_below) {
    json e;
    e["threshold"] = thr;
    e["count"] = cnt;
    counts.push_back(e);
  }
  json j;
  j["lambdas"] = lambdas;
  j["residuals"] = residuals;
  j["multiplicities"] = mult;
  j["neumann_norm_estimate"] = detail::finite_or_null(r.neumann_norm_estimate);
  j["inf_grid_mu"] = r.inf_grid_mu;
  j["lower_bound_margin"] = r.lower_bound_margin;
  j["counts_below"] = counts;
  j["dense_path"] = r.dense_path;
  j["iterations"] = r.iterations;
  return j;
}

inline json json_of(const kohn_morrey_terms& t) {
  json j;
  j["dbar_sq"] = t.dbar_sq;
  j["dbar_star_sq"] = t.dbar_star_sq;
  j["twist_sq"] = t.twist_sq;
  j["levi"] = t.levi;
  j["residual"] = t.residual;
  j["margin"] = t.margin;
  return j;
}

inline json json_of(const tail_bound_result& t) {
  json j;
  j["R"] = t.R;
  j["q"] = t.q;
  j["inf_shell_mu"] = t.inf_shell_mu;
  j["bound"] = detail::finite_or_null(t.bound);
  j["tail"] = t.tail;
  j["margin"] = detail::finite_or_null(t.margin);
  j["vacuous"] = t.vacuous;
  return j;
}

inline json json_of(const compactness_diagnosis& d) {
  json tails = json::array();
  for (const auto& r : d.tails) {
    json e;
    e["R"] = r.R;
    e["max_tail"] = r.max_tail;
    e["bound"] = detail::finite_or_null(r.bound);
    e["vacuous"] = r.vacuous;
    tails.push_back(e);
  }
  json shifts = json::array();
  for (const auto& s : d.shifts) {
    json e;
    e["abs_shift"] = s.abs_shift;
    e["max_defect"] = s.max_defect;
    shifts.push_back(e);
  }
  json j;
  j["growth"] = json_of(d.growth);
  j["lambdas"] = d.lambdas;
  j["residuals"] = d.residuals;
  j["dense_path"] = d.dense_path;
  j["tails"] = tails;
  j["shifts"] = shifts;
  j["tails_decay"] = d.tails_decay;
  j["truncation_mass"] = d.truncation_mass;
  j["verdict"] = to_string(d.verdict);
  j["reason"] = d.reason;
  return j;
}

inline json json_of(const property_p_certificate& c) {
  json rows = json::array();
  for (const auto& r : c.rows) {
    json e;
    e["M"] = r.M;
    e["min_margin"] = r.min_margin;
    e["p_holds"] = r.p_holds;
    e["c_tilde"] = r.c_tilde;
    e["c_infinite"] = r.c_infinite;
    rows.push_back(e);
  }
  json j;
  j["domain"] = c.domain_desc;
  j["family"] = c.family_desc;
  j["sample_count"] = c.sample_count;
  j["rows"] = rows;
  j["p_all"] = c.p_all;
  j["max_c"] = c.max_c;
  j["any_c_infinite"] = c.any_c_infinite;
  j["c_max"] = c.c_max;
  j["p_tilde"] = c.p_tilde;
  j["scope_note"] = c.scope_note;
  return j;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string fmt17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct csv_table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::string to_csv(const csv_table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (i) out += ',';
    out += t.header[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

/// Stacked-order field dump (index, re, im); index runs components-outer,
/// grid points inner, row-major over the real axes.
inline csv_table field_csv(const form_field& u) {
  csv_table t;
  t.header = {"index", "re", "im"};
  const std::int64_t P = u.grid().points();
  t.rows.reserve(static_cast<std::size_t>(u.components()) * P);
  for (int c = 0; c < u.components(); ++c)
    for (std::int64_t p = 0; p < P; ++p) {
      const cplx v = u.comp(c)[p];
      t.rows.push_back(std::vector<std::string>{
          std::to_string(c * P + p), fmt17(v.real()), fmt17(v.imag())});
    }
  return t;
}

// ---------------------------------------------------------------------------
// Matrix Market (coordinate, complex, general; 1-based indices)

inline std::string to_matrix_market(const sparse_cplx& A) {
  std::string out = "%%MatrixMarket matrix coordinate complex general\n";
  char line[160];
  std::snprintf(line, sizeof line, "%lld %lld %lld\n",
                static_cast<long long>(A.rows()), static_cast<long long>(A.cols()),
                static_cast<long long>(A.nonZeros()));
  out += line;
  for (int k = 0; k < A.outerSize(); ++k)
    for (sparse_cplx::InnerIterator it(A, k); it; ++it) {
      std::snprintf(line, sizeof line, "%lld %lld %.17g %.17g\n",
                    static_cast<long long>(it.row() + 1),
                    static_cast<long long>(it.col() + 1), it.value().real(),
                    it.value().imag());
      out += line;
    }
  return out;
}

// ---------------------------------------------------------------------------
// SVG line plots (fixed 640x420 canvas, deterministic layout)

struct plot_series {
  std::string name;
  std::vector<std::array<double, 2>> pts;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fmt2(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

inline std::string fmt_tick(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

} // namespace detail

inline std::string line_plot_svg(const std::string& title, const std::string& xlabel,
                                 const std::string& ylabel,
                                 const std::vector<plot_series>& series) {
  constexpr double W = 640, H = 420;
  constexpr double x0 = 64, x1 = 616, y0 = 372, y1 = 40; // y grows downward
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool have = false;
  for (const auto& s : series)
    for (const auto& p : s.pts) {
      if (!std::isfinite(p[0]) || !std::isfinite(p[1])) continue;
      if (!have) { xmin = xmax = p[0]; ymin = ymax = p[1]; have = true; continue; }
      xmin = std::min(xmin, p[0]); xmax = std::max(xmax, p[0]);
      ymin = std::min(ymin, p[1]); ymax = std::max(ymax, p[1]);
    }
  if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
  if (ymax - ymin < 1e-12) {
    const double pad = std::max(0.5, std::abs(ymax) * 0.5);
    ymin -= pad; ymax += pad;
  }
  const auto px = [&](double x) { return x0 + (x - xmin) / (xmax - xmin) * (x1 - x0); };
  const auto py = [&](double y) { return y0 + (y - ymin) / (ymax - ymin) * (y1 - y0); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  constexpr int npal = 6;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
         "viewBox=\"0 0 640 420\">\n";
  svg += "<rect width=\"640\" height=\"420\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" + detail::xml_escape(title) + "</text>\n";
  // frame + ticks + grid
  svg += "<rect x=\"" + detail::fmt2(x0) + "\" y=\"" + detail::fmt2(y1) + "\" width=\"" +
         detail::fmt2(x1 - x0) + "\" height=\"" + detail::fmt2(y0 - y1) +
         "\" fill=\"none\" stroke=\"#444444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double tx = xmin + (xmax - xmin) * i / 4.0;
    const double ty = ymin + (ymax - ymin) * i / 4.0;
    const double gx = px(tx), gy = py(ty);
    if (i > 0 && i < 4) {
      svg += "<line x1=\"" + detail::fmt2(gx) + "\" y1=\"" + detail::fmt2(y1) +
             "\" x2=\"" + detail::fmt2(gx) + "\" y2=\"" + detail::fmt2(y0) +
             "\" stroke=\"#dddddd\"/>\n";
      svg += "<line x1=\"" + detail::fmt2(x0) + "\" y1=\"" + detail::fmt2(gy) +
             "\" x2=\"" + detail::fmt2(x1) + "\" y2=\"" + detail::fmt2(gy) +
             "\" stroke=\"#dddddd\"/>\n";
    }
    svg += "<text x=\"" + detail::fmt2(gx) + "\" y=\"" + detail::fmt2(y0 + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::fmt_tick(tx) + "</text>\n";
    svg += "<text x=\"" + detail::fmt2(x0 - 6) + "\" y=\"" + detail::fmt2(gy + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::fmt_tick(ty) + "</text>\n";
  }
  svg += "<text x=\"" + detail::fmt2((x0 + x1) / 2) + "\" y=\"408\" "
         "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         detail::xml_escape(xlabel) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + detail::fmt2((y0 + y1) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 16 " + detail::fmt2((y0 + y1) / 2) + ")\">" +
         detail::xml_escape(ylabel) + "</text>\n";
  // data
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % npal];
    std::string pts;
    for (const auto& p : series[s].pts) {
      if (!std::isfinite(p[0]) || !std::isfinite(p[1])) continue;
      if (!pts.empty()) pts += ' ';
      pts += detail::fmt2(px(p[0])) + "," + detail::fmt2(py(p[1]));
    }
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    for (const auto& p : series[s].pts) {
      if (!std::isfinite(p[0]) || !std::isfinite(p[1])) continue;
      svg += "<circle cx=\"" + detail::fmt2(px(p[0])) + "\" cy=\"" +
             detail::fmt2(py(p[1])) + "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
    }
    // legend entry
    const double ly = y1 + 14 + 16 * static_cast<double>(s);
    svg += "<rect x=\"" + detail::fmt2(x1 - 150) + "\" y=\"" + detail::fmt2(ly - 9) +
           "\" width=\"10\" height=\"10\" fill=\"" + std::string(color) + "\"/>\n";
    svg += "<text x=\"" + detail::fmt2(x1 - 136) + "\" y=\"" + detail::fmt2(ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::xml_escape(series[s].name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

} // namespace dbarlab
