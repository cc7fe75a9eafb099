#pragma once
// Experiment orchestration: a schema-validated config selects one of six
// experiment kinds, run_experiment dispatches to the owning module and
// returns a versioned report plus plain-text artifacts (JSON, CSV, optional
// SVG). Identical config + seed reproduces identical bytes; wall-clock data
// is quarantined in a single "metadata" field so reports stay diffable.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dbarlab/diagnostics.hpp"
#include "dbarlab/property_p.hpp"
#include "dbarlab/serialize.hpp"
#include "dbarlab/spectral.hpp"

namespace dbarlab {

enum class experiment_kind { check_weight, kohn_morrey, spectrum, tail, probe, property_p };

inline const char* to_string(experiment_kind k) {
  switch (k) {
    case experiment_kind::check_weight: return "check-weight";
    case experiment_kind::kohn_morrey: return "kohn-morrey";
    case experiment_kind::spectrum: return "spectrum";
    case experiment_kind::tail: return "tail";
    case experiment_kind::probe: return "probe";
    case experiment_kind::property_p: return "property-p";
  }
  return "?";
}

inline experiment_kind experiment_kind_from_string(const std::string& s) {
  if (s == "check-weight") return experiment_kind::check_weight;
  if (s == "kohn-morrey") return experiment_kind::kohn_morrey;
  if (s == "spectrum") return experiment_kind::spectrum;
  if (s == "tail") return experiment_kind::tail;
  if (s == "probe") return experiment_kind::probe;
  if (s == "property-p") return experiment_kind::property_p;
  throw config_error("unknown experiment kind \"" + s + "\"");
}

inline probe_form_kind form_kind_from_string(const std::string& s) {
  if (s == "gaussian-bump") return probe_form_kind::gaussian_bump;
  if (s == "polynomial-bump") return probe_form_kind::polynomial_bump;
  if (s == "random-smooth") return probe_form_kind::random_smooth;
  throw config_error("unknown form kind \"" + s + "\"");
}

/// One experiment: kind picks the lane, the other fields feed it. Parsed
/// strictly — unknown keys are rejected before any computation starts.
struct experiment_config {
  experiment_kind kind = experiment_kind::check_weight;
  std::string label;        // output file stem; defaults to the kind string
  std::uint64_t seed = 1;
  std::string output_dir = ".";

  std::optional<weight_spec> weight;
  grid_spec grid{1, 4.0, 41};
  solver_config solver;
  condition_config condition;
  probe_config probe;
  std::vector<double> tail_radii = {1.0, 1.5, 2.0, 3.0};
  std::vector<int> levels;  // kohn-morrey grid sizes, coarse to fine
  probe_form_kind form = probe_form_kind::gaussian_bump;
  std::uint64_t form_seed = 7;
  bool export_operator = false;

  std::optional<domain_spec> domain;
  std::optional<weight_family> family;
  std::vector<double> M_list = {1.0, 10.0, 100.0};
  int boundary_samples = 64;
  double c_max = 10.0;

  std::string stem() const { return label.empty() ? to_string(kind) : label; }
};

inline json json_of(const experiment_config& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["label"] = c.stem();
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  switch (c.kind) {
    case experiment_kind::check_weight:
      j["weight"] = json_of(*c.weight);
      j["condition"] = json_of(c.condition);
      break;
    case experiment_kind::kohn_morrey:
      j["weight"] = json_of(*c.weight);
      j["grid"] = json_of(c.grid);
      j["levels"] = c.levels;
      j["form"] = to_string(c.form);
      j["form_seed"] = c.form_seed;
      break;
    case experiment_kind::spectrum:
      j["weight"] = json_of(*c.weight);
      j["grid"] = json_of(c.grid);
      j["solver"] = json_of(c.solver);
      j["export_operator"] = c.export_operator;
      break;
    case experiment_kind::tail:
      j["weight"] = json_of(*c.weight);
      j["grid"] = json_of(c.grid);
      j["solver"] = json_of(c.solver);
      j["tail_radii"] = c.tail_radii;
      break;
    case experiment_kind::probe:
      j["weight"] = json_of(*c.weight);
      j["grid"] = json_of(c.grid);
      j["probe"] = json_of(c.probe);
      break;
    case experiment_kind::property_p:
      j["domain"] = json_of(*c.domain);
      j["family"] = json_of(*c.family);
      j["M_list"] = c.M_list;
      j["boundary_samples"] = c.boundary_samples;
      j["c_max"] = c.c_max;
      break;
  }
  return j;
}

/// Strict parse. force_seed (the CLI --seed) replaces every seed in the
/// config, including sub-config and form seeds, for a full reseed.
inline experiment_config parse_experiment(const json& j,
                                          std::optional<std::uint64_t> force_seed = {}) {
  const std::string ctx = "config";
  experiment_config c;
  c.kind = experiment_kind_from_string(detail::get_as<std::string>(j, "kind", ctx));
  switch (c.kind) {
    case experiment_kind::check_weight:
      detail::check_keys(j, {"kind", "label", "seed", "output_dir", "weight",
                             "condition"}, ctx);
      break;
    case experiment_kind::kohn_morrey:
      detail::check_keys(j, {"kind", "label", "seed", "output_dir", "weight", "grid",
                             "levels", "form", "form_seed"}, ctx);
      break;
    case experiment_kind::spectrum:
      detail::check_keys(j, {"kind", "label", "seed", "output_dir", "weight", "grid",
                             "solver", "export_operator"}, ctx);
      break;
    case experiment_kind::tail:
      detail::check_keys(j, {"kind", "label", "seed", "output_dir", "weight", "grid",
                             "solver", "tail_radii"}, ctx);
      break;
    case experiment_kind::probe:
      detail::check_keys(j, {"kind", "label", "seed", "output_dir", "weight", "grid",
                             "probe"}, ctx);
      break;
    case experiment_kind::property_p:
      detail::check_keys(j, {"kind", "label", "seed", "output_dir", "domain", "family",
                             "M_list", "boundary_samples", "c_max"}, ctx);
      break;
  }
  c.label = detail::get_or<std::string>(j, "label", "", ctx);
  c.seed = detail::get_or<std::uint64_t>(j, "seed", 1, ctx);
  c.output_dir = detail::get_or<std::string>(j, "output_dir", ".", ctx);

  const bool needs_weight = c.kind != experiment_kind::property_p;
  if (needs_weight)
    c.weight = weight_from_json(detail::require_key(j, "weight", ctx), "weight");

  switch (c.kind) {
    case experiment_kind::check_weight:
      if (j.contains("condition"))
        c.condition = condition_from_json(j["condition"], "condition");
      if (!j.contains("condition") || !j["condition"].contains("seed"))
        c.condition.seed = c.seed;
      break;
    case experiment_kind::kohn_morrey: {
      c.grid = grid_from_json(detail::require_key(j, "grid", ctx));
      c.levels = detail::get_or<std::vector<int>>(j, "levels", {c.grid.N}, ctx);
      if (c.levels.empty()) throw config_error("config: levels must be nonempty");
      c.form = form_kind_from_string(
          detail::get_or<std::string>(j, "form", "gaussian-bump", ctx));
      c.form_seed = detail::get_or<std::uint64_t>(j, "form_seed", 7, ctx);
      break;
    }
    case experiment_kind::spectrum:
      c.grid = grid_from_json(detail::require_key(j, "grid", ctx));
      if (j.contains("solver")) c.solver = solver_from_json(j["solver"], "solver");
      if (!j.contains("solver") || !j["solver"].contains("seed"))
        c.solver.seed = c.seed;
      c.export_operator = detail::get_or<bool>(j, "export_operator", false, ctx);
      break;
    case experiment_kind::tail:
      c.grid = grid_from_json(detail::require_key(j, "grid", ctx));
      if (j.contains("solver")) c.solver = solver_from_json(j["solver"], "solver");
      if (!j.contains("solver") || !j["solver"].contains("seed"))
        c.solver.seed = c.seed;
      c.tail_radii =
          detail::get_or<std::vector<double>>(j, "tail_radii", c.tail_radii, ctx);
      break;
    case experiment_kind::probe:
      c.grid = grid_from_json(detail::require_key(j, "grid", ctx));
      if (j.contains("probe")) c.probe = probe_from_json(j["probe"], "probe");
      if (!j.contains("probe") || !j["probe"].contains("solver") ||
          !j["probe"]["solver"].contains("seed"))
        c.probe.solver.seed = c.seed;
      if (!j.contains("probe") || !j["probe"].contains("condition") ||
          !j["probe"]["condition"].contains("seed"))
        c.probe.condition.seed = c.seed;
      break;
    case experiment_kind::property_p:
      c.domain = domain_from_json(detail::require_key(j, "domain", ctx));
      c.family = family_from_json(detail::require_key(j, "family", ctx));
      c.M_list = detail::get_or<std::vector<double>>(j, "M_list", c.M_list, ctx);
      if (c.M_list.empty()) throw config_error("config: M_list must be nonempty");
      c.boundary_samples = detail::get_or<int>(j, "boundary_samples", 64, ctx);
      c.c_max = detail::get_or<double>(j, "c_max", 10.0, ctx);
      break;
  }
  if (force_seed) {
    c.seed = *force_seed;
    c.solver.seed = *force_seed;
    c.condition.seed = *force_seed;
    c.probe.solver.seed = *force_seed;
    c.probe.condition.seed = *force_seed;
    c.form_seed = *force_seed;
  }
  return c;
}

// ---------------------------------------------------------------------------
// reports

inline constexpr const char* report_schema = "lab-report/1";

struct run_report {
  std::string schema = report_schema;
  std::string kind;
  std::string label;
  json config;   // normalized echo of the parsed config
  json results;  // per-operation payload
  std::vector<std::string> warnings;
  json metadata; // timestamp + wall-clock timings; excluded from diffs
};

inline json json_of(const run_report& r) {
  json j;
  j["schema"] = r.schema;
  j["kind"] = r.kind;
  j["label"] = r.label;
  j["config"] = r.config;
  j["results"] = r.results;
  j["warnings"] = r.warnings;
  j["metadata"] = r.metadata;
  return j;
}

inline run_report report_from_json(const json& j) {
  const std::string ctx = "report";
  detail::check_keys(j, {"schema", "kind", "label", "config", "results", "warnings",
                         "metadata"}, ctx);
  run_report r;
  r.schema = detail::get_as<std::string>(j, "schema", ctx);
  if (r.schema != report_schema)
    throw config_error("report: unsupported schema \"" + r.schema + "\"");
  r.kind = detail::get_as<std::string>(j, "kind", ctx);
  r.label = detail::get_or<std::string>(j, "label", "", ctx);
  r.config = detail::require_key(j, "config", ctx);
  r.results = detail::require_key(j, "results", ctx);
  r.warnings = detail::get_or<std::vector<std::string>>(j, "warnings", {}, ctx);
  r.metadata = detail::get_or<json>(j, "metadata", json::object(), ctx);
  return r;
}

struct text_artifact {
  std::string filename;
  std::string content;
};

struct run_output {
  run_report report;
  std::vector<text_artifact> files; // report.json plus tables/plots
};

namespace detail {

inline void add_warning(std::vector<std::string>& w, const std::string& msg) {
  for (const auto& s : w)
    if (s == msg) return; // each condition reported exactly once
  w.push_back(msg);
}

inline std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[80];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min,
                tm.tm_sec);
  return buf;
}

// Relative e^{-phi} mass outside the box, estimated by trapezoid sums at the
// grid spacing over [-3L, 3L]^{2n}. This is the resolution-limit check for
// the zero-extension model: compact support is only an approximation when
// the weight still carries mass at the walls.
inline double box_mass_deficit(const weight_spec& spec, const grid_spec& gs) {
  const box_grid g(gs);
  const int axes = 2 * gs.n;
  const std::int64_t ne = 3LL * (gs.N - 1) + 1;
  const double h = g.h();
  std::vector<double> coord(static_cast<std::size_t>(ne));
  std::vector<double> qw(static_cast<std::size_t>(ne)); // trapezoid weights
  for (std::int64_t i = 0; i < ne; ++i) {
    coord[i] = -3.0 * gs.L + h * static_cast<double>(i);
    qw[i] = (i == 0 || i == ne - 1) ? 0.5 * h : h;
  }
  std::int64_t total = 1;
  for (int a = 0; a < axes; ++a) total *= ne;
  kahan_real inside, outside;
  const double edge = gs.L + 1e-12;
  for (std::int64_t flat = 0; flat < total; ++flat) {
    std::int64_t rest = flat;
    double w = 1.0;
    bool in_box = true;
    cpoint z{cplx(0.0), cplx(0.0)};
    double parts[4] = {0, 0, 0, 0};
    for (int a = axes - 1; a >= 0; --a) {
      const std::int64_t i = rest % ne;
      rest /= ne;
      parts[a] = coord[i];
      w *= qw[i];
      if (std::abs(coord[i]) > edge) in_box = false;
    }
    z[0] = cplx(parts[0], parts[1]);
    if (gs.n == 2) z[1] = cplx(parts[2], parts[3]);
    const double v = w * std::exp(-eval_weight(spec, z));
    if (in_box) inside.add(v); else outside.add(v);
  }
  const double tot = inside.value() + outside.value();
  if (!(tot > 0.0)) return 1.0;
  return outside.value() / tot;
}

inline void note_box_mass(const weight_spec& w, const grid_spec& g, json& results,
                          std::vector<std::string>& warnings) {
  const double deficit = box_mass_deficit(w, g);
  results["box_mass_deficit"] = deficit;
  if (deficit > 1e-8) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "truncation: relative e^-phi mass outside the box is %.3e "
                  "(above 1e-8); consider a larger L",
                  deficit);
    add_warning(warnings, buf);
  }
}

} // namespace detail

// ---------------------------------------------------------------------------
// the six lanes

namespace detail {

inline void run_check_weight(const experiment_config& cfg, run_output& out, bool plots) {
  const auto v = check_condition(*cfg.weight, cfg.condition);
  out.report.results["verdict"] = json_of(v);
  if (v.verdict == verdict_kind::inconclusive)
    add_warning(out.report.warnings, "growth condition check was inconclusive");
  csv_table t;
  t.header = {"radius", "inf_mu"};
  const bool with_axis = !v.axis_min_mu.empty();
  if (with_axis) t.header.push_back("axis_min_mu");
  for (std::size_t i = 0; i < v.radii.size(); ++i) {
    std::vector<std::string> row{fmt17(v.radii[i]), fmt17(v.inf_per_radius[i])};
    if (with_axis) row.push_back(fmt17(v.axis_min_mu[i]));
    t.rows.push_back(std::move(row));
  }
  out.files.push_back({cfg.stem() + "-mu.csv", to_csv(t)});
  if (plots) {
    std::vector<plot_series> series;
    plot_series s{"inf mu on sphere", {}};
    for (std::size_t i = 0; i < v.radii.size(); ++i)
      s.pts.push_back({v.radii[i], v.inf_per_radius[i]});
    series.push_back(std::move(s));
    if (with_axis) {
      plot_series a{"min mu on axes", {}};
      for (std::size_t i = 0; i < v.radii.size(); ++i)
        a.pts.push_back({v.radii[i], v.axis_min_mu[i]});
      series.push_back(std::move(a));
    }
    out.files.push_back({cfg.stem() + "-mu.svg",
                         line_plot_svg("Levi infimum vs radius", "radius", "inf mu",
                                       series)});
  }
}

inline void run_kohn_morrey(const experiment_config& cfg, run_output& out, bool) {
  json rows = json::array();
  csv_table t;
  t.header = {"N", "h", "dbar_sq", "dbar_star_sq", "twist_sq", "levi", "residual",
              "margin"};
  std::vector<double> residuals;
  grid_spec finest = cfg.grid;
  for (int N : cfg.levels) {
    grid_spec gs{cfg.grid.n, cfg.grid.L, N};
    finest = gs;
    auto grid = make_grid(gs);
    const auto u = make_test_form(grid, cfg.form, cfg.form_seed);
    const auto km = kohn_morrey_balance(u, *cfg.weight, weighted_measure(*cfg.weight, grid));
    json r = json_of(km);
    r["N"] = N;
    r["h"] = grid->h();
    rows.push_back(r);
    residuals.push_back(km.residual);
    t.rows.push_back({std::to_string(N), fmt17(grid->h()), fmt17(km.dbar_sq),
                      fmt17(km.dbar_star_sq), fmt17(km.twist_sq), fmt17(km.levi),
                      fmt17(km.residual), fmt17(km.margin)});
  }
  json ratios = json::array();
  for (std::size_t i = 0; i + 1 < residuals.size(); ++i)
    ratios.push_back(residuals[i + 1] > 0.0 ? json(residuals[i] / residuals[i + 1])
                                            : json(nullptr));
  out.report.results["rows"] = rows;
  out.report.results["residual_ratios"] = ratios;
  detail::note_box_mass(*cfg.weight, finest, out.report.results, out.report.warnings);
  out.files.push_back({cfg.stem() + "-balance.csv", to_csv(t)});
}

inline void run_spectrum(const experiment_config& cfg, run_output& out, bool plots) {
  auto grid = make_grid(cfg.grid);
  const auto cx = assemble_complex(*cfg.weight, grid);
  const auto op = assemble_box_laplacian(cx);
  const auto rep = smallest_eigenpairs(op, *cfg.weight, cfg.solver);
  out.report.results["spectrum"] = json_of(rep);
  const auto lb = lower_bound_check(*cfg.weight, *grid, rep.pairs.front().lambda);
  json lbj;
  lbj["lambda_min"] = lb.lambda_min;
  lbj["inf_mu"] = lb.inf_mu;
  lbj["margin"] = lb.margin;
  lbj["slack"] = lb.slack;
  lbj["within_slack"] = lb.within_slack;
  out.report.results["lower_bound"] = lbj;
  detail::note_box_mass(*cfg.weight, cfg.grid, out.report.results, out.report.warnings);
  csv_table t;
  t.header = {"k", "lambda", "residual", "multiplicity"};
  for (std::size_t i = 0; i < rep.pairs.size(); ++i)
    t.rows.push_back({std::to_string(i), fmt17(rep.pairs[i].lambda),
                      fmt17(rep.pairs[i].residual),
                      std::to_string(rep.pairs[i].multiplicity)});
  out.files.push_back({cfg.stem() + "-spectrum.csv", to_csv(t)});
  if (cfg.export_operator)
    out.files.push_back({cfg.stem() + "-operator.mtx", to_matrix_market(op.core())});
  if (plots) {
    plot_series s{"lambda_k", {}};
    for (std::size_t i = 0; i < rep.pairs.size(); ++i)
      s.pts.push_back({static_cast<double>(i), rep.pairs[i].lambda});
    out.files.push_back({cfg.stem() + "-lambda.svg",
                         line_plot_svg("Eigenvalue ladder", "k", "lambda", {s})});
  }
}

inline void run_tail(const experiment_config& cfg, run_output& out, bool plots) {
  auto grid = make_grid(cfg.grid);
  const auto cx = assemble_complex(*cfg.weight, grid);
  const auto op = assemble_box_laplacian(cx);
  const auto rep = smallest_eigenpairs(op, *cfg.weight, cfg.solver);
  // normalize every eigenform to unit energy Q(u, u) = 1
  std::vector<form_field> forms;
  for (const auto& p : rep.pairs) {
    if (!(p.lambda > 0.0))
      throw solver_error("tail: nonpositive eigenvalue, cannot normalize to Q = 1");
    form_field u = p.u;
    for (int c = 0; c < u.components(); ++c) u.comp(c) *= 1.0 / std::sqrt(p.lambda);
    forms.push_back(std::move(u));
  }
  json rows = json::array();
  csv_table t;
  t.header = {"R", "max_tail", "bound", "min_margin", "vacuous"};
  std::vector<plot_series> series{plot_series{"max tail", {}},
                                  plot_series{"shell bound", {}}};
  bool any_vacuous = false;
  for (double R : cfg.tail_radii) {
    double max_tail = 0.0, min_margin = std::numeric_limits<double>::infinity();
    double bound = 0.0;
    bool vac = false;
    for (const auto& u : forms) {
      const auto tb = tail_bound_check(cx, u, R, *cfg.weight);
      max_tail = std::max(max_tail, tb.tail);
      min_margin = std::min(min_margin, tb.margin);
      bound = tb.bound;
      vac = vac || tb.vacuous;
    }
    any_vacuous = any_vacuous || vac;
    json r;
    r["R"] = R;
    r["max_tail"] = max_tail;
    r["bound"] = detail::finite_or_null(bound);
    r["min_margin"] = detail::finite_or_null(min_margin);
    r["vacuous"] = vac;
    rows.push_back(r);
    t.rows.push_back({fmt17(R), fmt17(max_tail), fmt17(bound), fmt17(min_margin),
                      vac ? "1" : "0"});
    series[0].pts.push_back({R, max_tail});
    if (std::isfinite(bound)) series[1].pts.push_back({R, bound});
  }
  if (any_vacuous)
    add_warning(out.report.warnings,
                "tail bound vacuous at some radius (shell infimum of mu is 0)");
  out.report.results["rows"] = rows;
  json lam = json::array();
  for (const auto& p : rep.pairs) lam.push_back(p.lambda);
  out.report.results["lambdas"] = lam;
  detail::note_box_mass(*cfg.weight, cfg.grid, out.report.results, out.report.warnings);
  out.files.push_back({cfg.stem() + "-tails.csv", to_csv(t)});
  if (plots)
    out.files.push_back({cfg.stem() + "-tails.svg",
                         line_plot_svg("Tail mass vs radius", "R", "mass", series)});
}

inline void run_probe(const experiment_config& cfg, run_output& out, bool plots) {
  auto grid = make_grid(cfg.grid);
  const auto d = compactness_probe(*cfg.weight, grid, cfg.probe);
  out.report.results["diagnosis"] = json_of(d);
  detail::note_box_mass(*cfg.weight, cfg.grid, out.report.results, out.report.warnings);
  if (d.verdict == probe_verdict::inconclusive)
    add_warning(out.report.warnings, "probe verdict was inconclusive");
  bool any_vacuous = false;
  for (const auto& r : d.tails) any_vacuous = any_vacuous || r.vacuous;
  if (any_vacuous)
    add_warning(out.report.warnings,
                "tail bound vacuous at some radius (shell infimum of mu is 0)");
  if (d.truncation_mass > 1e-8) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "truncation: worst eigenform carries %.3e of its mass on the "
                  "outermost interior ring",
                  d.truncation_mass);
    add_warning(out.report.warnings, buf);
  }
  csv_table tt;
  tt.header = {"R", "tail", "bound"};
  for (const auto& r : d.tails)
    tt.rows.push_back({fmt17(r.R), fmt17(r.max_tail), fmt17(r.bound)});
  out.files.push_back({cfg.stem() + "-tails.csv", to_csv(tt)});
  csv_table st;
  st.header = {"shift", "defect"};
  for (const auto& s : d.shifts)
    st.rows.push_back({fmt17(s.abs_shift), fmt17(s.max_defect)});
  out.files.push_back({cfg.stem() + "-shifts.csv", to_csv(st)});
  if (plots) {
    plot_series lad{"lambda_k", {}};
    for (std::size_t i = 0; i < d.lambdas.size(); ++i)
      lad.pts.push_back({static_cast<double>(i), d.lambdas[i]});
    out.files.push_back({cfg.stem() + "-lambda.svg",
                         line_plot_svg("Eigenvalue ladder", "k", "lambda", {lad})});
    std::vector<plot_series> ts{plot_series{"max tail", {}},
                                plot_series{"shell bound", {}}};
    for (const auto& r : d.tails) {
      ts[0].pts.push_back({r.R, r.max_tail});
      if (std::isfinite(r.bound)) ts[1].pts.push_back({r.R, r.bound});
    }
    out.files.push_back({cfg.stem() + "-tails.svg",
                         line_plot_svg("Tail mass vs radius", "R", "mass", ts)});
    plot_series mu{"inf mu on sphere", {}};
    for (std::size_t i = 0; i < d.growth.radii.size(); ++i)
      mu.pts.push_back({d.growth.radii[i], d.growth.inf_per_radius[i]});
    out.files.push_back({cfg.stem() + "-mu.svg",
                         line_plot_svg("Levi infimum vs radius", "radius", "inf mu",
                                       {mu})});
  }
}

inline void run_property_p(const experiment_config& cfg, run_output& out, bool) {
  const auto cert = certify(*cfg.domain, *cfg.family, cfg.M_list, cfg.boundary_samples,
                            cfg.c_max, cfg.seed);
  out.report.results["certificate"] = json_of(cert);
  if (cert.any_c_infinite)
    add_warning(out.report.warnings,
                "degenerate Hessian at some boundary sample: no finite ratio constant");
  csv_table t;
  t.header = {"M", "min_margin", "p_holds", "c_tilde", "c_infinite"};
  for (const auto& r : cert.rows)
    t.rows.push_back({fmt17(r.M), fmt17(r.min_margin), r.p_holds ? "1" : "0",
                      fmt17(r.c_tilde), r.c_infinite ? "1" : "0"});
  out.files.push_back({cfg.stem() + "-certificate.csv", to_csv(t)});
}

} // namespace detail

/// Dispatch one experiment. Pure computation plus artifact strings; the
/// caller decides where (and whether) to write them.
inline run_output run_experiment(const experiment_config& cfg, bool plots = false) {
  const auto t0 = std::chrono::steady_clock::now();
  run_output out;
  out.report.kind = to_string(cfg.kind);
  out.report.label = cfg.stem();
  out.report.config = json_of(cfg);
  out.report.results = json::object();
  switch (cfg.kind) {
    case experiment_kind::check_weight: detail::run_check_weight(cfg, out, plots); break;
    case experiment_kind::kohn_morrey: detail::run_kohn_morrey(cfg, out, plots); break;
    case experiment_kind::spectrum: detail::run_spectrum(cfg, out, plots); break;
    case experiment_kind::tail: detail::run_tail(cfg, out, plots); break;
    case experiment_kind::probe: detail::run_probe(cfg, out, plots); break;
    case experiment_kind::property_p: detail::run_property_p(cfg, out, plots); break;
  }
  const auto t1 = std::chrono::steady_clock::now();
  json meta;
  meta["timestamp"] = detail::iso_timestamp();
  json timings;
  timings["total_ms"] =
      std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count() / 1000.0;
  meta["timings"] = timings;
  out.report.metadata = meta;
  out.files.insert(out.files.begin(),
                   {cfg.stem() + "-report.json", json_of(out.report).dump(2) + "\n"});
  return out;
}

// ---------------------------------------------------------------------------
// report comparison

struct compare_result {
  bool all_zero = false; // the two results payloads are exactly equal
  json diff;             // numeric deltas and structural mismatches, by path
  std::string table;     // fixed-width side-by-side rendering
};

namespace detail {

inline void diff_walk(const json& a, const json& b, const std::string& path,
                      json& rows) {
  if (a.is_number() && b.is_number()) {
    const double da = a.get<double>(), db = b.get<double>();
    json r;
    r["path"] = path;
    r["a"] = da;
    r["b"] = db;
    r["delta"] = db - da;
    rows.push_back(r);
    return;
  }
  if (a.is_object() && b.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      const std::string sub = path.empty() ? it.key() : path + "." + it.key();
      if (b.contains(it.key())) diff_walk(it.value(), b[it.key()], sub, rows);
      else {
        json r;
        r["path"] = sub;
        r["note"] = "only in first report";
        rows.push_back(r);
      }
    }
    for (auto it = b.begin(); it != b.end(); ++it)
      if (!a.contains(it.key())) {
        json r;
        r["path"] = path.empty() ? it.key() : path + "." + it.key();
        r["note"] = "only in second report";
        rows.push_back(r);
      }
    return;
  }
  if (a.is_array() && b.is_array()) {
    const std::size_t m = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < m; ++i)
      diff_walk(a[i], b[i], path + "[" + std::to_string(i) + "]", rows);
    if (a.size() != b.size()) {
      json r;
      r["path"] = path;
      r["note"] = "length " + std::to_string(a.size()) + " vs " +
                  std::to_string(b.size());
      rows.push_back(r);
    }
    return;
  }
  if (a != b) {
    json r;
    r["path"] = path;
    r["a"] = a;
    r["b"] = b;
    r["note"] = "changed";
    rows.push_back(r);
  }
}

inline std::string fmt_cell(const json& v) {
  if (v.is_number()) {
    char b[32];
    std::snprintf(b, sizeof b, "%.6g", v.get<double>());
    return b;
  }
  return v.dump();
}

} // namespace detail

/// Side-by-side numeric comparison of two reports of the same kind.
inline compare_result compare_runs(const json& report_a, const json& report_b) {
  const auto ka = detail::get_as<std::string>(report_a, "kind", "report A");
  const auto kb = detail::get_as<std::string>(report_b, "kind", "report B");
  if (ka != kb)
    throw config_error("compare: kind mismatch (" + ka + " vs " + kb + ")");
  const json& ra = detail::require_key(report_a, "results", "report A");
  const json& rb = detail::require_key(report_b, "results", "report B");
  compare_result out;
  out.all_zero = (ra == rb);
  json rows = json::array();
  detail::diff_walk(ra, rb, "", rows);
  out.diff = rows;

  std::string tbl = "path                                     A              B              delta\n";
  for (const auto& r : rows) {
    char line[160];
    const std::string path = r["path"].get<std::string>();
    if (r.contains("delta"))
      std::snprintf(line, sizeof line, "%-40s %-14s %-14s %s\n", path.c_str(),
                    detail::fmt_cell(r["a"]).c_str(), detail::fmt_cell(r["b"]).c_str(),
                    detail::fmt_cell(r["delta"]).c_str());
    else if (r.contains("note") && r.contains("a"))
      std::snprintf(line, sizeof line, "%-40s %-14s %-14s %s\n", path.c_str(),
                    detail::fmt_cell(r["a"]).c_str(), detail::fmt_cell(r["b"]).c_str(),
                    r["note"].get<std::string>().c_str());
    else
      std::snprintf(line, sizeof line, "%-40s %s\n", path.c_str(),
                    r["note"].get<std::string>().c_str());
    tbl += line;
  }
  if (rows.empty()) tbl += "(no comparable entries)\n";
  out.table = tbl;
  return out;
}

} // namespace dbarlab
