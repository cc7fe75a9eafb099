#pragma once
// Quantitative checks tying the discrete complex back to the continuum
// energy identities: the Kohn-Morrey balance for smooth interior forms, the
// tail-mass bound against the Levi-eigenvalue floor on shells, grid-aligned
// translation defects, and the compactness probe that combines the growth
// condition on mu with the tail behaviour of computed eigenforms.
//
// Everything here that feeds a convergence-order claim runs on the stencil
// layer (plain central differences); assembled operators enter only through
// the Dirichlet form Q and the eigenforms themselves.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dbarlab/conditions.hpp"
#include "dbarlab/operators.hpp"
#include "dbarlab/spectral.hpp"

namespace dbarlab {

// ---------------------------------------------------------------------------
// smooth interior test forms

enum class probe_form_kind { gaussian_bump, polynomial_bump, random_smooth };

inline const char* to_string(probe_form_kind k) {
  switch (k) {
    case probe_form_kind::gaussian_bump: return "gaussian-bump";
    case probe_form_kind::polynomial_bump: return "polynomial-bump";
    case probe_form_kind::random_smooth: return "random-smooth";
  }
  return "?";
}

namespace detail {

// C-infinity cutoff: 1 at s = 0, identically 0 for s >= 1.
inline double bump(double s) {
  if (s >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s));
}

} // namespace detail

/// Seeded smooth (0,1)-form supported in the ball |z| < L/2 (so it vanishes
/// identically on the outer part of the box and in particular on the
/// boundary layer). Kinds: a shifted Gaussian, a low-degree polynomial, or a
/// handful of low-order Fourier modes -- each times the fixed C-infinity
/// bump. Deterministic in (kind, seed).
inline form_field make_test_form(grid_ptr grid, probe_form_kind kind,
                                 std::uint64_t seed) {
  const box_grid& g = *grid;
  const int n = g.n();
  const double L = g.L();
  const double rsup2 = 0.25 * L * L; // support |z|^2 < (L/2)^2
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
  std::uniform_real_distribution<double> U(-1.0, 1.0);

  auto envelope = [&](const cpoint& z) {
    double a2 = std::norm(z[0]) + std::norm(z[1]);
    return detail::bump(a2 / rsup2);
  };

  switch (kind) {
    case probe_form_kind::gaussian_bump: {
      std::vector<cplx> amp(n), center0(n), center1(n);
      for (int j = 0; j < n; ++j) {
        amp[j] = cplx(U(rng) + 1.5, U(rng)); // keep away from the zero form
        center0[j] = 0.125 * L * cplx(U(rng), U(rng));
        center1[j] = 0.125 * L * cplx(U(rng), U(rng));
      }
      return form_field::sample(grid, 1, [&](int c, const cpoint& z) {
        const double d2 = std::norm(z[0] - center0[c]) +
                          (n == 2 ? std::norm(z[1] - center1[c]) : 0.0);
        return amp[c] * std::exp(-d2) * envelope(z);
      });
    }
    case probe_form_kind::polynomial_bump: {
      // coefficients for 1, z_j, zbar_j, and z_j zbar_k products
      std::vector<std::vector<cplx>> coef(n);
      for (int c = 0; c < n; ++c) {
        coef[c].resize(1 + 4 * n);
        for (auto& a : coef[c]) a = cplx(U(rng), U(rng));
      }
      return form_field::sample(grid, 1, [&](int c, const cpoint& z) {
        cplx p = coef[c][0];
        for (int j = 0; j < n; ++j) {
          p += coef[c][1 + 4 * j] * z[j];
          p += coef[c][2 + 4 * j] * std::conj(z[j]);
          p += coef[c][3 + 4 * j] * z[j] * std::conj(z[j]);
          p += coef[c][4 + 4 * j] * z[j] * z[j];
        }
        return p * envelope(z);
      });
    }
    case probe_form_kind::random_smooth: {
      constexpr int modes = 4;
      std::vector<std::array<double, 4>> k(static_cast<std::size_t>(n) * modes);
      std::vector<cplx> a(static_cast<std::size_t>(n) * modes);
      std::uniform_int_distribution<int> Ki(-2, 2);
      for (std::size_t m = 0; m < k.size(); ++m) {
        for (int ax = 0; ax < 4; ++ax)
          k[m][ax] = (3.141592653589793 / L) * Ki(rng);
        a[m] = cplx(U(rng), U(rng));
      }
      return form_field::sample(grid, 1, [&](int c, const cpoint& z) {
        cplx s = 0.0;
        for (int m = 0; m < modes; ++m) {
          const auto& kk = k[static_cast<std::size_t>(c) * modes + m];
          const double phase = kk[0] * z[0].real() + kk[1] * z[0].imag() +
                               kk[2] * z[1].real() + kk[3] * z[1].imag();
          s += a[static_cast<std::size_t>(c) * modes + m] *
               cplx(std::cos(phase), std::sin(phase));
        }
        return s * envelope(z);
      });
    }
  }
  throw config_error("make_test_form: unknown kind");
}

// ---------------------------------------------------------------------------
// Kohn-Morrey balance (stencil layer)

namespace detail {

// weighted square sum of one coefficient array over the grid
inline double weighted_sq(const Eigen::VectorXcd& a, const weighted_measure& m) {
  kahan_cplx acc;
  const std::int64_t P = m.grid().points();
  for (std::int64_t p = 0; p < P; ++p) {
    const double v = std::abs(a[p]) * m.gauge_in(p);
    acc.add(v * v);
  }
  return acc.value().real() * m.cell_volume();
}

} // namespace detail

struct kohn_morrey_terms {
  double dbar_sq = 0.0;      // |dbar u|^2_phi
  double dbar_star_sq = 0.0; // |dbar* u|^2_phi (adjoint formula)
  double twist_sq = 0.0;     // sum_{j,k} |du_j/dzbar_k|^2_phi
  double levi = 0.0;         // integral of <M u, u> e^{-phi}
  double residual = 0.0;     // |(dbar_sq + dbar_star_sq) - (twist_sq + levi)|
  double margin = 0.0;       // (dbar_sq + dbar_star_sq) - levi
};

/// Both sides of the energy identity
///   |dbar u|^2 + |dbar* u|^2 = sum_{j,k} |du_j/dzbar_k|^2 + int <M u, u>
/// for an interior-supported (0,1)-form, evaluated with the plain central
/// stencils. Throws if u touches the boundary layer (the identity's
/// boundary terms would not vanish).
inline kohn_morrey_terms kohn_morrey_balance(const form_field& u,
                                             const weight_spec& spec,
                                             const weighted_measure& m) {
  if (u.degree() != 1) throw config_error("kohn_morrey: expects a (0,1)-form");
  if (&u.grid() != &m.grid()) throw config_error("kohn_morrey: grid mismatch");
  if (u.boundary_violation() != 0.0)
    throw config_error("kohn_morrey: form must vanish on the boundary layer");
  const box_grid& g = m.grid();
  const int n = g.n();

  kohn_morrey_terms t;
  {
    form_field du = dbar_1(u);
    if (du.components() > 0)
      t.dbar_sq = weighted_inner(du, du, m).real();
    form_field ds = dbar_star_formula(u, spec);
    t.dbar_star_sq = weighted_inner(ds, ds, m).real();
  }
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXcd d = Eigen::VectorXcd::Zero(g.points());
      for (std::int64_t i = 0; i < g.interior_points(); ++i) {
        const std::int64_t p = g.full_index(i);
        d[p] = detail::wirt_dzbar(u.comp(j), g, k, p);
      }
      t.twist_sq += detail::weighted_sq(d, m);
    }
  }
  {
    detail::kahan_cplx acc;
    for (std::int64_t i = 0; i < g.interior_points(); ++i) {
      const std::int64_t p = g.full_index(i);
      const auto M = eval_levi_matrix(spec, g.point(p));
      const double gg = m.gauge_in(p);
      cplx q = 0.0;
      // gauge each factor before the product so raw values never square
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          q += M[j][k] * (u.comp(j)[p] * gg) * std::conj(u.comp(k)[p] * gg);
      acc.add(q.real());
    }
    t.levi = acc.value().real() * m.cell_volume();
  }
  const double lhs = t.dbar_sq + t.dbar_star_sq;
  t.residual = std::abs(lhs - (t.twist_sq + t.levi));
  t.margin = lhs - t.levi;
  return t;
}

inline double kohn_morrey_residual(const form_field& u, const weight_spec& spec,
                                   const weighted_measure& m) {
  return kohn_morrey_balance(u, spec, m).residual;
}

/// Energy-minus-Levi margin; nonnegative up to O(h^2) since it equals the
/// (dropped) twist term for interior forms.
inline double komo_inequality_margin(const form_field& u, const weight_spec& spec,
                                     const weighted_measure& m) {
  return kohn_morrey_balance(u, spec, m).margin;
}

// ---------------------------------------------------------------------------
// tail mass and the shell bound

namespace detail {

inline double tail_mass_unnormalized(const form_field& u, double R,
                                     const weighted_measure& m) {
  const box_grid& g = m.grid();
  kahan_cplx acc;
  const double R2 = R * R;
  for (std::int64_t p = 0; p < g.points(); ++p) {
    if (g.abs2(p) <= R2) continue;
    const double gg = m.gauge_in(p);
    double s = 0.0;
    for (int c = 0; c < u.components(); ++c) s += std::norm(u.comp(c)[p] * gg);
    acc.add(s);
  }
  return acc.value().real() * m.cell_volume();
}

} // namespace detail

/// Fraction of the weighted mass of u sitting outside the ball of radius R.
inline double tail_mass(const form_field& u, double R, const weighted_measure& m) {
  if (&u.grid() != &m.grid()) throw config_error("tail_mass: grid mismatch");
  if (!(R > 0.0) || R >= m.grid().L())
    throw config_error("tail_mass: R must lie in (0, L)");
  const double total = weighted_inner(u, u, m).real();
  if (total <= 0.0) return 0.0;
  return detail::tail_mass_unnormalized(u, R, m) / total;
}

struct tail_bound_result {
  double R = 0.0;
  double q = 0.0;                // Q(u, u)
  double inf_shell_mu = 0.0;     // inf of mu over grid points with R <= |z| <= L
  double bound = 0.0;            // q / inf_shell_mu (infinite when vacuous)
  double tail = 0.0;             // unnormalized mass outside B_R
  double margin = 0.0;           // bound - tail
  bool vacuous = false;          // inf mu = 0: the estimate carries no content
};

/// The shell estimate: mass of u outside B_R is at most Q(u,u) divided by
/// the infimum of mu on the shell {R <= |z| <= L}.
inline tail_bound_result tail_bound_check(const dbar_complex& cx, const form_field& u,
                                          double R, const weight_spec& spec) {
  const auto& m = *cx.measure;
  const box_grid& g = m.grid();
  if (!(R > 0.0) || R >= g.L())
    throw config_error("tail_bound_check: R must lie in (0, L)");
  tail_bound_result r;
  r.R = R;
  r.q = q_form(cx, u, u).real();
  double inf = std::numeric_limits<double>::infinity();
  const double R2 = R * R, L2 = g.L() * g.L();
  for (std::int64_t p = 0; p < g.points(); ++p) {
    const double a2 = g.abs2(p);
    if (a2 < R2 || a2 > L2) continue;
    inf = std::min(inf, eval_levi(spec, g.point(p)).mu);
  }
  if (!std::isfinite(inf)) inf = 0.0; // empty shell: treat as vacuous
  r.inf_shell_mu = inf;
  r.tail = detail::tail_mass_unnormalized(u, R, m);
  if (inf <= 0.0) {
    r.vacuous = true;
    r.bound = std::numeric_limits<double>::infinity();
    r.margin = std::numeric_limits<double>::infinity();
  } else {
    r.bound = r.q / inf;
    r.margin = r.bound - r.tail;
  }
  return r;
}

// ---------------------------------------------------------------------------
// grid-aligned translation defect

/// || tau_s u - u || over the ball B_R in the weighted norm, where tau_s
/// shifts by s (each real component an integer multiple of h, |s| < L - R).
inline double translation_defect(const form_field& u, const cpoint& shift, double R,
                                 const weighted_measure& m) {
  const box_grid& g = m.grid();
  if (&u.grid() != &g) throw config_error("translation_defect: grid mismatch");
  if (!(R > 0.0) || R >= g.L())
    throw config_error("translation_defect: R must lie in (0, L)");
  const double h = g.h();
  double abs2 = 0.0;
  std::array<std::int64_t, 4> steps = {0, 0, 0, 0};
  for (int j = 0; j < g.n(); ++j) {
    const double parts[2] = {shift[j].real(), shift[j].imag()};
    for (int r = 0; r < 2; ++r) {
      const double ratio = parts[r] / h;
      const double rounded = std::round(ratio);
      if (std::abs(ratio - rounded) > 1e-9)
        throw config_error("translation_defect: shift must be grid-aligned");
      steps[2 * j + r] = static_cast<std::int64_t>(rounded);
      abs2 += parts[r] * parts[r];
    }
  }
  if (!(std::sqrt(abs2) < g.L() - R))
    throw config_error("translation_defect: |shift| must be < L - R");

  detail::kahan_cplx acc;
  const double R2 = R * R;
  const int N = g.N();
  for (std::int64_t p = 0; p < g.points(); ++p) {
    if (g.abs2(p) > R2) continue;
    std::int64_t q = 0;
    bool ok = true;
    for (int ax = 0; ax < 2 * g.n(); ++ax) {
      const std::int64_t idx = g.axis_index(p, ax) + steps[ax];
      if (idx < 0 || idx >= N) { ok = false; break; }
      q += idx * g.stride(ax);
    }
    const double gg = m.gauge_in(p);
    double s = 0.0;
    for (int c = 0; c < u.components(); ++c) {
      const cplx tv = ok ? u.comp(c)[q] : cplx(0.0);
      s += std::norm((tv - u.comp(c)[p]) * gg);
    }
    acc.add(s);
  }
  return std::sqrt(std::max(0.0, acc.value().real() * m.cell_volume()));
}

// ---------------------------------------------------------------------------
// compactness probe

enum class probe_verdict { compatible_with_compactness, incompatible, inconclusive };

inline const char* to_string(probe_verdict v) {
  switch (v) {
    case probe_verdict::compatible_with_compactness:
      return "compatible-with-compactness";
    case probe_verdict::incompatible: return "incompatible";
    case probe_verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct probe_config {
  solver_config solver = {8, 1e-8, 0, 2500, 1, {1.0, 2.0, 4.0, 8.0, 16.0}};
  condition_config condition = {growth_condition::double_star,
                                {1.0, 2.0, 4.0, 8.0}, 64, 1e-6, 1.05, 1.0, 1};
  std::vector<double> tail_radii = {1.0, 1.5, 2.0, 3.0};
  std::vector<int> shift_steps = {1, 2, 4};
  double decay_threshold = 0.05; // largest acceptable tail at the last radius

  void validate(const box_grid& g) const {
    solver.validate();
    if (tail_radii.empty())
      throw config_error("probe_config: tail_radii must be nonempty");
    for (std::size_t i = 0; i < tail_radii.size(); ++i) {
      if (!(tail_radii[i] > 0.0) || tail_radii[i] >= g.L())
        throw config_error("probe_config: tail radii must lie in (0, L)");
      if (i > 0 && !(tail_radii[i] > tail_radii[i - 1]))
        throw config_error("probe_config: tail radii must increase");
    }
    for (int s : shift_steps)
      if (s < 1) throw config_error("probe_config: shift steps must be >= 1");
  }
};

struct tail_table_row {
  double R = 0.0;
  double max_tail = 0.0; // over eigenforms normalized to Q = 1
  double bound = 0.0;    // 1 / inf_{R <= |z| <= L} mu
  bool vacuous = false;
};

struct shift_table_row {
  double abs_shift = 0.0;
  double max_defect = 0.0; // over the same eigenforms, on B_{L/2}
};

struct compactness_diagnosis {
  condition_verdict growth;              // the (**) proxy, with axis samples
  std::vector<double> lambdas;           // ascending ladder
  std::vector<double> residuals;
  bool dense_path = false;
  std::vector<tail_table_row> tails;
  std::vector<shift_table_row> shifts;   // reported, not part of the verdict
  bool tails_decay = false;
  double truncation_mass = 0.0;          // worst eigenform mass on the outermost interior ring
  probe_verdict verdict = probe_verdict::inconclusive;
  std::string reason;
};

namespace detail {

// mass fraction on the ring of interior points adjacent to the boundary,
// for a unit-norm form
inline double ring_mass(const form_field& u, const weighted_measure& m) {
  const box_grid& g = m.grid();
  kahan_cplx acc;
  for (std::int64_t i = 0; i < g.interior_points(); ++i) {
    const std::int64_t p = g.full_index(i);
    bool ring = false;
    for (int ax = 0; ax < 2 * g.n() && !ring; ++ax) {
      const std::int64_t idx = g.axis_index(p, ax);
      ring = (idx == 1) || (idx == g.N() - 2);
    }
    if (!ring) continue;
    const double gg = m.gauge_in(p);
    double s = 0.0;
    for (int c = 0; c < u.components(); ++c) s += std::norm(u.comp(c)[p] * gg);
    acc.add(s);
  }
  return acc.value().real() * m.cell_volume();
}

} // namespace detail

/// Evidence-gathering for compactness of the inverse: the growth condition
/// on mu, the eigenvalue ladder, tail tables of the low eigenforms
/// (normalized to Q = 1, the extremal candidates for escaping mass), and
/// translation defects. Verdict: compatible when the growth proxy holds and
/// tails decay; incompatible when the proxy fails and tails do not decay;
/// inconclusive when the signals conflict.
inline compactness_diagnosis compactness_probe(const weight_spec& spec, grid_ptr grid,
                                               const probe_config& cfg) {
  const box_grid& g = *grid;
  cfg.validate(g);
  compactness_diagnosis out;
  out.growth = check_condition(spec, cfg.condition);

  auto cx = assemble_complex(spec, grid);
  auto box = assemble_box_laplacian(cx);
  auto rep = smallest_eigenpairs(box, spec, cfg.solver);
  out.dense_path = rep.dense_path;
  for (const auto& p : rep.pairs) {
    out.lambdas.push_back(p.lambda);
    out.residuals.push_back(p.residual);
  }

  // normalize eigenforms to Q = 1 (they arrive with |u|_phi = 1, Q = lambda)
  std::vector<form_field> forms;
  forms.reserve(rep.pairs.size());
  for (auto& p : rep.pairs) {
    form_field u = p.u;
    if (p.lambda > 0.0) {
      const double s = 1.0 / std::sqrt(p.lambda);
      for (int c = 0; c < u.components(); ++c) u.comp(c) *= s;
    }
    out.truncation_mass = std::max(out.truncation_mass,
                                   detail::ring_mass(p.u, *cx.measure));
    forms.push_back(std::move(u));
  }

  const double L2 = g.L() * g.L();
  for (double R : cfg.tail_radii) {
    tail_table_row row;
    row.R = R;
    for (const auto& u : forms)
      row.max_tail = std::max(row.max_tail,
                              detail::tail_mass_unnormalized(u, R, *cx.measure));
    double inf = std::numeric_limits<double>::infinity();
    const double R2 = R * R;
    for (std::int64_t p = 0; p < g.points(); ++p) {
      const double a2 = g.abs2(p);
      if (a2 < R2 || a2 > L2) continue;
      inf = std::min(inf, eval_levi(spec, g.point(p)).mu);
    }
    if (!std::isfinite(inf) || inf <= 0.0) {
      row.vacuous = true;
      row.bound = std::numeric_limits<double>::infinity();
    } else {
      row.bound = 1.0 / inf;
    }
    out.tails.push_back(row);
  }

  const double Rt = 0.5 * g.L();
  for (int s : cfg.shift_steps) {
    if (s * g.h() >= g.L() - Rt) continue;
    shift_table_row row;
    row.abs_shift = s * g.h();
    cpoint shift{cplx(s * g.h(), 0.0), cplx(0.0, 0.0)};
    for (const auto& u : forms)
      row.max_defect =
          std::max(row.max_defect, translation_defect(u, shift, Rt, *cx.measure));
    out.shifts.push_back(row);
  }

  bool nonincreasing = true;
  for (std::size_t i = 1; i < out.tails.size(); ++i)
    if (out.tails[i].max_tail > out.tails[i - 1].max_tail + 1e-12)
      nonincreasing = false;
  out.tails_decay =
      nonincreasing && out.tails.back().max_tail <= cfg.decay_threshold;

  const bool growth_ok = out.growth.verdict == verdict_kind::holds;
  const bool growth_fails = out.growth.verdict == verdict_kind::fails;
  if (growth_ok && out.tails_decay) {
    out.verdict = probe_verdict::compatible_with_compactness;
    out.reason = "growth condition holds and eigenform tails decay";
  } else if (growth_fails && !out.tails_decay) {
    out.verdict = probe_verdict::incompatible;
    out.reason = "growth condition fails and eigenform tails do not decay";
  } else {
    out.verdict = probe_verdict::inconclusive;
    out.reason = "growth proxy and tail behaviour disagree";
  }
  return out;
}

} // namespace dbarlab
