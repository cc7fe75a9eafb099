#pragma once
// Certificate checker for the two boundary positivity properties on model
// pseudoconvex domains: (P) asks for weights whose complex Hessian
// dominates M at every boundary point, for every M in a list; (Ptilde)
// additionally asks for one constant C bounding the gradient-to-Hessian
// ratio uniformly across the list. Verification is by construction finite:
// sampled boundary points and listed M values only, and the certificate
// says so.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "dbarlab/sphere.hpp"
#include "dbarlab/weight.hpp"

namespace dbarlab {

// ---------------------------------------------------------------------------
// domains

enum class domain_kind { ball, ellipsoid, pball };

inline const char* to_string(domain_kind k) {
  switch (k) {
    case domain_kind::ball: return "ball";
    case domain_kind::ellipsoid: return "ellipsoid";
    case domain_kind::pball: return "pball";
  }
  return "?";
}

/// Model bounded pseudoconvex domains: Ball(r) in C^1 or C^2,
/// Ellipsoid(a1, a2) = {|z1|^2/a1^2 + |z2|^2/a2^2 < 1}, and
/// PBall(p) = {|z1|^2 + |z2|^{2p} < 1} with integer p >= 1.
struct domain_spec {
  domain_kind kind = domain_kind::ball;
  int n = 2;
  double radius = 1.0;                    // ball
  std::array<double, 2> semi_axes{1.0, 1.0}; // ellipsoid
  int p = 1;                              // pball exponent

  void validate() const {
    switch (kind) {
      case domain_kind::ball:
        if (n != 1 && n != 2) throw config_error("domain: ball needs n in {1,2}");
        if (!(radius > 0.0)) throw config_error("domain: ball radius must be > 0");
        return;
      case domain_kind::ellipsoid:
        if (n != 2) throw config_error("domain: ellipsoid needs n = 2");
        if (!(semi_axes[0] > 0.0) || !(semi_axes[1] > 0.0))
          throw config_error("domain: semi-axes must be > 0");
        return;
      case domain_kind::pball:
        if (n != 2) throw config_error("domain: pball needs n = 2");
        if (p < 1) throw config_error("domain: pball exponent must be >= 1");
        return;
    }
    throw config_error("domain: unknown kind");
  }

  /// Defining function: negative inside, zero on the boundary.
  double rho(const cpoint& z) const {
    switch (kind) {
      case domain_kind::ball:
        return (std::norm(z[0]) + (n == 2 ? std::norm(z[1]) : 0.0)) -
               radius * radius;
      case domain_kind::ellipsoid:
        return std::norm(z[0]) / (semi_axes[0] * semi_axes[0]) +
               std::norm(z[1]) / (semi_axes[1] * semi_axes[1]) - 1.0;
      case domain_kind::pball: {
        const double t = std::norm(z[1]); // |z2|^2
        double tp = 1.0;
        for (int i = 0; i < p; ++i) tp *= t;
        return std::norm(z[0]) + tp - 1.0;
      }
    }
    throw config_error("domain: unknown kind");
  }
};

namespace detail {

// root of |d1|^2 t^2 + |d2|^{2p} t^{2p} = 1 along the unit direction d;
// strictly increasing in t, so bisection is safe; polished to ~1e-14.
inline double pball_ray_root(double a1, double a2p, int p) {
  if (a2p == 0.0) return 1.0 / std::sqrt(a1);
  if (a1 == 0.0) return std::pow(1.0 / a2p, 1.0 / (2.0 * p));
  auto f = [&](double t) {
    return a1 * t * t + a2p * std::pow(t, 2.0 * p) - 1.0;
  };
  double lo = 0.0, hi = 1.0 / std::sqrt(a1);
  if (f(hi) < 0.0) hi = std::pow(1.0 / a2p, 1.0 / (2.0 * p)); // can't happen for unit d, kept defensive
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0) lo = mid; else hi = mid;
  }
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) { // Newton polish
    const double ft = f(t);
    const double df = 2.0 * a1 * t + 2.0 * p * a2p * std::pow(t, 2.0 * p - 1.0);
    if (df <= 0.0) break;
    t -= ft / df;
  }
  return t;
}

} // namespace detail

/// Deterministic quasi-uniform boundary samples with |rho| <= 1e-10:
/// closed-form parametrization for balls and ellipsoids, a ray root-solve
/// for the pball. count >= 4 for n = 1, >= 16 for n = 2.
inline std::vector<cpoint> sample_boundary(const domain_spec& dom, int count,
                                           std::uint64_t seed = 1) {
  dom.validate();
  if (dom.n == 1) {
    if (count < 4) throw config_error("sample_boundary: count must be >= 4");
    std::vector<cpoint> out;
    out.reserve(count);
    constexpr double golden = 0.6180339887498948482;
    std::uint64_t state = seed ^ 0xD1B54A32D192ED03ull;
    const double off = detail::unit_double(detail::splitmix64(state));
    for (int i = 0; i < count; ++i) {
      const double ang =
          6.283185307179586477 * detail::frac(golden * (i + 1) + off);
      out.push_back(cpoint{dom.radius * cplx(std::cos(ang), std::sin(ang)),
                           cplx(0.0, 0.0)});
    }
    return out;
  }
  if (count < 16) throw config_error("sample_boundary: count must be >= 16 for n = 2");
  const auto unit = sphere_samples(2, 1.0, count, seed);
  std::vector<cpoint> out;
  out.reserve(unit.size());
  for (const auto& s : unit) {
    switch (dom.kind) {
      case domain_kind::ball:
        out.push_back(cpoint{dom.radius * s[0], dom.radius * s[1]});
        break;
      case domain_kind::ellipsoid:
        out.push_back(cpoint{dom.semi_axes[0] * s[0], dom.semi_axes[1] * s[1]});
        break;
      case domain_kind::pball: {
        const double a1 = std::norm(s[0]);
        double a2p = 1.0;
        const double t2 = std::norm(s[1]);
        for (int i = 0; i < dom.p; ++i) a2p *= t2;
        const double t = detail::pball_ray_root(a1, a2p, dom.p);
        cpoint z{t * s[0], t * s[1]};
        if (std::abs(dom.rho(z)) > 1e-10)
          throw solver_error("sample_boundary: ray solve did not reach the boundary");
        out.push_back(z);
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// weight families

enum class family_kind {
  scaled, // phi_M = M * phi_base  (Hessian grows with M)
  fixed   // phi_M = phi_base      (M-independent; the canonical failure mode)
};

inline const char* to_string(family_kind k) {
  return k == family_kind::scaled ? "scaled" : "fixed";
}

/// A one-parameter family of candidate weights indexed by M > 0.
struct weight_family {
  family_kind kind = family_kind::scaled;
  weight_spec base;

  weight_family(family_kind k, weight_spec b) : kind(k), base(std::move(b)) {}
};

/// The concrete weight at parameter M (closed-form derivatives inherited).
inline weight_spec family_weight(const weight_family& fam, double M) {
  if (!(M > 0.0)) throw config_error("weight family: M must be > 0");
  if (fam.kind == family_kind::fixed) return fam.base;
  std::vector<weight_term> terms = fam.base.terms();
  for (auto& t : terms) t.a *= M;
  return weight_spec(fam.base.n(), std::move(terms));
}

// ---------------------------------------------------------------------------
// the two properties

/// Per-sample margins lambda_min(Hessian phi_M) - M; the property holds at
/// the sample iff the margin is >= -1e-10.
inline std::vector<double> check_property_P(const weight_family& fam, double M,
                                            const std::vector<cpoint>& samples) {
  const weight_spec w = family_weight(fam, M);
  std::vector<double> margins;
  margins.reserve(samples.size());
  for (const auto& z : samples) margins.push_back(eval_levi(w, z).mu - M);
  return margins;
}

struct c_tilde_result {
  double value = 0.0; // max over samples of the optimal ratio constant
  bool infinite = false; // some sample had a singular Hessian
};

/// Smallest constant C with |sum_j dphi/dz_j t_j|^2 <= C * t^H H t for all
/// t, maximized over the samples. For positive definite H the optimum is
/// g^T H^{-1} conj(g) (generalized Cauchy-Schwarz extremizer t = H^{-1} conj(g)).
inline c_tilde_result minimal_C_tilde(const weight_family& fam, double M,
                                      const std::vector<cpoint>& samples) {
  const weight_spec w = family_weight(fam, M);
  c_tilde_result out;
  for (const auto& z : samples) {
    const auto ev = eval_levi(w, z);
    const auto& H = ev.levi;
    const auto& g = ev.gradient;
    const double scale = std::max({std::abs(H[0][0]), std::abs(H[1][1]), 1e-300});
    double v = 0.0;
    if (w.n() == 1) {
      const double hii = H[0][0].real();
      if (hii <= 1e-14 * scale) { out.infinite = true; continue; }
      v = std::norm(g[0]) / hii;
    } else {
      const double det_re =
          (H[0][0] * H[1][1] - H[0][1] * H[1][0]).real(); // Hermitian: real
      if (det_re <= 1e-14 * scale * scale ||
          H[0][0].real() <= 1e-14 * scale) {
        out.infinite = true;
        continue;
      }
      // V = g^T H^{-1} conj(g) with H^{-1} = adj(H)/det
      const cplx g0 = g[0], g1 = g[1];
      const cplx num = H[1][1] * g0 * std::conj(g0) - H[0][1] * g0 * std::conj(g1) -
                       H[1][0] * g1 * std::conj(g0) + H[0][0] * g1 * std::conj(g1);
      v = num.real() / det_re;
    }
    out.value = std::max(out.value, v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// certificates

struct certificate_row {
  double M = 0.0;
  double min_margin = 0.0; // min over samples of lambda_min(H) - M
  bool p_holds = false;    // min_margin >= -1e-10
  double c_tilde = 0.0;
  bool c_infinite = false;
};

struct property_p_certificate {
  std::string domain_desc;
  std::string family_desc;
  int sample_count = 0;
  std::vector<certificate_row> rows;
  bool p_all = false;       // (P) over every listed M
  double max_c = 0.0;       // max over M of minimal C
  bool any_c_infinite = false;
  double c_max = 10.0;      // configured uniformity threshold
  bool p_tilde = false;     // max_c finite and <= c_max
  // finite verification only: sampled boundary points, listed M values
  std::string scope_note =
      "certifies the sampled boundary points and listed M values only";
};

inline std::string describe(const domain_spec& d) {
  char buf[96];
  switch (d.kind) {
    case domain_kind::ball:
      std::snprintf(buf, sizeof buf, "ball(r=%g, n=%d)", d.radius, d.n);
      break;
    case domain_kind::ellipsoid:
      std::snprintf(buf, sizeof buf, "ellipsoid(%g, %g)", d.semi_axes[0],
                    d.semi_axes[1]);
      break;
    case domain_kind::pball:
      std::snprintf(buf, sizeof buf, "pball(p=%d)", d.p);
      break;
    default: std::snprintf(buf, sizeof buf, "?");
  }
  return buf;
}

/// Evaluate (P) and (Ptilde) for one family over a sampled boundary.
inline property_p_certificate certify(const domain_spec& dom, const weight_family& fam,
                                      const std::vector<double>& M_list, int count,
                                      double c_max = 10.0, std::uint64_t seed = 1) {
  if (M_list.empty()) throw config_error("certify: M list must be nonempty");
  const auto samples = sample_boundary(dom, count, seed);
  property_p_certificate cert;
  cert.domain_desc = describe(dom);
  cert.family_desc = std::string(to_string(fam.kind)) + " family";
  cert.sample_count = static_cast<int>(samples.size());
  cert.c_max = c_max;
  cert.p_all = true;
  for (double M : M_list) {
    certificate_row row;
    row.M = M;
    const auto margins = check_property_P(fam, M, samples);
    row.min_margin = *std::min_element(margins.begin(), margins.end());
    row.p_holds = row.min_margin >= -1e-10;
    const auto ct = minimal_C_tilde(fam, M, samples);
    row.c_tilde = ct.value;
    row.c_infinite = ct.infinite;
    cert.p_all = cert.p_all && row.p_holds;
    cert.max_c = std::max(cert.max_c, ct.value);
    cert.any_c_infinite = cert.any_c_infinite || ct.infinite;
    cert.rows.push_back(row);
  }
  cert.p_tilde = !cert.any_c_infinite && cert.max_c <= c_max;
  return cert;
}

} // namespace dbarlab
