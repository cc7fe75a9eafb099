#pragma once
// Parametric plurisubharmonic weights on C^n (n = 1 or 2).
//
// A weight is a finite sum of terms
//   coordinate term: a * |z_j|^(2m)
//   radial term:     a * (|z|^2)^m
// with a > 0 and integer m >= 1. Every term admits closed-form Wirtinger
// derivatives, so the gradient (d phi / d z_j) and the complex Hessian
// (d^2 phi / d z_j d zbar_k) are evaluated exactly; a second-order
// finite-difference Hessian is provided as an independent cross-check.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "dbarlab/errors.hpp"

namespace dbarlab {

using cplx = std::complex<double>;

/// A point of C^2; for n = 1 the second slot stays zero.
using cpoint = std::array<cplx, 2>;

enum class term_kind { coordinate, radial };

struct weight_term {
  term_kind kind = term_kind::radial;
  double a = 1.0; // coefficient, > 0
  int m = 1;      // half-degree, >= 1
  int j = 1;      // 1-based coordinate index, coordinate terms only
};

/// Validated weight description. Immutable after construction.
class weight_spec {
public:
  weight_spec(int n, std::vector<weight_term> terms)
      : n_(n), terms_(std::move(terms)) {
    if (n_ != 1 && n_ != 2)
      throw config_error("weight_spec: n must be 1 or 2, got " + std::to_string(n_));
    if (terms_.empty())
      throw config_error("weight_spec: at least one term required");
    for (const auto& t : terms_) {
      if (!(t.a > 0.0))
        throw config_error("weight_spec: term coefficient must be > 0");
      if (t.m < 1)
        throw config_error("weight_spec: term power must be >= 1");
      if (t.kind == term_kind::coordinate && (t.j < 1 || t.j > n_))
        throw config_error("weight_spec: coordinate index out of range");
    }
  }

  int n() const { return n_; }
  const std::vector<weight_term>& terms() const { return terms_; }

private:
  int n_;
  std::vector<weight_term> terms_;
};

namespace detail {
// t^p for small integer p, exact for p = 0 (returns 1 even at t = 0).
inline double ipow(double t, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= t;
  return r;
}
} // namespace detail

inline double eval_weight(const weight_spec& spec, const cpoint& z) {
  const double s = std::norm(z[0]) + std::norm(z[1]);
  double phi = 0.0;
  for (const auto& t : spec.terms()) {
    if (t.kind == term_kind::radial)
      phi += t.a * detail::ipow(s, t.m);
    else
      phi += t.a * detail::ipow(std::norm(z[t.j - 1]), t.m);
  }
  return phi;
}

/// Wirtinger gradient g_j = d phi / d z_j. The other Wirtinger half is
/// conj(g_j) because phi is real.
inline cpoint eval_gradient(const weight_spec& spec, const cpoint& z) {
  const double s = std::norm(z[0]) + std::norm(z[1]);
  cpoint g{cplx(0.0), cplx(0.0)};
  for (const auto& t : spec.terms()) {
    if (t.kind == term_kind::radial) {
      const double c = t.a * t.m * detail::ipow(s, t.m - 1);
      for (int j = 0; j < spec.n(); ++j) g[j] += c * std::conj(z[j]);
    } else {
      const int j = t.j - 1;
      const double c = t.a * t.m * detail::ipow(std::norm(z[j]), t.m - 1);
      g[j] += c * std::conj(z[j]);
    }
  }
  return g;
}

/// Complex Hessian entries M[j][k] = d^2 phi / d z_j d zbar_k (Hermitian).
using levi_matrix = std::array<std::array<cplx, 2>, 2>;

inline levi_matrix eval_levi_matrix(const weight_spec& spec, const cpoint& z) {
  const double s = std::norm(z[0]) + std::norm(z[1]);
  levi_matrix M{{{cplx(0.0), cplx(0.0)}, {cplx(0.0), cplx(0.0)}}};
  for (const auto& t : spec.terms()) {
    if (t.kind == term_kind::radial) {
      // a m [ (m-1) s^(m-2) z_k zbar_j + s^(m-1) delta_jk ]
      const double c1 = (t.m >= 2) ? t.a * t.m * (t.m - 1) * detail::ipow(s, t.m - 2) : 0.0;
      const double c2 = t.a * t.m * detail::ipow(s, t.m - 1);
      for (int j = 0; j < spec.n(); ++j) {
        for (int k = 0; k < spec.n(); ++k) {
          if (c1 != 0.0) M[j][k] += c1 * z[k] * std::conj(z[j]);
          if (j == k) M[j][k] += c2;
        }
      }
    } else {
      const int j = t.j - 1;
      M[j][j] += t.a * t.m * t.m * detail::ipow(std::norm(z[j]), t.m - 1);
    }
  }
  return M;
}

/// Smallest eigenvalue of the Hessian; closed form (1x1 entry or the 2x2
/// Hermitian eigenvalue formula).
inline double levi_min_eigenvalue(const levi_matrix& M, int n) {
  const double a = M[0][0].real();
  if (n == 1) return a;
  const double c = M[1][1].real();
  const double mean = 0.5 * (a + c);
  const double off = 0.5 * (a - c);
  return mean - std::sqrt(off * off + std::norm(M[0][1]));
}

struct levi_eval {
  cpoint point;
  cpoint gradient;
  levi_matrix levi;
  double mu = 0.0; // smallest Hessian eigenvalue
};

inline levi_eval eval_levi(const weight_spec& spec, const cpoint& z) {
  levi_eval out;
  out.point = z;
  out.gradient = eval_gradient(spec, z);
  out.levi = eval_levi_matrix(spec, z);
  out.mu = levi_min_eigenvalue(out.levi, spec.n());
  return out;
}

/// O(h^2) finite-difference Hessian, independent of the closed forms above.
/// Uses the Wirtinger decomposition
///   d^2/dz_j dzbar_k = (1/4) [ dx_j dx_k + dy_j dy_k + i (dx_j dy_k - dy_j dx_k) ]
/// with centered second differences on the 2n real axes.
inline levi_matrix finite_difference_levi(const weight_spec& spec, const cpoint& z,
                                          double h) {
  if (!(h > 0.0)) throw config_error("finite_difference_levi: h must be > 0");
  const int n = spec.n();

  auto shifted = [&](int axis, double d) {
    cpoint w = z;
    const int j = axis / 2;
    if (axis % 2 == 0)
      w[j] += d;
    else
      w[j] += cplx(0.0, d);
    return w;
  };
  // centered second difference along real axes (a, b)
  auto d2 = [&](int a, int b) {
    if (a == b) {
      return (eval_weight(spec, shifted(a, h)) - 2.0 * eval_weight(spec, z) +
              eval_weight(spec, shifted(a, -h))) / (h * h);
    }
    auto shift2 = [&](double da, double db) {
      cpoint w = shifted(a, da);
      const int j = b / 2;
      if (b % 2 == 0)
        w[j] += db;
      else
        w[j] += cplx(0.0, db);
      return eval_weight(spec, w);
    };
    return (shift2(h, h) - shift2(h, -h) - shift2(-h, h) + shift2(-h, -h)) /
           (4.0 * h * h);
  };

  levi_matrix M{{{cplx(0.0), cplx(0.0)}, {cplx(0.0), cplx(0.0)}}};
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const int xj = 2 * j, yj = 2 * j + 1, xk = 2 * k, yk = 2 * k + 1;
      const double re = 0.25 * (d2(xj, xk) + d2(yj, yk));
      const double im = 0.25 * (d2(xj, yk) - d2(yj, xk));
      M[j][k] = cplx(re, im);
    }
  }
  return M;
}

} // namespace dbarlab
