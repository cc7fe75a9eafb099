#pragma once
// Form fields and the weighted measure.
//
// A form_field holds one complex coefficient array per component over the
// full grid; Dirichlet truncation means every component vanishes on the
// boundary layer. The weighted measure assigns each point the cell mass
// w(p) = exp(-phi(p)) h^(2n). Weights with large range are the norm here, so
// the measure keeps the exponent exactly and all internal arithmetic works
// with exponent differences; w(p) itself may underflow to zero at far
// corners of the box and only ever appears multiplied by field values whose
// true contribution is below double range anyway.
//
// Half-density (gauged) coordinates v(p) = exp(-phi(p)/2) u(p) turn the
// weighted L2 norm into h^n times the flat norm; the spectral layer works
// entirely in these coordinates.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "dbarlab/grid.hpp"
#include "dbarlab/weight.hpp"

namespace dbarlab {

class form_field {
public:
  form_field(grid_ptr grid, int degree)
      : grid_(std::move(grid)), degree_(degree) {
    const int nc = form_components(grid_->n(), degree_);
    comps_.assign(nc, Eigen::VectorXcd::Zero(grid_->points()));
  }

  static form_field zero(grid_ptr grid, int degree) {
    return form_field(std::move(grid), degree);
  }

  /// Sample an analytic coefficient function per component; the boundary
  /// layer is zeroed so the field is Dirichlet-compatible by construction.
  static form_field sample(grid_ptr grid, int degree,
                           const std::function<cplx(int comp, const cpoint&)>& f) {
    form_field out(grid, degree);
    const auto& g = *out.grid_;
    for (int c = 0; c < out.components(); ++c) {
      auto& arr = out.comps_[c];
      for (std::int64_t p = 0; p < g.points(); ++p)
        arr[p] = g.is_boundary(p) ? cplx(0.0) : f(c, g.point(p));
    }
    return out;
  }

  const box_grid& grid() const { return *grid_; }
  grid_ptr grid_handle() const { return grid_; }
  int degree() const { return degree_; }
  int components() const { return static_cast<int>(comps_.size()); }

  Eigen::VectorXcd& comp(int c) { return comps_[c]; }
  const Eigen::VectorXcd& comp(int c) const { return comps_[c]; }

  /// Max |value| over the boundary layer; 0 for Dirichlet-compatible data.
  double boundary_violation() const {
    double m = 0.0;
    for (const auto& arr : comps_)
      for (std::int64_t p = 0; p < grid_->points(); ++p)
        if (grid_->is_boundary(p)) m = std::max(m, std::abs(arr[p]));
    return m;
  }

  void zero_boundary() {
    for (auto& arr : comps_)
      for (std::int64_t p = 0; p < grid_->points(); ++p)
        if (grid_->is_boundary(p)) arr[p] = cplx(0.0);
  }

private:
  grid_ptr grid_;
  int degree_;
  std::vector<Eigen::VectorXcd> comps_;
};

class weighted_measure {
public:
  weighted_measure(const weight_spec& spec, grid_ptr grid)
      : grid_(std::move(grid)), log_cell_(2.0 * grid_->n() * std::log(grid_->h())) {
    if (spec.n() != grid_->n())
      throw config_error("weighted_measure: weight and grid dimensions differ");
    const std::int64_t P = grid_->points();
    phi_.resize(P);
    gauge_in_.resize(P);
    for (std::int64_t p = 0; p < P; ++p) {
      phi_[p] = eval_weight(spec, grid_->point(p));
      gauge_in_[p] = std::exp(-0.5 * phi_[p]); // may underflow, by design
    }
  }

  const box_grid& grid() const { return *grid_; }
  grid_ptr grid_handle() const { return grid_; }

  double phi(std::int64_t p) const { return phi_[p]; }
  double log_w(std::int64_t p) const { return -phi_[p] + log_cell_; }
  double w(std::int64_t p) const { return std::exp(log_w(p)); }
  /// exp(-phi(p)/2), the u -> v gauge factor.
  double gauge_in(std::int64_t p) const { return gauge_in_[p]; }
  /// w(from)/w(to) = exp(phi(to) - phi(from)); finite for neighboring cells
  /// even when both weights underflow.
  double weight_ratio(std::int64_t from, std::int64_t to) const {
    return std::exp(phi_[to] - phi_[from]);
  }
  double cell_volume() const { return std::exp(log_cell_); }
  double log_cell() const { return log_cell_; }

private:
  grid_ptr grid_;
  double log_cell_;
  Eigen::VectorXd phi_;
  Eigen::VectorXd gauge_in_;
};

namespace detail {
// compensated (Kahan) accumulator for complex sums
struct kahan_real {
  double s = 0.0, c = 0.0;
  void add(double v) {
    const double y = v - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  double value() const { return s; }
};

struct kahan_cplx {
  double re = 0.0, im = 0.0, cre = 0.0, cim = 0.0;
  void add(const cplx& v) {
    const double yr = v.real() - cre;
    const double tr = re + yr;
    cre = (tr - re) - yr;
    re = tr;
    const double yi = v.imag() - cim;
    const double ti = im + yi;
    cim = (ti - im) - yi;
    im = ti;
  }
  cplx value() const { return {re, im}; }
};
} // namespace detail

/// Weighted inner product <a, b> = sum over components and points of
/// a(p) conj(b(p)) w(p); linear in `a`, conjugate-linear in `b`.
inline cplx weighted_inner(const form_field& a, const form_field& b,
                           const weighted_measure& m) {
  if (a.degree() != b.degree())
    throw config_error("weighted_inner: form degrees differ");
  if (&a.grid() != &m.grid() || &b.grid() != &m.grid())
    throw config_error("weighted_inner: grid mismatch");
  detail::kahan_cplx acc;
  const std::int64_t P = m.grid().points();
  for (int c = 0; c < a.components(); ++c) {
    const auto& av = a.comp(c);
    const auto& bv = b.comp(c);
    for (std::int64_t p = 0; p < P; ++p) {
      const double gp = m.gauge_in(p);
      // (a g)(conj(b) g) h^2n keeps every factor inside double range
      acc.add((av[p] * gp) * std::conj(bv[p] * gp));
    }
  }
  return acc.value() * m.cell_volume();
}

inline double weighted_norm(const form_field& a, const weighted_measure& m) {
  return std::sqrt(std::max(0.0, weighted_inner(a, a, m).real()));
}

/// Interior points stacked component-major in half-density coordinates:
/// v = exp(-phi/2) u, scaled so that |u|_phi = h^n |v|_2.
inline Eigen::VectorXcd to_stacked(const form_field& u, const weighted_measure& m) {
  const auto& g = m.grid();
  const std::int64_t I = g.interior_points();
  Eigen::VectorXcd v(I * u.components());
  for (int c = 0; c < u.components(); ++c) {
    const auto& arr = u.comp(c);
    for (std::int64_t i = 0; i < I; ++i) {
      const std::int64_t p = g.full_index(i);
      v[c * I + i] = arr[p] * m.gauge_in(p);
    }
  }
  return v;
}

/// Inverse of to_stacked. Entries whose unweighted value would exceed double
/// range carry no representable information (they sit under the noise floor
/// of the half-density data) and are written as zero.
inline form_field from_stacked(const Eigen::VectorXcd& v, int degree,
                               const weighted_measure& m) {
  const auto& g = m.grid();
  const std::int64_t I = g.interior_points();
  const int nc = form_components(g.n(), degree);
  if (v.size() != I * nc)
    throw config_error("from_stacked: size mismatch");
  form_field u(m.grid_handle(), degree);
  for (int c = 0; c < nc; ++c) {
    auto& arr = u.comp(c);
    for (std::int64_t i = 0; i < I; ++i) {
      const std::int64_t p = g.full_index(i);
      const cplx vv = v[c * I + i];
      if (vv == cplx(0.0)) continue;
      const double mag = std::abs(vv);
      const double log_u = std::log(mag) + 0.5 * m.phi(p);
      if (log_u > 690.0) continue; // beyond double range: no information
      // exponentiate the combined log so exp(phi/2) alone cannot overflow
      arr[p] = (vv / mag) * std::exp(log_u);
    }
  }
  return u;
}

} // namespace dbarlab
