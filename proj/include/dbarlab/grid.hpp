#pragma once
// Uniform truncation grid for C^n (n = 1, 2), identified with the real box
// [-L, L]^(2n). N points per real axis (odd, >= 9, so the origin is a grid
// point), spacing h = 2L/(N-1). Flat indices run row-major over the axis
// order (x1, y1, x2, y2) with x1 slowest. The outermost layer is the
// Dirichlet boundary; interior points carry the degrees of freedom and are
// enumerated in the same row-major order with boundary points skipped.

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dbarlab/errors.hpp"
#include "dbarlab/weight.hpp"

namespace dbarlab {

struct grid_spec {
  int n = 1;
  double L = 1.0;
  int N = 9;
};

class box_grid {
public:
  box_grid(const grid_spec& gs) : n_(gs.n), L_(gs.L), N_(gs.N) {
    if (n_ != 1 && n_ != 2)
      throw config_error("box_grid: n must be 1 or 2");
    if (!(L_ > 0.0))
      throw config_error("box_grid: L must be > 0");
    if (N_ < 9)
      throw config_error("box_grid: N must be >= 9");
    if (N_ % 2 == 0)
      throw config_error("box_grid: N must be odd, got " + std::to_string(N_));
    axes_ = 2 * n_;
    h_ = 2.0 * L_ / (N_ - 1);
    P_ = 1;
    for (int a = 0; a < axes_; ++a) P_ *= N_;
    strides_.assign(axes_, 1);
    for (int a = axes_ - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * N_;

    coords_.resize(N_);
    for (int i = 0; i < N_; ++i) coords_[i] = -L_ + i * h_;
    // N odd: force an exact origin sample
    coords_[(N_ - 1) / 2] = 0.0;

    interior_of_full_.assign(P_, -1);
    points_.resize(P_);
    abs2_.resize(P_);
    std::array<int, 4> idx{0, 0, 0, 0};
    for (std::int64_t p = 0; p < P_; ++p) {
      bool inner = true;
      double a2 = 0.0;
      cpoint z{cplx(0.0), cplx(0.0)};
      for (int a = 0; a < axes_; ++a) {
        if (idx[a] == 0 || idx[a] == N_ - 1) inner = false;
        const double c = coords_[idx[a]];
        a2 += c * c;
        if (a % 2 == 0)
          z[a / 2] += c;
        else
          z[a / 2] += cplx(0.0, c);
      }
      points_[p] = z;
      abs2_[p] = a2;
      if (inner) {
        interior_of_full_[p] = static_cast<std::int64_t>(full_of_interior_.size());
        full_of_interior_.push_back(p);
      }
      for (int a = axes_ - 1; a >= 0; --a) {
        if (++idx[a] < N_) break;
        idx[a] = 0;
      }
    }
  }

  int n() const { return n_; }
  double L() const { return L_; }
  int N() const { return N_; }
  double h() const { return h_; }
  int axes() const { return axes_; }
  std::int64_t points() const { return P_; }
  std::int64_t interior_points() const {
    return static_cast<std::int64_t>(full_of_interior_.size());
  }

  double coordinate(int idx) const { return coords_[idx]; }
  const cpoint& point(std::int64_t p) const { return points_[p]; }
  double abs2(std::int64_t p) const { return abs2_[p]; }
  bool is_boundary(std::int64_t p) const { return interior_of_full_[p] < 0; }

  std::int64_t interior_index(std::int64_t full) const { return interior_of_full_[full]; }
  std::int64_t full_index(std::int64_t interior) const { return full_of_interior_[interior]; }

  int axis_index(std::int64_t p, int axis) const {
    return static_cast<int>((p / strides_[axis]) % N_);
  }

  std::int64_t stride(int axis) const { return strides_[axis]; }

  /// Flat index of the neighbor one step along `axis`, or -1 off the grid.
  std::int64_t neighbor(std::int64_t p, int axis, int dir) const {
    const int i = axis_index(p, axis);
    const int j = i + dir;
    if (j < 0 || j >= N_) return -1;
    return p + static_cast<std::int64_t>(dir) * strides_[axis];
  }

private:
  int n_;
  double L_;
  int N_;
  int axes_ = 2;
  double h_ = 0.0;
  std::int64_t P_ = 0;
  std::vector<std::int64_t> strides_;
  std::vector<double> coords_;
  std::vector<cpoint> points_;
  std::vector<double> abs2_;
  std::vector<std::int64_t> interior_of_full_;
  std::vector<std::int64_t> full_of_interior_;
};

using grid_ptr = std::shared_ptr<const box_grid>;

inline grid_ptr make_grid(int n, double L, int N) {
  return std::make_shared<box_grid>(grid_spec{n, L, N});
}

inline grid_ptr make_grid(const grid_spec& gs) {
  return std::make_shared<box_grid>(gs);
}

/// Components of a (0, q)-form on C^n: one coefficient function for q = 0,
/// n for q = 1, n(n-1)/2 for q = 2 (empty when n = 1).
inline int form_components(int n, int degree) {
  switch (degree) {
    case 0: return 1;
    case 1: return n;
    case 2: return n * (n - 1) / 2;
    default: throw config_error("form degree must be 0, 1 or 2");
  }
}

} // namespace dbarlab
