#pragma once
// Deterministic quasi-uniform point sets on spheres in C^n.
//
// n = 1: golden-ratio angle sequence on the circle |z| = R.
// n = 2: Hopf parametrization of S^3 driven by the R3 low-discrepancy
//        sequence (plastic-number lattice), plus the two coordinate-axis
//        points and the balanced diagonal so degenerate directions of a
//        weight are always probed.
//
// Sequences are scrambled by a seed; identical (seed, count, R) inputs give
// identical points.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "dbarlab/weight.hpp"

namespace dbarlab {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline double unit_double(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double frac(double x) { return x - std::floor(x); }

} // namespace detail

/// Quasi-uniform samples on { |z| = R } in C^n. For n = 2 the returned set
/// has `count + 3` points (axis points and diagonal appended).
inline std::vector<cpoint> sphere_samples(int n, double R, int count,
                                          std::uint64_t seed) {
  if (n != 1 && n != 2) throw config_error("sphere_samples: n must be 1 or 2");
  if (!(R > 0.0)) throw config_error("sphere_samples: radius must be > 0");
  if (count < 8)
    throw config_error("sphere_samples: at least 8 samples per sphere required");
  if (n == 2 && count < 16)
    throw config_error("sphere_samples: n = 2 needs at least 16 samples per sphere");

  std::uint64_t state = seed ^ 0xD1B54A32D192ED03ull;
  const double o1 = detail::unit_double(detail::splitmix64(state));
  const double o2 = detail::unit_double(detail::splitmix64(state));
  const double o3 = detail::unit_double(detail::splitmix64(state));

  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<cpoint> pts;
  pts.reserve(static_cast<std::size_t>(count) + 3);

  if (n == 1) {
    constexpr double golden = 0.6180339887498948482; // 1/phi
    for (int i = 0; i < count; ++i) {
      const double th = two_pi * detail::frac(o1 + golden * (i + 1));
      pts.push_back({R * cplx(std::cos(th), std::sin(th)), cplx(0.0)});
    }
    return pts;
  }

  // R3 sequence: x^3 = x + 1
  constexpr double g = 1.3247179572447460260;
  const double a1 = 1.0 / g, a2 = 1.0 / (g * g), a3 = 1.0 / (g * g * g);
  for (int i = 0; i < count; ++i) {
    const double t = detail::frac(o1 + a1 * (i + 1));        // |z_2|^2 / R^2
    const double alpha = two_pi * detail::frac(o2 + a2 * (i + 1));
    const double beta = two_pi * detail::frac(o3 + a3 * (i + 1));
    const double r1 = R * std::sqrt(1.0 - t), r2 = R * std::sqrt(t);
    pts.push_back({r1 * cplx(std::cos(alpha), std::sin(alpha)),
                   r2 * cplx(std::cos(beta), std::sin(beta))});
  }
  const double d = R / std::numbers::sqrt2;
  pts.push_back({cplx(R), cplx(0.0)});
  pts.push_back({cplx(0.0), cplx(R)});
  pts.push_back({cplx(d), cplx(d)});
  return pts;
}

} // namespace dbarlab
