#pragma once
// Asymptotic growth checks for the smallest Hessian eigenvalue mu(z) of a
// weight, sampled on spheres of increasing radius.
//
//   star:        liminf_{|z| -> inf} mu(z) > 0
//   double_star: lim_{|z| -> inf} mu(z) = +inf
//
// Both are judged from per-radius infima over deterministic sphere samples,
// so a verdict is evidence at the sampled radii, not a proof.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "dbarlab/sphere.hpp"
#include "dbarlab/weight.hpp"

namespace dbarlab {

enum class growth_condition { star, double_star };
enum class verdict_kind { holds, fails, inconclusive };

struct condition_config {
  growth_condition condition = growth_condition::double_star;
  std::vector<double> radii;      // >= 3 entries, strictly increasing, > 0
  int samples_per_sphere = 64;    // >= 8 (n = 1), >= 16 (n = 2)
  double star_floor = 1e-6;       // positive floor for star
  double growth_ratio = 1.05;     // minimal per-step factor for double_star
  double growth_floor = 1.0;      // minimal final infimum for double_star
  std::uint64_t seed = 1;
};

struct condition_verdict {
  growth_condition condition = growth_condition::double_star;
  std::vector<double> radii;
  std::vector<double> inf_per_radius;
  std::vector<double> axis_min_mu; // n = 2 only: min over the two axis points
  verdict_kind verdict = verdict_kind::inconclusive;
  double margin = 0.0;
};

inline const char* to_string(verdict_kind v) {
  switch (v) {
    case verdict_kind::holds: return "holds";
    case verdict_kind::fails: return "fails";
    default: return "inconclusive";
  }
}

inline const char* to_string(growth_condition c) {
  return c == growth_condition::star ? "star" : "double_star";
}

inline condition_verdict check_condition(const weight_spec& spec,
                                         const condition_config& cfg) {
  if (cfg.radii.size() < 3)
    throw config_error("check_condition: at least 3 radii required");
  for (std::size_t i = 0; i < cfg.radii.size(); ++i) {
    if (!(cfg.radii[i] > 0.0))
      throw config_error("check_condition: radii must be positive");
    if (i > 0 && !(cfg.radii[i] > cfg.radii[i - 1]))
      throw config_error("check_condition: radii must be strictly increasing");
  }
  if (!(cfg.star_floor > 0.0))
    throw config_error("check_condition: star floor must be positive");

  condition_verdict out;
  out.condition = cfg.condition;
  out.radii = cfg.radii;

  for (double R : cfg.radii) {
    const auto pts = sphere_samples(spec.n(), R, cfg.samples_per_sphere, cfg.seed);
    double inf_mu = std::numeric_limits<double>::infinity();
    for (const auto& p : pts)
      inf_mu = std::min(inf_mu, eval_levi(spec, p).mu);
    out.inf_per_radius.push_back(inf_mu);
    if (spec.n() == 2) {
      const double m1 = eval_levi(spec, {cplx(R), cplx(0.0)}).mu;
      const double m2 = eval_levi(spec, {cplx(0.0), cplx(R)}).mu;
      out.axis_min_mu.push_back(std::min(m1, m2));
    }
  }

  const auto& inf = out.inf_per_radius;
  const std::size_t last = inf.size() - 1;

  if (cfg.condition == growth_condition::star) {
    out.margin = inf[last] - cfg.star_floor;
    if (inf[last] < cfg.star_floor) {
      out.verdict = verdict_kind::fails;
    } else if (inf[last] < 0.9 * inf[last - 1] && inf[last - 1] < 0.9 * inf[last - 2]) {
      // above the floor but collapsing across the outermost radii
      out.verdict = verdict_kind::inconclusive;
    } else {
      out.verdict = verdict_kind::holds;
    }
    return out;
  }

  // double_star: demand geometric growth across the last three radii and a
  // final infimum above the growth floor.
  const double s1 = inf[last - 1] - cfg.growth_ratio * inf[last - 2];
  const double s2 = inf[last] - cfg.growth_ratio * inf[last - 1];
  const bool growing = s1 > 0.0 && s2 > 0.0;
  out.margin = std::min({s1, s2, inf[last] - cfg.growth_floor});
  if (growing && inf[last] >= cfg.growth_floor)
    out.verdict = verdict_kind::holds;
  else if (growing)
    out.verdict = verdict_kind::inconclusive;
  else
    out.verdict = verdict_kind::fails;
  return out;
}

} // namespace dbarlab
