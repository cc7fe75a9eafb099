#pragma once
// Low-lying spectrum of the box Laplacian and the inverse (Neumann-type)
// solve, all in half-density coordinates where the operator core is
// Hermitian positive semidefinite with polynomially bounded norm.
//
// Strategy: dense Hermitian eigendecomposition up to a configurable
// fallback dimension (independent oracle); above that, Lanczos with full
// reorthogonalization applied to the shifted inverse (S + sigma)^-1. The
// inverse action uses a sparse Cholesky factorization for n = 1 grids and
// Jacobi-preconditioned conjugate gradients otherwise. Every accepted pair
// is re-verified against the original core: |S v - lambda v| <= tol max(1, lambda).
// Eigenvector phases are fixed deterministically (first component above a
// relative threshold is rotated to the positive real axis), ties are
// reported through a multiplicity count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "dbarlab/operators.hpp"

namespace dbarlab {

struct solver_config {
  int k = 6;                    // eigenpairs requested, >= 1
  double tol = 1e-8;            // residual tolerance, 0 < tol <= 1e-4
  int max_iter = 0;             // Lanczos step budget, 0 = automatic
  int dense_fallback_dim = 2500;
  std::uint64_t seed = 1;
  std::vector<double> count_thresholds = {1.0, 2.0, 4.0, 8.0, 16.0};

  void validate() const {
    if (k < 1) throw config_error("solver_config: k must be >= 1");
    if (!(tol > 0.0) || tol > 1e-4)
      throw config_error("solver_config: tol must lie in (0, 1e-4]");
    if (dense_fallback_dim < 1)
      throw config_error("solver_config: dense_fallback_dim must be >= 1");
  }
};

struct eigen_pair {
  double lambda = 0.0;
  double residual = 0.0;  // |S v - lambda v| / |v| (flat = weighted)
  int multiplicity = 1;   // size of the eigenvalue cluster this pair sits in
  form_field u;           // normalized so |u|_phi = 1
};

struct spectrum_report {
  std::vector<eigen_pair> pairs; // ascending
  double neumann_norm_estimate = 0.0; // 1 / lambda_min
  double inf_grid_mu = 0.0;           // infimum of mu over all grid points
  double lower_bound_margin = 0.0;    // lambda_min - inf_grid_mu
  std::vector<std::pair<double, int>> counts_below; // (threshold, count)
  bool dense_path = false;
  int iterations = 0; // Lanczos steps or 0 for the dense path
};

namespace detail {

inline void phase_fix(Eigen::VectorXcd& v) {
  const double norm = v.norm();
  if (norm == 0.0) return;
  const double thresh = 1e-8 * norm;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > thresh) {
      v *= std::conj(v[i]) / a;
      return;
    }
  }
}

inline Eigen::VectorXcd seeded_unit_vector(Eigen::Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xABCDEF1234567890ull);
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double re = N(rng);
    const double im = N(rng);
    v[i] = cplx(re, im);
  }
  v.normalize();
  return v;
}

/// Jacobi-preconditioned CG for a Hermitian positive definite sparse matrix.
/// Returns the iteration count; throws solver_error on stagnation.
inline int pcg_solve(const sparse_cplx& S, double sigma, const Eigen::VectorXcd& b,
                     Eigen::VectorXcd& x, double rel_tol, int max_iter) {
  const Eigen::Index dim = S.rows();
  Eigen::VectorXd dinv(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double d = S.coeff(i, i).real() + sigma;
    dinv[i] = (d > 0.0) ? 1.0 / d : 1.0;
  }
  x = Eigen::VectorXcd::Zero(dim);
  Eigen::VectorXcd r = b;
  const double bnorm = b.norm();
  if (bnorm == 0.0) return 0;
  Eigen::VectorXcd z = dinv.asDiagonal() * r;
  Eigen::VectorXcd p = z;
  double rz = r.dot(z).real();
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXcd Ap = S * p;
    if (sigma != 0.0) Ap += sigma * p;
    const double pAp = p.dot(Ap).real();
    if (!(pAp > 0.0))
      throw solver_error("pcg: operator not positive definite (p^H A p <= 0)");
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    if (r.norm() <= rel_tol * bnorm) return it;
    z = dinv.asDiagonal() * r;
    const double rz_new = r.dot(z).real();
    const double beta = rz_new / rz;
    rz = rz_new;
    p = z + beta * p;
  }
  throw solver_error("pcg: no convergence within " + std::to_string(max_iter) +
                     " iterations (residual " + std::to_string(r.norm() / bnorm) + ")");
}

/// Action of (S + sigma)^-1: sparse Cholesky when cheap (n = 1 grids are
/// low-bandwidth 2D lattices), Jacobi-PCG otherwise.
class inverse_applier {
public:
  inverse_applier(const sparse_cplx& S, double sigma, bool prefer_direct)
      : S_(S), sigma_(sigma) {
    if (prefer_direct) {
      sparse_cplx A = S;
      for (Eigen::Index i = 0; i < A.rows(); ++i) A.coeffRef(i, i) += sigma;
      llt_.emplace();
      llt_->compute(A);
      if (llt_->info() != Eigen::Success) llt_.reset();
    }
  }

  Eigen::VectorXcd operator()(const Eigen::VectorXcd& b, int& matvecs) const {
    if (llt_) {
      ++matvecs;
      return llt_->solve(b);
    }
    Eigen::VectorXcd x;
    matvecs += pcg_solve(S_, sigma_, b, x, 1e-13, 200000);
    return x;
  }

  bool direct() const { return llt_.has_value(); }

private:
  const sparse_cplx& S_;
  double sigma_;
  std::optional<Eigen::SimplicialLLT<sparse_cplx, Eigen::Lower>> llt_;
};

struct ritz_candidate {
  double lambda;
  double residual;
  Eigen::VectorXcd v;
};

/// Shift-invert Lanczos with full reorthogonalization; returns the k smallest
/// eigenpairs of S verified against tol, or throws solver_error.
inline std::vector<ritz_candidate> shift_invert_lanczos(
    const sparse_cplx& S, int k, double tol, int max_steps, std::uint64_t seed,
    bool prefer_direct, int& steps_out) {
  const Eigen::Index dim = S.rows();
  double max_diag = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i)
    max_diag = std::max(max_diag, std::abs(S.coeff(i, i)));
  const double sigma = 1e-8 * max_diag + 1e-300;
  inverse_applier inv(S, sigma, prefer_direct);

  // memory guard: basis columns of length dim
  const Eigen::Index mem_cap =
      std::max<Eigen::Index>(2 * k + 10, static_cast<Eigen::Index>(3.0e8 / (16.0 * dim)));
  const Eigen::Index m_max =
      std::min<Eigen::Index>({dim, mem_cap, static_cast<Eigen::Index>(max_steps)});
  if (m_max < k)
    throw solver_error("lanczos: step budget smaller than requested pair count");

  Eigen::MatrixXcd Q(dim, m_max);
  std::vector<double> alpha, beta; // T is real symmetric tridiagonal
  Q.col(0) = seeded_unit_vector(dim, seed);
  int matvecs = 0;

  double best_worst_residual = std::numeric_limits<double>::infinity();
  std::vector<ritz_candidate> result;

  for (Eigen::Index j = 0; j < m_max; ++j) {
    Eigen::VectorXcd w = inv(Q.col(j), matvecs);
    if (j > 0) w -= beta[j - 1] * Q.col(j - 1);
    const double a = Q.col(j).dot(w).real();
    w -= a * Q.col(j);
    alpha.push_back(a);
    // two-pass full reorthogonalization
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i <= j; ++i) w -= Q.col(i).dot(w) * Q.col(i);
    double b = w.norm();
    if (j + 1 < m_max) {
      if (b < 1e-12) {
        // invariant subspace reached: restart direction
        Eigen::VectorXcd f = seeded_unit_vector(dim, seed + j + 17);
        for (int pass = 0; pass < 2; ++pass)
          for (Eigen::Index i = 0; i <= j; ++i) f -= Q.col(i).dot(f) * Q.col(i);
        const double fn = f.norm();
        if (fn < 1e-12) { beta.push_back(0.0); steps_out = static_cast<int>(j + 1); break; }
        Q.col(j + 1) = f / fn;
        beta.push_back(0.0);
      } else {
        Q.col(j + 1) = w / b;
        beta.push_back(b);
      }
    }
    steps_out = static_cast<int>(j + 1);

    const Eigen::Index m = j + 1;
    const bool last = (j + 1 == m_max);
    if (m < 2 * k || (!last && m % 10 != 0)) continue;

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success) continue;
    // largest Ritz values of the inverse <-> smallest of S
    std::vector<ritz_candidate> cand;
    bool all_ok = true;
    double worst = 0.0;
    const Eigen::Index take = std::min<Eigen::Index>(k, m);
    for (Eigen::Index t = 0; t < take; ++t) {
      const Eigen::Index idx = m - 1 - t;
      Eigen::VectorXcd y = Q.leftCols(m) * es.eigenvectors().col(idx).cast<cplx>();
      y.normalize();
      const Eigen::VectorXcd Sy = S * y;
      const double lam = y.dot(Sy).real();
      const double res = (Sy - lam * y).norm();
      cand.push_back(ritz_candidate{lam, res, std::move(y)});
      worst = std::max(worst, res / std::max(1.0, std::abs(lam)));
      if (res > tol * std::max(1.0, std::abs(lam))) all_ok = false;
    }
    best_worst_residual = std::min(best_worst_residual, worst);
    if (all_ok && static_cast<Eigen::Index>(cand.size()) == k) {
      std::sort(cand.begin(), cand.end(),
                [](const auto& x, const auto& y) { return x.lambda < y.lambda; });
      return cand;
    }
    if (last) break;
  }
  throw solver_error("lanczos: " + std::to_string(steps_out) +
                     " steps without convergence (best worst-case residual " +
                     std::to_string(best_worst_residual) + ")");
}

} // namespace detail

/// Eigenvalues of a dense Hermitian matrix, ascending. Independent oracle
/// for the iterative path.
inline Eigen::VectorXd dense_oracle(const Eigen::MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw solver_error("dense eigensolver failed");
  return es.eigenvalues();
}

/// Infimum of the smallest Hessian eigenvalue of the weight over all grid
/// points of the box.
inline double inf_grid_mu(const weight_spec& spec, const box_grid& g) {
  double inf = std::numeric_limits<double>::infinity();
  for (std::int64_t p = 0; p < g.points(); ++p)
    inf = std::min(inf, eval_levi(spec, g.point(p)).mu);
  return inf;
}

/// k smallest eigenpairs of a self-adjoint weighted operator (the box
/// Laplacian). `spec` is the weight the operator was assembled with; it
/// feeds the grid infimum of mu reported alongside the ladder.
inline spectrum_report smallest_eigenpairs(const weighted_operator& op,
                                           const weight_spec& spec,
                                           const solver_config& cfg) {
  cfg.validate();
  if (op.degree_src() != op.degree_tgt())
    throw config_error("smallest_eigenpairs: operator must be square");
  const sparse_cplx& S = op.core();
  const Eigen::Index dim = S.rows();
  if (cfg.k > dim)
    throw config_error("smallest_eigenpairs: k exceeds operator dimension");
  const auto& m = op.measure();
  const double hn = std::sqrt(m.cell_volume());

  spectrum_report rep;
  std::vector<detail::ritz_candidate> cand;

  if (dim <= cfg.dense_fallback_dim) {
    rep.dense_path = true;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(S)};
    if (es.info() != Eigen::Success) throw solver_error("dense eigensolver failed");
    for (int t = 0; t < cfg.k; ++t) {
      Eigen::VectorXcd y = es.eigenvectors().col(t);
      const Eigen::VectorXcd Sy = S * y;
      const double lam = y.dot(Sy).real();
      cand.push_back({lam, (Sy - lam * y).norm(), std::move(y)});
    }
  } else {
    const int auto_steps = std::max(400, 10 * cfg.k);
    const int max_steps = cfg.max_iter > 0 ? cfg.max_iter : auto_steps;
    const bool prefer_direct = (m.grid().n() == 1) || dim <= 12000;
    cand = detail::shift_invert_lanczos(S, cfg.k, cfg.tol, max_steps, cfg.seed,
                                        prefer_direct, rep.iterations);
  }

  for (auto& c : cand) {
    detail::phase_fix(c.v);
    eigen_pair pair{c.lambda, c.residual, 1,
                    from_stacked(c.v / hn, op.degree_tgt(), m)};
    rep.pairs.push_back(std::move(pair));
  }
  // cluster multiplicities among the computed ladder
  const double cluster_tol = std::max(1e-8, 10.0 * cfg.tol);
  for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
    int mult = 1;
    for (std::size_t j = 0; j < rep.pairs.size(); ++j) {
      if (j == i) continue;
      const double scale = std::max(1.0, std::abs(rep.pairs[i].lambda));
      if (std::abs(rep.pairs[i].lambda - rep.pairs[j].lambda) <= cluster_tol * scale)
        ++mult;
    }
    rep.pairs[i].multiplicity = mult;
  }

  const double lam_min = rep.pairs.front().lambda;
  rep.neumann_norm_estimate =
      lam_min > 0.0 ? 1.0 / lam_min : std::numeric_limits<double>::infinity();
  rep.inf_grid_mu = inf_grid_mu(spec, m.grid());
  rep.lower_bound_margin = lam_min - rep.inf_grid_mu;
  for (double thr : cfg.count_thresholds) {
    int c = 0;
    for (const auto& p : rep.pairs)
      if (p.lambda < thr) ++c;
    rep.counts_below.emplace_back(thr, c);
  }
  return rep;
}

struct neumann_result {
  form_field u;
  int iterations = 0;
  double rel_residual = 0.0;
};

/// Apply the inverse of the box Laplacian: solve op u = f by conjugate
/// gradients on the Hermitian positive definite core. Requires lambda_min > 0
/// (detected and reported otherwise).
inline neumann_result apply_neumann(const weighted_operator& op, const form_field& f,
                                    const solver_config& cfg) {
  cfg.validate();
  if (f.degree() != op.degree_src())
    throw config_error("apply_neumann: form degree mismatch");
  const auto& m = op.measure();
  const Eigen::VectorXcd b = to_stacked(f, m);
  Eigen::VectorXcd x;
  const int maxit = cfg.max_iter > 0 ? cfg.max_iter : 50000;
  const int its = detail::pcg_solve(op.core(), 0.0, b, x, cfg.tol, maxit);
  neumann_result out{from_stacked(x, op.degree_tgt(), m), its, 0.0};
  const double bn = b.norm();
  if (bn > 0.0) out.rel_residual = (op.core() * x - b).norm() / bn;
  return out;
}

struct lower_bound_result {
  double lambda_min = 0.0;
  double inf_mu = 0.0;
  double margin = 0.0;   // lambda_min - inf_mu
  double slack = 0.0;    // 5 h^2 + 1e-8
  bool within_slack = false;
};

/// Quantitative lower bound check: the smallest Laplacian eigenvalue must
/// not undercut the grid infimum of mu by more than the discretization slack.
inline lower_bound_result lower_bound_check(const weight_spec& spec,
                                            const box_grid& g, double lambda_min) {
  lower_bound_result r;
  r.lambda_min = lambda_min;
  r.inf_mu = inf_grid_mu(spec, g);
  r.margin = lambda_min - r.inf_mu;
  r.slack = 5.0 * g.h() * g.h() + 1e-8;
  r.within_slack = r.margin >= -r.slack;
  return r;
}

} // namespace dbarlab
