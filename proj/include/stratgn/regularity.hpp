#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "stratgn/kkt.hpp"
#include "stratgn/model.hpp"
#include "stratgn/spectral.hpp"

namespace stratgn {

enum class Verdict { kHolds, kFails, kHeuristicHolds, kHeuristicFails, kNotApplicable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kHolds:
      return "holds";
    case Verdict::kFails:
      return "fails";
    case Verdict::kHeuristicHolds:
      return "heuristic-holds";
    case Verdict::kHeuristicFails:
      return "heuristic-fails";
    case Verdict::kNotApplicable:
      return "not-applicable";
  }
  return "unknown";
}

inline bool holds(Verdict v) {
  return v == Verdict::kHolds || v == Verdict::kHeuristicHolds;
}

/// Verdict together with its margin; vacuous checks carry +inf.
struct ConditionResult {
  Verdict verdict = Verdict::kNotApplicable;
  double margin = 0.0;
};

struct RegularityOptions {
  double tau_rank_factor = 1e-10;
  double tau_margin = 1e-8;
  double zero_tol_factor = kDefaultRelativeZeroTolerance;
  int sonc_samples = 2000;
  int srcq_restarts = 8;
  int srcq_max_iter = 20000;
  double srcq_residual_limit = 1e-6;
  std::uint64_t seed = 0;
};

namespace detail {

/// Orthonormal basis (columns) of the null space of `c`.
inline Matrix null_space(const Matrix& c, int cols, double tau_rank_factor) {
  if (c.rows() == 0 || cols == 0) {
    return Matrix::Identity(cols, cols);
  }
  Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  if (smax == 0.0) {
    return Matrix::Identity(cols, cols);
  }
  const double tau = tau_rank_factor * smax;
  int rank = 0;
  while (rank < s.size() && s(rank) > tau) {
    ++rank;
  }
  return svd.matrixV().rightCols(cols - rank);
}

/// Rows of the constraint v ↦ selected blocks of Pᵀ g′(x) v P.
inline Matrix block_constraint_matrix(const NlsdpProblem& problem,
                                      const Vector& x, const Ied& ied,
                                      bool include_beta_beta) {
  const int m = problem.num_vars();
  const int n = ied.n();
  std::vector<std::pair<int, int>> entries;
  for (int i = ied.p; i < n; ++i) {
    for (int j = ied.p; j <= i; ++j) {
      if (ied.in_beta(i) && ied.in_beta(j) && !include_beta_beta) {
        continue;
      }
      entries.emplace_back(i, j);
    }
  }
  Matrix c(static_cast<Eigen::Index>(entries.size()), m);
  Vector e = Vector::Zero(m);
  for (int k = 0; k < m; ++k) {
    e.setZero();
    e(k) = 1.0;
    const Matrix rotated = ied.rotate_in(problem.apply_dg(x, e));
    for (std::size_t r = 0; r < entries.size(); ++r) {
      const auto [i, j] = entries[r];
      c(static_cast<Eigen::Index>(r), k) =
          (i == j ? 1.0 : std::numbers::sqrt2) * rotated(i, j);
    }
  }
  return c;
}

inline Matrix hessian_matrix(const NlsdpProblem& problem,
                             const PrimalDualPoint& z) {
  const int m = problem.num_vars();
  Matrix h(m, m);
  Vector e = Vector::Zero(m);
  for (int i = 0; i < m; ++i) {
    e.setZero();
    e(i) = 1.0;
    h.col(i) = problem.apply_hess_lagrangian(z.x, z.y, e);
  }
  return 0.5 * (h + h.transpose());
}

inline Ied point_ied(const NlsdpProblem& problem, const PrimalDualPoint& z,
                     const RegularityOptions& options) {
  return residual(problem, z, options.zero_tol_factor).ied;
}

inline Vector sorted_eigenvalues(const Matrix& q) {
  if (q.rows() == 0) {
    return Vector(0);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(q, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

}  // namespace detail

/// Orthonormal basis of appl(z): v with ββ, βγ, γγ blocks of Pᵀ g′(x)v P zero.
inline Matrix appl_basis(const NlsdpProblem& problem, const PrimalDualPoint& z,
                         const Ied& ied, double tau_rank_factor = 1e-10) {
  return detail::null_space(
      detail::block_constraint_matrix(problem, z.x, ied, true),
      problem.num_vars(), tau_rank_factor);
}

/// Orthonormal basis of app(z): v with βγ, γγ blocks of Pᵀ g′(x)v P zero.
inline Matrix app_basis(const NlsdpProblem& problem, const PrimalDualPoint& z,
                        const Ied& ied, double tau_rank_factor = 1e-10) {
  return detail::null_space(
      detail::block_constraint_matrix(problem, z.x, ied, false),
      problem.num_vars(), tau_rank_factor);
}

/**
 * Matrix of  v ↦ ⟨v, ∇²ₓₓL v⟩ + 2 Σ_{i∈α, j∈γ} (−λ_j/λ_i) [Pᵀ(g′(x)v)P]²_ij
 * restricted to span(basis).
 */
inline Matrix quad_form_matrix(const NlsdpProblem& problem,
                               const PrimalDualPoint& z, const Ied& ied,
                               const Matrix& basis) {
  const auto k = basis.cols();
  Matrix q = basis.transpose() * detail::hessian_matrix(problem, z) * basis;
  if (ied.p == 0 || ied.q == 0 || k == 0) {
    return q;
  }
  std::vector<Matrix> rotated;
  rotated.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index c = 0; c < k; ++c) {
    rotated.push_back(ied.rotate_in(problem.apply_dg(z.x, basis.col(c))));
  }
  const int n = ied.n();
  Vector row(k);
  for (int i = 0; i < ied.p; ++i) {
    for (int j = n - ied.q; j < n; ++j) {
      const double weight = -ied.eigenvalues(j) / ied.eigenvalues(i);
      for (Eigen::Index c = 0; c < k; ++c) {
        row(c) = rotated[static_cast<std::size_t>(c)](i, j);
      }
      q += 2.0 * weight * row * row.transpose();
    }
  }
  return 0.5 * (q + q.transpose());
}

inline ConditionResult check_wsoc(const NlsdpProblem& problem,
                                  const PrimalDualPoint& z, const Ied& ied,
                                  const RegularityOptions& options = {}) {
  const Matrix basis = appl_basis(problem, z, ied, options.tau_rank_factor);
  if (basis.cols() == 0) {
    return {Verdict::kHolds, std::numeric_limits<double>::infinity()};
  }
  const Vector e =
      detail::sorted_eigenvalues(quad_form_matrix(problem, z, ied, basis));
  const double lo = e(0);
  const double hi = e(e.size() - 1);
  const double tau = options.tau_margin;
  if (lo > tau) {
    return {Verdict::kHolds, lo};
  }
  if (hi < -tau) {
    return {Verdict::kHolds, -hi};
  }
  if (lo < -tau && hi > tau) {
    return {Verdict::kFails, -std::min(-lo, hi)};
  }
  return {Verdict::kFails, e.cwiseAbs().minCoeff()};
}

inline ConditionResult check_ssosc(const NlsdpProblem& problem,
                                   const PrimalDualPoint& z, const Ied& ied,
                                   const RegularityOptions& options = {}) {
  const Matrix basis = app_basis(problem, z, ied, options.tau_rank_factor);
  if (basis.cols() == 0) {
    return {Verdict::kHolds, std::numeric_limits<double>::infinity()};
  }
  const Vector e =
      detail::sorted_eigenvalues(quad_form_matrix(problem, z, ied, basis));
  const double lo = e(0);
  return {lo > options.tau_margin ? Verdict::kHolds : Verdict::kFails, lo};
}

namespace detail {

/// σ_N of [svec g′(x)e_i | svec P B Pᵀ] over the allowed blocks of B.
inline ConditionResult span_check(const NlsdpProblem& problem,
                                  const PrimalDualPoint& z, const Ied& ied,
                                  bool allow_beta_beta,
                                  const RegularityOptions& options) {
  const int m = problem.num_vars();
  const int n = ied.n();
  const auto dim = static_cast<Eigen::Index>(packed_size(n));
  std::vector<Vector> cols;
  Vector e = Vector::Zero(m);
  for (int i = 0; i < m; ++i) {
    e.setZero();
    e(i) = 1.0;
    cols.push_back(problem.apply_dg(z.x, e).svec());
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const bool alpha_row = i < ied.p || j < ied.p;
      const bool beta_beta = ied.in_beta(i) && ied.in_beta(j);
      if (!(alpha_row || (allow_beta_beta && beta_beta))) {
        continue;
      }
      const Vector ui = ied.basis.col(i);
      const Vector uj = ied.basis.col(j);
      const Matrix b = i == j ? Matrix(ui * ui.transpose())
                              : Matrix((ui * uj.transpose() +
                                        uj * ui.transpose()) /
                                       std::numbers::sqrt2);
      cols.push_back(SymMatrix::from_dense(b).svec());
    }
  }
  if (static_cast<Eigen::Index>(cols.size()) < dim) {
    return {Verdict::kFails, 0.0};
  }
  Matrix stacked(dim, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    stacked.col(static_cast<Eigen::Index>(k)) = cols[k];
  }
  Eigen::JacobiSVD<Matrix> svd(stacked);
  const double sigma_n = svd.singularValues()(dim - 1);
  return {sigma_n > options.tau_margin ? Verdict::kHolds : Verdict::kFails,
          sigma_n};
}

}  // namespace detail

inline ConditionResult check_wsrcq(const NlsdpProblem& problem,
                                   const PrimalDualPoint& z, const Ied& ied,
                                   const RegularityOptions& options = {}) {
  return detail::span_check(problem, z, ied, true, options);
}

inline ConditionResult check_cn(const NlsdpProblem& problem,
                                const PrimalDualPoint& z, const Ied& ied,
                                const RegularityOptions& options = {}) {
  return detail::span_check(problem, z, ied, false, options);
}

/**
 * Sampling check of the second order necessary condition. Directions d are
 * drawn from app(z) and kept when the ββ block of Pᵀ(g′(x)d)P is PSD; the
 * margin is the smallest normalized value of the form over kept samples.
 */
inline ConditionResult check_sonc_heuristic(const NlsdpProblem& problem,
                                            const PrimalDualPoint& z,
                                            const Ied& ied, int samples,
                                            const RegularityOptions& options = {}) {
  if (samples < 1) {
    throw InputError("samples", "must be positive");
  }
  const Matrix basis = app_basis(problem, z, ied, options.tau_rank_factor);
  if (basis.cols() == 0) {
    return {Verdict::kHeuristicHolds, std::numeric_limits<double>::infinity()};
  }
  const Matrix q = quad_form_matrix(problem, z, ied, basis);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  const int b = ied.beta_size();
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Vector w(basis.cols());
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      w(k) = normal(rng);
    }
    w.normalize();
    if (b > 0) {
      const Matrix rotated = ied.rotate_in(problem.apply_dg(z.x, basis * w));
      const Matrix bb = rotated.block(ied.p, ied.p, b, b);
      const Vector e = detail::sorted_eigenvalues(bb);
      if (e(0) < -1e-12 * std::max(1.0, bb.norm())) {
        continue;
      }
    }
    worst = std::min(worst, w.dot(q * w));
  }
  if (!std::isfinite(worst)) {
    return {Verdict::kHeuristicHolds, worst};
  }
  if (std::abs(worst) < 1e-14 * std::max(1.0, q.norm())) {
    worst = 0.0;
  }
  return {worst < -options.tau_margin ? Verdict::kHeuristicFails
                                      : Verdict::kHeuristicHolds,
          worst};
}

/**
 * Alternating-projection check that N ∩ C⁻ = {0}, where N is the null space of
 * S ↦ ∇g(x)S and C⁻ = {P D Pᵀ : D_α· = 0, D_ββ ⪯ 0}. The margin reported is
 * the largest alignment ‖Π_N D‖/‖D‖ seen over D ∈ C⁻.
 */
inline ConditionResult check_srcq_heuristic(const NlsdpProblem& problem,
                                            const PrimalDualPoint& z,
                                            const Ied& ied, int restarts,
                                            const RegularityOptions& options = {}) {
  if (restarts < 1) {
    throw InputError("restarts", "must be positive");
  }
  const KktResidual res = residual(problem, z, options.zero_tol_factor);
  if (res.f2.norm() > options.srcq_residual_limit) {
    return {Verdict::kNotApplicable, 0.0};
  }
  const int m = problem.num_vars();
  const int n = ied.n();
  const int p = ied.p;
  const int b = ied.beta_size();

  // Rotated constraint rows svec(Pᵀ g′(x)e_i P); N⊥ is their span.
  Matrix rows(m, static_cast<Eigen::Index>(packed_size(n)));
  Vector e = Vector::Zero(m);
  for (int i = 0; i < m; ++i) {
    e.setZero();
    e(i) = 1.0;
    rows.row(i) =
        SymMatrix::from_dense(ied.rotate_in(problem.apply_dg(z.x, e))).svec();
  }
  Matrix range;
  if (m > 0) {
    Eigen::JacobiSVD<Matrix> svd(rows.transpose(), Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    int rank = 0;
    while (rank < s.size() && s(rank) > options.tau_rank_factor * s(0)) {
      ++rank;
    }
    range = svd.matrixU().leftCols(rank);
  } else {
    range = Matrix(static_cast<Eigen::Index>(packed_size(n)), 0);
  }

  const auto project_cone = [&](const Vector& v) {
    SymMatrix d = SymMatrix::from_svec(n, v);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        if (i < p || j < p) {
          d.set(i, j, 0.0);
        }
      }
    }
    if (b > 0) {
      Matrix full = d.dense();
      const SymMatrix inner = SymMatrix::from_dense(full.block(p, p, b, b));
      full.block(p, p, b, b) = project_nsd(make_ied(inner, 0.0)).dense();
      d = SymMatrix::from_dense(full);
    }
    return d.svec();
  };

  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal;
  double worst_gap = std::numeric_limits<double>::infinity();
  const double target = 0.1 * options.tau_margin;
  for (int r = 0; r < restarts; ++r) {
    Vector start(static_cast<Eigen::Index>(packed_size(n)));
    for (Eigen::Index k = 0; k < start.size(); ++k) {
      start(k) = normal(rng);
    }
    Vector d = project_cone(start);
    double gap = std::numeric_limits<double>::infinity();
    if (d.norm() == 0.0) {
      // C⁻ = {0}: nothing to align.
      worst_gap = std::min(worst_gap, 1.0);
      continue;
    }
    d.normalize();
    double previous = std::numeric_limits<double>::infinity();
    for (int it = 0; it < options.srcq_max_iter; ++it) {
      const Vector off = range * (range.transpose() * d);
      const double r2 = std::min(1.0, off.squaredNorm());
      // 1 − √(1 − r²) without cancellation.
      gap = std::min(gap, r2 / (1.0 + std::sqrt(1.0 - r2)));
      if (gap < target) {
        break;
      }
      Vector next = project_cone(d - off);
      const double nn = next.norm();
      if (nn == 0.0) {
        break;
      }
      d = next / nn;
      if (it % 50 == 0) {
        if (it > 0 && previous - gap <= 1e-12 * gap) {
          break;
        }
        previous = gap;
      }
    }
    worst_gap = std::min(worst_gap, gap);
  }
  const double alignment = 1.0 - worst_gap;
  return {worst_gap > options.tau_margin ? Verdict::kHeuristicHolds
                                         : Verdict::kHeuristicFails,
          alignment};
}

/// σ_min of the assembled stratum Jacobian, +inf for an empty coordinate space.
inline double injectivity_margin(const NlsdpProblem& problem,
                                 const PrimalDualPoint& z, const Ied& ied) {
  const TangentFrame frame(problem, z, ied);
  if (frame.coordinate_dim() == 0) {
    return std::numeric_limits<double>::infinity();
  }
  const AssembledJacobian jac = assemble_dF(problem, z, frame);
  Eigen::JacobiSVD<Matrix> svd(jac.j);
  const Vector& s = svd.singularValues();
  return s(s.size() - 1);
}

inline double injectivity_margin(const NlsdpProblem& problem,
                                 const PrimalDualPoint& z) {
  return injectivity_margin(problem, z, residual(problem, z).ied);
}

/**
 * min ‖F(z)‖ / ‖z − z̄‖ over points z = R_z̄(u) with u a random coordinate
 * direction of norm in (0, radius].
 */
inline double error_bound_probe(const NlsdpProblem& problem,
                                const PrimalDualPoint& z_bar, double radius,
                                int samples, std::uint64_t seed = 0) {
  const KktResidual res = residual(problem, z_bar);
  const TangentFrame frame(problem, z_bar, res.ied);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double best = std::numeric_limits<double>::infinity();
  const int dim = frame.coordinate_dim();
  for (int s = 0; s < samples; ++s) {
    Vector u(dim);
    for (int k = 0; k < dim; ++k) {
      u(k) = normal(rng);
    }
    const double len = radius * (1.0 - uniform(rng));
    u *= len / u.norm();
    const auto z = retract_point(problem, z_bar, frame, frame.from_stacked(u));
    if (!z) {
      continue;
    }
    const double dist = distance(*z, z_bar);
    if (dist == 0.0) {
      continue;
    }
    best = std::min(best, residual(problem, *z).norm() / dist);
  }
  return best;
}

struct RegularityReport {
  Ied ied;
  ConditionResult wsoc;
  ConditionResult wsrcq;
  ConditionResult cn;
  ConditionResult ssosc;
  ConditionResult sonc;
  ConditionResult srcq;
  double sigma_min_dF = 0.0;
};

inline RegularityReport diagnose(const NlsdpProblem& problem,
                                 const PrimalDualPoint& z,
                                 const RegularityOptions& options = {}) {
  check_dimensions(problem, z);
  RegularityReport report;
  report.ied = detail::point_ied(problem, z, options);
  const Ied& ied = report.ied;
  report.wsoc = check_wsoc(problem, z, ied, options);
  report.wsrcq = check_wsrcq(problem, z, ied, options);
  report.cn = check_cn(problem, z, ied, options);
  report.ssosc = check_ssosc(problem, z, ied, options);
  report.sonc = check_sonc_heuristic(problem, z, ied, options.sonc_samples,
                                     options);
  report.srcq = check_srcq_heuristic(problem, z, ied, options.srcq_restarts,
                                     options);
  report.sigma_min_dF = injectivity_margin(problem, z, ied);
  return report;
}

}  // namespace stratgn
