#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "stratgn/model.hpp"
#include "stratgn/spectral.hpp"
#include "stratgn/sym_matrix.hpp"

namespace stratgn {

/// G(z) = g(x) + y.
inline SymMatrix big_g(const NlsdpProblem& problem, const PrimalDualPoint& z) {
  return problem.eval_g(z.x) + z.y;
}

/**
 * F(z) = (∇f(x) + ∇g(x) y,  −g(x) + Π₊(G(z))) together with the IED of G(z)
 * used to evaluate the projection.
 */
struct KktResidual {
  Vector f1;
  SymMatrix f2;
  SymMatrix g_of_x;
  SymMatrix g_matrix;
  Ied ied;

  double squared_norm() const { return f1.squaredNorm() + f2.squared_norm(); }
  double norm() const { return std::sqrt(squared_norm()); }
  double phi() const { return 0.5 * squared_norm(); }

  /// (F1, svec F2) stacked.
  Vector stacked() const {
    Vector r(f1.size() + static_cast<Eigen::Index>(packed_size(f2.order())));
    r << f1, f2.svec();
    return r;
  }
};

inline KktResidual residual(const NlsdpProblem& problem, const PrimalDualPoint& z,
                            double zero_tol_factor = kDefaultRelativeZeroTolerance) {
  KktResidual res;
  res.g_of_x = problem.eval_g(z.x);
  res.g_matrix = res.g_of_x + z.y;
  auto [basis, values] = eig_sym(res.g_matrix);
  const double tau = relative_zero_tolerance(values, zero_tol_factor);
  res.ied = classify(std::move(basis), std::move(values), tau);
  res.f1 = problem.grad_f(z.x) + problem.adjoint_dg(z.x, z.y);
  res.f2 = project_psd(res.ied) - res.g_of_x;
  return res;
}

inline double merit(const NlsdpProblem& problem, const PrimalDualPoint& z,
                    double zero_tol_factor = kDefaultRelativeZeroTolerance) {
  return residual(problem, z, zero_tol_factor).phi();
}

/// Tangent direction at z in (v_x, h) coordinates, h the coefficients of H in
/// the tangent basis of G(z).
struct TangentVector {
  StratumSignature signature;
  Vector vx;
  Vector h;

  double norm() const { return std::sqrt(vx.squaredNorm() + h.squaredNorm()); }

  Vector stacked() const {
    Vector v(vx.size() + h.size());
    v << vx, h;
    return v;
  }
};

/// Ambient direction (v_x, v_y) ∈ ℝ^m × 𝕊ⁿ.
struct AmbientVector {
  Vector vx;
  SymMatrix vy;
};

/**
 * Coordinate frame of the tangent space of the lifted stratum at z, built on
 * the tangent basis of an IED of G(z).
 */
class TangentFrame {
 public:
  TangentFrame(const NlsdpProblem& problem, const PrimalDualPoint& z, Ied ied)
      : problem_(&problem), x_(z.x), ied_(std::move(ied)),
        basis_(tangent_basis(ied_)) {}

  const Ied& ied() const { return ied_; }
  const std::vector<SymMatrix>& basis() const { return basis_; }
  int num_vars() const { return static_cast<int>(x_.size()); }
  int tangent_dim() const { return static_cast<int>(basis_.size()); }
  int coordinate_dim() const { return num_vars() + tangent_dim(); }

  /// H from its coefficients.
  SymMatrix matrix(const Vector& h) const {
    return from_tangent_coordinates(ied_, h);
  }

  TangentVector make(Vector vx, Vector h) const {
    return {ied_.signature(), std::move(vx), std::move(h)};
  }

  TangentVector from_stacked(const Vector& v) const {
    return make(v.head(num_vars()), v.tail(tangent_dim()));
  }

  /// φ_z: (v_x, v_y) ↦ (v_x, g′(x) v_x + v_y); the normal part of H is dropped.
  TangentVector to_coordinates(const AmbientVector& v) const {
    const SymMatrix h = problem_->apply_dg(x_, v.vx) + v.vy;
    return make(v.vx, tangent_coordinates(ied_, h));
  }

  /// φ_z⁻¹: (v_x, H) ↦ (v_x, H − g′(x) v_x).
  AmbientVector to_ambient(const TangentVector& v) const {
    return {v.vx, matrix(v.h) - problem_->apply_dg(x_, v.vx)};
  }

 private:
  const NlsdpProblem* problem_;
  Vector x_;
  Ied ied_;
  std::vector<SymMatrix> basis_;
};

/**
 * Stratum Jacobian dF_z in coordinates:
 *   [ ∇²ₓₓL − ∇g∇g*   ∇g ] [v_x]
 *   [ −∇g*            ξ  ] [ H ]
 * rows are ℝ^m followed by svec coefficients of 𝕊ⁿ.
 */
struct AssembledJacobian {
  Matrix j;
  Matrix gram;
};

inline AssembledJacobian assemble_dF(const NlsdpProblem& problem,
                                     const PrimalDualPoint& z,
                                     const TangentFrame& frame) {
  const int m = problem.num_vars();
  const int n = problem.order();
  const auto rows = static_cast<Eigen::Index>(m + packed_size(n));
  AssembledJacobian out;
  out.j = Matrix::Zero(rows, frame.coordinate_dim());
  Vector e = Vector::Zero(m);
  for (int i = 0; i < m; ++i) {
    e.setZero();
    e(i) = 1.0;
    const SymMatrix dg = problem.apply_dg(z.x, e);
    out.j.col(i).head(m) = problem.apply_hess_lagrangian(z.x, z.y, e) -
                           problem.adjoint_dg(z.x, dg);
    out.j.col(i).tail(rows - m) = -dg.svec();
  }
  const auto& basis = frame.basis();
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(m + k);
    out.j.col(col).head(m) = problem.adjoint_dg(z.x, basis[k]);
    out.j.col(col).tail(rows - m) =
        stratum_differential(frame.ied(), basis[k]).svec();
  }
  out.gram = out.j.transpose() * out.j;
  return out;
}

/// dF_z(v_x, H) evaluated without assembling J; H must be tangent.
inline std::pair<Vector, SymMatrix> apply_dF(const NlsdpProblem& problem,
                                             const PrimalDualPoint& z,
                                             const Ied& ied, const Vector& vx,
                                             const SymMatrix& h) {
  const SymMatrix dg = problem.apply_dg(z.x, vx);
  Vector top = problem.apply_hess_lagrangian(z.x, z.y, vx) -
               problem.adjoint_dg(z.x, dg) + problem.adjoint_dg(z.x, h);
  SymMatrix bottom = stratum_differential(ied, h) - dg;
  return {std::move(top), std::move(bottom)};
}

/**
 * φ′(z; v) for an arbitrary ambient direction. With H = g′(x)v_x + v_y split as
 * H₁ = π¹(H), H₂ = π²(H):
 *   φ′ = ⟨F, dF(v_x, H₁)⟩ + ⟨g′F₁, Π₋(H₂)⟩ + ⟨g′F₁ + F₂, Π₊(H₂)⟩.
 */
inline double dir_derivative_phi(const NlsdpProblem& problem,
                                 const PrimalDualPoint& z,
                                 const KktResidual& res,
                                 const AmbientVector& v) {
  const Ied& ied = res.ied;
  const SymMatrix h = problem.apply_dg(z.x, v.vx) + v.vy;
  const SymMatrix h2 = normal_project_pi2(ied, h);
  const SymMatrix h1 = h - h2;
  const auto [top, bottom] = apply_dF(problem, z, ied, v.vx, h1);
  double value = res.f1.dot(top) + frobenius_inner(res.f2, bottom);
  if (ied.beta_size() > 0 && h2.norm() > 0.0) {
    const SymMatrix dg_f1 = problem.apply_dg(z.x, res.f1);
    const Ied ied_h2 = make_ied(h2, 0.0);
    value += frobenius_inner(dg_f1, project_nsd(ied_h2)) +
             frobenius_inner(dg_f1 + res.f2, project_psd(ied_h2));
  }
  return value;
}

inline double dir_derivative_phi(const NlsdpProblem& problem,
                                 const PrimalDualPoint& z,
                                 const AmbientVector& v) {
  return dir_derivative_phi(problem, z, residual(problem, z), v);
}

/**
 * Retraction onto the lifted stratum through z:
 *   R_z(v) = (x + v_x, R_M(G(z), H) − g(x + v_x)).
 * Returns nullopt on an inertia violation.
 */
inline std::optional<PrimalDualPoint> retract_point(const NlsdpProblem& problem,
                                                    const PrimalDualPoint& z,
                                                    const TangentFrame& frame,
                                                    const TangentVector& v) {
  const auto g_new = retract_fixed_inertia(frame.ied(), frame.matrix(v.h));
  if (!g_new) {
    return std::nullopt;
  }
  Vector x = z.x + v.vx;
  SymMatrix y = *g_new - problem.eval_g(x);
  return PrimalDualPoint{std::move(x), std::move(y)};
}

}  // namespace stratgn
