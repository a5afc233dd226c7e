#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "stratgn/errors.hpp"
#include "stratgn/sym_matrix.hpp"

namespace stratgn {

/// Default relative threshold for classifying an eigenvalue as zero.
inline constexpr double kDefaultRelativeZeroTolerance = 1e-10;

/// Inertia pattern (p, q) of a stratum M_{p,q} ⊂ 𝕊ⁿ.
struct StratumSignature {
  int n = 0;
  int p = 0;
  int q = 0;

  int rank() const { return p + q; }

  /// dim M_{p,q} = n(p+q) − (p+q)(p+q−1)/2.
  int tangent_dimension() const {
    const int r = p + q;
    return n * r - r * (r - 1) / 2;
  }

  friend bool operator==(const StratumSignature&,
                         const StratumSignature&) = default;
};

enum class Block { kAlpha, kBeta, kGamma };

/**
 * Indexed eigenvalue decomposition A = P Diag(λ) Pᵀ.
 *
 * Eigenvalues are nonincreasing, so the index sets are contiguous:
 * α = [0, p), β = [p, n−q), γ = [n−q, n). The Ξ coefficient matrix is built
 * once together with the classification.
 */
struct Ied {
  Matrix basis;
  Vector eigenvalues;
  int p = 0;
  int q = 0;
  double zero_tolerance = 0.0;
  Matrix xi;

  int n() const { return static_cast<int>(eigenvalues.size()); }
  int beta_begin() const { return p; }
  int beta_end() const { return n() - q; }
  int beta_size() const { return n() - p - q; }
  StratumSignature signature() const { return {n(), p, q}; }

  Block block(int i) const {
    if (i < p) {
      return Block::kAlpha;
    }
    return i < beta_end() ? Block::kBeta : Block::kGamma;
  }

  bool in_beta(int i) const { return i >= p && i < beta_end(); }

  /// P Diag(λ) Pᵀ with the raw eigenvalues.
  SymMatrix reconstruct() const {
    return congruence(basis, eigenvalues.asDiagonal().toDenseMatrix());
  }

  /// Pᵀ H P as a dense matrix.
  Matrix rotate_in(const SymMatrix& h) const {
    return basis.transpose() * h.dense() * basis;
  }

  /// P M Pᵀ for M expressed in the eigenbasis.
  SymMatrix rotate_out(const Matrix& m) const { return congruence(basis, m); }
};

/// Eigenpairs of a symmetric matrix with eigenvalues nonincreasing.
inline std::pair<Matrix, Vector> eig_sym(const SymMatrix& a) {
  const int n = a.order();
  if (n == 0) {
    return {Matrix(0, 0), Vector(0)};
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.dense());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigensolver failed to converge", a.norm(),
                         n);
  }
  // Eigen returns ascending order; reverse columns and values.
  Matrix basis = solver.eigenvectors().rowwise().reverse();
  Vector values = solver.eigenvalues().reverse();
  return {std::move(basis), std::move(values)};
}

/// τ = relative · max(1, ‖A‖₂) from already computed eigenvalues.
inline double relative_zero_tolerance(const Vector& eigenvalues,
                                      double relative) {
  const double spectral = eigenvalues.size() ? eigenvalues.cwiseAbs().maxCoeff()
                                             : 0.0;
  return relative * std::max(1.0, spectral);
}

namespace detail {

inline Matrix build_xi(const Vector& lambda, int p, int q) {
  const int n = static_cast<int>(lambda.size());
  const int beta_end = n - q;
  Matrix xi = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const bool i_nonneg = i < beta_end;
      const bool j_nonneg = j < beta_end;
      if (i_nonneg && j_nonneg) {
        // Both eigenvalues nonnegative: the quotient is 1 (0/0 := 1 on ties).
        xi(i, j) = 1.0;
      } else if (i < p && j >= beta_end) {
        xi(i, j) = lambda(i) / (lambda(i) - lambda(j));
      } else if (j < p && i >= beta_end) {
        xi(i, j) = lambda(j) / (lambda(j) - lambda(i));
      }
    }
  }
  return xi;
}

}  // namespace detail

/// Classify an eigendecomposition already sorted nonincreasingly.
inline Ied classify(Matrix basis, Vector eigenvalues, double zero_tolerance) {
  Ied ied;
  const int n = static_cast<int>(eigenvalues.size());
  int p = 0;
  while (p < n && eigenvalues(p) > zero_tolerance) {
    ++p;
  }
  int q = 0;
  while (q < n - p && eigenvalues(n - 1 - q) < -zero_tolerance) {
    ++q;
  }
  ied.basis = std::move(basis);
  ied.eigenvalues = std::move(eigenvalues);
  ied.p = p;
  ied.q = q;
  ied.zero_tolerance = zero_tolerance;
  ied.xi = detail::build_xi(ied.eigenvalues, p, q);
  return ied;
}

inline Ied make_ied(const SymMatrix& a, double zero_tolerance) {
  auto [basis, values] = eig_sym(a);
  return classify(std::move(basis), std::move(values), zero_tolerance);
}

/// IED with τ_zero = 1e−10 · max(1, ‖A‖₂).
inline Ied make_ied(const SymMatrix& a) {
  auto [basis, values] = eig_sym(a);
  const double tau =
      relative_zero_tolerance(values, kDefaultRelativeZeroTolerance);
  return classify(std::move(basis), std::move(values), tau);
}

/// Π_{𝕊ⁿ₊}(A) = P_α Λ_αα P_αᵀ.
inline SymMatrix project_psd(const Ied& ied) {
  const auto& p = ied.basis;
  const auto alpha = p.leftCols(ied.p);
  return SymMatrix::from_dense(
      alpha * ied.eigenvalues.head(ied.p).asDiagonal() * alpha.transpose());
}

/// Π_{𝕊ⁿ₋}(A) = P_γ Λ_γγ P_γᵀ.
inline SymMatrix project_nsd(const Ied& ied) {
  const auto& p = ied.basis;
  const auto gamma = p.rightCols(ied.q);
  return SymMatrix::from_dense(
      gamma * ied.eigenvalues.tail(ied.q).asDiagonal() * gamma.transpose());
}

inline SymMatrix project_psd(const SymMatrix& a) {
  return project_psd(make_ied(a));
}

inline SymMatrix project_nsd(const SymMatrix& a) {
  return project_nsd(make_ied(a));
}

/// The Ξ coefficient matrix (values in [0, 1]).
inline SymMatrix xi_matrix(const Ied& ied) { return SymMatrix::from_dense(ied.xi); }

/// Norm of the ββ block of Pᵀ H P.
inline double beta_block_norm(const Ied& ied, const SymMatrix& h) {
  const int b = ied.beta_size();
  if (b == 0) {
    return 0.0;
  }
  const Matrix rotated = ied.rotate_in(h);
  return rotated.block(ied.p, ied.p, b, b).norm();
}

/**
 * Directional derivative Π'(A; H) of the PSD projector: the Ξ-weighted
 * rotated direction whose ββ block is replaced by the projection of H̃_ββ.
 */
inline SymMatrix proj_dir_derivative(const Ied& ied, const SymMatrix& h) {
  Matrix m = ied.xi.cwiseProduct(ied.rotate_in(h));
  const int b = ied.beta_size();
  if (b > 0) {
    const SymMatrix inner =
        SymMatrix::from_dense(m.block(ied.p, ied.p, b, b));
    m.block(ied.p, ied.p, b, b) = project_psd(inner).dense();
  }
  return ied.rotate_out(m);
}

/**
 * Differential ξ_A of Π_{𝕊ⁿ₊} restricted to the stratum through A.
 *
 * Throws TangencyViolation when H is not tangent, that is when
 * ‖(PᵀHP)_ββ‖ > 1e−10 ‖H‖.
 */
inline SymMatrix stratum_differential(const Ied& ied, const SymMatrix& h) {
  Matrix m = ied.rotate_in(h);
  const int b = ied.beta_size();
  if (b > 0) {
    const double bb = m.block(ied.p, ied.p, b, b).norm();
    const double hn = h.norm();
    if (bb > 1e-10 * hn) {
      throw TangencyViolation(bb, hn);
    }
  }
  m = ied.xi.cwiseProduct(m);
  if (b > 0) {
    m.block(ied.p, ied.p, b, b).setZero();
  }
  return ied.rotate_out(m);
}

/// Index pairs (i, j), i >= j, in packed order, not both in β.
inline std::vector<std::pair<int, int>> tangent_pairs(const Ied& ied) {
  std::vector<std::pair<int, int>> pairs;
  const int n = ied.n();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      if (!(ied.in_beta(i) && ied.in_beta(j))) {
        pairs.emplace_back(i, j);
      }
    }
  }
  return pairs;
}

/// Frobenius-orthonormal basis {P E_kl Pᵀ} of T_A M_{p,q}.
inline std::vector<SymMatrix> tangent_basis(const Ied& ied) {
  std::vector<SymMatrix> basis;
  const auto pairs = tangent_pairs(ied);
  basis.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    const Vector ui = ied.basis.col(i);
    const Vector uj = ied.basis.col(j);
    if (i == j) {
      basis.push_back(SymMatrix::from_dense(ui * ui.transpose()));
    } else {
      basis.push_back(SymMatrix::from_dense(
          (ui * uj.transpose() + uj * ui.transpose()) / std::numbers::sqrt2));
    }
  }
  return basis;
}

/// Coefficients of π¹(H) in tangent_basis(ied).
inline Vector tangent_coordinates(const Ied& ied, const SymMatrix& h) {
  const Matrix rotated = ied.rotate_in(h);
  const auto pairs = tangent_pairs(ied);
  Vector coeffs(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    coeffs(static_cast<Eigen::Index>(k)) =
        i == j ? rotated(i, i)
               : std::numbers::sqrt2 * 0.5 * (rotated(i, j) + rotated(j, i));
  }
  return coeffs;
}

/// Σ_k h_k B_k for the tangent basis B_k of ied.
inline SymMatrix from_tangent_coordinates(const Ied& ied, const Vector& coeffs) {
  const int n = ied.n();
  const auto pairs = tangent_pairs(ied);
  Matrix m = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    const double c = coeffs(static_cast<Eigen::Index>(k));
    if (i == j) {
      m(i, i) = c;
    } else {
      m(i, j) = m(j, i) = c / std::numbers::sqrt2;
    }
  }
  return ied.rotate_out(m);
}

/// π²(H): keep only the ββ block of PᵀHP.
inline SymMatrix normal_project_pi2(const Ied& ied, const SymMatrix& h) {
  const int n = ied.n();
  const int b = ied.beta_size();
  Matrix m = Matrix::Zero(n, n);
  if (b > 0) {
    m.block(ied.p, ied.p, b, b) = ied.rotate_in(h).block(ied.p, ied.p, b, b);
  }
  return ied.rotate_out(m);
}

/// π¹(H) = H − π²(H).
inline SymMatrix tangent_project_pi1(const Ied& ied, const SymMatrix& h) {
  return h - normal_project_pi2(ied, h);
}

/**
 * Fixed-inertia retraction R_M(A, H) onto M_{p,q}.
 *
 * Eigendecomposes A + H, keeps the top p and bottom q eigenvalues and zeros
 * the rest. Returns nullopt when A + H lacks p eigenvalues above τ_zero or q
 * below −τ_zero (inertia violation).
 */
inline std::optional<SymMatrix> retract_fixed_inertia(const Ied& ied_a,
                                                      const SymMatrix& h) {
  const int n = ied_a.n();
  const SymMatrix shifted = ied_a.reconstruct() + h;
  auto [basis, values] = eig_sym(shifted);
  const double tau = ied_a.zero_tolerance;
  if (ied_a.p > 0 && !(values(ied_a.p - 1) > tau)) {
    return std::nullopt;
  }
  if (ied_a.q > 0 && !(values(n - ied_a.q) < -tau)) {
    return std::nullopt;
  }
  values.segment(ied_a.p, n - ied_a.p - ied_a.q).setZero();
  return congruence(basis, values.asDiagonal().toDenseMatrix());
}

/**
 * Random orthogonal rotation within each cluster of (numerically) equal
 * eigenvalues. Consecutive eigenvalues within τ_zero belong to the same
 * cluster; the β block is always a single cluster.
 */
inline Ied rotate_within_eigenspaces(const Ied& ied, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const int n = ied.n();
  Matrix basis = ied.basis;
  int start = 0;
  while (start < n) {
    int end = start + 1;
    while (end < n && ied.block(end) == ied.block(start) &&
           (ied.block(start) == Block::kBeta ||
            std::abs(ied.eigenvalues(end) - ied.eigenvalues(end - 1)) <=
                ied.zero_tolerance)) {
      ++end;
    }
    const int size = end - start;
    Matrix gaussian(size, size);
    for (int i = 0; i < size; ++i) {
      for (int j = 0; j < size; ++j) {
        gaussian(i, j) = normal(rng);
      }
    }
    Eigen::HouseholderQR<Matrix> qr(gaussian);
    Matrix q = qr.householderQ();
    // Fix the sign ambiguity of QR so the rotation is Haar distributed.
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < size; ++k) {
      if (r(k, k) < 0) {
        q.col(k) *= -1.0;
      }
    }
    basis.middleCols(start, size) = basis.middleCols(start, size) * q;
    start = end;
  }
  Ied rotated = ied;
  rotated.basis = std::move(basis);
  return rotated;
}

}  // namespace stratgn
