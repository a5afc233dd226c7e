#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "stratgn/stratgn.hpp"

namespace stratgn::testing {

/// Scalar affine/quadratic problem: f = c x + ½ q x², g = a0 + a x.
inline std::shared_ptr<const AffineQuadraticProblem> scalar_problem(double c, double q,
                                                                    double a0,
                                                                    double a) {
  Vector cv(1);
  cv << c;
  Vector qv(1);
  qv << q;
  Vector a0v(1);
  a0v << a0;
  Vector av(1);
  av << a;
  return std::make_shared<const AffineQuadraticProblem>(
      cv, SymMatrix::diagonal(qv), SymMatrix::diagonal(a0v),
      std::vector<SymMatrix>{SymMatrix::diagonal(av)});
}

/// f = ½x², g(x) = x + 1.
inline std::shared_ptr<const AffineQuadraticProblem> smooth_scalar() {
  return scalar_problem(0.0, 1.0, 1.0, 1.0);
}

/// f = x, g(x) = x.
inline std::shared_ptr<const AffineQuadraticProblem> kink_scalar() {
  return scalar_problem(1.0, 0.0, 0.0, 1.0);
}

inline PrimalDualPoint scalar_point(double x, double y) {
  Vector xv(1);
  xv << x;
  Vector yv(1);
  yv << y;
  return {xv, SymMatrix::diagonal(yv)};
}

inline SymMatrix random_sym(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal;
  SymMatrix s(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      s.set(i, j, scale * normal(rng));
    }
  }
  return s;
}

inline Vector random_vec(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (int i = 0; i < n; ++i) {
    v(i) = scale * normal(rng);
  }
  return v;
}

inline Matrix random_orthogonal(int n, std::mt19937_64& rng) {
  return detail::random_orthogonal(n, rng);
}

/// Q diag(λ) Qᵀ with Q random orthogonal.
inline SymMatrix with_spectrum(const Vector& lambda, std::mt19937_64& rng) {
  const int n = static_cast<int>(lambda.size());
  return congruence(random_orthogonal(n, rng), lambda.asDiagonal().toDenseMatrix());
}

/// Spectrum with p positive, q negative and n−p−q zero eigenvalues bounded
/// away from zero by `gap`.
inline Vector random_spectrum(int n, int p, int q, std::mt19937_64& rng,
                              double gap = 0.3) {
  std::uniform_real_distribution<double> mag(gap, 2.0);
  Vector lambda = Vector::Zero(n);
  for (int i = 0; i < p; ++i) {
    lambda(i) = mag(rng);
  }
  for (int i = n - q; i < n; ++i) {
    lambda(i) = -mag(rng);
  }
  return lambda;
}

/// Random affine/quadratic problem with Q ⪰ 0.
inline std::shared_ptr<const AffineQuadraticProblem> random_problem(int n, int m,
                                                                    std::mt19937_64& rng) {
  std::vector<SymMatrix> a;
  for (int i = 0; i < m; ++i) {
    a.push_back(random_sym(n, rng, 0.5));
  }
  Matrix b(m, m);
  for (int i = 0; i < m; ++i) {
    b.col(i) = random_vec(m, rng);
  }
  return std::make_shared<const AffineQuadraticProblem>(
      random_vec(m, rng), SymMatrix::from_dense(b * b.transpose() / m),
      random_sym(n, rng), std::move(a));
}

/// Point z = (x, G − g(x)) with G of the given inertia.
inline PrimalDualPoint point_with_inertia(const NlsdpProblem& problem, int p, int q,
                                          std::mt19937_64& rng) {
  const int n = problem.order();
  const Vector x = random_vec(problem.num_vars(), rng);
  const SymMatrix g = with_spectrum(random_spectrum(n, p, q, rng), rng);
  return {x, g - problem.eval_g(x)};
}

inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

inline double rel_error(const SymMatrix& a, const SymMatrix& b) {
  return (a - b).norm() / std::max(1.0, std::max(a.norm(), b.norm()));
}

inline double rel_error(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, std::max(a.norm(), b.norm()));
}

inline double rel_error(const PrimalDualPoint& a, const PrimalDualPoint& b) {
  return distance(a, b) / std::max(1.0, std::max(a.norm(), b.norm()));
}

}  // namespace stratgn::testing
