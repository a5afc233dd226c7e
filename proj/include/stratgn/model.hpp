#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stratgn/errors.hpp"
#include "stratgn/sym_matrix.hpp"

namespace stratgn {

/**
 * Evaluation interface of  min f(x)  s.t.  g(x) ∈ 𝕊ⁿ₊  with x ∈ ℝ^m.
 *
 * The Lagrangian is L(x, y) = f(x) + ⟨y, g(x)⟩, so multipliers are NSD at
 * solutions.
 */
class NlsdpProblem {
 public:
  virtual ~NlsdpProblem() = default;

  virtual int num_vars() const = 0;
  virtual int order() const = 0;

  virtual double eval_f(const Vector& x) const = 0;
  virtual Vector grad_f(const Vector& x) const = 0;
  virtual SymMatrix eval_g(const Vector& x) const = 0;

  /// g′(x) v.
  virtual SymMatrix apply_dg(const Vector& x, const Vector& v) const = 0;

  /// ∇g(x) S, the adjoint of apply_dg.
  virtual Vector adjoint_dg(const Vector& x, const SymMatrix& s) const = 0;

  /// ∇²ₓₓ L(x, y) v.
  virtual Vector apply_hess_lagrangian(const Vector& x, const SymMatrix& y,
                                       const Vector& v) const = 0;
};

/// z = (x, y) ∈ ℝ^m × 𝕊ⁿ.
struct PrimalDualPoint {
  Vector x;
  SymMatrix y;

  PrimalDualPoint() = default;
  PrimalDualPoint(Vector x_in, SymMatrix y_in)
      : x(std::move(x_in)), y(std::move(y_in)) {}

  static PrimalDualPoint zero(int m, int n) {
    return {Vector::Zero(m), SymMatrix(n)};
  }

  double squared_norm() const { return x.squaredNorm() + y.squared_norm(); }
  double norm() const { return std::sqrt(squared_norm()); }

  friend PrimalDualPoint operator-(const PrimalDualPoint& a,
                                   const PrimalDualPoint& b) {
    return {a.x - b.x, a.y - b.y};
  }
  friend PrimalDualPoint operator+(const PrimalDualPoint& a,
                                   const PrimalDualPoint& b) {
    return {a.x + b.x, a.y + b.y};
  }
  friend PrimalDualPoint operator*(double s, const PrimalDualPoint& a) {
    return {s * a.x, s * a.y};
  }
  friend bool operator==(const PrimalDualPoint& a, const PrimalDualPoint& b) {
    return a.x.size() == b.x.size() && a.x == b.x && a.y == b.y;
  }
};

inline double distance(const PrimalDualPoint& a, const PrimalDualPoint& b) {
  return (a - b).norm();
}

/// Throws InputError when z does not match the problem's dimensions.
inline void check_dimensions(const NlsdpProblem& problem,
                             const PrimalDualPoint& z) {
  if (z.x.size() != problem.num_vars()) {
    throw InputError("x", "expected " + std::to_string(problem.num_vars()) +
                              " entries, got " + std::to_string(z.x.size()));
  }
  if (z.y.order() != problem.order()) {
    throw InputError("y", "expected order " + std::to_string(problem.order()) +
                              ", got " + std::to_string(z.y.order()));
  }
}

/**
 * f(x) = cᵀx + ½ xᵀQx,  g(x) = A₀ + Σᵢ xᵢ Aᵢ.
 */
class AffineQuadraticProblem final : public NlsdpProblem {
 public:
  AffineQuadraticProblem(Vector c, SymMatrix q, SymMatrix a0,
                         std::vector<SymMatrix> a)
      : c_(std::move(c)), q_(std::move(q)), a0_(std::move(a0)),
        a_(std::move(a)) {
    const int m = static_cast<int>(c_.size());
    if (q_.order() != m) {
      throw InputError("objective.Q", "order must equal m");
    }
    if (static_cast<int>(a_.size()) != m) {
      throw InputError("constraint.A", "expected " + std::to_string(m) +
                                           " matrices, got " +
                                           std::to_string(a_.size()));
    }
    for (std::size_t i = 0; i < a_.size(); ++i) {
      if (a_[i].order() != a0_.order()) {
        throw InputError("constraint.A[" + std::to_string(i) + "]",
                         "order must equal n");
      }
    }
    q_dense_ = q_.dense();
  }

  /// Problem with Q = 0.
  AffineQuadraticProblem(Vector c, SymMatrix a0, std::vector<SymMatrix> a)
      : AffineQuadraticProblem(c, SymMatrix(static_cast<int>(c.size())),
                               std::move(a0), std::move(a)) {}

  int num_vars() const override { return static_cast<int>(c_.size()); }
  int order() const override { return a0_.order(); }

  const Vector& c() const { return c_; }
  const SymMatrix& q() const { return q_; }
  const SymMatrix& a0() const { return a0_; }
  const std::vector<SymMatrix>& a() const { return a_; }

  double eval_f(const Vector& x) const override {
    return c_.dot(x) + 0.5 * x.dot(q_dense_ * x);
  }

  Vector grad_f(const Vector& x) const override { return c_ + q_dense_ * x; }

  SymMatrix eval_g(const Vector& x) const override {
    return a0_ + apply_dg(x, x);
  }

  SymMatrix apply_dg(const Vector&, const Vector& v) const override {
    SymMatrix out(order());
    for (std::size_t i = 0; i < a_.size(); ++i) {
      out += v(static_cast<Eigen::Index>(i)) * a_[i];
    }
    return out;
  }

  Vector adjoint_dg(const Vector&, const SymMatrix& s) const override {
    Vector out(num_vars());
    for (std::size_t i = 0; i < a_.size(); ++i) {
      out(static_cast<Eigen::Index>(i)) = frobenius_inner(a_[i], s);
    }
    return out;
  }

  Vector apply_hess_lagrangian(const Vector&, const SymMatrix&,
                               const Vector& v) const override {
    return q_dense_ * v;
  }

 private:
  Vector c_;
  SymMatrix q_;
  SymMatrix a0_;
  std::vector<SymMatrix> a_;
  Matrix q_dense_;
};

/// A problem together with a distinguished primal-dual point.
struct ProblemFixture {
  std::shared_ptr<const AffineQuadraticProblem> problem;
  PrimalDualPoint point;
};

namespace detail {

inline SymMatrix packed_unit(int n, std::vector<std::pair<int, double>> entries) {
  std::vector<double> packed(packed_size(n), 0.0);
  for (const auto& [index, value] : entries) {
    packed[static_cast<std::size_t>(index)] = value;
  }
  return SymMatrix::from_packed(n, std::move(packed));
}

}  // namespace detail

/**
 * min x₁  s.t.
 *   [ 1        0        0    x₄+x₅ ]
 *   [ 0      x₄−x₅      0     x₃   ]  ⪰ 0,
 *   [ 0        0        0     x₂   ]
 *   [ x₄+x₅   x₃       x₂     x₁   ]
 * with the KKT pair x̄ = 0, ȳ = Diag(0, 0, 0, −1).
 */
inline ProblemFixture weakly_regular_example() {
  constexpr int n = 4;
  Vector c = Vector::Zero(5);
  c(0) = 1.0;
  SymMatrix a0 = detail::packed_unit(n, {{0, 1.0}});
  std::vector<SymMatrix> a{
      detail::packed_unit(n, {{9, 1.0}}),
      detail::packed_unit(n, {{8, 1.0}}),
      detail::packed_unit(n, {{7, 1.0}}),
      detail::packed_unit(n, {{6, 1.0}, {2, 1.0}}),
      detail::packed_unit(n, {{6, 1.0}, {2, -1.0}}),
  };
  auto problem = std::make_shared<const AffineQuadraticProblem>(
      std::move(c), std::move(a0), std::move(a));
  Vector diag = Vector::Zero(n);
  diag(3) = -1.0;
  return {std::move(problem), {Vector::Zero(5), SymMatrix::diagonal(diag)}};
}

}  // namespace stratgn
