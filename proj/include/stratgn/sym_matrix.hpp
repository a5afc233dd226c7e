#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "stratgn/errors.hpp"

namespace stratgn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Offset of entry (i, j), i >= j, in the packed lower triangle.
constexpr std::size_t packed_index(int i, int j) {
  if (i < j) {
    std::swap(i, j);
  }
  return static_cast<std::size_t>(i) * (i + 1) / 2 + j;
}

constexpr std::size_t packed_size(int n) {
  return static_cast<std::size_t>(n) * (n + 1) / 2;
}

/**
 * Dense real symmetric matrix stored as its packed lower triangle.
 *
 * Rows of the lower triangle are concatenated, so entry (i, j) with i >= j
 * lives at offset i(i+1)/2 + j. Off-diagonal entries are the raw matrix
 * values; the Frobenius product weights them by 2 explicitly. Symmetry holds
 * exactly because only one copy of each off-diagonal entry exists.
 */
class SymMatrix {
 public:
  SymMatrix() = default;

  /// Zero matrix of order n.
  explicit SymMatrix(int n) : n_(n), packed_(packed_size(n), 0.0) {}

  static SymMatrix from_packed(int n, std::vector<double> packed) {
    if (n < 0 || packed.size() != packed_size(n)) {
      throw InputError("", "packed symmetric matrix of order " +
                               std::to_string(n) + " needs " +
                               std::to_string(packed_size(n)) +
                               " entries, got " +
                               std::to_string(packed.size()));
    }
    SymMatrix s;
    s.n_ = n;
    s.packed_ = std::move(packed);
    return s;
  }

  /// Symmetric part (M + Mᵀ)/2 of a square dense matrix.
  static SymMatrix from_dense(const Matrix& m) {
    const int n = static_cast<int>(m.rows());
    SymMatrix s(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        s.packed_[packed_index(i, j)] = 0.5 * (m(i, j) + m(j, i));
      }
    }
    return s;
  }

  static SymMatrix identity(int n) {
    SymMatrix s(n);
    for (int i = 0; i < n; ++i) {
      s.packed_[packed_index(i, i)] = 1.0;
    }
    return s;
  }

  static SymMatrix diagonal(const Vector& d) {
    SymMatrix s(static_cast<int>(d.size()));
    for (int i = 0; i < s.n_; ++i) {
      s.packed_[packed_index(i, i)] = d(i);
    }
    return s;
  }

  /// Inverse of svec(): coefficients in the orthonormal basis
  /// {E_ii} ∪ {(e_i e_jᵀ + e_j e_iᵀ)/√2}, ordered like the packing.
  static SymMatrix from_svec(int n, const Vector& coeffs) {
    SymMatrix s(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        const auto k = packed_index(i, j);
        s.packed_[k] = i == j ? coeffs(k) : coeffs(k) / std::numbers::sqrt2;
      }
    }
    return s;
  }

  int order() const { return n_; }
  std::span<const double> packed() const { return packed_; }

  double operator()(int i, int j) const { return packed_[packed_index(i, j)]; }
  void set(int i, int j, double value) { packed_[packed_index(i, j)] = value; }

  Matrix dense() const {
    Matrix m(n_, n_);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j <= i; ++j) {
        m(i, j) = m(j, i) = packed_[packed_index(i, j)];
      }
    }
    return m;
  }

  /// Coefficients in the orthonormal basis of 𝕊ⁿ (isometry onto ℝ^{n(n+1)/2}).
  Vector svec() const {
    Vector v(static_cast<Eigen::Index>(packed_.size()));
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j <= i; ++j) {
        const auto k = packed_index(i, j);
        v(k) = i == j ? packed_[k] : std::numbers::sqrt2 * packed_[k];
      }
    }
    return v;
  }

  double squared_norm() const {
    double sum = 0.0;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j <= i; ++j) {
        const double a = packed_[packed_index(i, j)];
        sum += (i == j ? 1.0 : 2.0) * a * a;
      }
    }
    return sum;
  }

  double norm() const { return std::sqrt(squared_norm()); }

  SymMatrix& operator+=(const SymMatrix& rhs) {
    check_order(rhs);
    for (std::size_t k = 0; k < packed_.size(); ++k) {
      packed_[k] += rhs.packed_[k];
    }
    return *this;
  }

  SymMatrix& operator-=(const SymMatrix& rhs) {
    check_order(rhs);
    for (std::size_t k = 0; k < packed_.size(); ++k) {
      packed_[k] -= rhs.packed_[k];
    }
    return *this;
  }

  SymMatrix& operator*=(double s) {
    for (double& a : packed_) {
      a *= s;
    }
    return *this;
  }

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
  friend SymMatrix operator-(SymMatrix a) { return a *= -1.0; }

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  void check_order(const SymMatrix& rhs) const {
    if (rhs.n_ != n_) {
      throw InputError("", "order mismatch: " + std::to_string(n_) + " vs " +
                               std::to_string(rhs.n_));
    }
  }

  int n_ = 0;
  std::vector<double> packed_;
};

/// Frobenius inner product ⟨A, B⟩ = tr(AB).
inline double frobenius_inner(const SymMatrix& a, const SymMatrix& b) {
  const int n = a.order();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      sum += (i == j ? 1.0 : 2.0) * a(i, j) * b(i, j);
    }
  }
  return sum;
}

/// Congruence P M Pᵀ of a dense symmetric M, returned symmetrized.
inline SymMatrix congruence(const Matrix& p, const Matrix& m) {
  return SymMatrix::from_dense(p * m * p.transpose());
}

}  // namespace stratgn
