#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "stratgn/errors.hpp"
#include "stratgn/kkt.hpp"
#include "stratgn/model.hpp"
#include "stratgn/regularity.hpp"

namespace stratgn {

struct SynthOptions {
  int retry_budget = 50;
  double acceptance_margin = 1e-6;
  bool zero_primal = false;
};

namespace detail {

inline Matrix random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a(i, j) = normal(rng);
    }
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < n; ++k) {
    if (r(k, k) < 0) {
      q.col(k) *= -1.0;
    }
  }
  return q;
}

inline SymMatrix random_symmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  SymMatrix s(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      s.set(i, j, normal(rng) / std::sqrt(static_cast<double>(n)));
    }
  }
  return s;
}

/// Inertia patterns (p, q) with p, q ≥ 1, a nonempty zero block, and few
/// enough ββ/βγ/γγ entries for g′ to cover them.
inline std::vector<std::pair<int, int>> feasible_inertias(int n, int m) {
  std::vector<std::pair<int, int>> out;
  for (int p = 1; p < n; ++p) {
    for (int q = 1; p + q < n; ++q) {
      const int b = n - p - q;
      if (b * (b + 1) / 2 + b * q + q * (q + 1) / 2 <= m) {
        out.emplace_back(p, q);
      }
    }
  }
  return out;
}

inline ProblemFixture synth_attempt(std::uint64_t seed, int n, int m,
                                    bool zero_primal) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> magnitude(0.5, 2.0);
  std::normal_distribution<double> normal;
  const auto inertias = feasible_inertias(n, m);
  const auto [p, q] =
      inertias[std::uniform_int_distribution<std::size_t>(0, inertias.size() - 1)(rng)];

  const Matrix basis = random_orthogonal(n, rng);
  Vector lambda = Vector::Zero(n);
  for (int i = 0; i < p; ++i) {
    lambda(i) = magnitude(rng);
  }
  for (int i = n - q; i < n; ++i) {
    lambda(i) = -magnitude(rng);
  }
  std::sort(lambda.data(), lambda.data() + n, std::greater<>());
  Vector pos = lambda.cwiseMax(0.0);
  Vector neg = lambda.cwiseMin(0.0);
  const SymMatrix g_star = congruence(basis, pos.asDiagonal().toDenseMatrix());
  const SymMatrix y_star = congruence(basis, neg.asDiagonal().toDenseMatrix());

  Vector x_star(m);
  for (int i = 0; i < m; ++i) {
    x_star(i) = normal(rng);
  }
  if (zero_primal) {
    x_star.setZero();
  }
  std::vector<SymMatrix> a;
  a.reserve(static_cast<std::size_t>(m));
  SymMatrix a0 = g_star;
  for (int i = 0; i < m; ++i) {
    a.push_back(random_symmetric(n, rng));
    a0 -= x_star(i) * a.back();
  }

  Matrix b(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      b(i, j) = normal(rng);
    }
  }
  const SymMatrix q_mat = SymMatrix::from_dense(
      b * b.transpose() / static_cast<double>(m) + 0.5 * Matrix::Identity(m, m));
  const Matrix q_dense = q_mat.dense();

  Vector adj(m);
  for (int i = 0; i < m; ++i) {
    adj(i) = frobenius_inner(a[static_cast<std::size_t>(i)], y_star);
  }
  Vector c = -q_dense * x_star - adj;
  auto problem = std::make_shared<const AffineQuadraticProblem>(
      std::move(c), q_mat, std::move(a0), std::move(a));
  return {std::move(problem), {x_star, y_star}};
}

}  // namespace detail

/**
 * Random affine/quadratic instance with a known KKT pair z* at which W-SOC,
 * W-SRCQ and constraint nondegeneracy hold with margins above the acceptance
 * threshold. G(z*) has p, q ≥ 1 and at least one zero eigenvalue.
 */
inline ProblemFixture synth_nondegenerate(std::uint64_t seed, int n, int m,
                                          const SynthOptions& options = {}) {
  if (m < 1 || n < 2) {
    throw InputError("", "synthetic instances need m >= 1 and n >= 2");
  }
  if (detail::feasible_inertias(n, m).empty()) {
    throw ConstructionFailure("no inertia pattern with a zero block admits "
                              "constraint nondegeneracy for n = " +
                              std::to_string(n) + ", m = " + std::to_string(m));
  }
  std::seed_seq mix{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(m)};
  std::mt19937_64 seeds(mix);
  for (int attempt = 0; attempt < options.retry_budget; ++attempt) {
    ProblemFixture fx = detail::synth_attempt(seeds(), n, m, options.zero_primal);
    const KktResidual res = residual(*fx.problem, fx.point);
    if (res.norm() > 1e-12) {
      continue;
    }
    const double t = options.acceptance_margin;
    const auto wsoc = check_wsoc(*fx.problem, fx.point, res.ied);
    const auto wsrcq = check_wsrcq(*fx.problem, fx.point, res.ied);
    const auto cn = check_cn(*fx.problem, fx.point, res.ied);
    if (holds(wsoc.verdict) && wsoc.margin > t && holds(wsrcq.verdict) &&
        wsrcq.margin > t && holds(cn.verdict) && cn.margin > t) {
      return fx;
    }
  }
  throw ConstructionFailure("no nondegenerate instance found within " +
                            std::to_string(options.retry_budget) + " seeds");
}

}  // namespace stratgn
