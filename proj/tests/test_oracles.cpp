#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace stratgn;
using namespace stratgn::testing;

namespace {

SymMatrix diag(std::initializer_list<double> d) {
  Vector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index k = 0;
  for (double x : d) {
    v(k++) = x;
  }
  return SymMatrix::diagonal(v);
}

}  // namespace

TEST(FdCurveDerivative, HandValue) {
  const Ied ied = make_ied(diag({2, -1}));
  const SymMatrix h = SymMatrix::from_packed(2, {0, 1, 0});
  const auto q = fd_curve_derivative(ied, h, {1e-5});
  const SymMatrix expected = SymMatrix::from_packed(2, {0, 2.0 / 3.0, 0});
  EXPECT_LE((q[0] - expected).norm(), 1e-4);
}

TEST(FdCurveDerivative, ZeroDirection) {
  const Ied ied = make_ied(diag({2, 0, -1}));
  for (const auto& q : fd_curve_derivative(ied, SymMatrix(3), {1e-3, 1e-5})) {
    EXPECT_EQ(q.norm(), 0.0);
  }
}

TEST(FdCurveDerivative, PositiveDefiniteReproducesDirection) {
  std::mt19937_64 rng(1);
  const Ied ied = make_ied(with_spectrum(random_spectrum(3, 3, 0, rng), rng));
  const SymMatrix h = random_sym(3, rng);
  for (const auto& q : fd_curve_derivative(ied, h, {1e-3, 1e-6})) {
    EXPECT_LE((q - h).norm(), 1e-8);
  }
}

TEST(FdCurveDerivative, MatchesStratumDifferentialFirstOrder) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 5;
    const int p = 1 + trial % (n - 1);
    const int q = std::min(n - p - 1, trial % 2);
    const Ied ied = make_ied(with_spectrum(random_spectrum(n, p, q, rng), rng));
    const SymMatrix h = tangent_project_pi1(ied, random_sym(n, rng));
    const SymMatrix exact = stratum_differential(ied, h);
    const auto fd = fd_curve_derivative(ied, h, {1e-3, 1e-4});
    const double e3 = (fd[0] - exact).norm();
    const double e4 = (fd[1] - exact).norm();
    EXPECT_LE(e4, 1e-3 * std::max(1.0, exact.norm()));
    EXPECT_LE(e4, 0.5 * e3 + 1e-9);
  }
}

TEST(FdPhiDir, SmoothPointTwoSided) {
  std::mt19937_64 rng(3);
  const auto p = random_problem(3, 2, rng);
  const PrimalDualPoint z = point_with_inertia(*p, 2, 1, rng);
  const AmbientVector v{random_vec(2, rng), random_sym(3, rng)};
  const AmbientVector minus{-v.vx, SymMatrix(3) - v.vy};
  const double exact = dir_derivative_phi(*p, z, v);
  const double fwd = fd_phi_dir(*p, z, v, {1e-6})[0];
  const double bwd = -fd_phi_dir(*p, z, minus, {1e-6})[0];
  EXPECT_LE(rel_error(fwd, exact), 1e-4);
  EXPECT_LE(rel_error(bwd, exact), 1e-4);
}

TEST(FdPhiDir, PsdNormalComponentOnScalar) {
  // Kink scalar at (0, 0): H₂ = v_x + v_y, positive branch.
  const auto p = kink_scalar();
  const PrimalDualPoint z = scalar_point(0.0, 0.0);
  const AmbientVector v{Vector::Constant(1, 0.3), diag({0.4})};
  const double exact = dir_derivative_phi(*p, z, v);
  // φ(t) = ½(1 + 0.4t)² + ½(0.7t − 0.3t)² with F₂ = Π₊(0.7t) − 0.3t.
  EXPECT_NEAR(exact, 0.4, 1e-14);
  const auto q = fd_phi_dir(*p, z, v, {1e-4, 1e-5, 1e-6});
  EXPECT_LE(std::abs(q[2] - exact), 1e-5);
  EXPECT_LE(std::abs(q[2] - exact), std::abs(q[0] - exact));
}

TEST(FdPhiDir, ZeroDirection) {
  const auto p = kink_scalar();
  const auto q = fd_phi_dir(*p, scalar_point(0.0, 0.0),
                            {Vector::Zero(1), SymMatrix(1)}, {1e-4, 1e-6});
  EXPECT_EQ(q[0], 0.0);
  EXPECT_EQ(q[1], 0.0);
}

TEST(FdPhiDir, RichardsonDecayOnRandomPoints) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const auto p = random_problem(n, 2, rng);
    const PrimalDualPoint z = point_with_inertia(*p, 1, n > 2 ? 1 : 0, rng);
    const AmbientVector v{random_vec(2, rng), random_sym(n, rng)};
    const double exact = dir_derivative_phi(*p, z, v);
    const auto q = fd_phi_dir(*p, z, v, {1e-4, 1e-5, 1e-6});
    const double scale = std::max(1.0, std::abs(exact));
    EXPECT_LE(std::abs(q[2] - exact) / scale, 1e-3);
    EXPECT_LE(std::abs(q[2] - exact), std::abs(q[0] - exact) + 1e-7 * scale);
  }
}

TEST(BruteProjection, Examples) {
  EXPECT_LE((brute_projection(diag({2, -1})) - diag({2, 0})).norm(), 1e-12);
  EXPECT_LE((brute_projection(SymMatrix::from_packed(2, {0, 1, 0})) -
             SymMatrix::from_packed(2, {0.5, 0.5, 0.5}))
                .norm(),
            1e-12);
  std::mt19937_64 rng(5);
  const SymMatrix a = with_spectrum(random_spectrum(3, 3, 0, rng), rng);
  EXPECT_LE((brute_projection(a) - a).norm(), 1e-10);
}

TEST(BruteProjection, AgreesWithSpectralProjection) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 3;
    const SymMatrix a = random_sym(n, rng);
    EXPECT_LE((brute_projection(a) - project_psd(a)).norm(), 1e-6);
  }
}

TEST(BruteProjection, RepeatedEigenvalues) {
  std::mt19937_64 rng(7);
  Vector l(3);
  l << 1.0, 1.0, -2.0;
  const SymMatrix a = with_spectrum(l, rng);
  EXPECT_LE((brute_projection(a) - project_psd(a)).norm(), 1e-6);
  EXPECT_LE((brute_projection(SymMatrix(3))).norm(), 1e-15);
}

TEST(BruteProjection, RejectsLargeOrder) {
  EXPECT_THROW(brute_projection(SymMatrix(4)), InputError);
}

TEST(EstimateRate, DoublingExponentsIsQuadratic) {
  std::vector<double> d;
  for (int k = 0; k < 5; ++k) {
    d.push_back(std::pow(10.0, -std::pow(2.0, k)));
  }
  EXPECT_EQ(estimate_rate(d).verdict, RateVerdict::kQuadratic);
}

TEST(EstimateRate, GeometricIsLinear) {
  std::vector<double> d;
  for (int k = 0; k < 12; ++k) {
    d.push_back(std::pow(2.0, -k));
  }
  EXPECT_EQ(estimate_rate(d).verdict, RateVerdict::kLinear);
}

TEST(EstimateRate, NoisyTailIsInconclusive) {
  const auto r = estimate_rate({1e-13, 1e-15, 2e-15, 1e-16});
  EXPECT_EQ(r.verdict, RateVerdict::kInconclusive);
  EXPECT_EQ(r.distances.size(), 1u);
}

TEST(EstimateRate, SuperlinearButNotQuadratic) {
  std::vector<double> d{1e-1, 1e-3, 1e-6, 5e-10};
  EXPECT_EQ(estimate_rate(d).verdict, RateVerdict::kSuperlinear);
}
