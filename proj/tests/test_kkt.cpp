#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace stratgn;
using namespace stratgn::testing;

namespace {

/// σ_min(dF) at the weakly regular fixture, recorded from the first run.
constexpr double kWeaklyRegularSigmaMin = 0.40753645;

Vector random_coords(const TangentFrame& frame, std::mt19937_64& rng, double len) {
  Vector u = random_vec(frame.coordinate_dim(), rng);
  return u * (len / u.norm());
}

}  // namespace

TEST(BigG, Values) {
  const auto fx = weakly_regular_example();
  Vector d(4);
  d << 1, 0, 0, -1;
  EXPECT_EQ(big_g(*fx.problem, fx.point), SymMatrix::diagonal(d));

  std::mt19937_64 rng(1);
  const auto p = random_problem(3, 2, rng);
  const Vector x = random_vec(2, rng);
  EXPECT_LE(big_g(*p, {x, SymMatrix(3) - p->eval_g(x)}).norm(), 1e-15);

  const auto c = std::make_shared<const AffineQuadraticProblem>(
      Vector(0), SymMatrix::identity(2), std::vector<SymMatrix>{});
  EXPECT_EQ(big_g(*c, PrimalDualPoint::zero(0, 2)), SymMatrix::identity(2));
}

TEST(Residual, ScalarHandValue) {
  const auto p = smooth_scalar();
  const KktResidual res = residual(*p, scalar_point(0.0, 1.0));
  EXPECT_DOUBLE_EQ(res.f1(0), 1.0);
  EXPECT_DOUBLE_EQ(res.f2(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(res.phi(), 1.0);
  EXPECT_DOUBLE_EQ(res.squared_norm(), 2.0 * res.phi());
}

TEST(Residual, VanishesAtWeaklyRegularPair) {
  const auto fx = weakly_regular_example();
  const KktResidual res = residual(*fx.problem, fx.point);
  EXPECT_EQ(res.f1.norm(), 0.0);
  EXPECT_EQ(res.f2.norm(), 0.0);
  EXPECT_EQ(merit(*fx.problem, fx.point), 0.0);
}

TEST(Residual, PerturbedMultiplierScalesQuadratically) {
  const auto fx = weakly_regular_example();
  const double t = 1e-2;
  Matrix y = Matrix::Zero(4, 4);
  y(0, 3) = y(3, 0) = t * t;
  y(1, 1) = -t;
  y(3, 3) = -1.0;
  const double f = residual(*fx.problem, {fx.point.x, SymMatrix::from_dense(y)}).norm();
  EXPECT_GE(f / (t * t), 0.1);
  EXPECT_LE(f / (t * t), 10.0);
}

TEST(Residual, NormIdentityOnRandomPoints) {
  std::mt19937_64 rng(2);
  const auto p = random_problem(4, 3, rng);
  const PrimalDualPoint z{random_vec(3, rng), random_sym(4, rng)};
  const KktResidual res = residual(*p, z);
  EXPECT_NEAR(res.stacked().squaredNorm(), 2.0 * res.phi(), 1e-12);
}

TEST(TangentFrame, PrimalZeroKeepsTangentPartOfMultiplier) {
  std::mt19937_64 rng(3);
  const auto p = random_problem(4, 3, rng);
  const PrimalDualPoint z = point_with_inertia(*p, 1, 2, rng);
  const TangentFrame frame(*p, z, residual(*p, z).ied);
  const SymMatrix vy = random_sym(4, rng);
  const TangentVector v = frame.to_coordinates({Vector::Zero(3), vy});
  EXPECT_EQ(v.vx.norm(), 0.0);
  EXPECT_LE((frame.matrix(v.h) - tangent_project_pi1(frame.ied(), vy)).norm(), 1e-13);
}

TEST(TangentFrame, CompensatingMultiplierGivesZeroH) {
  std::mt19937_64 rng(4);
  const auto p = random_problem(3, 4, rng);
  const PrimalDualPoint z = point_with_inertia(*p, 1, 1, rng);
  const TangentFrame frame(*p, z, residual(*p, z).ied);
  const Vector vx = random_vec(4, rng);
  const TangentVector v = frame.to_coordinates({vx, SymMatrix(3) - p->apply_dg(z.x, vx)});
  EXPECT_EQ(v.vx, vx);
  EXPECT_LE(v.h.norm(), 1e-13);
}

TEST(TangentFrame, RoundTrip) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_problem(4, 3, rng);
    const PrimalDualPoint z = point_with_inertia(*p, 2, 1, rng);
    const TangentFrame frame(*p, z, residual(*p, z).ied);
    const TangentVector v = frame.from_stacked(random_coords(frame, rng, 1.0));
    const TangentVector back = frame.to_coordinates(frame.to_ambient(v));
    EXPECT_LE((back.stacked() - v.stacked()).norm(), 1e-12);
    EXPECT_LE(beta_block_norm(frame.ied(), frame.matrix(v.h)), 1e-13);
  }
}

TEST(AssembleDF, ScalarHandValue) {
  const auto p = smooth_scalar();
  const PrimalDualPoint z = scalar_point(0.0, 1.0);
  const TangentFrame frame(*p, z, residual(*p, z).ied);
  const AssembledJacobian jac = assemble_dF(*p, z, frame);
  Matrix expected(2, 2);
  expected << 0, 1, -1, 1;
  EXPECT_LE((jac.j - expected).norm(), 1e-15);
  EXPECT_LE((jac.gram - expected.transpose() * expected).norm(), 1e-15);
}

TEST(AssembleDF, NoVariablesLeavesXiBlock) {
  std::mt19937_64 rng(6);
  const Vector lambda = random_spectrum(3, 1, 1, rng);
  const SymMatrix a0 = with_spectrum(lambda, rng);
  const auto p = std::make_shared<const AffineQuadraticProblem>(
      Vector(0), a0, std::vector<SymMatrix>{});
  const PrimalDualPoint z{Vector(0), SymMatrix(3)};
  const TangentFrame frame(*p, z, residual(*p, z).ied);
  const AssembledJacobian jac = assemble_dF(*p, z, frame);
  ASSERT_EQ(jac.j.cols(), frame.tangent_dim());
  for (int k = 0; k < frame.tangent_dim(); ++k) {
    const SymMatrix bk = frame.basis()[static_cast<std::size_t>(k)];
    EXPECT_LE((jac.j.col(k) - stratum_differential(frame.ied(), bk).svec()).norm(),
              1e-14);
  }
}

TEST(AssembleDF, InjectiveAtWeaklyRegularPair) {
  const auto fx = weakly_regular_example();
  const double sigma = injectivity_margin(*fx.problem, fx.point);
  EXPECT_GT(sigma, 1e-6);
  EXPECT_NEAR(sigma, kWeaklyRegularSigmaMin, 1e-7);
}

TEST(AssembleDF, MatchesOperatorForm) {
  std::mt19937_64 rng(7);
  const auto p = random_problem(4, 3, rng);
  const PrimalDualPoint z = point_with_inertia(*p, 1, 2, rng);
  const TangentFrame frame(*p, z, residual(*p, z).ied);
  const AssembledJacobian jac = assemble_dF(*p, z, frame);
  const TangentVector v = frame.from_stacked(random_coords(frame, rng, 1.0));
  const auto [top, bottom] = apply_dF(*p, z, frame.ied(), v.vx, frame.matrix(v.h));
  Vector stacked(top.size() + static_cast<Eigen::Index>(packed_size(4)));
  stacked << top, bottom.svec();
  EXPECT_LE((jac.j * v.stacked() - stacked).norm(), 1e-12);
}

TEST(AssembleDF, MatchesFiniteDifferencesAlongRetraction) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 4;
    const int m = 1 + trial % 3;
    const auto p = random_problem(n, m, rng);
    const int pp = 1 + trial % (n - 1);
    const int qq = (n - pp) > 1 ? 1 : 0;
    const PrimalDualPoint z = point_with_inertia(*p, pp, qq, rng);
    const KktResidual res = residual(*p, z);
    const TangentFrame frame(*p, z, res.ied);
    const AssembledJacobian jac = assemble_dF(*p, z, frame);
    const TangentVector v = frame.from_stacked(random_coords(frame, rng, 1.0));
    const double t = 1e-6;
    const TangentVector tv = frame.from_stacked(t * v.stacked());
    const auto zt = retract_point(*p, z, frame, tv);
    ASSERT_TRUE(zt);
    const Vector fd = (residual(*p, *zt).stacked() - res.stacked()) / t;
    const Vector exact = jac.j * v.stacked();
    EXPECT_LE((fd - exact).norm() / std::max(1.0, exact.norm()), 1e-4);
  }
}

TEST(DirDerivativePhi, SmoothPointIsInnerProduct) {
  std::mt19937_64 rng(9);
  const auto p = random_problem(3, 3, rng);
  const PrimalDualPoint z = point_with_inertia(*p, 2, 1, rng);
  const KktResidual res = residual(*p, z);
  const TangentFrame frame(*p, z, res.ied);
  const AssembledJacobian jac = assemble_dF(*p, z, frame);
  const AmbientVector v{random_vec(3, rng), random_sym(3, rng)};
  const double expected = res.stacked().dot(jac.j * frame.to_coordinates(v).stacked());
  EXPECT_LE(rel_error(dir_derivative_phi(*p, z, res, v), expected), 1e-12);
}

TEST(DirDerivativePhi, ZeroDirection) {
  std::mt19937_64 rng(10);
  const auto p = random_problem(3, 2, rng);
  const PrimalDualPoint z = point_with_inertia(*p, 1, 1, rng);
  EXPECT_EQ(dir_derivative_phi(*p, z, {Vector::Zero(2), SymMatrix(3)}), 0.0);
}

TEST(DirDerivativePhi, MatchesOneSidedQuotients) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const auto p = random_problem(n, 2, rng);
    const PrimalDualPoint z = point_with_inertia(*p, 1, n > 2 ? 1 : 0, rng);
    const AmbientVector v{random_vec(2, rng), random_sym(n, rng)};
    const double exact = dir_derivative_phi(*p, z, v);
    const auto q = fd_phi_dir(*p, z, v, {1e-6});
    EXPECT_LE(std::abs(q[0] - exact) / std::max(1.0, std::abs(exact)), 1e-3);
  }
}

TEST(RetractPoint, ZeroStepIsIdentity) {
  const auto fx = weakly_regular_example();
  const TangentFrame frame(*fx.problem, fx.point, residual(*fx.problem, fx.point).ied);
  const auto z = retract_point(*fx.problem, fx.point, frame,
                               frame.from_stacked(Vector::Zero(frame.coordinate_dim())));
  ASSERT_TRUE(z);
  EXPECT_LE(distance(*z, fx.point), 1e-15);
}

TEST(RetractPoint, FullRankAddsDirectionExactly) {
  std::mt19937_64 rng(12);
  const auto p = random_problem(3, 2, rng);
  const PrimalDualPoint z = point_with_inertia(*p, 2, 1, rng);
  const TangentFrame frame(*p, z, residual(*p, z).ied);
  const TangentVector v = frame.from_stacked(random_coords(frame, rng, 1e-2));
  const auto zr = retract_point(*p, z, frame, v);
  ASSERT_TRUE(zr);
  EXPECT_LE((zr->x - (z.x + v.vx)).norm(), 1e-15);
  EXPECT_LE((big_g(*p, *zr) - (big_g(*p, z) + frame.matrix(v.h))).norm(), 1e-13);
}

TEST(RetractPoint, StaysOnWeaklyRegularStratum) {
  const auto fx = weakly_regular_example();
  const TangentFrame frame(*fx.problem, fx.point, residual(*fx.problem, fx.point).ied);
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto z = retract_point(*fx.problem, fx.point, frame,
                                 frame.from_stacked(random_coords(frame, rng, 1e-2)));
    ASSERT_TRUE(z);
    const Ied ied = residual(*fx.problem, *z).ied;
    EXPECT_EQ(ied.p, 1);
    EXPECT_EQ(ied.q, 1);
  }
}
