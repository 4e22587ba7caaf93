#include "srgeo/jacobi.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace srgeo;

namespace {

const double kTwoPi = 2 * M_PI;

// Second root of a sin a + 2 cos a - 2, i.e. of tan(a/2) = a/2 on (2 pi, 3 pi),
// by plain bisection.
double alpha_star() {
  auto g = [](double a) { return std::tan(a / 2) - a / 2; };
  double lo = kTwoPi + 1e-6, hi = 3 * M_PI - 1e-6;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Vec random_in_ball(std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u;
  Vec v(3);
  for (int i = 0; i < 3; ++i) v[i] = g(rng);
  return v.normalized() * radius * std::cbrt(u(rng));
}

ExtremalTrajectory heis(const Vec& lam, double t_end = 1.0, const Vec& p = Vec::Zero(3)) {
  return integrate_extremal(make_heisenberg(), p, lam, t_end);
}

}  // namespace

TEST(FrameMatrices, HeisenbergBlocks) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 3; ++i) {
    const Vec lam = random_in_ball(rng, 4.0);
    const auto traj = heis(lam);
    for (double t : {0.0, 0.37, 1.0}) {
      const FrameMatrices f = frame_matrices(traj, t);
      const double a = lam[2];
      Mat r = Mat::Zero(3, 3);
      r(0, 0) = r(1, 1) = -a * a / 4;
      EXPECT_TRUE(f.R.isApprox(r, 1e-9) || (f.R - r).norm() < 1e-9) << f.R;
      EXPECT_TRUE(f.B.topLeftCorner(2, 2).isIdentity(1e-12));
      EXPECT_EQ((f.B - f.B.transpose()).norm(), 0.0);
      EXPECT_EQ((f.R - f.R.transpose()).norm(), 0.0);
    }
  }
}

TEST(FrameMatrices, EuclideanIsFree) {
  const auto traj = integrate_extremal(make_euclidean(2), Vec::Zero(2), Vec{{1, 2}}, 1.0);
  const FrameMatrices f = frame_matrices(traj, 0.5);
  EXPECT_TRUE(f.A.isZero());
  EXPECT_TRUE(f.R.isZero());
  EXPECT_TRUE(f.B.isIdentity());
  EXPECT_THROW(frame_matrices(traj, 2.0), RangeError);
}

TEST(FrameMatrices, FrameOdeReproducesPropagation) {
  // integrate (p, x)' = [[-A^T, R], [B, A]] (p, x) along the extremal with a
  // separate integrator and compare with Phi-propagated coordinates
  const Structure s = make_heisenberg();
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 3; ++trial) {
    const Vec lam = random_in_ball(rng, 3.0);
    const Vec p0 = random_in_ball(rng, 1.0), x0 = random_in_ball(rng, 1.0);
    const auto traj = integrate_extremal(s, Vec::Zero(3), lam, 1.0);
    const auto jc = propagate_jacobi(traj, p0, x0);

    const OdeRhs rhs = [&](double, const Vec& y, Vec& dy) {
      const PhaseState st = PhaseState::unpack(y.head(6));
      const auto jet = hamiltonian_jet(s, st);
      const FrameMatrices f = frame_matrices(s, st);
      dy.resize(12);
      dy.head(3) = jet.gradient.tail(3);
      dy.segment(3, 3) = -jet.gradient.head(3);
      const Vec p = y.segment(6, 3), x = y.tail(3);
      dy.segment(6, 3) = -f.A.transpose() * p + f.R * x;
      dy.tail(3) = f.B * p + f.A * x;
    };
    Vec y0(12);
    y0 << Vec::Zero(3), lam, p0, x0;
    OdeOptions o;
    o.rtol = 1e-11;
    o.atol = 1e-13;
    const Vec y1 = integrate_adaptive(rhs, y0, 0.0, 1.0, o);
    EXPECT_LT((y1.segment(6, 3) - jc.p.back()).norm(), 1e-7);
    EXPECT_LT((y1.tail(3) - jc.x.back()).norm(), 1e-7);
  }
}

TEST(PropagateJacobi, ZeroDataStaysZero) {
  const auto jc = propagate_jacobi(heis(Vec{{1, 0, 2}}), Vec::Zero(3), Vec::Zero(3));
  for (std::size_t i = 0; i < jc.times.size(); ++i) {
    EXPECT_TRUE(jc.p[i].isZero());
    EXPECT_TRUE(jc.x[i].isZero());
  }
  EXPECT_EQ(jc.frame, "darboux");
}

TEST(PropagateJacobi, ConjugateDirectionVanishesAtOne) {
  const auto jc = propagate_jacobi(heis(Vec{{1, 0, kTwoPi}}), Vec{{0, 1, 0}}, Vec::Zero(3));
  EXPECT_NEAR(jc.times.back(), 1.0, 0.0);
  EXPECT_LT(jc.x.back().norm(), 1e-7);
  EXPECT_GT(jc.p.back().norm(), 0.1);
}

TEST(Pairing, AntisymmetryNormalizationAndConstancy) {
  const auto traj = heis(Vec{{0.4, -0.7, 3.3}});
  const auto j = propagate_jacobi(traj, Vec::Unit(3, 0), Vec::Zero(3));
  const auto k = propagate_jacobi(traj, Vec::Zero(3), Vec::Unit(3, 0));
  for (double t : traj.times()) {
    EXPECT_EQ(pairing(j, j, t), 0.0);
    EXPECT_NEAR(pairing(j, k, t), 1.0, 1e-9);
  }
  std::mt19937_64 rng(9);
  for (int i = 0; i < 10; ++i) {
    const auto a = propagate_jacobi(traj, random_in_ball(rng, 1), random_in_ball(rng, 1));
    const auto b = propagate_jacobi(traj, random_in_ball(rng, 1), random_in_ball(rng, 1));
    EXPECT_LE(pairing_drift(a, b), 1e-9);
  }
  const auto other = propagate_jacobi(heis(Vec{{1, 0, 1}}), Vec::Unit(3, 0), Vec::Zero(3));
  EXPECT_THROW(pairing(j, other, 0.0), InvalidArgument);
  EXPECT_THROW(pairing(j, k, 0.123456789), RangeError);
}

TEST(Decomposition, NonConjugateAndEuclidean) {
  const auto d = decomposition(heis(Vec{{1, 0, M_PI}}), 1.0);
  EXPECT_EQ(d.dim_a(), 3);
  EXPECT_EQ(d.dim_b(), 0);
  const auto traj = integrate_extremal(make_euclidean(3), Vec::Zero(3), Vec{{1, 2, 3}}, 2.0);
  for (double t : {0.5, 1.0, 2.0}) EXPECT_EQ(decomposition(traj, t).dim_a(), 3);
}

TEST(Decomposition, ConjugateTimeSplitsTwoPlusOne) {
  const auto traj = heis(Vec{{1, 0, kTwoPi}});
  const auto d = decomposition(traj, 1.0);
  EXPECT_EQ(d.dim_a(), 2);
  EXPECT_EQ(d.dim_b(), 1);
  EXPECT_LE(d.max_cross(), 1e-7);
  // B is spanned by p(1) of the kernel field with initial data ((0, 1, 0), 0)
  const auto jc = propagate_jacobi(traj, Vec{{0, 1, 0}}, Vec::Zero(3));
  EXPECT_LT(max_principal_angle(d.b_basis, jc.p.back()), 1e-6);
}

TEST(Decomposition, RandomCasesAreOrthogonalComplements) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int i = 0; i < 50; ++i) {
    const auto traj = heis(random_in_ball(rng, 6.0));
    const auto d = decomposition(traj, u(rng));
    EXPECT_EQ(d.dim_a() + d.dim_b(), 3);
    EXPECT_LE(d.max_cross(), 1e-7);
  }
}

TEST(Decomposition, IndependentOfConstantFrameChange) {
  for (const double a : {kTwoPi, alpha_star()}) {
    const auto traj = heis(Vec{{1, 0, a}});
    const auto d0 = decomposition(traj, 1.0);
    for (unsigned long long seed : {1ull, 2ull, 3ull}) {
      const auto d1 = decomposition(traj, 1.0, FrameChange::random(3, seed));
      ASSERT_EQ(d1.dim_b(), d0.dim_b());
      EXPECT_EQ(d1.frame, "constant-change");
      EXPECT_LE(max_principal_angle(d0.b_basis, d1.b_basis), 1e-6);
      EXPECT_LE(max_principal_angle(d0.a_basis, d1.a_basis), 1e-6);
    }
  }
}

TEST(FrameChange, IsSymplecticAndKeepsVertical) {
  const FrameChange fc = FrameChange::random(3, 5);
  const Mat om = omega_px(3);
  EXPECT_LT((fc.matrix().transpose() * om * fc.matrix() - om).norm(), 1e-12);
  EXPECT_TRUE((fc.matrix() * fc.inverse()).isIdentity(1e-12));
  EXPECT_TRUE(fc.matrix().bottomLeftCorner(3, 3).isZero());
  EXPECT_THROW(FrameChange(Mat::Zero(2, 2), Mat::Zero(2, 2)), InvalidArgument);
}

TEST(Regularity, NonConjugateIsVacuous) {
  const auto r = regularity_check(heis(Vec{{1, 0, M_PI}}));
  EXPECT_EQ(r.kernel_dim, 0);
  EXPECT_TRUE(r.pass);
}

TEST(Regularity, ConjugateCovectorsPass) {
  for (const double a : {kTwoPi, alpha_star()}) {
    const auto r = regularity_check(heis(Vec{{1, 0, a}}));
    EXPECT_EQ(r.kernel_dim, 1) << a;
    EXPECT_EQ(r.theta_rank, 1) << a;
    EXPECT_TRUE(r.pass) << a;
  }
  EXPECT_THROW(regularity_check(heis(Vec{{1, 0, 1}}, 0.5)), RangeError);
}

TEST(KernelJacobiEquivalence, KernelFieldsVanishAtOne) {
  std::mt19937_64 rng(13);
  for (const double a : {kTwoPi, alpha_star()}) {
    const Vec base = 0.5 * random_in_ball(rng, 1.0);
    const auto traj = heis(Vec{{0.8, 0.3, a}}, 1.0, base);
    const Mat d = traj.sample(traj.size() - 1).phi.topRightCorner(3, 3);
    const Mat ker = null_space(d, "test");
    ASSERT_EQ(ker.cols(), 1);
    const auto jc = propagate_jacobi(traj, ker.col(0), Vec::Zero(3));
    EXPECT_LE(jc.x.back().norm(), 1e-7);
    // a non-kernel direction does not vanish
    const Vec other = Vec::Unit(3, 2) - ker.col(0) * ker(2, 0);
    EXPECT_GT(propagate_jacobi(traj, other, Vec::Zero(3)).x.back().norm(), 1e-3);
  }
}

TEST(JacobiCsv, Header) {
  const auto jc = propagate_jacobi(heis(Vec{{1, 0, 1}}), Vec::Unit(3, 0), Vec::Zero(3));
  std::ostringstream os;
  write_jacobi_csv(os, jc);
  EXPECT_EQ(os.str().rfind("t,p1,p2,p3,x1,x2,x3\n0,1,0,0,0,0,0\n", 0), 0u);
}
