#include "srgeo/linalg.hpp"
#include "srgeo/ode.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace srgeo;

TEST(Omega, BlocksAndPairing) {
  const Mat om = omega_px(2);
  // omega((p, x), (p', x')) = p.x' - x.p'
  Vec u(4), v(4);
  u << 1, 0, 0, 0;
  v << 0, 0, 1, 0;
  EXPECT_DOUBLE_EQ(symplectic_pairing(om, u, v), 1.0);
  EXPECT_DOUBLE_EQ(symplectic_pairing(om, v, u), -1.0);
  EXPECT_TRUE((omega_qp(2) + om).isZero());
  const Mat perm = qp_to_px(2);
  EXPECT_TRUE((perm * perm.transpose()).isIdentity());
}

TEST(Rank, ClearGapAndAmbiguity) {
  Vec sv(3);
  sv << 1.0, 0.5, 1e-14;
  auto d = decide_rank(sv);
  EXPECT_EQ(d.rank, 2);
  EXPECT_FALSE(d.ambiguous);

  sv << 1.0, 1e-7, 1e-9;  // accepted 1e-7 vs rejected 1e-9: gap only 100
  d = decide_rank(sv);
  EXPECT_EQ(d.rank, 2);
  EXPECT_TRUE(d.ambiguous);

  Mat m = Mat::Identity(3, 3);
  m(2, 2) = 1e-9;
  m(1, 1) = 1e-7;
  EXPECT_THROW(numerical_rank(m, "test"), AmbiguousRankError);
}

TEST(Rank, FullRankIsNeverAmbiguous) {
  Vec sv(2);
  sv << 1.0, 1e-7;
  EXPECT_EQ(decide_rank(sv).rank, 2);
  EXPECT_FALSE(decide_rank(sv).ambiguous);
}

TEST(Subspaces, SpanNullAndAngles) {
  Mat m(3, 2);
  m << 1, 2, 0, 0, 1, 2;  // rank 1
  const Mat span = column_span(m, "t");
  ASSERT_EQ(span.cols(), 1);
  const Mat ker = null_space(m, "t");
  ASSERT_EQ(ker.cols(), 1);
  EXPECT_LT((m * ker).norm(), 1e-14);
  Vec expected(3);
  expected << 1, 0, 1;
  EXPECT_LT(max_principal_angle(span, expected), 1e-12);

  Mat a(3, 1), b(3, 1);
  a << 1, 0, 0;
  b << 1, 1, 0;
  EXPECT_NEAR(max_principal_angle(a, b), M_PI / 4, 1e-14);
}

TEST(Inertia, CountsSigns) {
  Mat q = Mat::Zero(3, 3);
  q.diagonal() << 2.0, -1.0, 1e-12;
  const Inertia in = inertia(q);
  EXPECT_EQ(in.positive, 1);
  EXPECT_EQ(in.negative, 1);
  EXPECT_EQ(in.zero, 1);
  EXPECT_EQ(in.signature(), 0);
}

TEST(Ode, HarmonicOscillatorMatchesExactSolution) {
  const OdeRhs rhs = [](double, const Vec& y, Vec& dy) {
    dy.resize(2);
    dy << y[1], -y[0];
  };
  OdeOptions o;
  o.rtol = 1e-11;
  o.atol = 1e-13;
  const Vec y = integrate_adaptive(rhs, Vec::Unit(2, 0), 0.0, 10.0, o);
  EXPECT_NEAR(y[0], std::cos(10.0), 1e-9);
  EXPECT_NEAR(y[1], -std::sin(10.0), 1e-9);
  // backwards returns to the start
  const Vec back = integrate_adaptive(rhs, y, 10.0, 0.0, o);
  EXPECT_NEAR(back[0], 1.0, 1e-9);
}

TEST(Ode, BlowUpIsReported) {
  const OdeRhs rhs = [](double, const Vec& y, Vec& dy) {
    dy.resize(1);
    dy[0] = y[0] * y[0];
  };
  // y = 1/(1 - t) blows up at t = 1
  EXPECT_THROW(integrate_adaptive(rhs, Vec::Ones(1), 0.0, 2.0, OdeOptions{}), IntegrationError);
}

TEST(Ode, ObserverSeesMonotoneTimes) {
  const OdeRhs rhs = [](double, const Vec& y, Vec& dy) { dy = -y; };
  std::vector<double> ts;
  integrate_adaptive(rhs, Vec::Ones(1), 0.0, 3.0, OdeOptions{},
                     [&](double t, const Vec&) { ts.push_back(t); });
  ASSERT_GE(ts.size(), 2u);
  EXPECT_EQ(ts.front(), 0.0);
  EXPECT_EQ(ts.back(), 3.0);
  EXPECT_TRUE(std::is_sorted(ts.begin(), ts.end()));
}
