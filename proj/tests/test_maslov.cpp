#include "srgeo/maslov.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

using namespace srgeo;

namespace {

const double kTwoPi = 2 * M_PI;

double alpha_star() {
  auto g = [](double a) { return std::tan(a / 2) - a / 2; };
  double lo = kTwoPi + 1e-6, hi = 3 * M_PI - 1e-6;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::shared_ptr<const ExtremalTrajectory> heis_traj(const Vec& lam, double t_end = 1.0,
                                                   const Vec& p = Vec::Zero(3)) {
  return std::make_shared<const ExtremalTrajectory>(
      integrate_extremal(make_heisenberg(), p, lam, t_end));
}

JacobiCurveSamples jcurve(const Vec& lam, double a, double b, CurveKind kind = CurveKind::Jacobi) {
  return JacobiCurveSamples(heis_traj(lam, b), kind, a, b);
}

// Conjugate times of the Heisenberg ray t -> t (u, v, alpha) in (r, s): t alpha
// must be a root of alpha sin alpha + 2 cos alpha - 2, namely 2 pi k or a root
// of tan(a/2) = a/2 in (2 pi k, (2k + 1) pi).
std::vector<double> heis_conjugate_times(double alpha, double r, double s) {
  std::vector<double> roots;
  for (int k = 1; k * kTwoPi < std::abs(alpha) * s + 10; ++k) {
    roots.push_back(k * kTwoPi);
    auto g = [](double a) { return std::tan(a / 2) - a / 2; };
    double lo = k * kTwoPi + 1e-9, hi = (2 * k + 1) * M_PI - 1e-9;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) < 0 ? lo : hi) = mid;
    }
    roots.push_back(0.5 * (lo + hi));
  }
  std::vector<double> times;
  for (double a : roots) {
    const double t = a / std::abs(alpha);
    if (t > r && t < s) times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  return times;
}

}  // namespace

TEST(LagrangianFrame, ValidatesRankAndIsotropy) {
  EXPECT_NO_THROW(LagrangianFrame::vertical(3));
  EXPECT_EQ(LagrangianFrame::horizontal(2).isotropy_defect(), 0.0);
  Mat bad = Mat::Zero(4, 2);
  bad(0, 0) = 1;
  bad(2, 1) = 1;  // (e1, 0) and (0, e1) pair to 1
  EXPECT_THROW(LagrangianFrame{bad}, InvalidArgument);
  EXPECT_THROW(LagrangianFrame{Mat::Zero(4, 2)}, InvalidArgument);
}

TEST(IntersectionDim, TrivialCases) {
  EXPECT_EQ(intersection_dim(LagrangianFrame::vertical(3), LagrangianFrame::vertical(3)), 3);
  EXPECT_EQ(intersection_dim(LagrangianFrame::vertical(3), LagrangianFrame::horizontal(3)), 0);
}

TEST(JacobiCurve, StartsAtVerticalAndIsLagrangian) {
  const auto traj = heis_traj(Vec{{0.3, 0.8, 4.0}});
  const LagrangianFrame j0 = jacobi_curve(*traj, 0.0);
  EXPECT_EQ(intersection_dim(j0, LagrangianFrame::vertical(3)), 3);
  EXPECT_EQ(intersection_dim(l_curve(*traj, 0.0), LagrangianFrame::vertical(3)), 3);
  for (double t : {0.2, 0.5, 1.0}) {
    EXPECT_LE(jacobi_curve(*traj, t).isotropy_defect(), 1e-9);
    EXPECT_LE(l_curve(*traj, t).isotropy_defect(), 1e-9);
  }
}

TEST(JacobiCurve, EuclideanNeverReturnsToVertical) {
  const auto traj = std::make_shared<const ExtremalTrajectory>(
      integrate_extremal(make_euclidean(2), Vec::Zero(2), Vec{{1, -1}}, 2.0));
  for (double t : {0.01, 0.5, 2.0}) {
    const Mat f = jacobi_curve(*traj, t).matrix();
    // Phi^{-1} [I; 0] = [I; -t I]
    EXPECT_TRUE(f.topRows(2).isIdentity(1e-12));
    EXPECT_TRUE((f.bottomRows(2) + t * Mat::Identity(2, 2)).isZero(1e-12));
    EXPECT_EQ(intersection_dim(jacobi_curve(*traj, t), LagrangianFrame::vertical(2)), 0);
  }
  const JacobiCurveSamples curve(traj, CurveKind::Transport, 0.0, 2.0);
  EXPECT_THROW(crossing_form(curve, 1.0, LagrangianFrame::vertical(2)), Error);
  EXPECT_TRUE(find_crossings(curve, LagrangianFrame::vertical(2), 0.1, 2.0).empty());
  EXPECT_TRUE(count_conjugate_on_ray(make_euclidean(3), Vec::Zero(3), Vec{{1, 2, 3}}, 0.05, 5.0)
                  .empty());
}

TEST(JacobiCurve, ConjugateCovectorMeetsInitialValue) {
  const auto traj = heis_traj(Vec{{1, 0, kTwoPi}});
  EXPECT_EQ(intersection_dim(jacobi_curve(*traj, 1.0), jacobi_curve(*traj, 0.0)), 1);
  EXPECT_EQ(intersection_dim(l_curve(*traj, 1.0), LagrangianFrame::vertical(3)), 1);
  EXPECT_EQ(intersection_dim(jacobi_curve(*traj, 0.7), jacobi_curve(*traj, 0.0)), 0);
}

TEST(CrossingForm, InitialFormIsMinusTwiceTheFibreHamiltonian) {
  // along Ver at t = 0 the form equals -H_pp, i.e. -2 H_p as a quadratic form
  const Structure s = make_heisenberg();
  const Vec p{{0.4, -0.3, 0.1}};
  const Vec lam{{0.5, 1.0, 3.0}};
  const JacobiCurveSamples curve(
      std::make_shared<const ExtremalTrajectory>(integrate_extremal(s, p, lam, 1.0)),
      CurveKind::Jacobi, 0.0, 1.0);
  const Mat q = crossing_form(curve, 0.0, LagrangianFrame::vertical(3));
  const Mat hpp = hamiltonian_jet(s, PhaseState(p, lam)).hessian.bottomRightCorner(3, 3);
  ASSERT_EQ(q.rows(), 3);
  EXPECT_LT((q + hpp).norm(), 1e-6);
  Eigen::SelfAdjointEigenSolver<Mat> es(q);
  EXPECT_NEAR(es.eigenvalues()[2], 0.0, 1e-6);
  EXPECT_LT(es.eigenvalues()[1], -0.1);  // rank 2, negative semidefinite
}

TEST(CrossingForm, SignsAtFullTurn) {
  const Vec lam{{1, 0, kTwoPi}};
  const auto jc = jcurve(lam, 0.0, 1.0);
  const LagrangianFrame l0 = jacobi_curve(jc.trajectory(), 0.0);
  const Mat qj = crossing_form(jc, 1.0, l0);
  ASSERT_EQ(qj.rows(), 1);
  EXPECT_LT(qj(0, 0), 0.0);
  const auto lc = jcurve(lam, 0.0, 1.0, CurveKind::Transport);
  const Mat ql = crossing_form(lc, 1.0, LagrangianFrame::vertical(3));
  ASSERT_EQ(ql.rows(), 1);
  EXPECT_GT(ql(0, 0), 0.0);
}

TEST(MaslovIndex, SingleCrossingAtFullTurn) {
  const auto curve = jcurve(Vec{{1, 0, 7}}, 0.0, 1.0);
  const LagrangianFrame l0 = LagrangianFrame::vertical(3);
  const auto reps = find_crossings(curve, l0, 0.1, 1.0);
  ASSERT_EQ(reps.size(), 1u);
  EXPECT_NEAR(reps[0].t, kTwoPi / 7, 1e-8);
  EXPECT_EQ(reps[0].multiplicity, 1);
  EXPECT_EQ(reps[0].signature, -1);
  EXPECT_LE(reps[0].bracket_lo, reps[0].t);
  EXPECT_GE(reps[0].bracket_hi, reps[0].t);
  EXPECT_EQ(maslov_index(curve, l0, 0.1, 1.0), -1);
}

TEST(MaslovIndex, TransportCurveHasSameCrossings) {
  for (const Vec& lam : {Vec{{1, 0, 13}}, Vec{{0.3, -0.9, 11.0}}}) {
    const auto jc = jcurve(lam, 0.0, 1.0);
    const auto lc = jcurve(lam, 0.0, 1.0, CurveKind::Transport);
    const auto rj = find_crossings(jc, LagrangianFrame::vertical(3), 0.05, 1.0);
    const auto rl = find_crossings(lc, LagrangianFrame::vertical(3), 0.05, 1.0);
    ASSERT_EQ(rj.size(), rl.size());
    for (std::size_t i = 0; i < rj.size(); ++i) {
      EXPECT_NEAR(rj[i].t, rl[i].t, 1e-8);
      EXPECT_EQ(rj[i].multiplicity, rl[i].multiplicity);
      EXPECT_EQ(rj[i].signature, -rl[i].signature);
    }
  }
}

TEST(MaslovIndex, EndpointCrossingIsRejected) {
  const auto curve = jcurve(Vec{{1, 0, kTwoPi}}, 0.0, 1.0);
  EXPECT_THROW(maslov_index(curve, LagrangianFrame::vertical(3), 0.1, 1.0),
               ConjugateEndpointError);
  EXPECT_THROW(maslov_index(curve, LagrangianFrame::vertical(3), 0.0, 0.5),
               ConjugateEndpointError);
}

TEST(MaslovIndex, CrossingFreeCurveHasZeroIndex) {
  const auto curve = jcurve(Vec{{1, 2, 3}}, 0.0, 1.0);
  EXPECT_EQ(maslov_index(curve, LagrangianFrame::vertical(3), 0.05, 1.0), 0);
}

TEST(MaslovIndex, AdditivityReversalAndReparametrization) {
  const auto curve = jcurve(Vec{{0.6, 0.4, 20.0}}, 0.0, 1.0);
  const LagrangianFrame l0 = LagrangianFrame::vertical(3);
  const auto expected = heis_conjugate_times(20.0, 0.05, 0.95);
  const int total = maslov_index(curve, l0, 0.05, 0.95);
  EXPECT_EQ(total, -static_cast<int>(expected.size()));
  const double m = 0.5 * (expected[0] + expected[1]);
  EXPECT_EQ(maslov_index(curve, l0, 0.05, m) + maslov_index(curve, l0, m, 0.95), total);

  const auto rev = curve.reversed();
  EXPECT_TRUE(rev.is_reversed());
  EXPECT_EQ(maslov_index(rev, l0, 1.0 - 0.95, 1.0 - 0.05), -total);

  const auto rep = curve.reparametrized([](double u) { return u * u; }, 0.0, 1.0);
  EXPECT_EQ(maslov_index(rep, l0, std::sqrt(0.05), std::sqrt(0.95)), total);

  std::vector<double> grid;
  for (int i = 0; i <= 257; ++i) grid.push_back(std::pow(i / 257.0, 0.7));
  EXPECT_EQ(maslov_index(curve.resampled(grid), l0, 0.05, 0.95), total);
  EXPECT_THROW(curve.resampled({0.1, 0.5}), InvalidArgument);
}

TEST(CountConjugate, ReferenceRays) {
  const Structure s = make_heisenberg();
  auto reps = count_conjugate_on_ray(s, Vec::Zero(3), Vec{{1, 0, kTwoPi + 0.3}}, 0.05, 1.0);
  ASSERT_EQ(reps.size(), 1u);
  EXPECT_NEAR(reps[0].t, kTwoPi / (kTwoPi + 0.3), 1e-8);
  EXPECT_NEAR(reps[0].t, 0.9544, 1e-4);
  EXPECT_EQ(reps[0].multiplicity, 1);

  // roots below 13: 2 pi, alpha* and 4 pi
  reps = count_conjugate_on_ray(s, Vec::Zero(3), Vec{{1, 0, 13}}, 0.05, 1.0);
  ASSERT_EQ(heis_conjugate_times(13, 0.05, 1.0).size(), 3u);
  ASSERT_EQ(reps.size(), 3u);
  EXPECT_NEAR(reps[0].t, kTwoPi / 13, 1e-8);
  EXPECT_NEAR(reps[0].t, 0.4833, 1e-4);
  EXPECT_NEAR(reps[1].t, alpha_star() / 13, 1e-8);
  EXPECT_NEAR(reps[1].t, 0.6913, 1e-4);
  EXPECT_NEAR(reps[2].t, 2 * kTwoPi / 13, 1e-8);
  for (const auto& r : reps) EXPECT_EQ(r.multiplicity, 1);

  EXPECT_THROW(count_conjugate_on_ray(s, Vec::Zero(3), Vec{{1, 0, kTwoPi}}, 0.05, 1.0),
               ConjugateEndpointError);
}

TEST(CountConjugate, MatchesClosedFormTimesAndDexpSingularity) {
  const Structure s = make_heisenberg();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1), a(3, 30);
  for (int i = 0; i < 6; ++i) {
    const Vec lam{{u(rng), u(rng), a(rng)}};
    const Vec base{{u(rng), u(rng), u(rng)}};
    const auto expected = heis_conjugate_times(lam[2], 0.05, 1.0);
    const auto reps = count_conjugate_on_ray(s, base, lam, 0.05, 1.0);
    ASSERT_EQ(reps.size(), expected.size());
    for (std::size_t k = 0; k < reps.size(); ++k) {
      EXPECT_NEAR(reps[k].t, expected[k], 1e-8);
      const Mat d = d_exp(s, base, reps[k].t * lam);
      EXPECT_EQ(static_cast<int>(null_space(d, "test").cols()), reps[k].multiplicity);
    }
  }
}

TEST(CountConjugate, NonIdealStructureIsDetected) {
  // a single field d_x on R^2: every geodesic is abnormal, the curve stays on the train
  const Polynomial one(2, {{{0, 0}, 1.0}});
  const Polynomial zero(2, {});
  const Structure s(2, {PolyVectorField({one, zero})}, "line");
  EXPECT_THROW(count_conjugate_on_ray(s, Vec::Zero(2), Vec{{1, 0}}, 0.05, 1.0),
               NonIdealStructureError);
}

TEST(Continuity, ConjugateCovectorsCarryOneSingularityPerRay) {
  const Structure s = make_heisenberg();
  ContinuityOptions opts;
  opts.n_rays = 12;
  for (const double a : {kTwoPi, alpha_star()}) {
    const auto rep = continuity_check(s, Vec::Zero(3), Vec{{1, 0, a}}, opts);
    EXPECT_EQ(rep.expected, 1);
    EXPECT_EQ(rep.failures(), 0);
    EXPECT_TRUE(rep.pass);
    for (const auto& ray : rep.rays) {
      EXPECT_EQ(ray.multiplicity, 1);
      EXPECT_EQ(ray.index, -1);
      EXPECT_TRUE(ray.certified);
      EXPECT_LE(ray.multiplicity, 3);
    }
  }
}

TEST(Continuity, NonConjugateCovectorHasNone) {
  ContinuityOptions opts;
  opts.n_rays = 8;
  const auto rep = continuity_check(make_heisenberg(), Vec::Zero(3), Vec{{1, 0, 4.0}}, opts);
  EXPECT_EQ(rep.expected, 0);
  EXPECT_TRUE(rep.pass);
  for (const auto& ray : rep.rays) EXPECT_EQ(ray.multiplicity, 0);
}

TEST(CrossingsJson, Fields) {
  const auto j = crossings_to_json({CrossingReport{0.5, 1, -1, 0.49, 0.51}});
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["t"], 0.5);
  EXPECT_EQ(j[0]["multiplicity"], 1);
  EXPECT_EQ(j[0]["signature"], -1);
  EXPECT_EQ(j[0]["bracket"][1], 0.51);
}
