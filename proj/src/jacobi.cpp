#include "srgeo/jacobi.hpp"

#include <cmath>
#include <ostream>
#include <random>

namespace srgeo {

namespace {

Mat orthonormalized(const Mat& m) {
  if (m.cols() == 0) return Mat(m.rows(), 0);
  Eigen::HouseholderQR<Mat> qr(m);
  return qr.householderQ() * Mat::Identity(m.rows(), m.cols());
}

std::size_t grid_index(const std::vector<double>& times, double t) {
  const double slack = 1e-12 * std::max(1.0, std::abs(times.back()));
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= slack) return i;
  }
  throw RangeError("pairing: t is not a grid time");
}

}  // namespace

FrameMatrices frame_matrices(const Structure& s, const PhaseState& state, double t) {
  const int n = s.dim();
  const HamiltonianJet jet = hamiltonian_jet(s, state);
  FrameMatrices f;
  f.t = t;
  f.A = jet.hessian.bottomLeftCorner(n, n);
  f.B = symmetrized(jet.hessian.bottomRightCorner(n, n));
  f.R = symmetrized(-jet.hessian.topLeftCorner(n, n));
  return f;
}

FrameMatrices frame_matrices(const ExtremalTrajectory& traj, double t) {
  return frame_matrices(traj.structure(), traj.at(t).state, t);
}

FrameChange::FrameChange(Mat g, Mat sym) : g_(std::move(g)) {
  const auto n = g_.rows();
  if (g_.cols() != n || sym.rows() != n || sym.cols() != n) {
    throw DimensionError("FrameChange: G and Sym must be square of equal size");
  }
  Eigen::FullPivLU<Mat> lu(g_);
  if (!lu.isInvertible()) throw InvalidArgument("FrameChange: G is singular");
  const Mat sy = symmetrized(sym);
  const Mat g_inv = lu.inverse();
  s_ = Mat::Zero(2 * n, 2 * n);
  s_.topLeftCorner(n, n) = g_;
  s_.topRightCorner(n, n) = g_ * sy;
  s_.bottomRightCorner(n, n) = g_inv.transpose();
  // inverse of [[G, G Sym], [0, G^-T]] is [[G^-1, -Sym G^T], [0, G^T]]
  s_inv_ = Mat::Zero(2 * n, 2 * n);
  s_inv_.topLeftCorner(n, n) = g_inv;
  s_inv_.topRightCorner(n, n) = -sy * g_.transpose();
  s_inv_.bottomRightCorner(n, n) = g_.transpose();
}

FrameChange FrameChange::random(int n, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat g = Mat::Identity(n, n);
  Mat sym(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      g(i, j) += 0.3 * u(rng);
      sym(i, j) = 0.5 * u(rng);
    }
  return FrameChange(g, sym);
}

JacobiCoordinates propagate_jacobi(const ExtremalTrajectory& traj, const Vec& p0, const Vec& x0,
                                   const std::optional<FrameChange>& frame) {
  const int n = traj.dim();
  if (p0.size() != n || x0.size() != n) throw DimensionError("propagate_jacobi: bad initial data");
  if (frame && frame->dim() != n) throw DimensionError("propagate_jacobi: frame dimension");
  Vec y0(2 * n);
  y0 << p0, x0;
  JacobiCoordinates jc;
  jc.frame = frame ? "constant-change" : "darboux";
  jc.times = traj.times();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    Mat m = traj.sample(i).phi_px();
    if (frame) m = frame->inverse() * m * frame->matrix();
    const Vec y = m * y0;
    jc.p.push_back(y.head(n));
    jc.x.push_back(y.tail(n));
  }
  return jc;
}

double pairing(const JacobiCoordinates& j, const JacobiCoordinates& k, double t) {
  if (j.times != k.times) throw InvalidArgument("pairing: Jacobi fields on different grids");
  const std::size_t i = grid_index(j.times, t);
  return j.p[i].dot(k.x[i]) - k.p[i].dot(j.x[i]);
}

double pairing_drift(const JacobiCoordinates& j, const JacobiCoordinates& k) {
  const double p0 = pairing(j, k, j.times.front());
  double d = 0.0;
  for (double t : j.times) d = std::max(d, std::abs(pairing(j, k, t) - p0));
  return d;
}

double DecompositionReport::max_cross() const {
  return cross_gram.size() == 0 ? 0.0 : cross_gram.cwiseAbs().maxCoeff();
}

DecompositionReport decomposition(const ExtremalTrajectory& traj, double t,
                                  const std::optional<FrameChange>& frame,
                                  const RankPolicy& policy) {
  const int n = traj.dim();
  Mat m = traj.at(t).phi_px();
  if (frame) m = frame->inverse() * m * frame->matrix();
  const Mat xp = m.bottomLeftCorner(n, n);  // vertical initial data -> x(t)
  const Mat pp = m.topLeftCorner(n, n);     // vertical initial data -> p(t)

  const Mat a_new = column_span(xp, "decomposition", policy);
  const Mat kernel = null_space(xp, "decomposition", policy);
  const Mat b_new = pp * kernel;

  DecompositionReport r;
  r.t = t;
  r.frame = frame ? "constant-change" : "darboux";
  if (frame) {
    // x_darboux = G^{-T} x',  p_darboux = G p' (+ G Sym x' = 0 on the kernel)
    r.a_basis = orthonormalized(frame->matrix().bottomRightCorner(n, n) * a_new);
    r.b_basis = orthonormalized(frame->g() * b_new);
  } else {
    r.a_basis = a_new;
    r.b_basis = orthonormalized(b_new);
  }
  r.cross_gram = r.a_basis.transpose() * r.b_basis;
  return r;
}

RegularityReport regularity_check(const ExtremalTrajectory& traj, const RankPolicy& policy) {
  const int n = traj.dim();
  if (traj.t_end() < 1.0 - 1e-12) throw RangeError("regularity_check: trajectory ends before t=1");
  const FlowSample smp = traj.at(1.0);
  const Mat dexp = smp.phi.topRightCorner(n, n);
  const Mat pp = smp.phi.bottomRightCorner(n, n);

  const RankDecision rd = decide_rank(dexp, policy);
  if (rd.ambiguous) {
    throw AmbiguousRankError("regularity_check: rank of d exp is ambiguous", rd.singular_values);
  }
  RegularityReport r;
  r.singular_values = rd.singular_values;
  r.kernel_dim = n - rd.rank;
  if (r.kernel_dim == 0) {
    r.pass = true;
    return r;
  }
  const Mat image = column_span(dexp, "regularity_check", policy);
  const Mat kernel = null_space(dexp, "regularity_check", policy);
  Mat joined(n, image.cols() + kernel.cols());
  joined << image, pp * kernel;
  r.theta_rank = numerical_rank(joined, "regularity_check", policy) - rd.rank;
  r.pass = r.theta_rank == r.kernel_dim;
  return r;
}

void write_jacobi_csv(std::ostream& os, const JacobiCoordinates& jc) {
  const auto n = jc.p.empty() ? 0 : jc.p.front().size();
  os << "t";
  for (Eigen::Index i = 1; i <= n; ++i) os << ",p" << i;
  for (Eigen::Index i = 1; i <= n; ++i) os << ",x" << i;
  os << "\n";
  const auto old_precision = os.precision(12);
  for (std::size_t k = 0; k < jc.times.size(); ++k) {
    os << jc.times[k];
    for (Eigen::Index i = 0; i < n; ++i) os << "," << jc.p[k][i];
    for (Eigen::Index i = 0; i < n; ++i) os << "," << jc.x[k][i];
    os << "\n";
  }
  os.precision(old_precision);
}

}  // namespace srgeo
