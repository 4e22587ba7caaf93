#include "srgeo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace srgeo {

Mat omega_px(int n) {
  Mat om = Mat::Zero(2 * n, 2 * n);
  om.topRightCorner(n, n).setIdentity();
  om.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return om;
}

Mat omega_qp(int n) { return -omega_px(n); }

Mat qp_to_px(int n) {
  Mat perm = Mat::Zero(2 * n, 2 * n);
  perm.topRightCorner(n, n).setIdentity();
  perm.bottomLeftCorner(n, n).setIdentity();
  return perm;
}

double symplectic_pairing(const Mat& omega, const Vec& u, const Vec& v) {
  return u.dot(omega * v);
}

RankDecision decide_rank(const Vec& singular_values, const RankPolicy& policy) {
  RankDecision out;
  out.singular_values = singular_values;
  if (singular_values.size() == 0) return out;
  const double smax = singular_values.maxCoeff();
  if (smax <= 0.0) return out;
  const double thr = policy.relative_threshold * smax;
  int rank = 0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
    if (singular_values[i] > thr) ++rank;
  }
  out.rank = rank;
  if (rank < singular_values.size()) {
    double accepted_min = smax;
    double rejected_max = 0.0;
    for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
      if (singular_values[i] > thr) {
        accepted_min = std::min(accepted_min, singular_values[i]);
      } else {
        rejected_max = std::max(rejected_max, singular_values[i]);
      }
    }
    out.ambiguous = accepted_min < policy.gap_factor * rejected_max;
  }
  return out;
}

RankDecision decide_rank(const Mat& m, const RankPolicy& policy) {
  if (m.size() == 0) return {};
  Eigen::JacobiSVD<Mat> svd(m);
  return decide_rank(Vec(svd.singularValues()), policy);
}

namespace {

[[noreturn]] void throw_ambiguous(const std::string& context, const Vec& sv) {
  std::ostringstream os;
  os.precision(3);
  os << context << ": ambiguous numerical rank, singular values [";
  for (Eigen::Index i = 0; i < sv.size(); ++i) os << (i ? ", " : "") << sv[i];
  os << "]";
  throw AmbiguousRankError(os.str(), sv);
}

}  // namespace

int numerical_rank(const Mat& m, const std::string& context, const RankPolicy& policy) {
  const RankDecision d = decide_rank(m, policy);
  if (d.ambiguous) throw_ambiguous(context, d.singular_values);
  return d.rank;
}

Mat column_span(const Mat& m, const std::string& context, const RankPolicy& policy) {
  if (m.cols() == 0) return Mat(m.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU);
  const RankDecision d = decide_rank(Vec(svd.singularValues()), policy);
  if (d.ambiguous) throw_ambiguous(context, d.singular_values);
  return svd.matrixU().leftCols(d.rank);
}

Mat null_space(const Mat& m, const std::string& context, const RankPolicy& policy) {
  if (m.rows() == 0) return Mat::Identity(m.cols(), m.cols());
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  Vec sv = Vec::Zero(m.cols());
  sv.head(svd.singularValues().size()) = svd.singularValues();
  const RankDecision d = decide_rank(sv, policy);
  if (d.ambiguous) throw_ambiguous(context, d.singular_values);
  return svd.matrixV().rightCols(m.cols() - d.rank);
}

Vec principal_cosines(const Mat& q1, const Mat& q2) {
  if (q1.cols() == 0 || q2.cols() == 0) return Vec(0);
  Eigen::JacobiSVD<Mat> svd(q1.transpose() * q2);
  return svd.singularValues().cwiseMin(1.0);
}

double max_principal_angle(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) throw DimensionError("max_principal_angle: dimension mismatch");
  if (a.cols() == 0) return 0.0;
  const Mat qa = Eigen::HouseholderQR<Mat>(a).householderQ() * Mat::Identity(a.rows(), a.cols());
  const Mat qb = Eigen::HouseholderQR<Mat>(b).householderQ() * Mat::Identity(b.rows(), b.cols());
  const Vec c = principal_cosines(qa, qb);
  // sin of the largest angle is the norm of the component of qb outside span(qa)
  const Mat resid = qb - qa * (qa.transpose() * qb);
  const double s = Eigen::JacobiSVD<Mat>(resid).singularValues()(0);
  return std::atan2(s, c.minCoeff());
}

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

Inertia inertia(const Mat& symmetric, double zero_tol) {
  Inertia out;
  if (symmetric.size() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(symmetric));
  const Vec ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i]) <= zero_tol * scale || scale == 0.0) {
      ++out.zero;
    } else if (ev[i] > 0) {
      ++out.positive;
    } else {
      ++out.negative;
    }
  }
  return out;
}

}  // namespace srgeo
