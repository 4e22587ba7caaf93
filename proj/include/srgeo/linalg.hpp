#pragma once

// Small dense linear algebra shared by all modules: the canonical symplectic
// form, SVD-based rank decisions, orthonormal bases and principal angles.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace srgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical rank could not be decided: the singular values show no clear gap.
class AmbiguousRankError : public Error {
 public:
  AmbiguousRankError(const std::string& what, Vec singular_values)
      : Error(what), singular_values_(std::move(singular_values)) {}
  const Vec& singular_values() const { return singular_values_; }

 private:
  Vec singular_values_;
};

/// Canonical symplectic matrix on R^{2n} for coordinates ordered (q, p), or
/// equivalently (delta p, delta x) for Jacobi coordinates:
///   omega((a1, b1), (a2, b2)) = a1.b2 - b1.a2  with the layout [[0, I], [-I, 0]]
/// in (p, x) order, and [[0, -I], [I, 0]] in (q, p) order.
Mat omega_qp(int n);
Mat omega_px(int n);

/// Permutation taking (q, p) coordinates to (p, q) coordinates.
Mat qp_to_px(int n);

/// Symplectic form value omega(u, v) = u^T Omega v.
double symplectic_pairing(const Mat& omega, const Vec& u, const Vec& v);

struct RankPolicy {
  double relative_threshold = 1e-8;
  double gap_factor = 1e3;
};

struct RankDecision {
  int rank = 0;
  bool ambiguous = false;
  Vec singular_values;  // descending
};

/// Rank by relative threshold on the singular values. The decision is marked
/// ambiguous when the smallest accepted value is not at least gap_factor times
/// the largest rejected one.
RankDecision decide_rank(const Vec& singular_values, const RankPolicy& policy = {});
RankDecision decide_rank(const Mat& m, const RankPolicy& policy = {});

/// Same as decide_rank, but throws AmbiguousRankError instead of flagging.
int numerical_rank(const Mat& m, const std::string& context, const RankPolicy& policy = {});

/// Orthonormal basis of the column span (rank decided by `policy`).
Mat column_span(const Mat& m, const std::string& context, const RankPolicy& policy = {});

/// Orthonormal basis of the right null space (rank decided by `policy`).
Mat null_space(const Mat& m, const std::string& context, const RankPolicy& policy = {});

/// Cosines of the principal angles between the spans of two orthonormal bases.
Vec principal_cosines(const Mat& q1, const Mat& q2);

/// Largest principal angle (radians) between two subspaces given by arbitrary
/// full-rank bases of equal dimension.
double max_principal_angle(const Mat& a, const Mat& b);

/// Symmetric part (M + M^T) / 2.
Mat symmetrized(const Mat& m);

/// Signature counts of a symmetric matrix; eigenvalues with magnitude at most
/// zero_tol * max|eigenvalue| are counted as zero.
struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;
  int signature() const { return positive - negative; }
};
Inertia inertia(const Mat& symmetric, double zero_tol = 1e-8);

}  // namespace srgeo
