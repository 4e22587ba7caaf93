#pragma once

// Jacobi fields along a normal extremal in Jacobi coordinates (p, x): x is the
// variation of q, p the covariant-like derivative read in a symplectic frame
// whose first half spans the vertical subspace. The default frame is the global
// Darboux frame (d/dp, d/dq).

#include "srgeo/flow.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace srgeo {

/// Blocks of the linearized flow in (delta p, delta q) order:
///   p' = -A^T p + R x,   x' = B p + A x.
struct FrameMatrices {
  double t = 0.0;
  Mat A;
  Mat B;  // symmetric
  Mat R;  // symmetric
};

FrameMatrices frame_matrices(const Structure& s, const PhaseState& state, double t = 0.0);
FrameMatrices frame_matrices(const ExtremalTrajectory& traj, double t);

/// A constant symplectic change of frame that keeps the first half vertical:
/// in (p, x) order S = [[G, G Sym], [0, G^{-T}]]; Darboux coordinates y = S y'.
class FrameChange {
 public:
  FrameChange(Mat g, Mat sym);
  const Mat& matrix() const { return s_; }
  const Mat& inverse() const { return s_inv_; }
  const Mat& g() const { return g_; }
  int dim() const { return static_cast<int>(g_.rows()); }
  /// Random well-conditioned change for testing frame independence.
  static FrameChange random(int n, unsigned long long seed);

 private:
  Mat g_;
  Mat s_;
  Mat s_inv_;
};

struct JacobiCoordinates {
  std::string frame;  // "darboux" or "constant-change"
  std::vector<double> times;
  std::vector<Vec> p;
  std::vector<Vec> x;
};

/// (p(t), x(t)) = Phi_px(t) (p0, x0) at every grid time of `traj`, expressed in
/// the given frame (default: Darboux).
JacobiCoordinates propagate_jacobi(const ExtremalTrajectory& traj, const Vec& p0, const Vec& x0,
                                   const std::optional<FrameChange>& frame = std::nullopt);

/// <p_J(t), x_K(t)> - <p_K(t), x_J(t)> at a grid time t.
double pairing(const JacobiCoordinates& j, const JacobiCoordinates& k, double t);

/// max_i |pairing(t_i) - pairing(t_0)|
double pairing_drift(const JacobiCoordinates& j, const JacobiCoordinates& k);

struct DecompositionReport {
  double t = 0.0;
  std::string frame;
  Mat a_basis;  // n x k1, orthonormal, values J(t) of fields with vertical initial data
  Mat b_basis;  // n x k2, orthonormal, values p(t) of such fields with x(t) = 0
  Mat cross_gram;  // a_basis^T b_basis
  int dim_a() const { return static_cast<int>(a_basis.cols()); }
  int dim_b() const { return static_cast<int>(b_basis.cols()); }
  double max_cross() const;
};

/// Both bases are reported in Darboux coordinates, whichever frame is used for
/// the computation. Throws AmbiguousRankError when the rank is not clear.
DecompositionReport decomposition(const ExtremalTrajectory& traj, double t,
                                  const std::optional<FrameChange>& frame = std::nullopt,
                                  const RankPolicy& policy = {});

struct RegularityReport {
  int kernel_dim = 0;
  int theta_rank = 0;
  bool pass = false;
  Vec singular_values;  // of d exp at t = 1
};

/// Checks that the derivatives p(1) of the kernel Jacobi fields are independent
/// modulo the image of d exp. Requires t = 1 within the span.
RegularityReport regularity_check(const ExtremalTrajectory& traj, const RankPolicy& policy = {});

/// CSV `t,p1..pn,x1..xn`, 12 significant digits.
void write_jacobi_csv(std::ostream& os, const JacobiCoordinates& jc);

}  // namespace srgeo
