#pragma once

// Lagrangian subspaces of (R^{2n}, omega) in (delta p, delta q) coordinates,
// Jacobi curves, crossings with a fixed Lagrangian L0, crossing forms and the
// Maslov index, plus the ray continuity check around conjugate covectors.
//
// omega((p, x), (p', x')) = p.x' - x.p'. With this form the Jacobi curve
// t -> Phi(t)^{-1} Ver has negative definite crossing forms, so its index
// counts conjugate times with a minus sign, while the forward transport
// t -> Phi(t) Ver has positive ones.

#include "srgeo/flow.hpp"

#include "json.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace srgeo {

class ConjugateEndpointError : public Error {
 public:
  using Error::Error;
};
class UnresolvedCrossingError : public Error {
 public:
  using Error::Error;
};
class NonIdealStructureError : public Error {
 public:
  using Error::Error;
};
class DegenerateCrossingError : public Error {
 public:
  using Error::Error;
};

/// A 2n x n frame whose columns span a Lagrangian subspace.
class LagrangianFrame {
 public:
  /// Validates rank n and isotropy ||F^T Omega F|| <= 1e-9 ||F||^2.
  explicit LagrangianFrame(Mat f);
  const Mat& matrix() const { return f_; }
  int dim() const { return static_cast<int>(f_.cols()); }
  double isotropy_defect() const;  // ||F^T Omega F||_max / ||F||_2^2

  static LagrangianFrame vertical(int n);    // [I; 0]
  static LagrangianFrame horizontal(int n);  // [0; I]

 private:
  Mat f_;
};

enum class CurveKind {
  Jacobi,     // Phi(t)^{-1} [I; 0]
  Transport,  // Phi(t) [I; 0]
};

LagrangianFrame jacobi_curve(const ExtremalTrajectory& traj, double t);
LagrangianFrame l_curve(const ExtremalTrajectory& traj, double t);

/// A Jacobi curve (or forward transport curve) on a parameter interval [a, b],
/// possibly reversed or reparametrized, together with the parameter grid used
/// to sweep it for crossings.
class JacobiCurveSamples {
 public:
  JacobiCurveSamples(std::shared_ptr<const ExtremalTrajectory> traj, CurveKind kind, double a,
                     double b);

  CurveKind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }
  bool is_reversed() const { return reversed_; }
  const std::vector<double>& grid() const { return grid_; }
  const ExtremalTrajectory& trajectory() const { return *traj_; }
  /// Parameter length, used to scale finite-difference steps.
  double timescale() const { return b_ - a_; }

  /// Trajectory time at curve parameter s.
  double time_at(double s) const;
  /// Raw (not normalized) frame at parameter s; continuous in s.
  Mat raw(double s) const;
  LagrangianFrame frame(double s) const { return LagrangianFrame(raw(s)); }

  /// Same curve traversed backwards: s -> curve(a + b - s).
  JacobiCurveSamples reversed() const;
  /// Same curve with a different sweep grid (must contain a and b).
  JacobiCurveSamples resampled(std::vector<double> grid) const;
  /// s -> curve(sigma(s)) for s in [a2, b2], sigma increasing onto [a, b].
  JacobiCurveSamples reparametrized(std::function<double(double)> sigma, double a2,
                                    double b2) const;

 private:
  std::shared_ptr<const ExtremalTrajectory> traj_;
  CurveKind kind_;
  double a_, b_;
  bool reversed_ = false;
  std::function<double(double)> to_time_;
  std::vector<double> grid_;
};

/// dim(span F  intersect  span G) = 2n - rank [F | G] (columns orthonormalized first).
int intersection_dim(const LagrangianFrame& f, const LagrangianFrame& g,
                     const RankPolicy& policy = {});
int intersection_dim(const Mat& f, const Mat& g, const RankPolicy& policy = {});

/// Symmetric k x k matrix omega(z_i, z_j'(s)) on a basis z_i of curve(s) cap L0,
/// derivative by a 5-point stencil with step 1e-4 * curve.timescale().
Mat crossing_form(const JacobiCurveSamples& curve, double s, const LagrangianFrame& l0,
                  const RankPolicy& policy = {});

struct CrossingReport {
  double t = 0.0;
  int multiplicity = 0;
  int signature = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

struct MaslovOptions {
  double sweep_step = 1e-3;   // maximal sweep spacing
  double refine_tol = 1e-10;  // relative bisection tolerance
  double cluster_gap = 1e-8;  // closer crossings are unresolved
  RankPolicy policy;
};

/// All crossings of curve with L0 in the open interval (r, s) of parameters.
/// Throws ConjugateEndpointError, UnresolvedCrossingError, NonIdealStructureError
/// or DegenerateCrossingError.
std::vector<CrossingReport> find_crossings(const JacobiCurveSamples& curve,
                                           const LagrangianFrame& l0, double r, double s,
                                           const MaslovOptions& opts = {});

/// Sum of crossing-form signatures over (r, s).
int maslov_index(const JacobiCurveSamples& curve, const LagrangianFrame& l0, double r, double s,
                 const MaslovOptions& opts = {});

/// Conjugate times t in (r, s_end) along t -> t * covector, from crossings of
/// the Jacobi curve with its initial value. Verifies -index = sum of multiplicities.
std::vector<CrossingReport> count_conjugate_on_ray(const Structure& s, const Vec& point,
                                                   const Vec& covector, double r, double s_end,
                                                   double tol = kDefaultTol,
                                                   const MaslovOptions& opts = {});

struct ContinuityOptions {
  double delta = 1e-2;  // window [1 - delta, 1 + delta] along each ray
  int n_rays = 50;
  double ball_fraction = 0.5;  // perturbation radius = ball_fraction * delta * |covector|
  unsigned long long seed = 42;
  double tol = kDefaultTol;
};

struct RayOutcome {
  Vec covector;
  int multiplicity = 0;  // total in the window
  int index = 0;         // Maslov index of the Jacobi curve over the window
  bool certified = true;  // both window endpoints crossing-free
  std::string error;
};

struct ContinuityReport {
  int expected = 0;  // dim ker d exp at the central covector
  std::vector<RayOutcome> rays;
  bool pass = false;
  int failures() const;
};

/// Samples rays through a small ball around `covector` and checks that each
/// carries total conjugate multiplicity dim ker d exp(covector) in the window.
ContinuityReport continuity_check(const Structure& s, const Vec& point, const Vec& covector,
                                  const ContinuityOptions& opts = {});

nlohmann::json crossings_to_json(const std::vector<CrossingReport>& reports);

}  // namespace srgeo
