#pragma once

// Normal extremals: Hamilton's equations q' = dH/dp, p' = -dH/dq integrated
// jointly with the variational equation Phi' = (Omega^{-1} Hess H) Phi, and the
// exponential map with its differential.

#include "srgeo/ode.hpp"
#include "srgeo/structure.hpp"

#include <iosfwd>
#include <memory>
#include <vector>

namespace srgeo {

inline constexpr double kDefaultTol = 1e-10;

struct FlowOptions {
  double max_step = 0.0;  // 0: limited by the span only
};

/// One sample of an extremal: the phase state and the fundamental matrix,
/// both in (q, p) coordinate order.
struct FlowSample {
  double t = 0.0;
  PhaseState state;
  Mat phi;

  /// Phi conjugated to (delta p, delta q) block order.
  Mat phi_px() const;
};

/// A sampled normal extremal lambda(t) = e^{tH}(point, covector) on [0, T]
/// together with Phi(t) = d e^{tH}. Immutable once built.
class ExtremalTrajectory {
 public:
  ExtremalTrajectory(std::shared_ptr<const Structure> s, PhaseState initial, double tol,
                     std::vector<double> times, std::vector<Vec> states, std::vector<Mat> phis);

  const Structure& structure() const { return *structure_; }
  std::shared_ptr<const Structure> structure_ptr() const { return structure_; }
  const PhaseState& initial() const { return initial_; }
  double tolerance() const { return tol_; }
  int dim() const { return structure_->dim(); }

  std::size_t size() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  double t_end() const { return times_.back(); }

  FlowSample sample(std::size_t i) const;
  /// State and fundamental matrix at an arbitrary t in [0, T], obtained by
  /// re-integrating from the closest grid point at or before t.
  FlowSample at(double t) const;

  /// max_i ||Phi_i^T Omega Phi_i - Omega||_max
  double max_symplectic_defect() const;

 private:
  std::shared_ptr<const Structure> structure_;
  PhaseState initial_;
  double tol_;
  std::vector<double> times_;
  std::vector<Vec> states_;
  std::vector<Mat> phis_;
};

/// A ray t -> t * covector in the fiber over `base`, for t in [a, b].
struct Ray {
  Vec base;
  Vec direction;
  double a = 0.0;
  double b = 1.0;

  Ray(Vec base_, Vec direction_, double a_, double b_);
  Vec at(double t) const { return t * direction; }
};

/// Integrates on [0, t_end] with relative tolerance tol and absolute tolerance tol/100.
ExtremalTrajectory integrate_extremal(const Structure& s, const Vec& point, const Vec& covector,
                                      double t_end, double tol = kDefaultTol,
                                      const FlowOptions& opts = {});
ExtremalTrajectory integrate_extremal(std::shared_ptr<const Structure> s, const Vec& point,
                                      const Vec& covector, double t_end,
                                      double tol = kDefaultTol, const FlowOptions& opts = {});

/// pi(e^{H}(point, covector)): the q-part at time 1.
Vec exp_map(const Structure& s, const Vec& point, const Vec& covector, double tol = kDefaultTol);

/// d_{covector} exp_point, the n x n block of Phi(1) mapping delta covector to delta q.
Mat d_exp(const Structure& s, const Vec& point, const Vec& covector, double tol = kDefaultTol);

struct SpeedDiagnostics {
  double max_relative_drift = 0.0;  // of H along the samples (absolute when H(0) = 0)
  double max_speed_defect = 0.0;    // max |sum_k h_k^2 - 2H|
  double hamiltonian = 0.0;         // H at t = 0
};
SpeedDiagnostics check_constant_speed(const ExtremalTrajectory& traj);

struct RayVelocityDiagnostics {
  double min_norm = 0.0;  // min over samples t > 0 of ||d_{t covector} exp(covector)||
  double speed = 0.0;     // sqrt(2 H(covector))
  double margin() const { return min_norm - speed; }
};
/// Image of the ray velocity, d_{t lambda0} exp_p(lambda0) = Phi_qp(t) lambda0 / t.
RayVelocityDiagnostics check_ray_velocity(const ExtremalTrajectory& traj);

/// ||Phi^T Omega Phi - Omega||_max for Phi in (q, p) order.
double symplectic_defect(const Mat& phi);

/// CSV with header t,q1..qn,p1..pn,H and, with `with_phi`, the 4n^2 entries of
/// Phi (q, p order) row-major. 12 significant digits.
void write_trajectory_csv(std::ostream& os, const ExtremalTrajectory& traj, bool with_phi);

}  // namespace srgeo
