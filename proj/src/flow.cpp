#include "srgeo/flow.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace srgeo {

namespace {

OdeOptions ode_options(double tol, const FlowOptions& fo) {
  OdeOptions o;
  o.rtol = tol;
  o.atol = std::max(0.01 * tol, 1e-13);
  o.max_step = fo.max_step;
  return o;
}

/// Augmented right-hand side: y = (z, vec(Phi)), z = (q, p).
OdeRhs augmented_rhs(const Structure& s) {
  const int n = s.dim();
  return [&s, n](double, const Vec& y, Vec& dy) {
    const int m = 2 * n;
    dy.resize(y.size());
    if (!y.allFinite()) {
      // lets the integrator reject the trial step instead of failing here
      dy.setConstant(std::numeric_limits<double>::quiet_NaN());
      return;
    }
    const PhaseState st(y.head(n), y.segment(n, n));
    const HamiltonianJet jet = hamiltonian_jet(s, st);
    dy.head(n) = jet.gradient.tail(n);
    dy.segment(n, n) = -jet.gradient.head(n);
    Mat jh(m, m);
    jh.topRows(n) = jet.hessian.bottomRows(n);
    jh.bottomRows(n) = -jet.hessian.topRows(n);
    Eigen::Map<const Mat> phi(y.data() + m, m, m);
    Eigen::Map<Mat> dphi(dy.data() + m, m, m);
    dphi.noalias() = jh * phi;
  };
}

Vec pack(const Vec& z, const Mat& phi) {
  const auto m = z.size();
  Vec y(m + m * m);
  y.head(m) = z;
  y.tail(m * m) = Eigen::Map<const Vec>(phi.data(), m * m);
  return y;
}

}  // namespace

Mat FlowSample::phi_px() const {
  const Mat perm = qp_to_px(state.dim());
  return perm * phi * perm.transpose();
}

ExtremalTrajectory::ExtremalTrajectory(std::shared_ptr<const Structure> s, PhaseState initial,
                                       double tol, std::vector<double> times,
                                       std::vector<Vec> states, std::vector<Mat> phis)
    : structure_(std::move(s)),
      initial_(std::move(initial)),
      tol_(tol),
      times_(std::move(times)),
      states_(std::move(states)),
      phis_(std::move(phis)) {
  if (times_.empty() || times_.size() != states_.size() || times_.size() != phis_.size()) {
    throw InvalidArgument("ExtremalTrajectory: inconsistent sample arrays");
  }
}

FlowSample ExtremalTrajectory::sample(std::size_t i) const {
  return FlowSample{times_.at(i), PhaseState::unpack(states_.at(i)), phis_.at(i)};
}

FlowSample ExtremalTrajectory::at(double t) const {
  const double t0 = times_.front(), t1 = times_.back();
  const double slack = 1e-12 * std::max(1.0, std::abs(t1));
  if (t < t0 - slack || t > t1 + slack) {
    throw RangeError("ExtremalTrajectory::at: t outside the integrated span");
  }
  t = std::clamp(t, t0, t1);
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t i = static_cast<std::size_t>(std::distance(times_.begin(), it)) - 1;
  if (times_[i] == t) return sample(i);
  const int n = dim();
  const Vec y = integrate_adaptive(augmented_rhs(*structure_), pack(states_[i], phis_[i]),
                                   times_[i], t, ode_options(tol_, {}));
  const int m = 2 * n;
  return FlowSample{t, PhaseState::unpack(y.head(m)),
                    Eigen::Map<const Mat>(y.data() + m, m, m)};
}

double ExtremalTrajectory::max_symplectic_defect() const {
  double d = 0.0;
  for (const auto& phi : phis_) d = std::max(d, symplectic_defect(phi));
  return d;
}

Ray::Ray(Vec base_, Vec direction_, double a_, double b_)
    : base(std::move(base_)), direction(std::move(direction_)), a(a_), b(b_) {
  if (base.size() != direction.size()) throw DimensionError("Ray: dimension mismatch");
  if (!(a >= 0.0) || !(b > a)) throw InvalidArgument("Ray: need 0 <= a < b");
}

ExtremalTrajectory integrate_extremal(const Structure& s, const Vec& point, const Vec& covector,
                                      double t_end, double tol, const FlowOptions& opts) {
  return integrate_extremal(std::make_shared<const Structure>(s), point, covector, t_end, tol,
                            opts);
}

ExtremalTrajectory integrate_extremal(std::shared_ptr<const Structure> s, const Vec& point,
                                      const Vec& covector, double t_end, double tol,
                                      const FlowOptions& opts) {
  if (!(t_end > 0.0)) throw InvalidArgument("integrate_extremal: T must be positive");
  if (!(tol > 0.0)) throw InvalidArgument("integrate_extremal: tol must be positive");
  const int n = s->dim();
  if (point.size() != n || covector.size() != n) {
    throw DimensionError("integrate_extremal: point/covector dimension mismatch");
  }
  PhaseState init(point, covector);
  const int m = 2 * n;

  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Mat> phis;
  auto observer = [&](double t, const Vec& y) {
    times.push_back(t);
    states.push_back(y.head(m));
    phis.push_back(Eigen::Map<const Mat>(y.data() + m, m, m));
  };
  integrate_adaptive(augmented_rhs(*s), pack(init.packed(), Mat::Identity(m, m)), 0.0, t_end,
                     ode_options(tol, opts), observer);
  return ExtremalTrajectory(std::move(s), std::move(init), tol, std::move(times),
                            std::move(states), std::move(phis));
}

Vec exp_map(const Structure& s, const Vec& point, const Vec& covector, double tol) {
  const auto traj = integrate_extremal(s, point, covector, 1.0, tol);
  return traj.sample(traj.size() - 1).state.q;
}

Mat d_exp(const Structure& s, const Vec& point, const Vec& covector, double tol) {
  const auto traj = integrate_extremal(s, point, covector, 1.0, tol);
  const int n = s.dim();
  return traj.sample(traj.size() - 1).phi.topRightCorner(n, n);
}

SpeedDiagnostics check_constant_speed(const ExtremalTrajectory& traj) {
  SpeedDiagnostics d;
  const Structure& s = traj.structure();
  d.hamiltonian = hamiltonian(s, traj.initial());
  const double scale = d.hamiltonian > 0.0 ? d.hamiltonian : 1.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const FlowSample smp = traj.sample(i);
    const Vec h = momentum_functions(s, smp.state);
    const double hi = 0.5 * h.squaredNorm();
    d.max_relative_drift = std::max(d.max_relative_drift, std::abs(hi - d.hamiltonian) / scale);
    const double speed2 = minimal_control(s, smp.state).squaredNorm();
    d.max_speed_defect = std::max(d.max_speed_defect, std::abs(speed2 - 2.0 * hi));
  }
  return d;
}

RayVelocityDiagnostics check_ray_velocity(const ExtremalTrajectory& traj) {
  RayVelocityDiagnostics d;
  const int n = traj.dim();
  const Vec& cov = traj.initial().p;
  d.speed = std::sqrt(2.0 * hamiltonian(traj.structure(), traj.initial()));
  d.min_norm = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const FlowSample smp = traj.sample(i);
    if (smp.t <= 0.0) continue;
    const Vec v = smp.phi.topRightCorner(n, n) * cov / smp.t;
    d.min_norm = std::min(d.min_norm, v.norm());
  }
  return d;
}

double symplectic_defect(const Mat& phi) {
  const int n = static_cast<int>(phi.rows() / 2);
  const Mat om = omega_qp(n);
  return (phi.transpose() * om * phi - om).cwiseAbs().maxCoeff();
}

void write_trajectory_csv(std::ostream& os, const ExtremalTrajectory& traj, bool with_phi) {
  const int n = traj.dim();
  const int m = 2 * n;
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",q" << i;
  for (int i = 1; i <= n; ++i) os << ",p" << i;
  os << ",H";
  if (with_phi) {
    for (int r = 1; r <= m; ++r)
      for (int c = 1; c <= m; ++c) os << ",phi_" << r << "_" << c;
  }
  os << "\n";
  const auto old_precision = os.precision(12);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const FlowSample smp = traj.sample(k);
    os << smp.t;
    for (int i = 0; i < n; ++i) os << "," << smp.state.q[i];
    for (int i = 0; i < n; ++i) os << "," << smp.state.p[i];
    os << "," << hamiltonian(traj.structure(), smp.state);
    if (with_phi) {
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) os << "," << smp.phi(r, c);
    }
    os << "\n";
  }
  os.precision(old_precision);
}

}  // namespace srgeo
