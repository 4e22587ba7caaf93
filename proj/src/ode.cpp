#include "srgeo/ode.hpp"

#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace srgeo {

namespace odeint = boost::numeric::odeint;

Vec integrate_adaptive(const OdeRhs& rhs, const Vec& y0, double t0, double t1,
                       const OdeOptions& opts, const OdeObserver& observer, OdeStats* stats) {
  OdeStats local;
  OdeStats& st = stats ? *stats : local;
  if (!y0.allFinite()) throw IntegrationError("integrate_adaptive: non-finite initial state");
  if (observer) observer(t0, y0);
  if (t1 == t0) return y0;

  using Stepper =
      odeint::runge_kutta_dopri5<Vec, double, Vec, double, odeint::vector_space_algebra>;
  // error scaled by atol + rtol |y| only, without odeint's default dt |y'| weight
  using Checker = odeint::default_error_checker<double, odeint::vector_space_algebra,
                                                odeint::default_operations>;
  odeint::controlled_runge_kutta<Stepper> stepper(Checker(opts.atol, opts.rtol, 1.0, 0.0));
  const auto system = [&](const Vec& y, Vec& dydt, double t) {
    ++st.evaluations;
    rhs(t, y, dydt);
  };

  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  const double hmin = std::max(opts.min_step * span, 1e-300);
  const double hmax = opts.max_step > 0 ? std::min(opts.max_step, span) : span;
  double h = std::clamp(opts.initial_step > 0 ? opts.initial_step : 1e-6 * span, hmin, hmax);

  Vec y = y0;
  double t = t0;
  while (dir * (t1 - t) > 0.0) {
    if (st.accepted + st.rejected >= opts.max_steps) {
      throw IntegrationError("integrate_adaptive: step budget exhausted");
    }
    const bool last = std::min(h, hmax) >= std::abs(t1 - t);
    double dt = last ? t1 - t : dir * std::min(h, hmax);
    if (stepper.try_step(system, y, t, dt) == odeint::success) {
      if (!y.allFinite()) throw IntegrationError("integrate_adaptive: non-finite state");
      if (last) t = t1;
      ++st.accepted;
      if (observer) observer(t, y);
    } else {
      ++st.rejected;
    }
    h = std::abs(dt);
    if (h < hmin && dir * (t1 - t) > 0.0) {
      std::ostringstream os;
      os << "integrate_adaptive: step size underflow at t=" << t
         << " (stiff or singular system)";
      throw IntegrationError(os.str());
    }
  }
  return y;
}

}  // namespace srgeo
