#pragma once

// Adaptive Dormand-Prince 5(4) integration (Boost.Odeint controlled stepper)
// for smooth non-stiff systems y' = f(t, y).

#include "srgeo/linalg.hpp"

#include <functional>

namespace srgeo {

class IntegrationError : public Error {
 public:
  using Error::Error;
};

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-13;
  double initial_step = 0.0;  // 0: automatic
  double max_step = 0.0;      // 0: unbounded
  double min_step = 1e-14;    // relative to the span; below this the step underflows
  long max_steps = 2'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

using OdeRhs = std::function<void(double t, const Vec& y, Vec& dydt)>;
/// Called at t0 and after every accepted step.
using OdeObserver = std::function<void(double t, const Vec& y)>;

/// Integrates from t0 to t1 (t1 may be smaller than t0) and returns y(t1).
/// Throws IntegrationError on step-size underflow or a non-finite state.
Vec integrate_adaptive(const OdeRhs& rhs, const Vec& y0, double t0, double t1,
                       const OdeOptions& opts, const OdeObserver& observer = {},
                       OdeStats* stats = nullptr);

}  // namespace srgeo
