#pragma once

// Adaptive integration loop over Boost.Odeint's controlled Runge-Kutta-
// Fehlberg 7(8) stepper. Internal to the core library.

#include <cmath>
#include <sstream>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "ionloc/errors.hpp"
#include "ionloc/integrator.hpp"

namespace ionloc::detail {

using OdeState = std::vector<double>;

/// Integrates dx/dt = sys(x, t) from t0 to t1 (either direction), landing
/// exactly on t1. `observe(x, t)` runs after every accepted step.
template <class System, class Observer>
IntegratorStats integrate_adaptive(System&& sys, OdeState& x, double t0, double t1,
                                   double tolerance, double first_step, Observer&& observe) {
  namespace odeint = boost::numeric::odeint;
  IntegratorStats stats;
  if (t1 == t0) return stats;
  auto stepper = odeint::make_controlled(tolerance, tolerance,
                                         odeint::runge_kutta_fehlberg78<OdeState>());
  const double direction = t1 > t0 ? 1.0 : -1.0;
  double t = t0;
  double dt = direction * std::min(std::abs(first_step), std::abs(t1 - t0));
  stats.min_step = std::abs(dt);
  auto counted = [&](const OdeState& in, OdeState& out, double tt) {
    ++stats.rhs_evaluations;
    sys(in, out, tt);
  };
  while (direction * (t1 - t) > 0.0) {
    const double remaining = t1 - t;
    bool last = false;
    if (std::abs(dt) >= std::abs(remaining)) {
      dt = remaining;
      last = true;
    }
    const double floor_step = 1e-13 * std::max(1.0, std::abs(t));
    if (std::abs(dt) < floor_step) {
      std::ostringstream msg;
      msg << "step size underflow at t=" << t << " (dt=" << dt << ")";
      throw NumericalError(msg.str());
    }
    const double before = t;
    if (stepper.try_step(counted, x, t, dt) == odeint::success) {
      ++stats.accepted_steps;
      stats.min_step = std::min(stats.min_step, std::abs(t - before));
      stats.max_step = std::max(stats.max_step, std::abs(t - before));
      if (last) t = t1;
      observe(x, t);
      if (last) break;
    } else {
      ++stats.rejected_steps;
    }
  }
  return stats;
}

template <class System>
IntegratorStats integrate_adaptive(System&& sys, OdeState& x, double t0, double t1,
                                   double tolerance, double first_step) {
  return integrate_adaptive(std::forward<System>(sys), x, t0, t1, tolerance, first_step,
                            [](const OdeState&, double) {});
}

}  // namespace ionloc::detail
