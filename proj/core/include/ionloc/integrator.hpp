#pragma once

#include <algorithm>

namespace ionloc {

/// Step bookkeeping reported by the adaptive integrators.
struct IntegratorStats {
  long accepted_steps = 0;
  long rejected_steps = 0;
  long rhs_evaluations = 0;
  double min_step = 0.0;
  double max_step = 0.0;

  IntegratorStats& operator+=(const IntegratorStats& o) {
    if (o.accepted_steps > 0) {
      min_step = accepted_steps == 0 ? o.min_step : std::min(min_step, o.min_step);
      max_step = std::max(max_step, o.max_step);
    }
    accepted_steps += o.accepted_steps;
    rejected_steps += o.rejected_steps;
    rhs_evaluations += o.rhs_evaluations;
    return *this;
  }
};

}  // namespace ionloc
