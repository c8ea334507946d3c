#pragma once

#include "cylbill/euclid_paths.hpp"

namespace cylbill::detail {

struct StepResult {
  TraceStatus status = TraceStatus::ok;
  /// Flight time to the smaller root.
  double s = 0.0;
  double larger_root = 0.0;
  Vec point;
  Vec normal;
  Vec velocity;
};

/// Flight from p with velocity v to the cylinder of radius r with
/// orthonormal base basis lb and axis through a (ambient).
StepResult step_to_cylinder(const Mat& lb, double r, const Vec& p, const Vec& v, const Vec& a,
                            const PathOptions& opt);

}  // namespace cylbill::detail
