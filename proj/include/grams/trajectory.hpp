#pragma once

#include <string>

namespace grams {

// One row per optimizer step, logged before the step applies: loss, gradient
// norm, and distance at the pre-step weights, plus the learning rate the step
// then used. A T-step run yields records 1..T, so record 1 describes the
// starting point.
struct TrajectoryRecord {
  long step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double dist_to_opt = 0.0;  // NaN when the objective has no known optimum
  double effective_lr = 0.0;
};

struct RunSummary {
  std::string optimizer;
  std::string objective;
  double final_loss = 0.0;
  double final_dist = 0.0;  // NaN when unknown
  double min_loss = 0.0;    // over every visited weight vector, final included
  long argmin_step = 0;     // completed steps at the minimum
  bool aborted = false;
};

}  // namespace grams
