#pragma once

#include <vector>

#include "dualmdp/env.hpp"
#include "dualmdp/trajectory.hpp"

namespace dualmdp {

// Hand-scripted controllers that solve every task family.  Used as the
// independent baseline for dynamics tests, for generating expert buffers,
// and as the ground-truth yardstick in reward-quality evaluation.
struct OracleConfig {
  int grip_settle_steps = 12;   // hold steps after attaching
  double arc_step = 0.02;       // arc-length per slide step on hinge tasks
  double rail_step = 0.04;      // rail displacement per slide step
};

// Closed-loop oracle action for the current state.
Action oracle_action(const TaskEnv& env, const EnvState& state,
                     const OracleConfig& cfg = {});

// Roll the oracle from reset(env, seed) to done and record the trajectory.
Trajectory run_oracle(const TaskEnv& env, uint64_t seed,
                      const OracleConfig& cfg = {});

}  // namespace dualmdp
