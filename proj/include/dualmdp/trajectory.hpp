#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dualmdp/env.hpp"

namespace dualmdp {

struct Step {
  Obs state;
  Action action;
  double reward = 0.0;
};

// One rollout: (state, action, reward) steps plus the terminal observation.
// reach_index is the first step whose state has the object key point reached
// (attached / in contact); steps[0..e) form the reaching segment and
// steps[e..] the controlling segment.
struct Trajectory {
  std::vector<Step> steps;
  Obs final_state{};
  int reach_index = 0;
  bool success = false;
  std::string task_id;

  size_t size() const { return steps.size(); }
};

// State-only reward used to fill generated trajectories; nullptr means the
// reward model does not exist yet and rewards are set to 0.
using RewardFn = std::function<double(const Obs&)>;

// Split a successful trajectory at its reach index.
std::pair<Trajectory, Trajectory> split_trajectory(const Trajectory& traj);

// Straight-line gripper path from the final state back to the env's nominal
// start, <= 0.05 per axis per step, zero force, zero rewards.
Trajectory build_return_traj(const Trajectory& traj, const TaskEnv& env);

// Exchange-family generator: reverse(tau_t) ++ reverse(tau_c) with dx, dy
// negated on every action, rewards recomputed on each step's state.
Trajectory revise_transform(const Trajectory& tau_c, const Trajectory& tau_t,
                            const RewardFn& reward = nullptr);

// Reflection-family generator: every state mirrored about x = x_line, dx
// negated, temporal order and reach index kept.
Trajectory symmetry_transform(const Trajectory& traj, double x_line,
                              const RewardFn& reward = nullptr);

// Full pipeline from a successful train-task trajectory to the symmetrical
// trajectory of the paired task (picks the exchange or reflection operator).
Trajectory symmetrize_trajectory(const Trajectory& traj, const TaskEnv& env,
                                 const RewardFn& reward = nullptr);

// Record a rollout as a Trajectory (rewards from the env's shaped reward).
Trajectory record_rollout(const TaskEnv& env, const EnvState& start,
                          const std::vector<Action>& actions);

// Open-loop replay of a trajectory's actions from reset(env, seed).
bool replay_succeeds(const TaskEnv& env, const Trajectory& traj, uint64_t seed);

}  // namespace dualmdp
