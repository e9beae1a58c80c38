#pragma once

#include <cstdint>
#include <vector>

#include "dualmdp/env.hpp"
#include "dualmdp/trajectory.hpp"

namespace dualmdp {

// Small reactive policy (obs 6 -> tanh 16 -> 4, outputs squashed to the
// action box) trained by the cross-entropy method.  Used only to compare
// reward functions; the meta-RL agent lives elsewhere.
struct CemPolicy {
  std::vector<double> params;

  static constexpr int kHidden = 16;
  static size_t param_count();
  Action act(const Obs& obs) const;
};

struct CemConfig {
  int population = 64;
  int elites = 8;
  int iterations = 40;
  int fitness_episodes = 4;
  double init_sigma = 0.5;
  double sigma_floor = 0.02;
  uint64_t seed = 0;
};

struct EpisodeStats {
  bool success = false;
  int success_step = 0;
  double fitness = 0.0;
};

// Fitness is the undiscounted episode return padded to the horizon with the
// terminal state's reward (a solved trial keeps paying its terminal reward),
// so completing dominates loitering near the goal.  `reward` == nullptr
// means the env's ground-truth shaped reward.
EpisodeStats run_cem_episode(const TaskEnv& env, const CemPolicy& pi,
                             uint64_t seed, const RewardFn& reward = nullptr);

CemPolicy train_cem(const TaskEnv& env, const RewardFn& reward,
                    const CemConfig& cfg);

}  // namespace dualmdp
