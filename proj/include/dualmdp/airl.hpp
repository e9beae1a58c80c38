#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dualmdp/buffer.hpp"
#include "dualmdp/env.hpp"
#include "dualmdp/mlp.hpp"
#include "dualmdp/registry.hpp"

namespace dualmdp {

// One (s, s') transition used for discriminator training.
struct Transition {
  Obs s{};
  Obs s2{};
};

// Expert step with enough context to re-simulate a perturbed variant.
struct ExpertStep {
  Obs s{};
  Obs s2{};
  Action action;
  bool attached = false;
};

struct AirlConfig {
  double gamma = 0.9;
  double lr = 4e-2;
  double momentum = 0.9;
  int batch_size = 256;
  // Fixed step schedule: `updates` optimizer steps with the learning rate
  // cut to 1/2 at 60% and 1/4 at 85% of the budget.
  int updates = 2500;
  double l2 = 1e-6;
  double l2_shaping = 1e-4;
  double noise_sigma = 0.02;     // perturbed-expert action noise
  double holdout_fraction = 0.2; // held out by trajectory
  uint64_t seed = 1;
};

// State-only recovered reward: f(s,s') = g(s) + gamma*h(s') - h(s); the
// deployed reward is g rescaled from its [p1, p99] range onto (0, 2000).
struct RewardModel {
  std::string task_id;
  Mlp g;
  Mlp h;
  double gamma = 0.9;
  double rescale_lo = 0.0;
  double rescale_hi = 2000.0;
  double raw_lo = 0.0;   // 1st percentile of raw g over buffer states
  double raw_hi = 1.0;   // 99th percentile
  uint64_t seed = 0;

  double raw_reward(const Obs& s) const { return g.forward(s.data()); }
  double shaping(const Obs& s) const { return h.forward(s.data()); }
  double potential_term(const Obs& s, const Obs& s2) const {
    return gamma * shaping(s2) - shaping(s);
  }
};

double recover_reward(const RewardModel& model, const Obs& s);
RewardFn reward_fn(const RewardModel& model);

struct AirlReport {
  std::string task_id;
  double holdout_accuracy = 0.0;  // expert vs random rollouts, held out
  double expert_margin = 0.0;     // E[g|expert] - E[g|random], held out
  double final_loss = 0.0;
  int expert_transitions = 0;
  int negative_transitions = 0;
};

using NegativeSampler = std::function<std::vector<Transition>(
    const TaskEnv& senv, const std::vector<ExpertStep>& expert, int n,
    uint64_t seed)>;

// Default sampler: 50/50 uniform-random-policy rollouts in the symmetrical
// env and perturbed expert transitions re-simulated with Gaussian action
// noise.
std::vector<Transition> default_negative_transitions(
    const TaskEnv& senv, const std::vector<ExpertStep>& expert, int n,
    uint64_t seed, double noise_sigma);

// Known density of the uniform sampler over the action box, entering the
// discriminator as a constant log term.
double negative_log_density();

// Train the reward model of one symmetrical task from its buffer entries.
// Throws std::invalid_argument when the buffer is not full and
// std::runtime_error on divergence (NaN loss).
RewardModel train_airl_family(const Buffer& buf, const TaskEnv& senv,
                              const AirlConfig& cfg, AirlReport* report,
                              const NegativeSampler& sampler = nullptr);

// One reward head per symmetrical task family present in the buffer.
std::map<std::string, RewardModel> train_airl(
    const Buffer& buf, const TaskSetRegistry& reg, const AirlConfig& cfg,
    std::vector<AirlReport>* reports = nullptr);

// Checkpoint I/O (text tensor dump with a topology/config header).
void save_reward_model(const RewardModel& m, const std::string& path);
RewardModel load_reward_model(const std::string& path);

struct RewardQualityReport {
  std::string task_id;
  double airl_success_rate = 0.0;
  double airl_mean_success_step = 0.0;
  double gt_success_rate = 0.0;
  double gt_mean_success_step = 0.0;
};

// Train one policy under the recovered reward and one under the ground
// truth, then report success rate and mean success step over `episodes`
// evaluation episodes each.
RewardQualityReport evaluate_reward_quality(const RewardModel& model,
                                            const TaskEnv& senv,
                                            int episodes = 200,
                                            uint64_t seed = 7);

}  // namespace dualmdp
