#pragma once

#include <array>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "dualmdp/airl.hpp"
#include "dualmdp/buffer.hpp"
#include "dualmdp/policy.hpp"
#include "dualmdp/registry.hpp"
#include "dualmdp/rng.hpp"

namespace dualmdp {

struct TrainConfig {
  int trials_per_episode = 3;
  int episodes_per_task = 4;       // per task per iteration
  double discount = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  double lr = 1e-3;
  int epochs = 4;
  double value_coef = 0.5;
  double entropy_coef = 3e-4;
  double max_grad_norm = 2.0;
  double gt_reward_scale = 13.0;    // dense max ~3 plus success bonus 10
  double airl_reward_scale = 2000.0;
  long step_budget_per_family = 200000;
  double phase1_budget_frac = 0.45;
  double solved_threshold = 0.8;    // phase-1 "task solved" bar
  int solved_window = 50;           // trials
  double converge_threshold = 0.9;  // phase-3 stop
  int buffer_threshold = 4000;
  int eval_episodes = 50;
  uint64_t seed = 0;
  bool use_language = true;
  bool use_smdp = true;             // false = OMDP-only ablation
  AirlConfig airl;
};

struct PolicySnapshot {
  PolicyParams params;
  Vocab vocab;
  long iteration = 0;

  uint64_t hash() const { return params.hash(); }
};

PolicySnapshot make_policy(const TaskSetRegistry& reg, uint64_t seed);

// Reward fed to the agent: ground-truth env reward when model == nullptr,
// otherwise the recovered state-only reward evaluated on the post-step state.
struct RewardSource {
  const RewardModel* model = nullptr;
  double scale = 13.0;
};

// One trial worth of rollout data (policy traces kept for PPO).
struct TrialRollout {
  Trajectory traj;  // rewards on the source's raw scale
  std::vector<std::array<double, kActDim>> raw_actions;
  std::vector<std::array<double, kActDim>> prev_action_in;
  std::vector<double> prev_reward_in;
  std::vector<double> done_in;
  std::vector<double> logp;
  std::vector<double> value;
  bool demo = false;
  bool success = false;
};

// Episode = fixed number of trials with the hidden state carried across.
struct EpisodeRecord {
  std::string task_id;
  bool smdp = false;
  std::vector<double> counts;  // instruction bag-of-words (empty = no language)
  std::vector<TrialRollout> trials;
  int horizon = 150;
  double live_return_raw = 0.0;

  bool final_trial_success() const {
    return !trials.empty() && trials.back().success;
  }
  long live_steps() const;
};

// Rolls one live trial from the given hidden state (spec-level operation).
// Throws std::runtime_error on NaN in the policy output.
TrialRollout run_trial(const PolicySnapshot& policy, const TaskEnv& env,
                       const std::vector<double>& counts,
                       std::array<double, kHiddenDim>* hidden,
                       const RewardSource& source, uint64_t reset_seed,
                       Rng* action_rng, const TrainConfig& cfg,
                       std::array<double, kActDim>* prev_action,
                       double* prev_reward, bool deterministic);

// Full episode; when demo != nullptr the first trial replays the
// demonstration through the recurrent cell (no env interaction) with rewards
// recomputed by the reward model.
EpisodeRecord run_episode(const PolicySnapshot& policy, const TaskEnv& env,
                          const std::vector<double>& counts,
                          const RewardSource& source, const Trajectory* demo,
                          uint64_t episode_seed, const TrainConfig& cfg,
                          bool deterministic);

// Demonstration-first SMDP episode (spec-level wrapper).
EpisodeRecord run_episode_smdp(const PolicySnapshot& policy, const TaskEnv& senv,
                               const std::vector<double>& counts_sym,
                               const Trajectory& demo, const RewardModel& model,
                               uint64_t episode_seed, const TrainConfig& cfg);

// Clipped-surrogate PPO with GAE over the live segments; success-terminated
// trials are padded to the horizon with their terminal reward when computing
// returns (absorbing-goal convention), demo steps only condition the RNN.
struct PpoStats {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double grad_norm = 0.0;
};

// Loss+gradient of the PPO objective on a fixed batch (exposed for the
// finite-difference tests); advantages/returns must be precomputed.
PpoStats ppo_loss_and_grad(const PolicyParams& params,
                           const std::vector<EpisodeRecord>& batch,
                           const std::vector<std::vector<double>>& advantages,
                           const std::vector<std::vector<double>>& returns,
                           const TrainConfig& cfg, PolicyParams* grad);

void compute_gae(const EpisodeRecord& ep, const TrainConfig& cfg,
                 std::vector<double>* advantages, std::vector<double>* returns);

PpoStats ppo_update(PolicySnapshot* policy, std::vector<EpisodeRecord>& batch,
                    const TrainConfig& cfg, Adam* opt);

struct MetaTrainResult {
  PolicySnapshot policy;
  Buffer buffer;
  std::map<std::string, RewardModel> reward_models;
  bool converged = false;
  std::string warning;
  long env_steps = 0;
  std::map<std::string, long> phase_env_steps;
  std::vector<AirlReport> airl_reports;
  // (env steps, windowed train success) samples, one per update.
  std::vector<std::pair<long, double>> curve;
};

// Algorithm-1 style meta-training over the given train-task families.
// Phase 1 trains OMDP-only while filling the buffer with symmetrical
// trajectories; phase 2 trains AIRL offline; phase 3 restarts the policy
// with the SMDP active and AIRL frozen.  The OMDP-only and no-language
// variants (cfg.use_smdp == false) run a single OMDP phase.
MetaTrainResult meta_train(const TaskSetRegistry& reg,
                           const std::vector<std::string>& families,
                           const TrainConfig& cfg, std::ostream* log);

struct TaskTestMetrics {
  std::string family;
  int episodes = 0;
  double success_rate = 0.0;  // final-trial success
  std::array<double, 3> trial_success{0.0, 0.0, 0.0};
  double mean_return = 0.0;
};

struct MetaTestMetrics {
  std::vector<TaskTestMetrics> tasks;
  double aggregate_success = 0.0;
  uint64_t param_hash_before = 0;
  uint64_t param_hash_after = 0;
};

// Gradient-free meta-test: 3-trial in-context adaptation on each test task.
MetaTestMetrics meta_test(const PolicySnapshot& policy,
                          const TaskSetRegistry& reg,
                          const std::vector<std::string>& train_families,
                          const TrainConfig& cfg, int episodes, uint64_t seed);

// Evaluation of one env under an explicit instruction (used for the
// swapped-instruction grounding check and by meta_test).
TaskTestMetrics evaluate_task(const PolicySnapshot& policy, const TaskEnv& env,
                              const std::string& instruction_text,
                              const TrainConfig& cfg, int episodes,
                              uint64_t seed);

void save_policy(const PolicySnapshot& p, const std::string& path);
PolicySnapshot load_policy(const std::string& path);

}  // namespace dualmdp
