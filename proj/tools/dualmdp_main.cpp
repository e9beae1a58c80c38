#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dualmdp/agent.hpp"
#include "dualmdp/harness.hpp"
#include "dualmdp/oracle.hpp"

namespace {

using namespace dualmdp;

TaskSetRegistry registry_from(const std::string& config) {
  return config.empty() ? builtin_registry() : load_registry(config);
}

int cmd_train(const std::string& group, const std::string& variant, int seeds,
              long budget, const std::string& out, const std::string& config) {
  ExperimentConfig cfg;
  cfg.group = group;
  cfg.variant = variant;
  cfg.seeds.clear();
  for (int s = 0; s < seeds; ++s) cfg.seeds.push_back(static_cast<uint64_t>(s));
  cfg.budget_per_family = budget;
  cfg.out_dir = out;
  cfg.registry_config = config;

  std::vector<SeedOutcome> outcomes;
  const ResultTable table = run_experiment(cfg, &outcomes);
  for (const SeedOutcome& oc : outcomes) {
    if (!oc.ok)
      std::cerr << "warning: seed " << oc.seed << " failed: " << oc.error
                << "\n";
  }
  std::printf("%s / %s over %d seed(s)\n", group.c_str(), variant.c_str(),
              table.seeds_completed);
  std::printf("  meta-train %.3f +/- %.3f\n",
              table.train_success.at("aggregate").mean,
              table.train_success.at("aggregate").stderr_);
  std::printf("  meta-test  %.3f +/- %.3f\n",
              table.test_success.at("aggregate").mean,
              table.test_success.at("aggregate").stderr_);
  return 0;
}

int cmd_airl_train(const std::string& buffer_path, const std::string& out,
                   const std::string& config, uint64_t seed) {
  const TaskSetRegistry reg = registry_from(config);
  Buffer buf = load_buffer(buffer_path);
  AirlConfig acfg;
  acfg.seed = seed;
  std::vector<AirlReport> reports;
  const auto models = train_airl(buf, reg, acfg, &reports);
  std::filesystem::create_directories(out);
  for (const auto& [family, model] : models)
    save_reward_model(model, out + "/reward_" + family + ".ckpt");
  for (const AirlReport& r : reports)
    std::printf("%s: holdout accuracy %.3f, expert margin %.3f (%d expert / %d negative)\n",
                r.task_id.c_str(), r.holdout_accuracy, r.expert_margin,
                r.expert_transitions, r.negative_transitions);
  return 0;
}

int cmd_symmetrize(const std::string& group, int count, const std::string& out,
                   const std::string& config) {
  const TaskSetRegistry reg = registry_from(config);
  const Lexicon lex = load_lexicon_default();
  std::filesystem::create_directories(out);

  Buffer buf;
  std::ofstream instr(out + "/instructions.txt");
  for (const std::string& fam : group_families(group)) {
    const TaskEnv& env = reg.find(fam);
    const std::string& text = reg.instruction_text(env.instruction_id);
    const Instruction parsed = parse_vp(text, lex);
    const Instruction sym = symmetrize_instruction(parsed, lex);
    instr << fam << "\t" << text << "\t" << sym.text << "\n";
    for (int k = 0; k < count; ++k) {
      const Trajectory traj = run_oracle(env, static_cast<uint64_t>(k));
      if (!traj.success) continue;
      buffer_push(buf, symmetrize_trajectory(traj, env));
    }
  }
  save_buffer(buf, out + "/symmetrical.jsonl");
  std::printf("wrote %d symmetrical trajectories to %s\n", buf.count(),
              out.c_str());
  return 0;
}

int cmd_eval(const std::string& policy_path, const std::string& group,
             int episodes, const std::string& config) {
  const TaskSetRegistry reg = registry_from(config);
  const PolicySnapshot policy = load_policy(policy_path);
  TrainConfig cfg;
  const MetaTestMetrics m = meta_test(policy, reg, group_families(group), cfg,
                                      episodes, 12345);
  for (const TaskTestMetrics& t : m.tasks)
    std::printf("%-16s success %.3f  trials [%.3f %.3f %.3f]\n",
                t.family.c_str(), t.success_rate, t.trial_success[0],
                t.trial_success[1], t.trial_success[2]);
  std::printf("aggregate %.3f\n", m.aggregate_success);
  if (m.param_hash_before != m.param_hash_after) {
    std::cerr << "error: policy parameters changed during meta-test\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-MDP meta-RL with symmetry-generated data"};
  app.require_subcommand(1);

  std::string group = "B", variant = "dual-mdp", out = "runs/out", config;
  int seeds = 5, count = 50, episodes = 50;
  long budget = 200000;
  std::string buffer_path, policy_path;
  uint64_t seed = 0;
  std::vector<std::string> dirs;

  auto* train = app.add_subcommand("train", "meta-train + meta-test one variant");
  train->add_option("--group", group, "A|B|C|ALL");
  train->add_option("--variant", variant, "dual-mdp|omdp-only|no-language");
  train->add_option("--seeds", seeds, "number of seeds");
  train->add_option("--budget", budget, "env steps per family per seed");
  train->add_option("--out", out, "output directory");
  train->add_option("--config", config, "task registry config file");

  auto* airl = app.add_subcommand("airl-train", "offline AIRL from a buffer file");
  airl->add_option("--buffer", buffer_path, "trajectory buffer (jsonl)")->required();
  airl->add_option("--out", out, "output directory");
  airl->add_option("--config", config, "task registry config file");
  airl->add_option("--seed", seed, "training seed");

  auto* symm = app.add_subcommand(
      "symmetrize", "dump symmetrical trajectories/instructions for inspection");
  symm->add_option("--group", group, "A|B|C|ALL");
  symm->add_option("--count", count, "oracle trajectories per family");
  symm->add_option("--out", out, "output directory");
  symm->add_option("--config", config, "task registry config file");

  auto* eval = app.add_subcommand("eval", "meta-test a saved policy");
  eval->add_option("--policy", policy_path, "policy checkpoint")->required();
  eval->add_option("--group", group, "A|B|C|ALL");
  eval->add_option("--episodes", episodes, "episodes per task");
  eval->add_option("--config", config, "task registry config file");

  auto* rep = app.add_subcommand("report", "merge experiment directories");
  rep->add_option("dirs", dirs, "experiment directories")->required();
  rep->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed())
      return cmd_train(group, variant, seeds, budget, out, config);
    if (airl->parsed()) return cmd_airl_train(buffer_path, out, config, seed);
    if (symm->parsed()) return cmd_symmetrize(group, count, out, config);
    if (eval->parsed()) return cmd_eval(policy_path, group, episodes, config);
    if (rep->parsed()) {
      report(dirs, out);
      std::printf("report written to %s\n", out.c_str());
      return 0;
    }
  } catch (const std::invalid_argument& ex) {
    std::cerr << "validation error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "runtime failure: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
