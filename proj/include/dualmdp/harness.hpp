#pragma once

#include <map>
#include <string>
#include <vector>

#include "dualmdp/agent.hpp"

namespace dualmdp {

// One experiment: a task group, a method variant, a list of seeds.
struct ExperimentConfig {
  std::string group = "B";           // A | B | C | ALL
  std::string variant = "dual-mdp";  // dual-mdp | omdp-only | no-language
  std::vector<uint64_t> seeds = {0, 1, 2, 3, 4};
  long budget_per_family = 200000;   // env steps per family per seed
  int eval_episodes = 50;
  std::string out_dir;
  std::string registry_config;       // empty = builtin registry
  TrainConfig base;

  void validate() const;  // throws std::invalid_argument
  TrainConfig train_config(uint64_t seed) const;
};

struct Aggregate {
  double mean = 0.0;
  double stderr_ = 0.0;  // over seeds
};

struct ResultTable {
  std::string group;
  std::string variant;
  std::vector<std::string> families;            // train-task families
  std::map<std::string, Aggregate> train_success;  // per family + "aggregate"
  std::map<std::string, Aggregate> test_success;
  int seeds_completed = 0;
  int seeds_requested = 0;
  long mean_env_steps = 0;
};

struct SeedOutcome {
  uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::map<std::string, double> train_success;
  std::map<std::string, double> test_success;
  std::array<double, 3> trial_success{0.0, 0.0, 0.0};
  long env_steps = 0;
};

// Meta-train + meta-test per seed; writes per-seed logs, the aggregate
// table and plot-ready curves under cfg.out_dir.  Seeds that fail are
// recorded and aggregation continues over the completed ones.
ResultTable run_experiment(const ExperimentConfig& cfg,
                           std::vector<SeedOutcome>* outcomes = nullptr);

void write_result_table(const ResultTable& t, const std::string& path);
ResultTable read_result_table(const std::string& path);

// Merge experiment directories into a comparison table (one row per
// variant) plus per-family learning-curve CSVs.  Throws on schema mismatch.
void report(const std::vector<std::string>& result_dirs,
            const std::string& out_dir);

Aggregate aggregate_of(const std::vector<double>& xs);

}  // namespace dualmdp
