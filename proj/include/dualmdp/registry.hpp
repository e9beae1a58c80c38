#pragma once

#include <map>
#include <string>
#include <vector>

#include "dualmdp/env.hpp"

namespace dualmdp {

// The three task sets of the dual-MDP setup plus the instruction corpus.
// sym_tasks[i] is reconstruct_env(train_tasks[i]); test_tasks[i] is the
// symmetrical task with the object geometry offset by 0.05 in one axis and
// rail/arc limits scaled by 1.1.
struct TaskSetRegistry {
  std::vector<TaskEnv> train_tasks;
  std::vector<TaskEnv> sym_tasks;
  std::vector<TaskEnv> test_tasks;
  std::map<std::string, std::string> instructions;  // instruction id -> text

  const TaskEnv& find(const std::string& family) const;
  const std::string& instruction_text(const std::string& id) const;

  // Throws std::logic_error if the sym/test derivation invariants are broken.
  void validate() const;
};

// The six task families of the artifact, fully specified in code.
TaskSetRegistry builtin_registry();

// Registry config I/O. The file carries one record per meta-training task
// (family, constraint, key/goal/gripper geometry, horizon, success radius,
// instruction pair); the symmetrical and meta-test sets are derived.
TaskSetRegistry load_registry(const std::string& path);
void save_registry_config(const TaskSetRegistry& reg, const std::string& path);

// Group -> families (A: reach/push, B: door/drawer, C: faucet/window,
// ALL: every family). Names refer to train-task families.
std::vector<std::string> group_families(const std::string& group);

}  // namespace dualmdp
