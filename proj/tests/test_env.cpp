#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>

#include "dualmdp/env.hpp"
#include "dualmdp/oracle.hpp"
#include "dualmdp/registry.hpp"
#include "dualmdp/rng.hpp"
#include "dualmdp/trajectory.hpp"

using namespace dualmdp;

namespace {

std::vector<Action> random_actions(int n, uint64_t seed, bool with_force = true) {
  Rng rng(seed);
  std::vector<Action> out;
  for (int i = 0; i < n; ++i)
    out.push_back({rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                   rng.uniform(-0.05, 0.05),
                   with_force ? rng.uniform(0.0, 1.0) : 0.0});
  return out;
}

bool states_equal_bits(const EnvState& a, const EnvState& b) {
  return std::memcmp(&a.gripper, &b.gripper, sizeof(Vec3)) == 0 &&
         std::memcmp(&a.object_key, &b.object_key, sizeof(Vec3)) == 0 &&
         a.attached == b.attached && a.step_count == b.step_count &&
         a.done == b.done && a.active_goal == b.active_goal;
}

}  // namespace

TEST_CASE("reset puts the gripper at the start with bounded jitter") {
  const TaskSetRegistry reg = builtin_registry();
  const TaskEnv& drawer = reg.find("drawer-close");
  const EnvState s = reset(drawer, 0);
  CHECK(std::fabs(s.gripper.x - 0.5) <= TaskEnv::kResetJitter);
  CHECK(std::fabs(s.gripper.y - 0.1) <= TaskEnv::kResetJitter);
  CHECK(std::fabs(s.gripper.z - 0.3) <= TaskEnv::kResetJitter);
  CHECK(s.object_key == drawer.p_key);
  CHECK_FALSE(s.attached);
  CHECK(s.step_count == 0);
}

TEST_CASE("reset of the reach env leaves the placeholder fixed") {
  const TaskSetRegistry reg = builtin_registry();
  const TaskEnv& reach = reg.find("reach-left");
  const EnvState s = reset(reach, 7);
  CHECK(s.object_key == reach.p_key);
  CHECK_FALSE(s.attached);
  // the placeholder does not depend on the goal choice or the gripper
  const EnvState s2 = reset(reach, 8);
  CHECK(s2.object_key == s.object_key);
}

TEST_CASE("reset is deterministic per seed") {
  const TaskSetRegistry reg = builtin_registry();
  for (const TaskEnv& env : reg.train_tasks) {
    const EnvState a = reset(env, 42);
    const EnvState b = reset(env, 42);
    CHECK(states_equal_bits(a, b));
  }
}

TEST_CASE("free-point motion is unconstrained") {
  const TaskSetRegistry reg = builtin_registry();
  const TaskEnv& reach = reg.find("reach-left");
  EnvState s = reset(reach, 0);
  s.gripper = {0.5, 0.5, 0.5};
  const StepResult r = step(reach, s, {0.05, 0.0, 0.0, 0.0});
  CHECK(r.state.gripper.x == doctest::Approx(0.55).epsilon(1e-12));
  CHECK(r.state.gripper.y == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.state.object_key == s.object_key);
}

TEST_CASE("rail projection keeps only the axis component") {
  const TaskSetRegistry reg = builtin_registry();
  const TaskEnv& drawer = reg.find("drawer-close");
  EnvState s = reset(drawer, 0);
  const Vec3 mid = drawer.constraint.point_at(
      0.5 * (drawer.constraint.lo + drawer.constraint.hi));
  s.object_key = mid;
  s.gripper = mid;
  s.attached = true;
  const StepResult r = step(drawer, s, {0.05, 0.03, 0.0, 1.0});
  CHECK(r.state.object_key.y == doctest::Approx(mid.y + 0.03).epsilon(1e-12));
  CHECK(r.state.object_key.x == doctest::Approx(mid.x).epsilon(1e-12));
  CHECK(r.state.object_key.z == doctest::Approx(mid.z).epsilon(1e-12));
  CHECK(r.state.gripper == r.state.object_key);
}

TEST_CASE("rail motion clamps at the segment limits") {
  const TaskSetRegistry reg = builtin_registry();
  const TaskEnv& drawer = reg.find("drawer-close");
  EnvState s = reset(drawer, 0);
  s.gripper = drawer.p_key;  // p_key sits at the upper rail stop
  s.attached = true;
  const StepResult r = step(drawer, s, {0.0, 0.05, 0.0, 1.0});
  CHECK(r.state.object_key.y == doctest::Approx(drawer.constraint.hi));
}

TEST_CASE("stepping a done state is rejected") {
  const TaskSetRegistry reg = builtin_registry();
  const TaskEnv& reach = reg.find("reach-left");
  EnvState s = reset(reach, 0);
  s.done = true;
  CHECK_THROWS_AS(step(reach, s, {}), std::logic_error);
}

TEST_CASE("rollouts are bitwise deterministic") {
  const TaskSetRegistry reg = builtin_registry();
  for (const TaskEnv& env : reg.train_tasks) {
    const auto actions = random_actions(120, 5);
    const auto a = rollout(env, reset(env, 3), actions);
    const auto b = rollout(env, reset(env, 3), actions);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(states_equal_bits(a[i], b[i]));
  }
}

TEST_CASE("object key satisfies its constraint after every step") {
  const TaskSetRegistry reg = builtin_registry();
  auto check_env = [](const TaskEnv& env) {
    for (uint64_t seed = 0; seed < 5; ++seed) {
      EnvState s = reset(env, seed);
      const auto actions = random_actions(env.horizon, seed ^ 77);
      for (const Action& a : actions) {
        if (s.done) break;
        s = step(env, s, a).state;
        CHECK(env.constraint.violation(s.object_key) <= 1e-9);
      }
    }
  };
  for (const TaskEnv& env : reg.train_tasks) check_env(env);
  for (const TaskEnv& env : reg.sym_tasks) check_env(env);
  for (const TaskEnv& env : reg.test_tasks) check_env(env);
}

TEST_CASE("oracle trajectories also respect the constraint") {
  const TaskSetRegistry reg = builtin_registry();
  for (const TaskEnv& env : reg.train_tasks) {
    EnvState s = reset(env, 1);
    while (!s.done) {
      const Action a = oracle_action(env, s);
      s = step(env, s, a).state;
      CHECK(env.constraint.violation(s.object_key) <= 1e-9);
    }
  }
}

TEST_CASE("reflect_state mirrors x and preserves y,z") {
  EnvState s;
  s.gripper = {0.2, 0.4, 0.6};
  s.object_key = {0.7, 0.1, 0.9};
  const EnvState m = reflect_state(s, 0.5);
  CHECK(m.gripper.x == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(m.gripper.y == 0.4);
  CHECK(m.gripper.z == 0.6);
  const EnvState mm = reflect_state(m, 0.5);
  CHECK(std::fabs(mm.gripper.x - s.gripper.x) <= 1e-9);
  CHECK(std::fabs(mm.object_key.x - s.object_key.x) <= 1e-9);
}

TEST_CASE("exchange reconstruction swaps key and goal; twice restores") {
  const TaskSetRegistry reg = builtin_registry();
  const TaskEnv& drawer = reg.find("drawer-close");
  EnvState final_state;
  final_state.gripper = drawer.goal(0);
  final_state.object_key = drawer.goal(0);
  final_state.attached = true;
  const TaskEnv senv = reconstruct_env(drawer, final_state);
  CHECK(senv.family == "drawer-open");
  CHECK(distance(senv.p_key, drawer.goal(0)) <= 1e-12);
  CHECK(distance(senv.goal(0), drawer.p_key) <= 1e-12);

  EnvState back_state;
  back_state.gripper = senv.goal(0);
  back_state.object_key = senv.goal(0);
  back_state.attached = true;
  const TaskEnv again = reconstruct_env(senv, back_state);
  CHECK(distance(again.p_key, drawer.p_key) <= 1e-12);
  CHECK(distance(again.goal(0), drawer.goal(0)) <= 1e-12);
}

TEST_CASE("reflection reconstruction mirrors goals about the midline") {
  const TaskSetRegistry reg = builtin_registry();
  const TaskEnv& reach = reg.find("reach-left");
  const TaskEnv senv = reconstruct_env(reach);
  CHECK(senv.family == "reach-right");
  for (size_t g = 0; g < reach.goals.size(); ++g) {
    CHECK(senv.goals[g].x ==
          doctest::Approx(2.0 * reach.midline() - reach.goals[g].x)
              .epsilon(1e-12));
    CHECK(senv.goals[g].y == reach.goals[g].y);
  }
  // exchange requested on a reflection family without a success state is
  // fine, but reflection on an exchange family is an error
  CHECK_THROWS_AS(reconstruct_env(reg.find("door-open")), std::invalid_argument);
}

TEST_CASE("dynamics equivariance for reach and push") {
  const TaskSetRegistry reg = builtin_registry();
  for (const char* fam : {"reach-left", "push-right"}) {
    const TaskEnv& env = reg.find(fam);
    const TaskEnv mirrored = reconstruct_env(env);
    const double mid = env.midline();
    for (uint64_t seed = 0; seed < 10; ++seed) {
      const auto actions = random_actions(60, seed * 13 + 1);
      std::vector<Action> mirrored_actions;
      for (const Action& a : actions)
        mirrored_actions.push_back({-a.dx, a.dy, a.dz, a.f});
      const EnvState s0 = reset(env, seed);
      const EnvState s0m = reflect_state(s0, mid);
      const auto path = rollout(env, s0, actions);
      const auto path_m = rollout(mirrored, s0m, mirrored_actions);
      REQUIRE(path.size() == path_m.size());
      for (size_t i = 0; i < path.size(); ++i) {
        const EnvState want = reflect_state(path[i], mid);
        CHECK(distance(want.gripper, path_m[i].gripper) <= 1e-9);
        CHECK(distance(want.object_key, path_m[i].object_key) <= 1e-9);
      }
    }
  }
}

TEST_CASE("scripted oracle solves all registered tasks within the horizon") {
  const TaskSetRegistry reg = builtin_registry();
  auto solve = [](const TaskEnv& env) {
    const Trajectory t = run_oracle(env, 11);
    CHECK_MESSAGE(t.success, env.family);
    CHECK(static_cast<int>(t.size()) <= env.horizon);
  };
  for (const TaskEnv& env : reg.train_tasks) solve(env);
  for (const TaskEnv& env : reg.sym_tasks) solve(env);
  for (const TaskEnv& env : reg.test_tasks) solve(env);
}

TEST_CASE("oracle solves drawer-close well under 60 steps") {
  const TaskSetRegistry reg = builtin_registry();
  const Trajectory t = run_oracle(reg.find("drawer-close"), 0);
  CHECK(t.success);
  CHECK(t.size() <= 60);
}

TEST_CASE("registry invariants hold and config round-trips") {
  TaskSetRegistry reg = builtin_registry();
  reg.validate();
  const std::string path = "registry_roundtrip.json";
  save_registry_config(reg, path);
  const TaskSetRegistry loaded = load_registry(path);
  loaded.validate();
  REQUIRE(loaded.train_tasks.size() == reg.train_tasks.size());
  for (size_t i = 0; i < reg.train_tasks.size(); ++i) {
    CHECK(loaded.train_tasks[i].family == reg.train_tasks[i].family);
    CHECK(distance(loaded.train_tasks[i].p_key, reg.train_tasks[i].p_key) <=
          1e-12);
    CHECK(loaded.sym_tasks[i].family == reg.sym_tasks[i].family);
  }
  CHECK(loaded.instructions == reg.instructions);
  std::remove(path.c_str());
}
