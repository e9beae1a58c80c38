#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dualmdp/oracle.hpp"
#include "dualmdp/registry.hpp"
#include "dualmdp/trajectory.hpp"

using namespace dualmdp;

namespace {

const TaskSetRegistry& reg() {
  static const TaskSetRegistry r = builtin_registry();
  return r;
}

double gripper_step_norm(const Obs& a, const Obs& b) {
  return distance(obs_gripper(a), obs_gripper(b));
}

// Per-step gripper displacement magnitudes along a trajectory.
std::vector<double> step_lengths(const Trajectory& t) {
  std::vector<double> out;
  for (size_t i = 0; i + 1 < t.size(); ++i)
    out.push_back(gripper_step_norm(t.steps[i].state, t.steps[i + 1].state));
  if (!t.steps.empty())
    out.push_back(gripper_step_norm(t.steps.back().state, t.final_state));
  return out;
}

}  // namespace

TEST_CASE("split partitions a successful trajectory at the reach index") {
  const Trajectory t = run_oracle(reg().find("drawer-close"), 0);
  REQUIRE(t.success);
  const auto [tau_e, tau_c] = split_trajectory(t);
  CHECK(tau_e.size() == static_cast<size_t>(t.reach_index));
  CHECK(tau_e.size() + tau_c.size() == t.size());
  // concatenation reproduces the original
  for (size_t i = 0; i < tau_e.size(); ++i)
    CHECK(tau_e.steps[i].state == t.steps[i].state);
  for (size_t i = 0; i < tau_c.size(); ++i)
    CHECK(tau_c.steps[i].state == t.steps[tau_e.size() + i].state);
  // reach index matches the env's attach flag: before it the gripper is off
  // the key point, from it on the gripper rides the object
  const Obs& at = t.steps[static_cast<size_t>(t.reach_index)].state;
  CHECK(distance(obs_gripper(at), obs_object(at)) <= 1e-9);
}

TEST_CASE("split rejects unsuccessful trajectories") {
  Trajectory t = run_oracle(reg().find("drawer-close"), 0);
  t.success = false;
  CHECK_THROWS_AS(split_trajectory(t), std::invalid_argument);
}

TEST_CASE("degenerate split with e = 0") {
  Trajectory t = run_oracle(reg().find("reach-left"), 0);
  REQUIRE(t.success);
  REQUIRE(t.reach_index == 0);
  const auto [tau_e, tau_c] = split_trajectory(t);
  CHECK(tau_e.steps.empty());
  CHECK(tau_c.size() == t.size());
}

TEST_CASE("return trajectory discretizes the straight line home") {
  Trajectory t;
  t.success = true;
  t.final_state = make_obs({0.5, 0.6, 0.3}, {0.5, 0.3, 0.3});
  TaskEnv env = reg().find("drawer-close");
  const Trajectory tau_t = build_return_traj(t, env);
  CHECK(tau_t.size() == 10);
  for (const Step& s : tau_t.steps) {
    CHECK(s.action.dx == doctest::Approx(0.0));
    CHECK(s.action.dy == doctest::Approx(-0.05).epsilon(1e-9));
    CHECK(s.action.f == 0.0);
    CHECK(s.reward == 0.0);
  }
  CHECK(distance(obs_gripper(tau_t.final_state), env.gripper_start) <= 1e-12);
  // objects are parked during the return path
  for (const Step& s : tau_t.steps)
    CHECK(obs_object(s.state) == obs_object(t.final_state));
}

TEST_CASE("return trajectory is empty when already home") {
  Trajectory t;
  t.success = true;
  TaskEnv env = reg().find("drawer-close");
  t.final_state = make_obs(env.gripper_start, env.p_key);
  CHECK(build_return_traj(t, env).steps.empty());
}

TEST_CASE("revise negates the planar action components") {
  const TaskEnv& env = reg().find("drawer-close");
  const Trajectory t = run_oracle(env, 3);
  const auto [tau_e, tau_c] = split_trajectory(t);
  const Trajectory tau_t = build_return_traj(t, env);
  const Trajectory rev = revise_transform(tau_c, tau_t);
  REQUIRE(rev.size() == tau_c.size() + tau_t.size());
  CHECK(rev.reach_index == static_cast<int>(tau_t.size()));
  // the j-th revised action undoes, planar-negated, the mirrored source step
  const size_t n_t = tau_t.size();
  for (size_t j = 0; j < rev.size(); ++j) {
    const Action& got = rev.steps[j].action;
    const Action& src = j < n_t
                            ? tau_t.steps[n_t - 1 - j].action
                            : tau_c.steps[tau_c.size() - 1 - (j - n_t)].action;
    CHECK(got.dx == -src.dx);
    CHECK(got.dy == -src.dy);
    CHECK(got.dz == src.dz);
    CHECK(got.f == src.f);
  }
}

TEST_CASE("revise applied twice restores the action components") {
  const TaskEnv& env = reg().find("window-open");
  const Trajectory t = run_oracle(env, 5);
  const auto [tau_e, tau_c] = split_trajectory(t);
  const Trajectory tau_t = build_return_traj(t, env);
  const Trajectory once = revise_transform(tau_c, tau_t);
  // feed the revised controlling part back through with the same tail length
  Trajectory once_c;
  once_c.steps.assign(once.steps.begin() + once.reach_index, once.steps.end());
  once_c.final_state = once.final_state;
  Trajectory once_t;
  once_t.steps.assign(once.steps.begin(), once.steps.begin() + once.reach_index);
  once_t.final_state = once.steps[static_cast<size_t>(once.reach_index)].state;
  const Trajectory twice = revise_transform(once_t, once_c);
  // twice = rev(rev(tau_c)) ++ rev(rev(tau_t)): original actions, in order
  const std::vector<const Trajectory*> srcs = {&tau_c, &tau_t};
  size_t j = 0;
  for (const Trajectory* src : srcs) {
    for (const Step& s : src->steps) {
      CHECK(twice.steps[j].action.dx == s.action.dx);
      CHECK(twice.steps[j].action.dy == s.action.dy);
      ++j;
    }
  }
}

TEST_CASE("revise rejects an empty controlling segment") {
  Trajectory empty_c, tau_t;
  CHECK_THROWS_AS(revise_transform(empty_c, tau_t), std::invalid_argument);
}

TEST_CASE("exchange stitch points satisfy the symmetry definition") {
  for (const char* fam :
       {"door-open", "drawer-close", "faucet-close", "window-open"}) {
    const TaskEnv& env = reg().find(fam);
    const Trajectory t = run_oracle(env, 9);
    const auto [tau_e, tau_c] = split_trajectory(t);
    const Trajectory tau_t = build_return_traj(t, env);
    const Trajectory rev = revise_transform(tau_c, tau_t);
    // initial point of the revised controlling segment = terminal of tau_c
    const Obs& rev_c0 = rev.steps[static_cast<size_t>(rev.reach_index)].state;
    CHECK(distance(obs_object(rev_c0), obs_object(tau_c.final_state)) <= 1e-9);
    // terminal of the revised trajectory = initial point of tau_c
    CHECK(distance(obs_object(rev.final_state),
                   obs_object(tau_c.steps.front().state)) <= 1e-9);
  }
}

TEST_CASE("revised oracle trajectory replays to success in the SEnv") {
  for (const char* fam :
       {"door-open", "drawer-close", "faucet-close", "window-open"}) {
    const TaskEnv& env = reg().find(fam);
    const TaskEnv& senv = reg().find(symmetric_family(fam));
    for (uint64_t seed = 0; seed < 5; ++seed) {
      const Trajectory t = run_oracle(env, seed);
      REQUIRE(t.success);
      const Trajectory rev = symmetrize_trajectory(t, env);
      CHECK(rev.task_id == senv.family);
      CHECK_MESSAGE(replay_succeeds(senv, rev, seed + 1000), fam);
    }
  }
}

TEST_CASE("symmetry transform mirrors states and negates dx") {
  const TaskEnv& env = reg().find("push-right");
  const Trajectory t = run_oracle(env, 2);
  const double mid = env.midline();
  const Trajectory m = symmetry_transform(t, mid);
  REQUIRE(m.size() == t.size());
  CHECK(m.reach_index == t.reach_index);
  for (size_t i = 0; i < t.size(); ++i) {
    CHECK(m.steps[i].action.dx == -t.steps[i].action.dx);
    CHECK(m.steps[i].action.dy == t.steps[i].action.dy);
    CHECK(m.steps[i].action.dz == t.steps[i].action.dz);
    CHECK(m.steps[i].action.f == t.steps[i].action.f);
    // y and z coordinates are in one-to-one correspondence
    for (int d : {1, 2, 4, 5})
      CHECK(m.steps[i].state[static_cast<size_t>(d)] ==
            t.steps[i].state[static_cast<size_t>(d)]);
  }
}

TEST_CASE("symmetry transform is an involution on states and actions") {
  const TaskEnv& env = reg().find("reach-left");
  const Trajectory t = run_oracle(env, 4);
  const double mid = env.midline();
  const Trajectory twice = symmetry_transform(symmetry_transform(t, mid), mid);
  REQUIRE(twice.size() == t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    for (int d = 0; d < 6; ++d)
      CHECK(std::fabs(twice.steps[i].state[static_cast<size_t>(d)] -
                      t.steps[i].state[static_cast<size_t>(d)]) <= 1e-9);
    CHECK(std::fabs(twice.steps[i].action.dx - t.steps[i].action.dx) <= 1e-15);
  }
}

TEST_CASE("both operators preserve per-step gripper displacement") {
  // reflection family
  {
    const TaskEnv& env = reg().find("push-right");
    const Trajectory t = run_oracle(env, 6);
    const Trajectory m = symmetry_transform(t, env.midline());
    const auto a = step_lengths(t);
    const auto b = step_lengths(m);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(std::fabs(a[i] - b[i]) <= 1e-12);
  }
  // exchange family: the revised step j mirrors source step n-1-j
  {
    const TaskEnv& env = reg().find("faucet-close");
    const Trajectory t = run_oracle(env, 6);
    const auto [tau_e, tau_c] = split_trajectory(t);
    const Trajectory tau_t = build_return_traj(t, env);
    Trajectory cat;
    cat.steps = tau_c.steps;
    cat.steps.insert(cat.steps.end(), tau_t.steps.begin(), tau_t.steps.end());
    cat.final_state = tau_t.steps.empty() ? tau_c.final_state : tau_t.final_state;
    const Trajectory rev = revise_transform(tau_c, tau_t);
    const auto a = step_lengths(cat);
    const auto b = step_lengths(rev);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i)
      CHECK(std::fabs(a[i] - b[a.size() - 1 - i]) <= 1e-12);
  }
}

TEST_CASE("reflected rollout equals rollout of reflected actions") {
  const TaskEnv& env = reg().find("push-right");
  const TaskEnv senv = reconstruct_env(env);
  const Trajectory t = run_oracle(env, 8);
  REQUIRE(t.success);
  const Trajectory m = symmetrize_trajectory(t, env);
  // replay the mirrored actions open-loop in the mirrored env
  EnvState s = reset(senv, 8);
  s.gripper = obs_gripper(m.steps.front().state);
  s.active_goal = reset(env, 8).active_goal;
  size_t i = 0;
  while (!s.done && i < m.size()) {
    s = step(senv, s, m.steps[i].action).state;
    ++i;
    if (i < m.size()) {
      CHECK(distance(s.gripper, obs_gripper(m.steps[i].state)) <= 1e-9);
      CHECK(distance(s.object_key, obs_object(m.steps[i].state)) <= 1e-9);
    }
  }
}

TEST_CASE("generated rewards are zero without a reward model") {
  const TaskEnv& env = reg().find("drawer-close");
  const Trajectory t = run_oracle(env, 1);
  const Trajectory rev = symmetrize_trajectory(t, env);
  for (const Step& s : rev.steps) CHECK(s.reward == 0.0);
}

TEST_CASE("reward hook recomputes per-state rewards") {
  const TaskEnv& env = reg().find("drawer-close");
  const Trajectory t = run_oracle(env, 1);
  const RewardFn fn = [](const Obs& o) { return o[3] + 100.0; };
  const Trajectory rev = symmetrize_trajectory(t, env, fn);
  for (const Step& s : rev.steps)
    CHECK(s.reward == doctest::Approx(s.state[3] + 100.0));
}
