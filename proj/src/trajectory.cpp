#include "dualmdp/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace dualmdp {

namespace {

// Planar negation of Eq-style symmetrical actions: dx, dy flip, dz and the
// grip force are preserved.
Action negate_planar(const Action& a) { return {-a.dx, -a.dy, a.dz, a.f}; }

Action negate_x(const Action& a) { return {-a.dx, a.dy, a.dz, a.f}; }

double reward_of(const RewardFn& fn, const Obs& s) {
  return fn ? fn(s) : 0.0;
}

// Reverse a segment: states walk backwards from the terminal observation,
// each action is the planar negation of the step it undoes.
Trajectory reverse_segment(const Trajectory& seg, const RewardFn& reward) {
  Trajectory out;
  out.task_id = seg.task_id;
  const size_t n = seg.size();
  out.steps.reserve(n);
  for (size_t j = 0; j < n; ++j) {
    Step st;
    st.state = (j == 0) ? seg.final_state : seg.steps[n - j].state;
    st.action = negate_planar(seg.steps[n - 1 - j].action);
    st.reward = reward_of(reward, st.state);
    out.steps.push_back(st);
  }
  out.final_state = n == 0 ? seg.final_state : seg.steps[0].state;
  return out;
}

}  // namespace

std::pair<Trajectory, Trajectory> split_trajectory(const Trajectory& traj) {
  if (!traj.success)
    throw std::invalid_argument("split_trajectory: trajectory not successful");
  const int e = traj.reach_index;
  if (e < 0 || e >= static_cast<int>(traj.size()))
    throw std::invalid_argument("split_trajectory: reach index out of range");

  Trajectory tau_e, tau_c;
  tau_e.task_id = tau_c.task_id = traj.task_id;
  tau_e.steps.assign(traj.steps.begin(), traj.steps.begin() + e);
  tau_e.final_state = traj.steps[e].state;
  tau_e.reach_index = 0;
  tau_c.steps.assign(traj.steps.begin() + e, traj.steps.end());
  tau_c.final_state = traj.final_state;
  tau_c.reach_index = 0;
  tau_c.success = traj.success;
  return {tau_e, tau_c};
}

Trajectory build_return_traj(const Trajectory& traj, const TaskEnv& env) {
  if (!traj.success)
    throw std::invalid_argument("build_return_traj: trajectory not successful");
  const Vec3 from = obs_gripper(traj.final_state);
  const Vec3 object = obs_object(traj.final_state);
  const Vec3 delta = env.gripper_start - from;

  Trajectory out;
  out.task_id = traj.task_id;
  const double span = delta.inf_norm();
  if (span < 1e-12) {
    out.final_state = traj.final_state;
    return out;
  }
  const int n = static_cast<int>(std::ceil(span / Action::kMaxStep - 1e-12));
  const Vec3 step_vec = delta * (1.0 / n);
  Vec3 g = from;
  for (int i = 0; i < n; ++i) {
    Step st;
    st.state = make_obs(g, object);
    st.action = Action{step_vec.x, step_vec.y, step_vec.z, 0.0}.clamped();
    st.reward = 0.0;
    out.steps.push_back(st);
    g = g + step_vec;
  }
  out.final_state = make_obs(env.gripper_start, object);
  return out;
}

Trajectory revise_transform(const Trajectory& tau_c, const Trajectory& tau_t,
                            const RewardFn& reward) {
  if (tau_c.steps.empty())
    throw std::invalid_argument("revise_transform: empty controlling segment");

  Trajectory rev_t = reverse_segment(tau_t, reward);
  Trajectory rev_c = reverse_segment(tau_c, reward);

  Trajectory out;
  out.task_id = tau_c.task_id;
  out.steps = std::move(rev_t.steps);
  out.steps.insert(out.steps.end(), rev_c.steps.begin(), rev_c.steps.end());
  out.final_state = rev_c.final_state;
  out.reach_index = static_cast<int>(tau_t.size());
  out.success = true;
  return out;
}

Trajectory symmetry_transform(const Trajectory& traj, double x_line,
                              const RewardFn& reward) {
  Trajectory out;
  out.task_id = traj.task_id;
  out.reach_index = traj.reach_index;
  out.success = traj.success;
  out.steps.reserve(traj.size());
  for (const Step& st : traj.steps) {
    Step m;
    m.state = reflect_obs(st.state, x_line);
    m.action = negate_x(st.action);
    m.reward = reward_of(reward, m.state);
    out.steps.push_back(m);
  }
  out.final_state = reflect_obs(traj.final_state, x_line);
  return out;
}

Trajectory symmetrize_trajectory(const Trajectory& traj, const TaskEnv& env,
                                 const RewardFn& reward) {
  Trajectory out;
  if (env.exchange_family()) {
    auto [tau_e, tau_c] = split_trajectory(traj);
    Trajectory tau_t = build_return_traj(traj, env);
    out = revise_transform(tau_c, tau_t, reward);
  } else {
    out = symmetry_transform(traj, env.midline(), reward);
  }
  out.task_id = symmetric_family(env.family);
  return out;
}

Trajectory record_rollout(const TaskEnv& env, const EnvState& start,
                          const std::vector<Action>& actions) {
  Trajectory traj;
  traj.task_id = env.family;
  EnvState s = start;
  int first_reached = -1;
  for (const Action& a : actions) {
    if (s.done) break;
    if (first_reached < 0 && s.attached)
      first_reached = static_cast<int>(traj.steps.size());
    StepResult r = step(env, s, a);
    traj.steps.push_back({s.observation(), a.clamped(), r.reward});
    traj.success = r.success;
    s = r.state;
  }
  if (first_reached < 0 && s.attached)
    first_reached = static_cast<int>(traj.steps.size());
  traj.final_state = s.observation();
  traj.reach_index = first_reached < 0 ? 0 : first_reached;
  return traj;
}

bool replay_succeeds(const TaskEnv& env, const Trajectory& traj, uint64_t seed) {
  EnvState s = reset(env, seed);
  for (const Step& st : traj.steps) {
    if (s.done) break;
    StepResult r = step(env, s, st.action);
    s = r.state;
    if (r.success) return true;
  }
  return success_of(env, s);
}

}  // namespace dualmdp
