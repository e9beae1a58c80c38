#include "dualmdp/oracle.hpp"

#include <cmath>

namespace dualmdp {

namespace {

// Move toward target, landing exactly on it once it is within one step.
Action move_toward(const Vec3& from, const Vec3& target, double force) {
  const Vec3 d = target - from;
  const double span = d.inf_norm();
  if (span <= Action::kMaxStep) return Action{d.x, d.y, d.z, force}.clamped();
  const double s = Action::kMaxStep / span;
  return Action{d.x * s, d.y * s, d.z * s, force}.clamped();
}

// Step length toward the goal: land exactly on it in one final step taken
// from outside the success sphere, so the recorded trajectory ends on the
// goal itself rather than at the first crossing of the success radius.
double landing_step(double remaining_abs, double cruise) {
  constexpr double kLandWindow = 0.045;  // <= one action, > success radius
  constexpr double kStandOff = 0.0275;   // keeps the pre-landing point outside
  if (remaining_abs <= kLandWindow) return remaining_abs;
  return std::min(cruise, remaining_abs - kStandOff);
}

Action slide_rail(const TaskEnv& env, const EnvState& state,
                  const OracleConfig& cfg) {
  const MotionConstraint& c = env.constraint;
  const double t = c.param_of(state.object_key);
  const double goal_t = c.param_of(env.goal(state.active_goal));
  const double remaining = goal_t - t;
  const double mag = landing_step(std::fabs(remaining),
                                  std::min(cfg.rail_step, Action::kMaxStep));
  const double delta = remaining >= 0.0 ? mag : -mag;
  const Vec3 d = c.axis * delta;
  return Action{d.x, d.y, d.z, 1.0};
}

Action slide_arc(const TaskEnv& env, const EnvState& state,
                 const OracleConfig& cfg) {
  const MotionConstraint& c = env.constraint;
  const double a = c.param_of(state.object_key);
  const double goal_a = c.param_of(env.goal(state.active_goal));
  const double remaining = goal_a - a;
  const double mag =
      landing_step(std::fabs(remaining) * c.radius, cfg.arc_step) / c.radius;
  const double da = remaining >= 0.0 ? mag : -mag;
  const Vec3 tangent{-std::sin(a), std::cos(a), 0.0};
  const Vec3 d = tangent * (da * c.radius);
  return Action{d.x, d.y, d.z, 1.0};
}

}  // namespace

Action oracle_action(const TaskEnv& env, const EnvState& state,
                     const OracleConfig& cfg) {
  const Vec3& goal = env.goal(state.active_goal);
  switch (env.constraint.kind) {
    case ConstraintKind::kFreePoint:
      return move_toward(state.gripper, goal, 0.0);
    case ConstraintKind::kPlanarSlide: {
      // Contact radius is generous; once touching, the object follows the
      // gripper's planar displacement, so steering the gripper by the
      // object's error vector steers the object.
      if (distance(state.gripper, state.object_key) >=
          env.constraint.contact_radius)
        return move_toward(state.gripper, state.object_key, 0.0);
      const Vec3 err = goal - state.object_key;
      const double span = err.inf_norm();
      const double s =
          span <= Action::kMaxStep ? 1.0 : Action::kMaxStep / span;
      return Action{err.x * s, err.y * s, 0.0, 0.0}.clamped();
    }
    case ConstraintKind::kLinearRail:
    case ConstraintKind::kHingeArc: {
      if (!state.attached) {
        // Approach with the grip open and land exactly on the key point;
        // closing the grip early would attach mid-flight and bleed the
        // approach displacement into object motion.
        if (distance(state.gripper, state.object_key) < 1e-7)
          return {0.0, 0.0, 0.0, 1.0};
        return move_toward(state.gripper, state.object_key, 0.0);
      }
      return env.constraint.kind == ConstraintKind::kLinearRail
                 ? slide_rail(env, state, cfg)
                 : slide_arc(env, state, cfg);
    }
  }
  return {};
}

Trajectory run_oracle(const TaskEnv& env, uint64_t seed,
                      const OracleConfig& cfg) {
  EnvState s = reset(env, seed);
  Trajectory traj;
  traj.task_id = env.family;
  int first_reached = -1;
  int attached_age = 0;
  while (!s.done) {
    if (first_reached < 0 && s.attached)
      first_reached = static_cast<int>(traj.steps.size());
    Action a;
    if (s.attached && attached_age < cfg.grip_settle_steps &&
        env.exchange_family()) {
      a = {0.0, 0.0, 0.0, 1.0};
    } else {
      a = oracle_action(env, s, cfg);
    }
    if (s.attached) ++attached_age;
    StepResult r = step(env, s, a);
    traj.steps.push_back({s.observation(), a.clamped(), r.reward});
    traj.success = r.success;
    s = r.state;
  }
  traj.final_state = s.observation();
  traj.reach_index = first_reached < 0 ? 0 : first_reached;
  return traj;
}

}  // namespace dualmdp
