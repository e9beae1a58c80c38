#include "dualmdp/env.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "dualmdp/rng.hpp"

namespace dualmdp {

namespace {

double clamp(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

// Distance from p to the segment anchor + t*axis, t in [lo, hi].
double rail_violation(const MotionConstraint& c, const Vec3& p) {
  const double t = clamp((p - c.anchor).dot(c.axis), c.lo, c.hi);
  return distance(p, c.anchor + c.axis * t);
}

double arc_angle(const MotionConstraint& c, const Vec3& p) {
  return std::atan2(p.y - c.center.y, p.x - c.center.x);
}

}  // namespace

double MotionConstraint::violation(const Vec3& p) const {
  switch (kind) {
    case ConstraintKind::kFreePoint:
      return 0.0;  // the placeholder point is wherever it is
    case ConstraintKind::kPlanarSlide:
      return std::fabs(p.z - anchor.z);
    case ConstraintKind::kLinearRail:
      return rail_violation(*this, p);
    case ConstraintKind::kHingeArc: {
      const double a = clamp(arc_angle(*this, p), lo, hi);
      return distance(p, point_at(a));
    }
  }
  return 0.0;
}

double MotionConstraint::param_of(const Vec3& p) const {
  if (kind == ConstraintKind::kLinearRail) return (p - anchor).dot(axis);
  if (kind == ConstraintKind::kHingeArc) return arc_angle(*this, p);
  return 0.0;
}

Vec3 MotionConstraint::point_at(double t) const {
  if (kind == ConstraintKind::kLinearRail) return anchor + axis * t;
  if (kind == ConstraintKind::kHingeArc)
    return {center.x + radius * std::cos(t), center.y + radius * std::sin(t),
            center.z};
  return anchor;
}

MotionConstraint MotionConstraint::reflected(double x_line) const {
  MotionConstraint m = *this;
  m.anchor = reflect(anchor, x_line);
  m.center = reflect(center, x_line);
  if (kind == ConstraintKind::kLinearRail) {
    m.axis = {-axis.x, axis.y, axis.z};
  } else if (kind == ConstraintKind::kHingeArc) {
    // x-negation maps angle a to pi - a and flips orientation
    m.lo = M_PI - hi;
    m.hi = M_PI - lo;
  }
  return m;
}

EnvState reset(const TaskEnv& env, uint64_t seed) {
  Rng rng(fnv1a_str(env.family, seed * 0x9e3779b97f4a7c15ull + 1));
  EnvState s;
  s.gripper = env.gripper_start +
              Vec3{rng.uniform(-TaskEnv::kResetJitter, TaskEnv::kResetJitter),
                   rng.uniform(-TaskEnv::kResetJitter, TaskEnv::kResetJitter),
                   rng.uniform(-TaskEnv::kResetJitter, TaskEnv::kResetJitter)};
  s.object_key = env.p_key;
  s.attached = false;
  s.step_count = 0;
  s.done = false;
  s.active_goal =
      env.goals.size() > 1 ? static_cast<int>(rng.index(env.goals.size())) : 0;
  return s;
}

bool success_of(const TaskEnv& env, const EnvState& state) {
  const Vec3& goal = env.goal(state.active_goal);
  const Vec3& probe = env.constraint.kind == ConstraintKind::kFreePoint
                          ? state.gripper
                          : state.object_key;
  return distance(probe, goal) < env.success_radius;
}

double shaped_reward(const TaskEnv& env, const EnvState& state) {
  // For free-point tasks the gripper itself is the key point.
  const Vec3& key = env.constraint.kind == ConstraintKind::kFreePoint
                        ? state.gripper
                        : state.object_key;
  const Vec3& goal = env.goal(state.active_goal);
  double r = (1.0 - std::tanh(10.0 * distance(state.gripper, key))) +
             2.0 * (1.0 - std::tanh(10.0 * distance(key, goal)));
  if (success_of(env, state)) r += 10.0;
  return r;
}

StepResult step(const TaskEnv& env, const EnvState& state, const Action& action) {
  if (state.done) throw std::logic_error("step: state is done");
  if (state.step_count >= env.horizon)
    throw std::logic_error("step: horizon exhausted");

  const Action a = action.clamped();
  const Vec3 d = a.displacement();
  EnvState next = state;

  switch (env.constraint.kind) {
    case ConstraintKind::kFreePoint:
      next.gripper = state.gripper + d;
      break;
    case ConstraintKind::kPlanarSlide: {
      // Contact decided on pre-move positions; the object follows the
      // gripper's in-plane displacement, no friction model.
      const bool contact = distance(state.gripper, state.object_key) <
                           env.constraint.contact_radius;
      next.gripper = state.gripper + d;
      if (contact) {
        next.object_key.x += d.x;
        next.object_key.y += d.y;
        next.attached = true;  // records first contact for the reach index
      }
      break;
    }
    case ConstraintKind::kLinearRail:
    case ConstraintKind::kHingeArc: {
      // Attachment is decided on the pre-move position so that the same
      // step's displacement is already constraint-projected.
      bool attached = state.attached;
      if (!attached &&
          distance(state.gripper, state.object_key) < TaskEnv::kAttachRadius &&
          a.f > 0.5) {
        attached = true;
      }
      if (attached) {
        // Commanded displacement projected onto the constraint tangent; the
        // residual is discarded and the gripper tracks the key point.
        const MotionConstraint& c = env.constraint;
        double t = c.param_of(state.object_key);
        if (c.kind == ConstraintKind::kLinearRail) {
          t = clamp(t + d.dot(c.axis), c.lo, c.hi);
        } else {
          const Vec3 tangent{-std::sin(t), std::cos(t), 0.0};
          t = clamp(t + d.dot(tangent) / c.radius, c.lo, c.hi);
        }
        next.attached = true;
        next.object_key = c.point_at(t);
        next.gripper = next.object_key;
      } else {
        next.gripper = state.gripper + d;
      }
      break;
    }
  }

  next.step_count = state.step_count + 1;
  StepResult out;
  out.success = success_of(env, next);
  out.done = out.success || next.step_count >= env.horizon;
  next.done = out.done;
  out.reward = shaped_reward(env, next);
  out.state = next;
  return out;
}

TaskEnv reconstruct_env(const TaskEnv& env, const EnvState& final_state) {
  if (env.exchange_family()) {
    if (!success_of(env, final_state))
      throw std::invalid_argument(
          "reconstruct_env: exchange variant needs a success terminal state");
    TaskEnv s = env;
    s.family = symmetric_family(env.family);
    s.p_key = env.goal(final_state.active_goal);
    s.goals = {env.p_key};
    return s;
  }
  return reconstruct_env(env);
}

TaskEnv reconstruct_env(const TaskEnv& env) {
  if (!env.reflection_family())
    throw std::invalid_argument(
        "reconstruct_env: reflection variant undefined for family " +
        env.family);
  const double mid = env.midline();
  TaskEnv s = env;
  s.family = symmetric_family(env.family);
  s.p_key = reflect(env.p_key, mid);
  s.goals.clear();
  for (const Vec3& g : env.goals) s.goals.push_back(reflect(g, mid));
  s.gripper_start = reflect(env.gripper_start, mid);
  s.constraint = env.constraint.reflected(mid);
  return s;
}

EnvState reflect_state(const EnvState& state, double x_line) {
  EnvState s = state;
  s.gripper = reflect(state.gripper, x_line);
  s.object_key = reflect(state.object_key, x_line);
  return s;
}

Obs reflect_obs(const Obs& o, double x_line) {
  Obs r = o;
  r[0] = reflect_x(o[0], x_line);
  r[3] = reflect_x(o[3], x_line);
  return r;
}

std::vector<EnvState> rollout(const TaskEnv& env, const EnvState& start,
                              const std::vector<Action>& actions) {
  std::vector<EnvState> states{start};
  for (const Action& a : actions) {
    if (states.back().done) break;
    states.push_back(step(env, states.back(), a).state);
  }
  return states;
}

std::string symmetric_family(const std::string& family) {
  static const std::map<std::string, std::string> pairs = {
      {"reach-left", "reach-right"},   {"reach-right", "reach-left"},
      {"push-right", "push-left"},     {"push-left", "push-right"},
      {"door-open", "door-close"},     {"door-close", "door-open"},
      {"drawer-close", "drawer-open"}, {"drawer-open", "drawer-close"},
      {"faucet-close", "faucet-open"}, {"faucet-open", "faucet-close"},
      {"window-open", "window-close"}, {"window-close", "window-open"},
  };
  auto it = pairs.find(family);
  if (it == pairs.end())
    throw std::invalid_argument("unknown task family: " + family);
  return it->second;
}

}  // namespace dualmdp
