#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dualmdp/geometry.hpp"

namespace dualmdp {

// Movement rule of the object key point.
enum class ConstraintKind {
  kFreePoint,    // reach: key point is a fixed placeholder, never moves
  kPlanarSlide,  // push: object translates in the xy-plane on gripper contact
  kLinearRail,   // drawer, window: key point slides on an axis segment
  kHingeArc,     // door, faucet: key point swings on a horizontal arc
};

struct MotionConstraint {
  ConstraintKind kind = ConstraintKind::kFreePoint;

  // linear-rail: object = anchor + t * axis, t in [lo, hi]
  Vec3 anchor;
  Vec3 axis;  // unit direction
  // hinge-arc: object = center + radius*(cos a, sin a, 0), a in [lo, hi],
  // counter-clockwise positive seen from +z, range within [0, pi]
  Vec3 center;
  double radius = 0.0;
  // shared parameter limits (rail coordinate or arc angle)
  double lo = 0.0;
  double hi = 0.0;
  // planar-slide
  double contact_radius = 0.0;

  // Residual of the constraint at point p (0 when satisfied).
  double violation(const Vec3& p) const;
  // Scalar parameter (rail coordinate / arc angle) of an on-constraint point.
  double param_of(const Vec3& p) const;
  Vec3 point_at(double t) const;
  // Reflect the constraint geometry about the plane x = x_line.
  MotionConstraint reflected(double x_line) const;
};

struct EnvState {
  Vec3 gripper;
  Vec3 object_key;
  bool attached = false;
  int step_count = 0;
  bool done = false;
  int active_goal = 0;  // index into TaskEnv::goals

  Obs observation() const { return make_obs(gripper, object_key); }
};

struct TaskEnv {
  std::string family;  // e.g. "drawer-close"
  MotionConstraint constraint;
  Vec3 p_key;
  std::vector<Vec3> goals;  // >1 entries only for reach/push
  Vec3 gripper_start;
  int horizon = 150;
  double success_radius = 0.02;
  std::string instruction_id;

  static constexpr double kAttachRadius = 0.03;
  static constexpr double kResetJitter = 0.01;

  const Vec3& goal(int idx) const { return goals[static_cast<size_t>(idx)]; }
  bool exchange_family() const {
    return constraint.kind == ConstraintKind::kLinearRail ||
           constraint.kind == ConstraintKind::kHingeArc;
  }
  bool reflection_family() const {
    return constraint.kind == ConstraintKind::kFreePoint ||
           constraint.kind == ConstraintKind::kPlanarSlide;
  }
  // Vertical symmetry line through the object midpoint (reflection families).
  double midline() const { return p_key.x; }
};

struct StepResult {
  EnvState state;
  double reward = 0.0;
  bool done = false;
  bool success = false;
};

// Gripper start plus seeded jitter, object at p_key, one seeded goal choice.
EnvState reset(const TaskEnv& env, uint64_t seed);

// One kinematic step. Throws std::logic_error when stepping a done state.
StepResult step(const TaskEnv& env, const EnvState& state, const Action& action);

bool success_of(const TaskEnv& env, const EnvState& state);
double shaped_reward(const TaskEnv& env, const EnvState& state);

// Exchange variant (rail/arc): swap key and goal, object starts at old goal.
// Reflection variant (reach/push): mirror geometry about the midline.
// Throws std::invalid_argument for families without the needed structure.
TaskEnv reconstruct_env(const TaskEnv& env, const EnvState& final_state);
TaskEnv reconstruct_env(const TaskEnv& env);  // reflection variant only

// Map all x coordinates through x -> 2*x_line - x.
EnvState reflect_state(const EnvState& state, double x_line);
Obs reflect_obs(const Obs& o, double x_line);

// Open-loop rollout from an explicit start state; stops at done.
std::vector<EnvState> rollout(const TaskEnv& env, const EnvState& start,
                              const std::vector<Action>& actions);

// Name of the paired symmetrical task, e.g. "drawer-close" -> "drawer-open".
std::string symmetric_family(const std::string& family);

}  // namespace dualmdp
