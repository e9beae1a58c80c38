#include "dualmdp/registry.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace dualmdp {

namespace {

using nlohmann::json;

TaskEnv make_rail(const std::string& family, Vec3 anchor, Vec3 axis, double lo,
                  double hi, double key_t, double goal_t, Vec3 gripper_start) {
  TaskEnv t;
  t.family = family;
  t.constraint.kind = ConstraintKind::kLinearRail;
  t.constraint.anchor = anchor;
  t.constraint.axis = axis;
  t.constraint.lo = lo;
  t.constraint.hi = hi;
  t.p_key = t.constraint.point_at(key_t);
  t.goals = {t.constraint.point_at(goal_t)};
  t.gripper_start = gripper_start;
  t.instruction_id = family;
  return t;
}

TaskEnv make_arc(const std::string& family, Vec3 center, double radius,
                 double lo, double hi, double key_a, double goal_a,
                 Vec3 gripper_start) {
  TaskEnv t;
  t.family = family;
  t.constraint.kind = ConstraintKind::kHingeArc;
  t.constraint.center = center;
  t.constraint.radius = radius;
  t.constraint.lo = lo;
  t.constraint.hi = hi;
  t.p_key = t.constraint.point_at(key_a);
  t.goals = {t.constraint.point_at(goal_a)};
  t.gripper_start = gripper_start;
  t.instruction_id = family;
  return t;
}

// Synthetic success terminal state, used to derive the exchange-variant
// symmetrical task from a train task without running a policy.
EnvState synthetic_success(const TaskEnv& env) {
  EnvState s;
  s.gripper = env.goal(0);
  s.object_key = env.goal(0);
  s.attached = true;
  s.step_count = 1;
  return s;
}

// Axis along which the whole object geometry of the meta-test task is
// shifted relative to the symmetrical task.
Vec3 perturbation_offset(const TaskEnv& sym) {
  switch (sym.constraint.kind) {
    case ConstraintKind::kFreePoint:
    case ConstraintKind::kPlanarSlide:
      return {0.0, 0.05, 0.0};
    case ConstraintKind::kLinearRail:
      // perpendicular to the rail so parameters stay aligned
      return sym.constraint.axis.x != 0.0 ? Vec3{0.0, 0.05, 0.0}
                                          : Vec3{0.05, 0.0, 0.0};
    case ConstraintKind::kHingeArc:
      return {0.0, 0.0, 0.05};
  }
  return {0.0, 0.05, 0.0};
}

TaskEnv perturbed_test_task(const TaskEnv& sym) {
  TaskEnv t = sym;
  const Vec3 off = perturbation_offset(sym);
  t.constraint.anchor = t.constraint.anchor + off;
  t.constraint.center = t.constraint.center + off;
  t.p_key = t.p_key + off;
  for (Vec3& g : t.goals) g = g + off;
  if (t.constraint.kind == ConstraintKind::kLinearRail ||
      t.constraint.kind == ConstraintKind::kHingeArc) {
    const double mid = 0.5 * (t.constraint.lo + t.constraint.hi);
    const double half = 0.5 * (t.constraint.hi - t.constraint.lo);
    t.constraint.lo = mid - 1.1 * half;
    t.constraint.hi = mid + 1.1 * half;
  }
  return t;
}

TaskEnv derive_sym(const TaskEnv& train) {
  return train.exchange_family()
             ? reconstruct_env(train, synthetic_success(train))
             : reconstruct_env(train);
}

TaskSetRegistry derive_sets(std::vector<TaskEnv> train,
                            std::map<std::string, std::string> instructions) {
  TaskSetRegistry reg;
  reg.train_tasks = std::move(train);
  reg.instructions = std::move(instructions);
  for (const TaskEnv& t : reg.train_tasks) {
    TaskEnv sym = derive_sym(t);
    sym.instruction_id = sym.family;
    TaskEnv test = perturbed_test_task(sym);
    reg.sym_tasks.push_back(std::move(sym));
    reg.test_tasks.push_back(std::move(test));
  }
  return reg;
}

json vec_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
Vec3 vec_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

const char* kind_name(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::kFreePoint: return "free-point";
    case ConstraintKind::kPlanarSlide: return "planar-slide";
    case ConstraintKind::kLinearRail: return "linear-rail";
    case ConstraintKind::kHingeArc: return "hinge-arc";
  }
  return "free-point";
}

ConstraintKind kind_from_name(const std::string& s) {
  if (s == "free-point") return ConstraintKind::kFreePoint;
  if (s == "planar-slide") return ConstraintKind::kPlanarSlide;
  if (s == "linear-rail") return ConstraintKind::kLinearRail;
  if (s == "hinge-arc") return ConstraintKind::kHingeArc;
  throw std::invalid_argument("unknown constraint kind: " + s);
}

}  // namespace

const TaskEnv& TaskSetRegistry::find(const std::string& family) const {
  for (const auto* set : {&train_tasks, &sym_tasks, &test_tasks})
    for (const TaskEnv& t : *set)
      if (t.family == family) return t;
  throw std::invalid_argument("registry: no task family " + family);
}

const std::string& TaskSetRegistry::instruction_text(const std::string& id) const {
  auto it = instructions.find(id);
  if (it == instructions.end())
    throw std::invalid_argument("registry: no instruction " + id);
  return it->second;
}

void TaskSetRegistry::validate() const {
  if (train_tasks.size() != sym_tasks.size() ||
      train_tasks.size() != test_tasks.size())
    throw std::logic_error("registry: set sizes differ");
  for (size_t i = 0; i < train_tasks.size(); ++i) {
    const TaskEnv derived = derive_sym(train_tasks[i]);
    const TaskEnv& sym = sym_tasks[i];
    if (derived.family != sym.family ||
        distance(derived.p_key, sym.p_key) > 1e-12 ||
        distance(derived.goal(0), sym.goal(0)) > 1e-12)
      throw std::logic_error("registry: sym task " + sym.family +
                             " is not the reconstruction of its train task");
    if (distance(test_tasks[i].p_key, sym.p_key) < 1e-9)
      throw std::logic_error("registry: test task " + test_tasks[i].family +
                             " has no perturbation");
    instruction_text(train_tasks[i].instruction_id);
    instruction_text(sym.instruction_id);
  }
}

TaskSetRegistry builtin_registry() {
  std::vector<TaskEnv> train;

  {  // reach-left: free point, two goals on the left, midline x = 0.5
    TaskEnv t;
    t.family = "reach-left";
    t.constraint.kind = ConstraintKind::kFreePoint;
    t.constraint.anchor = {0.5, 0.5, 0.5};
    t.p_key = {0.5, 0.5, 0.5};
    t.goals = {{0.30, 0.40, 0.5}, {0.30, 0.65, 0.5}};
    t.gripper_start = {0.5, 0.35, 0.5};
    t.instruction_id = t.family;
    train.push_back(t);
  }
  {  // push-right: puck slides in the plane z = 0.1, two goals on the right
    TaskEnv t;
    t.family = "push-right";
    t.constraint.kind = ConstraintKind::kPlanarSlide;
    t.constraint.anchor = {0.5, 0.45, 0.1};
    t.constraint.contact_radius = 0.04;
    t.p_key = {0.5, 0.45, 0.1};
    t.goals = {{0.68, 0.40, 0.1}, {0.68, 0.58, 0.1}};
    t.gripper_start = {0.5, 0.20, 0.1};
    t.instruction_id = t.family;
    train.push_back(t);
  }
  // door-open: handle swings from the closed stop to the open stop
  train.push_back(make_arc("door-open", {0.30, 0.60, 0.35}, 0.20, 0.2, 2.0,
                           0.2, 2.0, {0.55, 0.45, 0.35}));
  // drawer-close: handle on a y rail, open at y=0.55, closed at y=0.30
  train.push_back(make_rail("drawer-close", {0.5, 0.0, 0.3}, {0.0, 1.0, 0.0},
                            0.30, 0.55, 0.55, 0.30, {0.5, 0.1, 0.3}));
  // faucet-close: lever swings from the open stop to the closed stop
  train.push_back(make_arc("faucet-close", {0.60, 0.40, 0.50}, 0.15, 0.9, 2.6,
                           2.6, 0.9, {0.45, 0.25, 0.50}));
  // window-open: sash on an x rail, closed at x=0.35, open at x=0.60
  train.push_back(make_rail("window-open", {0.0, 0.6, 0.45}, {1.0, 0.0, 0.0},
                            0.35, 0.60, 0.35, 0.60, {0.5, 0.30, 0.45}));

  std::map<std::string, std::string> instr = {
      {"reach-left", "reach to left"},
      {"reach-right", "reach to right"},
      {"push-right", "slide right the puck"},
      {"push-left", "slide left the puck"},
      {"door-open", "open the door"},
      {"door-close", "close the door"},
      {"drawer-close", "push forward the drawer handle"},
      {"drawer-open", "pull backward the drawer handle"},
      {"faucet-close", "close the faucet"},
      {"faucet-open", "open the faucet"},
      {"window-open", "open the window"},
      {"window-close", "close the window"},
  };
  return derive_sets(std::move(train), std::move(instr));
}

TaskSetRegistry load_registry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open registry config: " + path);
  json doc = json::parse(in);

  std::vector<TaskEnv> train;
  std::map<std::string, std::string> instructions;
  for (const json& rec : doc.at("tasks")) {
    TaskEnv t;
    t.family = rec.at("family").get<std::string>();
    const json& c = rec.at("constraint");
    t.constraint.kind = kind_from_name(c.at("kind").get<std::string>());
    if (c.contains("anchor")) t.constraint.anchor = vec_from_json(c["anchor"]);
    if (c.contains("axis")) t.constraint.axis = vec_from_json(c["axis"]);
    if (c.contains("center")) t.constraint.center = vec_from_json(c["center"]);
    if (c.contains("radius")) t.constraint.radius = c["radius"].get<double>();
    if (c.contains("lo")) t.constraint.lo = c["lo"].get<double>();
    if (c.contains("hi")) t.constraint.hi = c["hi"].get<double>();
    if (c.contains("contact_radius"))
      t.constraint.contact_radius = c["contact_radius"].get<double>();
    t.p_key = vec_from_json(rec.at("p_key"));
    for (const json& g : rec.at("goals")) t.goals.push_back(vec_from_json(g));
    t.gripper_start = vec_from_json(rec.at("gripper_start"));
    t.horizon = rec.at("horizon").get<int>();
    t.success_radius = rec.at("success_radius").get<double>();
    t.instruction_id = rec.at("instruction_id").get<std::string>();
    instructions[t.instruction_id] = rec.at("instruction").get<std::string>();
    instructions[symmetric_family(t.family)] =
        rec.at("instruction_sym").get<std::string>();
    train.push_back(std::move(t));
  }
  TaskSetRegistry reg = derive_sets(std::move(train), std::move(instructions));
  reg.validate();
  return reg;
}

void save_registry_config(const TaskSetRegistry& reg, const std::string& path) {
  json tasks = json::array();
  for (const TaskEnv& t : reg.train_tasks) {
    json c;
    c["kind"] = kind_name(t.constraint.kind);
    switch (t.constraint.kind) {
      case ConstraintKind::kFreePoint:
        c["anchor"] = vec_to_json(t.constraint.anchor);
        break;
      case ConstraintKind::kPlanarSlide:
        c["anchor"] = vec_to_json(t.constraint.anchor);
        c["contact_radius"] = t.constraint.contact_radius;
        break;
      case ConstraintKind::kLinearRail:
        c["anchor"] = vec_to_json(t.constraint.anchor);
        c["axis"] = vec_to_json(t.constraint.axis);
        c["lo"] = t.constraint.lo;
        c["hi"] = t.constraint.hi;
        break;
      case ConstraintKind::kHingeArc:
        c["center"] = vec_to_json(t.constraint.center);
        c["radius"] = t.constraint.radius;
        c["lo"] = t.constraint.lo;
        c["hi"] = t.constraint.hi;
        break;
    }
    json rec;
    rec["family"] = t.family;
    rec["constraint"] = c;
    rec["p_key"] = vec_to_json(t.p_key);
    json goals = json::array();
    for (const Vec3& g : t.goals) goals.push_back(vec_to_json(g));
    rec["goals"] = goals;
    rec["gripper_start"] = vec_to_json(t.gripper_start);
    rec["horizon"] = t.horizon;
    rec["success_radius"] = t.success_radius;
    rec["instruction_id"] = t.instruction_id;
    rec["instruction"] = reg.instruction_text(t.instruction_id);
    rec["instruction_sym"] = reg.instruction_text(symmetric_family(t.family));
    tasks.push_back(std::move(rec));
  }
  json doc;
  doc["tasks"] = std::move(tasks);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write registry config: " + path);
  out << doc.dump(2) << "\n";
}

std::vector<std::string> group_families(const std::string& group) {
  if (group == "A") return {"reach-left", "push-right"};
  if (group == "B") return {"door-open", "drawer-close"};
  if (group == "C") return {"faucet-close", "window-open"};
  if (group == "ALL")
    return {"reach-left", "push-right", "door-open",
            "drawer-close", "faucet-close", "window-open"};
  throw std::invalid_argument("unknown group: " + group +
                              " (expected A, B, C or ALL)");
}

}  // namespace dualmdp
