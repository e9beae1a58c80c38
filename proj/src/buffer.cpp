#include "dualmdp/buffer.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace dualmdp {

namespace {
using nlohmann::json;
constexpr size_t kObsDim = 6;
constexpr size_t kActDim = 4;
}  // namespace

void buffer_push(Buffer& buf, Trajectory traj) {
  if (traj.final_state.size() != kObsDim)
    throw std::invalid_argument("buffer_push: observation dimension mismatch");
  buf.entries.push_back(std::move(traj));
}

void save_buffer(const Buffer& buf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write buffer file: " + path);
  for (const Trajectory& t : buf.entries) {
    json rec;
    rec["task_id"] = t.task_id;
    rec["reach_index"] = t.reach_index;
    rec["success"] = t.success;
    json states = json::array();
    json actions = json::array();
    json rewards = json::array();
    for (const Step& s : t.steps) {
      for (double v : s.state) states.push_back(v);
      actions.push_back(s.action.dx);
      actions.push_back(s.action.dy);
      actions.push_back(s.action.dz);
      actions.push_back(s.action.f);
      rewards.push_back(s.reward);
    }
    for (double v : t.final_state) states.push_back(v);
    rec["states"] = std::move(states);
    rec["actions"] = std::move(actions);
    rec["rewards"] = std::move(rewards);
    out << rec.dump() << "\n";
  }
}

Buffer load_buffer(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open buffer file: " + path);
  Buffer buf;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    Trajectory t;
    t.task_id = rec.at("task_id").get<std::string>();
    t.reach_index = rec.at("reach_index").get<int>();
    t.success = rec.at("success").get<bool>();
    const auto& states = rec.at("states");
    const auto& actions = rec.at("actions");
    const auto& rewards = rec.at("rewards");
    const size_t n = rewards.size();
    if (states.size() != kObsDim * (n + 1) || actions.size() != kActDim * n)
      throw std::invalid_argument("load_buffer: flat array size mismatch");
    t.steps.resize(n);
    for (size_t i = 0; i < n; ++i) {
      for (size_t d = 0; d < kObsDim; ++d)
        t.steps[i].state[d] = states[i * kObsDim + d].get<double>();
      t.steps[i].action = {actions[i * kActDim].get<double>(),
                           actions[i * kActDim + 1].get<double>(),
                           actions[i * kActDim + 2].get<double>(),
                           actions[i * kActDim + 3].get<double>()};
      t.steps[i].reward = rewards[i].get<double>();
    }
    for (size_t d = 0; d < kObsDim; ++d)
      t.final_state[d] = states[n * kObsDim + d].get<double>();
    buffer_push(buf, std::move(t));
  }
  return buf;
}

}  // namespace dualmdp
