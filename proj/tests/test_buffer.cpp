#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "dualmdp/buffer.hpp"
#include "dualmdp/oracle.hpp"
#include "dualmdp/registry.hpp"

using namespace dualmdp;

namespace {

Trajectory tiny_traj(const std::string& id, int n, double base) {
  Trajectory t;
  t.task_id = id;
  for (int i = 0; i < n; ++i) {
    Step s;
    s.state = {base + i, 0.25, 0.5, 0.75, 1.0 - base, 0.125};
    s.action = {0.01, -0.02, 0.03, 1.0};
    s.reward = base * i;
    t.steps.push_back(s);
  }
  t.final_state = {base + n, 0.25, 0.5, 0.75, 1.0 - base, 0.125};
  t.reach_index = n / 2;
  t.success = true;
  return t;
}

}  // namespace

TEST_CASE("buffer is full only past the threshold") {
  Buffer buf;
  buf.threshold = 4000;
  CHECK(buf.count() == 0);
  for (int i = 0; i < 4000; ++i) buffer_push(buf, tiny_traj("x", 2, 0.1));
  CHECK(buf.count() == 4000);
  CHECK_FALSE(buf.is_full());
  buffer_push(buf, tiny_traj("x", 2, 0.1));
  CHECK(buf.is_full());
}

TEST_CASE("buffer persistence round-trips exactly") {
  Buffer buf;
  buf.entries.push_back(tiny_traj("drawer-open", 5, 0.123456789012345));
  buf.entries.push_back(tiny_traj("door-close", 3, 0.5));
  const TaskSetRegistry reg = builtin_registry();
  buf.entries.push_back(run_oracle(reg.find("drawer-close"), 4));

  const std::string path = "buffer_roundtrip.jsonl";
  save_buffer(buf, path);
  const Buffer loaded = load_buffer(path);
  REQUIRE(loaded.count() == buf.count());
  for (int k = 0; k < buf.count(); ++k) {
    const Trajectory& a = buf.entries[static_cast<size_t>(k)];
    const Trajectory& b = loaded.entries[static_cast<size_t>(k)];
    CHECK(a.task_id == b.task_id);
    CHECK(a.reach_index == b.reach_index);
    CHECK(a.success == b.success);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a.steps[i].state == b.steps[i].state);
      CHECK(a.steps[i].action.dx == b.steps[i].action.dx);
      CHECK(a.steps[i].action.f == b.steps[i].action.f);
      CHECK(a.steps[i].reward == b.steps[i].reward);
    }
    CHECK(a.final_state == b.final_state);
  }
  std::remove(path.c_str());
}

TEST_CASE("malformed records are rejected") {
  const std::string path = "buffer_bad.jsonl";
  {
    std::ofstream out(path);
    out << "{\"task_id\":\"x\",\"reach_index\":0,\"success\":true,"
           "\"states\":[1,2,3],\"actions\":[],\"rewards\":[]}\n";
  }
  CHECK_THROWS(load_buffer(path));
  std::remove(path.c_str());
}
