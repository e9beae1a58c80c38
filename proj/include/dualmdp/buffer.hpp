#pragma once

#include <string>
#include <vector>

#include "dualmdp/trajectory.hpp"

namespace dualmdp {

// Replay buffer of symmetrical trajectories feeding offline AIRL training.
struct Buffer {
  std::vector<Trajectory> entries;
  int threshold = 4000;

  int count() const { return static_cast<int>(entries.size()); }
  // Full once the number of trajectories exceeds the threshold.
  bool is_full() const { return count() > threshold; }
};

// Throws std::invalid_argument on observation-dimension mismatch (all steps
// carry 6-dim observations by construction; serialized data is checked).
void buffer_push(Buffer& buf, Trajectory traj);

// Line-delimited persistence: one trajectory per line with task_id,
// reach_index, success flag and the step list as flat numeric arrays.
void save_buffer(const Buffer& buf, const std::string& path);
Buffer load_buffer(const std::string& path);

}  // namespace dualmdp
