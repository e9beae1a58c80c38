#pragma once

#include <array>
#include <cmath>

namespace dualmdp {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  bool operator==(const Vec3& o) const = default;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double inf_norm() const {
    return std::max({std::fabs(x), std::fabs(y), std::fabs(z)});
  }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Reflection about the vertical plane x = x_line; y and z are untouched.
inline double reflect_x(double x, double x_line) { return 2.0 * x_line - x; }
inline Vec3 reflect(const Vec3& p, double x_line) {
  return {reflect_x(p.x, x_line), p.y, p.z};
}

// Gripper command for one time step: displacement plus grip force.
struct Action {
  double dx = 0.0;
  double dy = 0.0;
  double dz = 0.0;
  double f = 0.0;

  static constexpr double kMaxStep = 0.05;  // per-axis displacement bound

  Action clamped() const {
    auto clip = [](double v, double lo, double hi) {
      return v < lo ? lo : (v > hi ? hi : v);
    };
    return {clip(dx, -kMaxStep, kMaxStep), clip(dy, -kMaxStep, kMaxStep),
            clip(dz, -kMaxStep, kMaxStep), clip(f, 0.0, 1.0)};
  }
  Vec3 displacement() const { return {dx, dy, dz}; }
  bool within_bounds() const {
    return std::fabs(dx) <= kMaxStep && std::fabs(dy) <= kMaxStep &&
           std::fabs(dz) <= kMaxStep && f >= 0.0 && f <= 1.0;
  }
};

// 6-dim observation exposed to the agent: [gripper, object key point].
using Obs = std::array<double, 6>;

inline Obs make_obs(const Vec3& gripper, const Vec3& object_key) {
  return {gripper.x, gripper.y, gripper.z,
          object_key.x, object_key.y, object_key.z};
}
inline Vec3 obs_gripper(const Obs& o) { return {o[0], o[1], o[2]}; }
inline Vec3 obs_object(const Obs& o) { return {o[3], o[4], o[5]}; }

}  // namespace dualmdp
