#pragma once

// Neck angles for eye contact with the user. World frame is z-up; the agent
// faces +x at heading 0. Skeleton space is the BVH convention (y-up, +z
// forward, +x to the character's left).

#include "fva/geometry.hpp"
#include "fva/motion/kinematics.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <optional>
#include <stdexcept>

namespace fva {

class GazeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kFlexionLimit = 60.0;
inline constexpr double kRotationLimit = 80.0;
inline constexpr double kNeckSlewRate = 120.0;  // degrees per second
inline constexpr double kEyeOffset = 0.12;

struct GazeTarget {
  Eigen::Vector3d p_c;    // user's eye
  Eigen::Vector3d p_fva;  // agent neck base (plus eye offset)
  double heading{0.0};    // radians
};

struct NeckPose {
  double flexion{0.0};   // degrees
  double rotation{0.0};  // degrees

  bool operator==(const NeckPose&) const = default;
};

/// Direction to the user expressed in the agent frame.
inline Eigen::Vector3d agent_frame_direction(const GazeTarget& g) {
  const Eigen::Vector3d d = g.p_c - g.p_fva;
  if (!d.allFinite()) throw GazeError("gaze target is not finite");
  if (d.norm() <= 1e-6) throw GazeError("user and agent positions coincide");
  const Vec2 local = rotate({d.x(), d.y()}, -g.heading);
  return {local.x, local.y, d.z()};
}

/// asin-form angles before joint limits are applied.
inline NeckPose gaze_angles_unclamped(const GazeTarget& g) {
  const Eigen::Vector3d d = agent_frame_direction(g);
  const double n = d.norm();
  return {rad_to_deg(std::asin(std::clamp(d.z() / n, -1.0, 1.0))),
          rad_to_deg(std::asin(std::clamp(d.x() / n, -1.0, 1.0)))};
}

inline NeckPose clamp_neck(NeckPose p) {
  return {std::clamp(p.flexion, -kFlexionLimit, kFlexionLimit),
          std::clamp(p.rotation, -kRotationLimit, kRotationLimit)};
}

inline NeckPose gaze_angles(const GazeTarget& g) { return clamp_neck(gaze_angles_unclamped(g)); }

/// Moves `current` toward `target` by at most rate * dt per component.
inline double slew(double current, double target, double rate, double dt) {
  const double step = rate * dt;
  const double diff = target - current;
  if (std::abs(diff) <= step) return target;
  return current + (diff > 0.0 ? step : -step);
}

/// Which neck channels carry flexion and rotation, and how angles map onto
/// them: channel = sign * angle.
struct NeckRig {
  std::size_t joint{0};
  std::optional<std::size_t> head;  // first child of the neck, if any
  std::size_t flexion_channel{0};
  std::size_t rotation_channel{0};
  double flexion_sign{-1.0};  // positive Xrot pitches a +z-forward head down
  double rotation_sign{1.0};

  static NeckRig for_skeleton(const motion::Skeleton& sk, std::string_view neck = "Neck") {
    const auto j = sk.find(neck);
    if (!j) throw GazeError("skeleton '" + sk.id() + "' has no joint '" + std::string(neck) + "'");
    const auto fx = sk.channel_index(*j, motion::Channel::Xrot);
    const auto ry = sk.channel_index(*j, motion::Channel::Yrot);
    if (!fx || !ry) throw GazeError("neck joint lacks Xrot/Yrot channels");
    const auto rz = sk.channel_index(*j, motion::Channel::Zrot);
    if (*fx > *ry || (rz && *rz > *fx)) throw GazeError("neck channels must be in Z X Y order");
    NeckRig rig;
    rig.joint = *j;
    rig.flexion_channel = *fx;
    rig.rotation_channel = *ry;
    for (std::size_t k = *j + 1; k < sk.joint_count(); ++k) {
      if (sk.joint(k).parent == *j) {
        rig.head = k;
        break;
      }
    }
    return rig;
  }

  NeckPose read(const motion::JointConfig& c) const {
    return {c.channels.at(flexion_channel) * flexion_sign, c.channels.at(rotation_channel) * rotation_sign};
  }

  void write(motion::JointConfig& c, NeckPose p) const {
    c.channels.at(flexion_channel) = p.flexion * flexion_sign;
    c.channels.at(rotation_channel) = p.rotation * rotation_sign;
  }
};

/// Unit direction in the agent frame (x forward, y left, z up) described by
/// flexion / rotation angles. asin(d_x) loses the side, so `left` supplies it.
inline Eigen::Vector3d gaze_direction(const NeckPose& angles, bool left) {
  const double z = std::sin(deg_to_rad(angles.flexion));
  const double x = std::sin(deg_to_rad(angles.rotation));
  const double y = std::sqrt(std::max(0.0, 1.0 - x * x - z * z));
  return {x, left ? y : -y, z};
}

/// Agent-frame direction to skeleton space (x left, y up, z forward).
inline Eigen::Vector3d agent_to_skeleton(const Eigen::Vector3d& d) { return {d.y(), d.z(), d.x()}; }

/// Neck channel angles, in rig terms, that turn the head's forward axis (+z)
/// onto `dir` (skeleton space). The rest of `config`, including the neck's Z
/// channel and the head joint's own rotation, is kept.
inline NeckPose neck_look_at(const motion::Skeleton& sk, const motion::JointConfig& config, const NeckRig& rig,
                             const Eigen::Vector3d& dir) {
  const auto frames = motion::forward_kinematics_frames(sk, config);
  const auto parent = sk.joint(rig.joint).parent;
  Eigen::Matrix3d base = parent ? frames.rotations[*parent] : Eigen::Matrix3d::Identity();
  if (const auto zc = sk.channel_index(rig.joint, motion::Channel::Zrot)) {
    base = base * motion::detail::axis_rotation(2, config.channels[*zc]);
  }
  const Eigen::Vector3d u = base.transpose() * dir.normalized();
  const Eigen::Vector3d h =
      rig.head ? Eigen::Vector3d(motion::joint_rotation(sk, config, *rig.head) * Eigen::Vector3d::UnitZ())
               : Eigen::Vector3d::UnitZ();
  // Y turns h within the x-z plane until its x matches u, then X carries the
  // remaining (y, z) part onto u.
  const double r = std::hypot(h.x(), h.z());
  const double phi = r > 1e-12 ? std::asin(std::clamp(u.x() / r, -1.0, 1.0)) : 0.0;
  const double yrot = phi - std::atan2(h.x(), h.z());
  const double xrot = std::atan2(h.y(), r * std::cos(phi)) - std::atan2(u.y(), u.z());
  return {wrap_degrees(rad_to_deg(xrot)) * rig.flexion_sign, wrap_degrees(rad_to_deg(yrot)) * rig.rotation_sign};
}

/// Rate-limited neck update. `current` is the neck pose carried over from the
/// previous tick; the result is written into `config` and returned. Without
/// eye contact the neck drifts back to the clip's own neck angles.
inline NeckPose apply_gaze(motion::JointConfig& config, const NeckRig& rig, NeckPose current,
                           const NeckPose& target, bool xi, double dt) {
  const NeckPose goal = xi ? target : rig.read(config);
  const NeckPose next{slew(current.flexion, goal.flexion, kNeckSlewRate, dt),
                      slew(current.rotation, goal.rotation, kNeckSlewRate, dt)};
  rig.write(config, next);
  return next;
}

/// Skeleton-space point to world space for an agent at `pos` with `heading`.
inline Eigen::Vector3d skeleton_to_world(const Eigen::Vector3d& p, Vec2 pos, double heading) {
  const Vec2 h = rotate({p.z(), p.x()}, heading);
  return {pos.x + h.x, pos.y + h.y, p.y()};
}

/// Gaze origin: neck-base world position raised by the eye offset.
inline Eigen::Vector3d gaze_origin(const motion::Skeleton& sk, const motion::JointConfig& config,
                                   const NeckRig& rig, Vec2 pos, double heading,
                                   double eye_offset = kEyeOffset) {
  const auto pose = motion::forward_kinematics(sk, config);
  Eigen::Vector3d w = skeleton_to_world(pose.positions.at(rig.joint), pos, heading);
  w.z() += eye_offset;
  return w;
}

}  // namespace fva
