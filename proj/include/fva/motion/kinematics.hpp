#pragma once

#include "fva/geometry.hpp"
#include "fva/motion/clip.hpp"

#include <Eigen/Geometry>

#include <vector>

namespace fva::motion {

/// World position of every joint (meters), in skeleton joint order.
struct Pose {
  std::vector<Eigen::Vector3d> positions;
};

namespace detail {

inline Eigen::Matrix3d axis_rotation(int axis, double degrees) {
  const double r = deg_to_rad(degrees);
  return Eigen::AngleAxisd(r, Eigen::Vector3d::Unit(axis)).toRotationMatrix();
}

}  // namespace detail

/// Local rotation of a joint: rotation channels composed left to right in the
/// order they are declared (Z X Y gives Rz * Rx * Ry).
inline Eigen::Matrix3d joint_rotation(const Skeleton& skeleton, const JointConfig& config,
                                      std::size_t joint) {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  const auto& chans = skeleton.joint(joint).channels;
  const std::size_t start = skeleton.channel_start(joint);
  for (std::size_t k = 0; k < chans.size(); ++k) {
    if (is_rotation(chans[k])) r = r * detail::axis_rotation(channel_axis(chans[k]), config.channels[start + k]);
  }
  return r;
}

/// Local translation of a joint: its offset plus any position channels.
inline Eigen::Vector3d joint_translation(const Skeleton& skeleton, const JointConfig& config,
                                         std::size_t joint) {
  Eigen::Vector3d t = skeleton.joint(joint).offset;
  const auto& chans = skeleton.joint(joint).channels;
  const std::size_t start = skeleton.channel_start(joint);
  for (std::size_t k = 0; k < chans.size(); ++k) {
    if (!is_rotation(chans[k])) t[channel_axis(chans[k])] += config.channels[start + k];
  }
  return t;
}

/// Global rotation of each joint alongside the pose; used to get facing
/// directions of individual bones.
struct PoseFrames {
  Pose pose;
  std::vector<Eigen::Matrix3d> rotations;
};

inline PoseFrames forward_kinematics_frames(const Skeleton& skeleton, const JointConfig& config) {
  if (config.channels.size() != skeleton.channel_count()) {
    throw MotionError("configuration does not match skeleton");
  }
  PoseFrames out;
  const std::size_t n = skeleton.joint_count();
  out.pose.positions.resize(n);
  out.rotations.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Eigen::Matrix3d local_r = joint_rotation(skeleton, config, j);
    const Eigen::Vector3d local_t = joint_translation(skeleton, config, j);
    if (const auto p = skeleton.joint(j).parent) {
      out.pose.positions[j] = out.pose.positions[*p] + out.rotations[*p] * local_t;
      out.rotations[j] = out.rotations[*p] * local_r;
    } else {
      out.pose.positions[j] = local_t;
      out.rotations[j] = local_r;
    }
  }
  return out;
}

inline Pose forward_kinematics(const Skeleton& skeleton, const JointConfig& config) {
  return forward_kinematics_frames(skeleton, config).pose;
}

}  // namespace fva::motion
