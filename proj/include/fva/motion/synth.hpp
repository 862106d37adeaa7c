#pragma once

// Procedural reference rig and clips. They stand in for motion-captured data
// so the engine runs without external assets; the generated clips are also
// exported as BVH fixtures under data/clips.

#include "fva/motion/clip.hpp"

#include <cmath>
#include <numbers>

namespace fva::motion {

/// 16-joint, Y-up, +Z-forward rig (BVH convention). Offsets in meters.
inline std::shared_ptr<const Skeleton> reference_skeleton() {
  using C = Channel;
  const std::vector<C> root_ch{C::Xpos, C::Ypos, C::Zpos, C::Zrot, C::Xrot, C::Yrot};
  const std::vector<C> rot{C::Zrot, C::Xrot, C::Yrot};
  auto j = [&](std::string name, std::optional<std::size_t> parent, Eigen::Vector3d off,
               std::optional<Eigen::Vector3d> end = std::nullopt) {
    return Joint{std::move(name), parent, off, parent ? rot : root_ch, end};
  };
  std::vector<Joint> joints{
      j("Hips", std::nullopt, {0, 0, 0}),
      j("Spine", 0, {0, 0.25, 0}),
      j("Neck", 1, {0, 0.25, 0}),
      j("Head", 2, {0, 0.10, 0}, Eigen::Vector3d{0, 0.15, 0}),
      j("LeftArm", 1, {0.18, 0.22, 0}),
      j("LeftForeArm", 4, {0, -0.28, 0}),
      j("LeftHand", 5, {0, -0.25, 0}, Eigen::Vector3d{0, -0.08, 0}),
      j("RightArm", 1, {-0.18, 0.22, 0}),
      j("RightForeArm", 7, {0, -0.28, 0}),
      j("RightHand", 8, {0, -0.25, 0}, Eigen::Vector3d{0, -0.08, 0}),
      j("LeftUpLeg", 0, {0.09, -0.05, 0}),
      j("LeftLeg", 10, {0, -0.43, 0}),
      j("LeftFoot", 11, {0, -0.42, 0}, Eigen::Vector3d{0, -0.05, 0.12}),
      j("RightUpLeg", 0, {-0.09, -0.05, 0}),
      j("RightLeg", 13, {0, -0.43, 0}),
      j("RightFoot", 14, {0, -0.42, 0}, Eigen::Vector3d{0, -0.05, 0.12}),
  };
  return std::make_shared<const Skeleton>("reference16", std::move(joints));
}

inline constexpr double kHipHeight = 0.95;

/// Style parameters of a walk cycle, in degrees unless noted.
struct GaitStyle {
  double leg_swing{24.0};
  double knee_bend{30.0};
  double arm_swing{15.0};
  double spine_lean{2.0};  // forward lean
  double head_pitch{2.0};  // positive looks down
  double bob{0.015};       // meters
};

namespace detail {

inline void set_rot(const Skeleton& sk, JointConfig& cfg, std::string_view joint, Channel c, double v) {
  cfg.channels[*sk.channel_index(sk.index_of(joint), c)] = v;
}

inline JointConfig stance(const Skeleton& sk) {
  JointConfig cfg = zero_config(sk);
  cfg.channels[*sk.channel_index(0, Channel::Ypos)] = kHipHeight;
  return cfg;
}

}  // namespace detail

/// Looping in-place walk cycle; first and last frames coincide.
inline MotionClip synthesize_gait(std::string id, const GaitStyle& s, std::size_t frames = 120,
                                  double frame_time = 1.0 / 120.0) {
  const auto sk = reference_skeleton();
  MotionClip clip{std::move(id), ClipKind::Gait, sk, {}, frame_time, true};
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < frames; ++i) {
    const double phi = two_pi * static_cast<double>(i) / static_cast<double>(frames - 1);
    JointConfig cfg = detail::stance(*sk);
    using C = Channel;
    cfg.channels[*sk->channel_index(0, C::Ypos)] = kHipHeight + s.bob * std::cos(2.0 * phi);
    detail::set_rot(*sk, cfg, "Spine", C::Xrot, s.spine_lean);
    detail::set_rot(*sk, cfg, "Head", C::Xrot, s.head_pitch);
    detail::set_rot(*sk, cfg, "LeftUpLeg", C::Xrot, -s.leg_swing * std::sin(phi));
    detail::set_rot(*sk, cfg, "RightUpLeg", C::Xrot, s.leg_swing * std::sin(phi));
    detail::set_rot(*sk, cfg, "LeftLeg", C::Xrot, s.knee_bend * 0.5 * (1.0 - std::cos(phi)));
    detail::set_rot(*sk, cfg, "RightLeg", C::Xrot, s.knee_bend * 0.5 * (1.0 + std::cos(phi)));
    detail::set_rot(*sk, cfg, "LeftArm", C::Xrot, s.arm_swing * std::sin(phi));
    detail::set_rot(*sk, cfg, "RightArm", C::Xrot, -s.arm_swing * std::sin(phi));
    detail::set_rot(*sk, cfg, "LeftForeArm", C::Xrot, -0.4 * s.arm_swing);
    detail::set_rot(*sk, cfg, "RightForeArm", C::Xrot, -0.4 * s.arm_swing);
    clip.frames.push_back(std::move(cfg));
  }
  return clip;
}

/// Two head nods over one second.
inline MotionClip synthesize_nod(std::string id = "nod") {
  const auto sk = reference_skeleton();
  MotionClip clip{std::move(id), ClipKind::GestureHead, sk, {}, 1.0 / 60.0, false};
  for (std::size_t i = 0; i <= 60; ++i) {
    const double s = static_cast<double>(i) / 60.0;
    JointConfig cfg = detail::stance(*sk);
    detail::set_rot(*sk, cfg, "Head", Channel::Xrot, 15.0 * 0.5 * (1.0 - std::cos(4.0 * std::numbers::pi * s)));
    clip.frames.push_back(std::move(cfg));
  }
  return clip;
}

/// Right-hand wave over two seconds. The elbow bends before the upper arm
/// lifts so the hand never leaves the agent's footprint. The open variant
/// lifts the arm high with a wide forearm sweep; the closed variant keeps the
/// elbow low in front of the chest with a small sweep.
inline MotionClip synthesize_wave(bool open, std::string id = {}) {
  if (id.empty()) id = open ? "wave_open" : "wave_closed";
  const auto sk = reference_skeleton();
  MotionClip clip{std::move(id), ClipKind::GestureHand, sk, {}, 1.0 / 60.0, false};
  const double arm = open ? 150.0 : 20.0;       // upper arm flexion at full raise
  const double forearm = open ? 180.0 : 160.0;  // forearm angle from hanging, at full raise
  const double sweep_amp = open ? 20.0 : 10.0;
  const std::size_t n = 120;
  for (std::size_t i = 0; i <= n; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n);
    // raise during the first and lower during the last quarter second
    const double ramp = std::clamp(std::min(s, 1.0 - s) / 0.125, 0.0, 1.0);
    double a = 0.0;
    double c = 180.0 * ramp;
    double w = 0.0;
    if (ramp > 0.5) {
      const double v = 2.0 * ramp - 1.0;
      const double k = std::min(1.0, 4.0 * v);
      a = arm * v;
      c = 90.0 + (forearm - 90.0) * k;
      w = k;
    }
    const double sweep = std::sin(2.0 * std::numbers::pi * 3.0 * s);
    JointConfig cfg = detail::stance(*sk);
    using C = Channel;
    detail::set_rot(*sk, cfg, "RightArm", C::Xrot, -a);
    detail::set_rot(*sk, cfg, "RightForeArm", C::Xrot, -(c - a));
    detail::set_rot(*sk, cfg, "RightForeArm", C::Zrot, sweep_amp * sweep * w);
    clip.frames.push_back(std::move(cfg));
  }
  return clip;
}

}  // namespace fva::motion
