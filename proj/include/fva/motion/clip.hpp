#pragma once

#include "fva/geometry.hpp"
#include "fva/motion/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace fva::motion {

/// One skeleton configuration: every channel value in skeleton layout order.
/// Rotations are Euler angles in degrees, positions in meters.
struct JointConfig {
  std::vector<double> channels;

  bool operator==(const JointConfig&) const = default;
};

enum class ClipKind { Gait, GestureHand, GestureHead };

inline std::string_view to_string(ClipKind k) {
  switch (k) {
    case ClipKind::Gait: return "gait";
    case ClipKind::GestureHand: return "gesture_hand";
    case ClipKind::GestureHead: return "gesture_head";
  }
  return "";
}

inline ClipKind parse_clip_kind(std::string_view s) {
  if (s == "gait") return ClipKind::Gait;
  if (s == "gesture_hand") return ClipKind::GestureHand;
  if (s == "gesture_head") return ClipKind::GestureHead;
  throw MotionError("unknown clip kind '" + std::string(s) + "'");
}

struct MotionClip {
  std::string id;
  ClipKind kind{ClipKind::Gait};
  std::shared_ptr<const Skeleton> skeleton;
  std::vector<JointConfig> frames;
  double frame_time{1.0 / 120.0};
  bool loopable{false};

  /// Time from the first to the last frame.
  double duration() const {
    return frames.empty() ? 0.0 : static_cast<double>(frames.size() - 1) * frame_time;
  }

  void validate() const {
    if (!skeleton) throw MotionError("clip '" + id + "' has no skeleton");
    if (frames.empty()) throw MotionError("clip '" + id + "' has no frames");
    if (!(frame_time > 0.0) || !std::isfinite(frame_time)) {
      throw MotionError("clip '" + id + "' has non-positive frame time");
    }
    for (const auto& f : frames) {
      if (f.channels.size() != skeleton->channel_count()) {
        throw MotionError("clip '" + id + "' frame does not match skeleton channel layout");
      }
      for (double v : f.channels) {
        if (!std::isfinite(v)) throw MotionError("clip '" + id + "' has a non-finite value");
      }
    }
  }
};

/// Set of joints a composition layer may write.
class JointMask {
 public:
  JointMask() = default;

  JointMask(const Skeleton& skeleton, std::set<std::size_t> joints) : joints_(std::move(joints)) {
    for (auto j : joints_) {
      if (j >= skeleton.joint_count()) {
        throw MotionError("mask references joint " + std::to_string(j) + " outside skeleton");
      }
    }
  }

  static JointMask all(const Skeleton& skeleton) {
    std::set<std::size_t> js;
    for (std::size_t i = 0; i < skeleton.joint_count(); ++i) js.insert(i);
    return JointMask(skeleton, std::move(js));
  }

  static JointMask named(const Skeleton& skeleton, std::span<const std::string> names) {
    std::set<std::size_t> js;
    for (const auto& n : names) js.insert(skeleton.index_of(n));
    return JointMask(skeleton, std::move(js));
  }

  bool contains(std::size_t joint) const { return joints_.contains(joint); }
  const std::set<std::size_t>& joints() const { return joints_; }
  bool empty() const { return joints_.empty(); }

 private:
  std::set<std::size_t> joints_;
};

namespace detail {

inline JointConfig lerp_config(const Skeleton& sk, const JointConfig& a, const JointConfig& b,
                               double alpha) {
  JointConfig out = a;
  for (std::size_t j = 0; j < sk.joint_count(); ++j) {
    const auto& chans = sk.joint(j).channels;
    const std::size_t start = sk.channel_start(j);
    for (std::size_t k = 0; k < chans.size(); ++k) {
      const std::size_t i = start + k;
      const double delta = is_rotation(chans[k]) ? wrap_degrees(b.channels[i] - a.channels[i])
                                                 : b.channels[i] - a.channels[i];
      out.channels[i] = a.channels[i] + alpha * delta;
    }
  }
  return out;
}

}  // namespace detail

/// Samples a clip at time t >= 0 by per-channel linear interpolation between
/// the bracketing frames. Rotation channels take the shortest arc. When `loop`
/// is set, t wraps modulo the clip duration; otherwise it saturates at the last
/// frame.
inline JointConfig sample_clip(const MotionClip& clip, double t, bool loop) {
  const auto& frames = clip.frames;
  const double dur = clip.duration();
  if (frames.size() == 1 || dur <= 0.0) return frames.front();
  if (t <= 0.0) return frames.front();
  if (loop) {
    t = std::fmod(t, dur);
  } else if (t >= dur) {
    return frames.back();
  }
  const double pos = t / clip.frame_time;
  auto i0 = static_cast<std::size_t>(std::floor(pos));
  if (i0 >= frames.size() - 1) return loop ? frames.front() : frames.back();
  const double alpha = pos - static_cast<double>(i0);
  if (alpha == 0.0) return frames[i0];
  return detail::lerp_config(*clip.skeleton, frames[i0], frames[i0 + 1], alpha);
}

/// Blends `layer` into `base` on the masked joints: (1-w)*base + w*layer per
/// channel. Unmasked joints pass through.
inline JointConfig overlay(const Skeleton& skeleton, const JointConfig& base, const JointConfig& layer,
                           const JointMask& mask, double weight) {
  if (base.channels.size() != skeleton.channel_count() ||
      layer.channels.size() != skeleton.channel_count()) {
    throw MotionError("overlay inputs do not match skeleton");
  }
  for (auto j : mask.joints()) {
    if (j >= skeleton.joint_count()) throw MotionError("mask references joint outside skeleton");
  }
  const double w = std::clamp(weight, 0.0, 1.0);
  JointConfig out = base;
  if (w == 0.0) return out;
  for (auto j : mask.joints()) {
    const std::size_t start = skeleton.channel_start(j);
    const std::size_t n = skeleton.joint(j).channels.size();
    for (std::size_t i = start; i < start + n; ++i) {
      out.channels[i] = w == 1.0 ? layer.channels[i] : (1.0 - w) * base.channels[i] + w * layer.channels[i];
    }
  }
  return out;
}

inline JointConfig zero_config(const Skeleton& skeleton) {
  return JointConfig{std::vector<double>(skeleton.channel_count(), 0.0)};
}

}  // namespace fva::motion
