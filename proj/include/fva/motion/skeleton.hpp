#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fva::motion {

class MotionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Channel { Xpos, Ypos, Zpos, Xrot, Yrot, Zrot };

inline constexpr std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::Xpos: return "Xposition";
    case Channel::Ypos: return "Yposition";
    case Channel::Zpos: return "Zposition";
    case Channel::Xrot: return "Xrotation";
    case Channel::Yrot: return "Yrotation";
    case Channel::Zrot: return "Zrotation";
  }
  return "";
}

inline std::optional<Channel> parse_channel(std::string_view s) {
  for (Channel c : {Channel::Xpos, Channel::Ypos, Channel::Zpos, Channel::Xrot, Channel::Yrot,
                    Channel::Zrot}) {
    if (channel_name(c) == s) return c;
  }
  return std::nullopt;
}

inline constexpr bool is_rotation(Channel c) {
  return c == Channel::Xrot || c == Channel::Yrot || c == Channel::Zrot;
}

/// Axis index 0..2 of a channel (X, Y or Z).
inline constexpr int channel_axis(Channel c) {
  switch (c) {
    case Channel::Xpos:
    case Channel::Xrot: return 0;
    case Channel::Ypos:
    case Channel::Yrot: return 1;
    case Channel::Zpos:
    case Channel::Zrot: return 2;
  }
  return 0;
}

struct Joint {
  std::string name;
  std::optional<std::size_t> parent;
  Eigen::Vector3d offset{Eigen::Vector3d::Zero()};  // meters
  std::vector<Channel> channels;
  std::optional<Eigen::Vector3d> end_site;  // meters, relative to this joint

  bool operator==(const Joint&) const = default;
};

/// Hierarchical joint tree stored parent-before-child. Channel values of all
/// joints are laid out contiguously in joint order (the BVH frame layout).
class Skeleton {
 public:
  Skeleton() = default;

  Skeleton(std::string id, std::vector<Joint> joints) : id_(std::move(id)), joints_(std::move(joints)) {
    validate();
    std::size_t offset = 0;
    for (const auto& j : joints_) {
      channel_start_.push_back(offset);
      offset += j.channels.size();
    }
    channel_count_ = offset;
  }

  const std::string& id() const { return id_; }
  const std::vector<Joint>& joints() const { return joints_; }
  std::size_t joint_count() const { return joints_.size(); }
  std::size_t channel_count() const { return channel_count_; }
  std::size_t channel_start(std::size_t joint) const { return channel_start_.at(joint); }
  const Joint& joint(std::size_t i) const { return joints_.at(i); }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < joints_.size(); ++i) {
      if (joints_[i].name == name) return i;
    }
    return std::nullopt;
  }

  std::size_t index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw MotionError("unknown joint '" + std::string(name) + "'");
  }

  /// Channel slot of `joint` carrying `c`, if the joint has that channel.
  std::optional<std::size_t> channel_index(std::size_t joint, Channel c) const {
    const auto& chans = joints_.at(joint).channels;
    for (std::size_t k = 0; k < chans.size(); ++k) {
      if (chans[k] == c) return channel_start_[joint] + k;
    }
    return std::nullopt;
  }

  bool operator==(const Skeleton& o) const { return id_ == o.id_ && joints_ == o.joints_; }

 private:
  void validate() const {
    if (joints_.empty()) throw MotionError("skeleton has no joints");
    if (joints_[0].parent) throw MotionError("first joint must be the root");
    for (std::size_t i = 1; i < joints_.size(); ++i) {
      const auto& p = joints_[i].parent;
      if (!p) throw MotionError("joint '" + joints_[i].name + "' is a second root");
      if (*p >= i) throw MotionError("joint '" + joints_[i].name + "' precedes its parent");
    }
    for (const auto& j : joints_) {
      if (j.channels.size() != 3 && j.channels.size() != 6) {
        throw MotionError("joint '" + j.name + "' must have 3 or 6 channels");
      }
      for (std::size_t a = 0; a < j.channels.size(); ++a) {
        for (std::size_t b = a + 1; b < j.channels.size(); ++b) {
          if (j.channels[a] == j.channels[b]) {
            throw MotionError("joint '" + j.name + "' repeats a channel");
          }
        }
      }
    }
  }

  std::string id_;
  std::vector<Joint> joints_;
  std::vector<std::size_t> channel_start_;
  std::size_t channel_count_{0};
};

}  // namespace fva::motion
