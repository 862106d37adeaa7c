#pragma once

#include "fva/motion/clip.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace fva::motion {

inline nlohmann::json skeleton_to_json(const Skeleton& sk) {
  nlohmann::json joints = nlohmann::json::array();
  for (const auto& j : sk.joints()) {
    nlohmann::json chans = nlohmann::json::array();
    for (auto c : j.channels) chans.push_back(std::string(channel_name(c)));
    joints.push_back({
        {"name", j.name},
        {"parent", j.parent ? nlohmann::json(*j.parent) : nlohmann::json(nullptr)},
        {"offset", {j.offset.x(), j.offset.y(), j.offset.z()}},
        {"channels", chans},
        {"end_site", j.end_site ? nlohmann::json{j.end_site->x(), j.end_site->y(), j.end_site->z()}
                                : nlohmann::json(nullptr)},
    });
  }
  return {{"id", sk.id()}, {"joints", joints}};
}

inline Skeleton skeleton_from_json(const nlohmann::json& j) {
  auto vec3 = [](const nlohmann::json& a) {
    if (!a.is_array() || a.size() != 3) throw MotionError("expected a 3-vector");
    return Eigen::Vector3d(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
  };
  std::vector<Joint> joints;
  for (const auto& jj : j.at("joints")) {
    Joint joint;
    joint.name = jj.at("name").get<std::string>();
    if (!jj.at("parent").is_null()) joint.parent = jj.at("parent").get<std::size_t>();
    joint.offset = vec3(jj.at("offset"));
    for (const auto& c : jj.at("channels")) {
      const auto name = c.get<std::string>();
      auto parsed = parse_channel(name);
      if (!parsed) throw MotionError("unsupported channel '" + name + "'");
      joint.channels.push_back(*parsed);
    }
    if (jj.contains("end_site") && !jj.at("end_site").is_null()) joint.end_site = vec3(jj.at("end_site"));
    joints.push_back(std::move(joint));
  }
  return Skeleton(j.value("id", std::string{}), std::move(joints));
}

/// Canonical clip interchange document:
/// {id, kind, skeleton, frame_time, loopable, frames: [[floats]]}.
inline nlohmann::json clip_to_json(const MotionClip& clip) {
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : clip.frames) frames.push_back(f.channels);
  return {
      {"id", clip.id},
      {"kind", std::string(to_string(clip.kind))},
      {"skeleton", skeleton_to_json(*clip.skeleton)},
      {"frame_time", clip.frame_time},
      {"loopable", clip.loopable},
      {"frames", frames},
  };
}

inline MotionClip clip_from_json(const nlohmann::json& j) {
  MotionClip clip;
  clip.id = j.at("id").get<std::string>();
  clip.kind = parse_clip_kind(j.at("kind").get<std::string>());
  clip.skeleton = std::make_shared<const Skeleton>(skeleton_from_json(j.at("skeleton")));
  clip.frame_time = j.at("frame_time").get<double>();
  clip.loopable = j.value("loopable", false);
  for (const auto& f : j.at("frames")) clip.frames.push_back(JointConfig{f.get<std::vector<double>>()});
  clip.validate();
  return clip;
}

inline MotionClip load_clip_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MotionError("cannot open '" + path + "'");
  return clip_from_json(nlohmann::json::parse(in));
}

}  // namespace fva::motion
