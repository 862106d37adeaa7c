#pragma once

#include "fva/motion/bvh.hpp"
#include "fva/motion/clip_json.hpp"
#include "fva/motion/synth.hpp"

#include <filesystem>
#include <map>

namespace fva::motion {

/// A clip plus the joints it is allowed to write when layered.
struct StoredClip {
  MotionClip clip;
  JointMask mask;
};

/// Joints whose channels change anywhere in the clip.
inline JointMask animated_joints(const MotionClip& clip) {
  const Skeleton& sk = *clip.skeleton;
  std::set<std::size_t> js;
  for (std::size_t j = 0; j < sk.joint_count(); ++j) {
    const std::size_t start = sk.channel_start(j);
    const std::size_t n = sk.joint(j).channels.size();
    for (const auto& f : clip.frames) {
      bool differs = false;
      for (std::size_t i = start; i < start + n; ++i) differs |= f.channels[i] != clip.frames[0].channels[i];
      if (differs) {
        js.insert(j);
        break;
      }
    }
  }
  return JointMask(sk, std::move(js));
}

/// Read-only catalogue of gait and gesture clips keyed by id.
class ClipStore {
 public:
  void add(MotionClip clip) {
    clip.validate();
    JointMask mask = clip.kind == ClipKind::Gait ? JointMask::all(*clip.skeleton) : animated_joints(clip);
    add(std::move(clip), std::move(mask));
  }

  void add(MotionClip clip, JointMask mask) {
    clip.validate();
    std::string id = clip.id;
    clips_.insert_or_assign(std::move(id), StoredClip{std::move(clip), std::move(mask)});
  }

  bool contains(const std::string& id) const { return clips_.contains(id); }

  const StoredClip& at(const std::string& id) const {
    auto it = clips_.find(id);
    if (it == clips_.end()) throw MotionError("clip '" + id + "' not in store");
    return it->second;
  }

  const std::map<std::string, StoredClip>& clips() const { return clips_; }

  /// Loads every *.bvh (kind inferred from the file name prefix) and *.json
  /// clip in a directory. BVH files named gait*.bvh or default*.bvh are
  /// looping gaits, nod*/shake* are head gestures, everything else a hand
  /// gesture.
  void load_directory(const std::filesystem::path& dir, double scale = 0.01) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
      const std::string stem = p.stem().string();
      if (p.extension() == ".bvh") {
        BvhOptions o;
        o.scale = scale;
        o.clip_id = stem;
        const bool gait = stem.starts_with("gait") || stem.starts_with("Gait") || stem.starts_with("default");
        o.kind = gait ? ClipKind::Gait
                      : (stem.starts_with("nod") || stem.starts_with("shake") ? ClipKind::GestureHead
                                                                             : ClipKind::GestureHand);
        o.loopable = gait;
        add(load_bvh(p.string(), o).second);
      } else if (p.extension() == ".json") {
        add(load_clip_json(p.string()));
      }
    }
  }

 private:
  std::map<std::string, StoredClip> clips_;
};

/// Gait styles of the bundled gait map entries.
inline GaitStyle builtin_gait_style(std::string_view id) {
  if (id == "Gait1") return {18.0, 25.0, 5.0, 8.0, 12.0, 0.010};
  if (id == "Gait2") return {22.0, 28.0, 11.0, 4.0, 6.0, 0.013};
  if (id == "Gait3") return {28.0, 34.0, 24.0, -2.0, -4.0, 0.020};
  return {24.0, 30.0, 15.0, 2.0, 2.0, 0.015};
}

/// Store with the procedural gaits Gait1..3 and default plus the nod and wave
/// gestures.
inline ClipStore builtin_clip_store() {
  ClipStore store;
  for (const char* id : {"Gait1", "Gait2", "Gait3", "default"}) {
    store.add(synthesize_gait(id, builtin_gait_style(id)));
  }
  store.add(synthesize_nod());
  store.add(synthesize_wave(true));
  store.add(synthesize_wave(false));
  return store;
}

}  // namespace fva::motion
