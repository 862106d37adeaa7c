#include "fva/motion/bvh.hpp"
#include "fva/motion/clip_store.hpp"
#include "fva/motion/synth.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace fva::motion;

namespace {

const char* kMinimal = R"(HIERARCHY
ROOT Hips
{
  OFFSET 0 0 0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
  JOINT Spine
  {
    OFFSET 0 10 0
    CHANNELS 3 Zrotation Xrotation Yrotation
    End Site
    {
      OFFSET 0 5 0
    }
  }
}
MOTION
Frames: 1
Frame Time: 0.0083333
0 0 0 0 0 0 0 0 0
)";

BvhError parse_error(const std::string& text) {
  try {
    parse_bvh(text);
  } catch (const BvhError& e) {
    return e;
  }
  ADD_FAILURE() << "expected a BvhError";
  return BvhError(BvhErrorKind::Syntax, 0, 0, "none");
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto i = s.find(from);
  EXPECT_NE(i, std::string::npos) << from;
  return s.replace(i, from.size(), to);
}

}  // namespace

TEST(Bvh, MinimalTwoJointFile) {
  const auto [sk, clip] = parse_bvh(kMinimal);
  EXPECT_EQ(sk.joint_count(), 2u);
  EXPECT_EQ(sk.channel_count(), 9u);
  ASSERT_EQ(clip.frames.size(), 1u);
  EXPECT_EQ(clip.frames[0].channels, std::vector<double>(9, 0.0));
  EXPECT_DOUBLE_EQ(clip.frame_time, 0.0083333);
  EXPECT_NEAR(sk.joint(1).offset.y(), 0.10, 1e-15);
  ASSERT_TRUE(sk.joint(1).end_site);
  EXPECT_NEAR(sk.joint(1).end_site->y(), 0.05, 1e-15);
}

TEST(Bvh, ScaleAppliesToOffsetsAndPositionChannelsOnly) {
  const auto text = replace(kMinimal, "0 0 0 0 0 0 0 0 0", "100 200 300 10 20 30 40 50 60");
  BvhOptions o;
  o.scale = 0.01;
  const auto [sk, clip] = parse_bvh(text, o);
  const auto& c = clip.frames[0].channels;
  EXPECT_DOUBLE_EQ(c[0], 1.0);
  EXPECT_DOUBLE_EQ(c[2], 3.0);
  EXPECT_DOUBLE_EQ(c[3], 10.0);
  EXPECT_DOUBLE_EQ(c[8], 60.0);
  o.scale = 1.0;
  EXPECT_DOUBLE_EQ(parse_bvh(text, o).second.frames[0].channels[0], 100.0);
}

TEST(Bvh, DeclaredFramesMustMatchRows) {
  const auto text = replace(kMinimal, "Frames: 1", "Frames: 3") + "0 0 0 0 0 0 0 0 0\n";
  const auto e = parse_error(text);
  EXPECT_EQ(e.kind(), BvhErrorKind::FrameCountMismatch);
  EXPECT_NE(std::string(e.what()).find("declared 3 frames, found 2"), std::string::npos);
}

TEST(Bvh, SyntaxErrorReportsLineAndColumn) {
  const auto e = parse_error(replace(kMinimal, "OFFSET 0 10 0", "OFFSET 0 ten 0"));
  EXPECT_EQ(e.kind(), BvhErrorKind::Syntax);
  EXPECT_EQ(e.line(), 8u);
  EXPECT_EQ(e.column(), 14u);
  EXPECT_NE(std::string(e.what()).find("bvh:8:14"), std::string::npos);
}

TEST(Bvh, MissingBraceIsSyntaxError) {
  EXPECT_EQ(parse_error(replace(kMinimal, "  JOINT Spine\n  {", "  JOINT Spine\n")).kind(), BvhErrorKind::Syntax);
}

TEST(Bvh, ShortRowIsChannelCountMismatch) {
  const auto e = parse_error(replace(kMinimal, "0 0 0 0 0 0 0 0 0", "0 0 0 0 0 0 0 0"));
  EXPECT_EQ(e.kind(), BvhErrorKind::ChannelCountMismatch);
  EXPECT_EQ(e.line(), 19u);
}

TEST(Bvh, NonPositiveFrameTime) {
  EXPECT_EQ(parse_error(replace(kMinimal, "0.0083333", "0")).kind(), BvhErrorKind::NonPositiveFrameTime);
  EXPECT_EQ(parse_error(replace(kMinimal, "0.0083333", "-0.01")).kind(), BvhErrorKind::NonPositiveFrameTime);
}

TEST(Bvh, UnsupportedChannelName) {
  const auto e = parse_error(replace(kMinimal, "CHANNELS 3 Zrotation", "CHANNELS 3 Wrotation"));
  EXPECT_EQ(e.kind(), BvhErrorKind::UnsupportedChannel);
  EXPECT_NE(std::string(e.what()).find("Wrotation"), std::string::npos);
}

TEST(Bvh, DiagnosticsAreDistinct) {
  std::set<std::string> names;
  for (auto k : {BvhErrorKind::Syntax, BvhErrorKind::ChannelCountMismatch, BvhErrorKind::FrameCountMismatch,
                 BvhErrorKind::NonPositiveFrameTime, BvhErrorKind::UnsupportedChannel}) {
    names.insert(std::string(to_string(k)));
  }
  EXPECT_EQ(names.size(), 5u);
}

TEST(Bvh, GeneratedFilesMatchAnIndependentCounter) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10; ++i) {
    const std::size_t joints = 2 + static_cast<std::size_t>(i) * 2;
    const std::size_t frames = 1 + static_cast<std::size_t>(i) * 55;
    const auto g = oracle::generate_bvh(rng, joints, frames);
    const auto counts = oracle::count_bvh(g.text);
    const auto [sk, clip] = parse_bvh(g.text);
    EXPECT_EQ(sk.joint_count(), counts.joints);
    EXPECT_EQ(sk.channel_count(), counts.channels);
    EXPECT_EQ(clip.frames.size(), counts.frames_declared);
    EXPECT_EQ(clip.frames.size(), counts.data_rows);
  }
}

TEST(Bvh, RoundTripIsLossless) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> nj(2, 20), nf(1, 500);
  for (int i = 0; i < 10; ++i) {
    const auto g = oracle::generate_bvh(rng, nj(rng), nf(rng));
    BvhOptions o;
    o.scale = 0.01;
    const auto [sk1, c1] = parse_bvh(g.text, o);
    const std::string text2 = write_bvh(c1, o.scale);
    const auto [sk2, c2] = parse_bvh(text2, o);
    EXPECT_EQ(sk1.joint_count(), sk2.joint_count());
    for (std::size_t j = 0; j < sk1.joint_count(); ++j) {
      EXPECT_EQ(sk1.joint(j).name, sk2.joint(j).name);
      EXPECT_EQ(sk1.joint(j).parent, sk2.joint(j).parent);
      EXPECT_EQ(sk1.joint(j).channels, sk2.joint(j).channels);
      EXPECT_LT((sk1.joint(j).offset - sk2.joint(j).offset).norm(), 1e-9);
    }
    ASSERT_EQ(c1.frames.size(), c2.frames.size());
    EXPECT_DOUBLE_EQ(c1.frame_time, c2.frame_time);
    for (std::size_t f = 0; f < c1.frames.size(); ++f) {
      for (std::size_t k = 0; k < c1.frames[f].channels.size(); ++k) {
        ASSERT_NEAR(c1.frames[f].channels[k], c2.frames[f].channels[k], 1e-9);
      }
    }
    // values against the generator, in file units
    for (std::size_t f = 0; f < c1.frames.size(); ++f) {
      for (std::size_t k = 0; k < g.channels; ++k) {
        const double v = k < 3 ? c1.frames[f].channels[k] / o.scale : c1.frames[f].channels[k];
        ASSERT_NEAR(v, g.values[f][k], 1e-9);
      }
    }
    // a second write reproduces the text exactly
    EXPECT_EQ(write_bvh(c2, o.scale), text2);
  }
}

TEST(Bvh, WriteUsesFileOrderForNonDepthFirstStorage) {
  // storage order root, a, b, a_child: depth-first file order is root, a, a_child, b
  using C = Channel;
  std::vector<Joint> js{{"root", std::nullopt, {0, 0, 0}, {C::Xpos, C::Ypos, C::Zpos, C::Zrot, C::Xrot, C::Yrot}, {}},
                        {"a", 0, {0.1, 0, 0}, {C::Zrot, C::Xrot, C::Yrot}, {}},
                        {"b", 0, {-0.1, 0, 0}, {C::Zrot, C::Xrot, C::Yrot}, Eigen::Vector3d{0, 0.1, 0}},
                        {"a_child", 1, {0, 0.1, 0}, {C::Zrot, C::Xrot, C::Yrot}, Eigen::Vector3d{0, 0.1, 0}}};
  MotionClip clip;
  clip.skeleton = std::make_shared<const Skeleton>("s", js);
  clip.frame_time = 0.01;
  clip.frames.push_back(JointConfig{{0, 0, 0, 1, 2, 3, 11, 12, 13, 21, 22, 23, 31, 32, 33}});
  const auto [sk, back] = parse_bvh(write_bvh(clip));
  ASSERT_EQ(sk.joint(2).name, "a_child");
  const auto rot = [&](const Skeleton& s, const JointConfig& c, const char* name) {
    const auto j = s.index_of(name);
    return std::vector<double>(c.channels.begin() + static_cast<long>(s.channel_start(j)),
                               c.channels.begin() + static_cast<long>(s.channel_start(j) + 3));
  };
  for (const char* name : {"a", "b", "a_child"}) {
    EXPECT_EQ(rot(sk, back.frames[0], name), rot(*clip.skeleton, clip.frames[0], name)) << name;
  }
}

TEST(Bvh, ExportedBuiltinClipsReloadFromDirectory) {
  ClipStore disk;
  disk.load_directory(FVA_DATA_DIR "/clips");
  const auto builtin = builtin_clip_store();
  for (const auto& [id, stored] : builtin.clips()) {
    ASSERT_TRUE(disk.contains(id)) << id;
    const auto& a = stored.clip;
    const auto& b = disk.at(id).clip;
    EXPECT_EQ(a.kind, b.kind) << id;
    EXPECT_EQ(a.loopable, b.loopable) << id;
    EXPECT_NEAR(a.frame_time, b.frame_time, 1e-12);
    ASSERT_EQ(a.frames.size(), b.frames.size());
    for (std::size_t f = 0; f < a.frames.size(); ++f) {
      for (std::size_t k = 0; k < a.frames[f].channels.size(); ++k) {
        ASSERT_NEAR(a.frames[f].channels[k], b.frames[f].channels[k], 1e-9) << id;
      }
    }
    EXPECT_EQ(stored.mask.joints(), disk.at(id).mask.joints()) << id;
  }
}
