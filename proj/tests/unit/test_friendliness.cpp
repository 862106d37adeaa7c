#include "fva/friendliness.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace fva;

namespace {

std::vector<RatingRecord> uniform_ratings(const std::string& gait, int participants, int score) {
  std::vector<RatingRecord> out;
  for (int p = 0; p < participants; ++p) {
    for (Item i : kItems) out.push_back({gait, "p" + std::to_string(p), i, score});
  }
  return out;
}

GaitMap study_gaits() { return GaitMap({{"Gait1", 0.39}, {"Gait2", 0.48}, {"Gait3", 0.80}}); }

}  // namespace

TEST(Friendliness, RejectsOutOfRange) {
  EXPECT_THROW(Friendliness(-0.01), FriendlinessError);
  EXPECT_THROW(Friendliness(1.01), FriendlinessError);
  EXPECT_THROW(Friendliness(std::nan("")), FriendlinessError);
  EXPECT_NO_THROW(Friendliness(0.0));
  EXPECT_NO_THROW(Friendliness(1.0));
}

TEST(HandGesture, Cases) {
  EXPECT_EQ(hand_gesture_mode(Friendliness(0.2)), HandGesture::Absent);
  EXPECT_EQ(hand_gesture_mode(Friendliness(0.5)), HandGesture::Closed);
  EXPECT_EQ(hand_gesture_mode(Friendliness(0.97)), HandGesture::Open);
}

TEST(HandGesture, BoundaryAtOneThirdIsAbsent) {
  EXPECT_EQ(hand_gesture_mode(Friendliness(0.33)), HandGesture::Absent);
  EXPECT_EQ(hand_gesture_mode(Friendliness(0.3300001)), HandGesture::Closed);
  EXPECT_EQ(hand_gesture_mode(Friendliness(0.6699999)), HandGesture::Closed);
  EXPECT_EQ(hand_gesture_mode(Friendliness(0.67)), HandGesture::Open);
}

TEST(HeadGesture, Cases) {
  EXPECT_EQ(head_gesture_mode(Friendliness(0.49)), HeadGesture::Absent);
  EXPECT_EQ(head_gesture_mode(Friendliness(0.5)), HeadGesture::Present);
  EXPECT_EQ(head_gesture_mode(Friendliness(1.0)), HeadGesture::Present);
}

TEST(GazeFlag, Cases) {
  EXPECT_FALSE(gaze_flag(Friendliness(0.2)));
  EXPECT_TRUE(gaze_flag(Friendliness(0.5)));
  EXPECT_TRUE(gaze_flag(Friendliness(0.97)));
}

TEST(GestureModels, MonotoneAndGazeMatchesHead) {
  int prev_hand = 0, prev_head = 0;
  for (int i = 0; i <= 10000; ++i) {
    const Friendliness f(i / 10000.0);
    const int hand = static_cast<int>(hand_gesture_mode(f));
    const int head = static_cast<int>(head_gesture_mode(f));
    EXPECT_GE(hand, prev_hand);
    EXPECT_GE(head, prev_head);
    EXPECT_EQ(gaze_flag(f), head_gesture_mode(f) == HeadGesture::Present);
    prev_hand = hand;
    prev_head = head;
  }
}

TEST(Aggregate, AllSevensGiveOne) {
  const auto m = aggregate_ratings(uniform_ratings("g", 1, 7));
  EXPECT_DOUBLE_EQ(*m.find("g"), 1.0);
}

TEST(Aggregate, AllFoursGiveHalf) {
  const auto m = aggregate_ratings(uniform_ratings("g", 2, 4));
  EXPECT_DOUBLE_EQ(*m.find("g"), 0.5);
}

TEST(Aggregate, MixedItemsSingleParticipant) {
  std::vector<RatingRecord> r;
  const int scores[7] = {7, 7, 7, 7, 1, 1, 1};
  for (std::size_t i = 0; i < 7; ++i) r.push_back({"g", "p", kItems[i], scores[i]});
  EXPECT_NEAR(*aggregate_ratings(r).find("g"), (31.0 / 7.0 - 1.0) / 6.0, 1e-15);
}

TEST(Aggregate, Errors) {
  EXPECT_THROW(aggregate_ratings({}), FriendlinessError);
  auto r = uniform_ratings("g", 1, 4);
  r.pop_back();
  EXPECT_THROW(aggregate_ratings(r), FriendlinessError);
  auto bad = uniform_ratings("g", 1, 4);
  bad[0].score = 8;
  EXPECT_THROW(aggregate_ratings(bad), FriendlinessError);
  bad[0].score = 0;
  EXPECT_THROW(aggregate_ratings(bad), FriendlinessError);
}

TEST(Aggregate, PermutationInvariantAndInUnitInterval) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> score(1, 7);
  std::vector<RatingRecord> r;
  for (const char* g : {"a", "b", "c"}) {
    for (int p = 0; p < 9; ++p) {
      for (Item i : kItems) r.push_back({g, "p" + std::to_string(p), i, score(rng)});
    }
  }
  const auto base = aggregate_ratings(r);
  for (int t = 0; t < 20; ++t) {
    std::shuffle(r.begin(), r.end(), rng);
    const auto m = aggregate_ratings(r);
    for (const auto& e : base.entries()) {
      EXPECT_EQ(*m.find(e.gait_id), e.f);
      EXPECT_GE(e.f, 0.0);
      EXPECT_LE(e.f, 1.0);
    }
  }
}

TEST(Aggregate, ParticipantsWithDifferentItemCountsAverageItemsFirst) {
  // Item means first, then the mean over items: a rater who only rated some
  // items must not be weighted by their number of answers.
  std::vector<RatingRecord> r = uniform_ratings("g", 1, 1);
  r.push_back({"g", "q", Item::Pleasant, 7});
  const double expected_raw = ((1.0 + 7.0) / 2.0 + 6.0 * 1.0) / 7.0;
  EXPECT_NEAR(*aggregate_ratings(r).find("g"), (expected_raw - 1.0) / 6.0, 1e-15);
}

TEST(SelectGait, StudyGaitAnchors) {
  EXPECT_EQ(select_gait(study_gaits(), Friendliness(0.97)), "Gait3");
  EXPECT_EQ(select_gait(study_gaits(), Friendliness(0.48)), "Gait2");
  EXPECT_EQ(select_gait(study_gaits(), Friendliness(0.2)), "Gait1");
  EXPECT_EQ(select_gait(study_gaits(), Friendliness(0.5)), "Gait2");
}

TEST(SelectGait, TieGoesToSmallestId) {
  GaitMap m({{"B", 0.6}, {"A", 0.4}});
  EXPECT_EQ(select_gait(m, Friendliness(0.5)), "A");
}

TEST(SelectGait, EmptyMapIsError) { EXPECT_THROW(select_gait(GaitMap{}, Friendliness(0.5)), FriendlinessError); }

TEST(SelectGait, DuplicateIdsRejected) {
  EXPECT_THROW(GaitMap({{"A", 0.1}, {"A", 0.2}}), FriendlinessError);
  EXPECT_THROW(GaitMap({{"A", 1.5}}), FriendlinessError);
}

TEST(SelectGait, WithinHalfLargestGapAndOrderInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<GaitEntry> es;
    const int n = 2 + trial % 6;
    for (int i = 0; i < n; ++i) es.push_back({"g" + std::to_string(i), std::round(u(rng) * 20) / 20});
    std::vector<double> fs;
    for (auto& e : es) fs.push_back(e.f);
    std::sort(fs.begin(), fs.end());
    double gap = std::max(fs.front(), 1.0 - fs.back()) * 2.0;  // ends count as half gaps
    for (std::size_t i = 1; i < fs.size(); ++i) gap = std::max(gap, fs[i] - fs[i - 1]);
    const Friendliness f(std::round(u(rng) * 20) / 20);
    const auto id = select_gait(GaitMap(es), f);
    double best = 2.0;
    for (auto& e : es) best = std::min(best, std::abs(e.f - f.value()));
    EXPECT_NEAR(std::abs(*GaitMap(es).find(id) - f.value()), best, 1e-12);
    EXPECT_LE(best, gap / 2.0 + 1e-12);
    std::shuffle(es.begin(), es.end(), rng);
    EXPECT_EQ(select_gait(GaitMap(es), f), id);
  }
}

TEST(RatingsCsv, ParsesAndValidates) {
  const auto recs = parse_ratings_csv("gait_id,participant_id,item,score\nG,p1,friendly,5\nG,p1,sociable,2\n");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].item, Item::Friendly);
  EXPECT_EQ(recs[1].score, 2);
  EXPECT_THROW(parse_ratings_csv("gait,participant_id,item,score\n"), std::runtime_error);
  EXPECT_THROW(parse_ratings_csv("gait_id,participant_id,item,score\nG,p,kind,5\n"), std::runtime_error);
  EXPECT_THROW(parse_ratings_csv("gait_id,participant_id,item,score\nG,p,friendly,x\n"), std::runtime_error);
}

TEST(RatingsCsv, StudyGaitFixtureReproducesBundledMap) {
  const auto m = aggregate_ratings(parse_ratings_csv(read_text_file(FVA_DATA_DIR "/fixtures/ratings_study_gaits.csv")));
  const auto builtin = builtin_gait_map();
  ASSERT_EQ(m.entries().size(), builtin.entries().size());
  for (const auto& e : builtin.entries()) EXPECT_NEAR(*m.find(e.gait_id), e.f, 1e-12) << e.gait_id;
}

// Per-gait item sums over raters: S1 13+14+16+17+8+7+7 = 82 (3 raters),
// S2 10+9+8+7+6+5+12 = 57 (3 raters), S3 12+13+14+11+12+13+12 = 87 (2 raters).
// raw = sum / (raters * 7), f = (raw - 1) / 6.
TEST(RatingsCsv, SyntheticFixtureMatchesHandComputedValues) {
  auto recs = parse_ratings_csv(read_text_file(FVA_DATA_DIR "/fixtures/ratings_synthetic.csv"));
  const std::vector<std::pair<std::string, double>> expected{
      {"S1", 61.0 / 126.0}, {"S2", 2.0 / 7.0}, {"S3", 73.0 / 84.0}};
  std::mt19937_64 rng(31);
  for (int t = 0; t < 10; ++t) {
    const auto m = aggregate_ratings(recs);
    ASSERT_EQ(m.entries().size(), 3u);
    for (const auto& [id, f] : expected) EXPECT_NEAR(*m.find(id), f, 1e-12) << id;
    std::shuffle(recs.begin(), recs.end(), rng);
  }
}

TEST(GaitMapJson, RoundTrip) {
  const auto m = builtin_gait_map();
  const auto back = gait_map_from_json(nlohmann::json::parse(gait_map_to_json(m).dump()));
  ASSERT_EQ(back.entries().size(), m.entries().size());
  for (const auto& e : m.entries()) EXPECT_EQ(*back.find(e.gait_id), e.f);
}

TEST(GaitMapJson, BundledFileMatchesBuiltin) {
  const auto m = gait_map_from_json(nlohmann::json::parse(read_text_file(FVA_DATA_DIR "/gaitmap.json")));
  const auto builtin = builtin_gait_map();
  EXPECT_EQ(m, builtin);
}
