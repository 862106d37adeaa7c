#pragma once

// Friendliness model: per-gait friendliness calibrated from 7-point ratings,
// nearest-match gait selection, and the threshold models for hand gestures,
// head gestures and eye contact.

#include "fva/csv.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fva {

class FriendlinessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scalar friendliness in [0, 1]; 0 is "not at all friendly".
class Friendliness {
 public:
  constexpr Friendliness() = default;
  explicit Friendliness(double f) : f_(f) {
    if (!(f >= 0.0 && f <= 1.0)) throw FriendlinessError("friendliness must lie in [0, 1]");
  }
  constexpr double value() const { return f_; }

 private:
  double f_{0.0};
};

/// The seven items of the warmth measure.
enum class Item { Pleasant, Sensitive, Friendly, Helpful, Likable, Approachable, Sociable };

inline constexpr std::array<Item, 7> kItems{Item::Pleasant,  Item::Sensitive,    Item::Friendly,
                                            Item::Helpful,   Item::Likable,      Item::Approachable,
                                            Item::Sociable};

inline constexpr std::string_view to_string(Item i) {
  switch (i) {
    case Item::Pleasant: return "pleasant";
    case Item::Sensitive: return "sensitive";
    case Item::Friendly: return "friendly";
    case Item::Helpful: return "helpful";
    case Item::Likable: return "likable";
    case Item::Approachable: return "approachable";
    case Item::Sociable: return "sociable";
  }
  return "";
}

inline std::optional<Item> parse_item(std::string_view s) {
  for (Item i : kItems) {
    if (to_string(i) == s) return i;
  }
  return std::nullopt;
}

struct RatingRecord {
  std::string gait_id;
  std::string participant_id;
  Item item{Item::Pleasant};
  int score{1};  // 1..7
};

struct GaitEntry {
  std::string gait_id;
  double f{0.0};

  bool operator==(const GaitEntry&) const = default;
};

/// Gait id to calibrated friendliness. Entries are kept sorted by id.
class GaitMap {
 public:
  GaitMap() = default;
  explicit GaitMap(std::vector<GaitEntry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const GaitEntry& a, const GaitEntry& b) { return a.gait_id < b.gait_id; });
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (!(entries_[i].f >= 0.0 && entries_[i].f <= 1.0)) {
        throw FriendlinessError("gait '" + entries_[i].gait_id + "' has f outside [0, 1]");
      }
      if (i > 0 && entries_[i].gait_id == entries_[i - 1].gait_id) {
        throw FriendlinessError("duplicate gait id '" + entries_[i].gait_id + "'");
      }
    }
  }

  const std::vector<GaitEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  std::optional<double> find(std::string_view id) const {
    for (const auto& e : entries_) {
      if (e.gait_id == id) return e.f;
    }
    return std::nullopt;
  }

  bool operator==(const GaitMap&) const = default;

 private:
  std::vector<GaitEntry> entries_;
};

/// Likert 1..7 mapped affinely onto [0, 1].
inline constexpr double normalize_likert(double x) { return (x - 1.0) / 6.0; }

/// Averages each item over participants, then the seven item means, and
/// normalizes to [0, 1]. Scores are summed as integers so the result does
/// not depend on record order.
inline GaitMap aggregate_ratings(const std::vector<RatingRecord>& records) {
  if (records.empty()) throw FriendlinessError("no rating records");
  struct Cell {
    long long sum{0};
    long long count{0};
    std::vector<std::string> participants;
  };
  std::map<std::string, std::array<Cell, 7>> cells;
  for (const auto& r : records) {
    if (r.score < 1 || r.score > 7) {
      throw FriendlinessError("score " + std::to_string(r.score) + " for gait '" + r.gait_id +
                              "' is outside 1..7");
    }
    auto& cell = cells[r.gait_id][static_cast<std::size_t>(r.item)];
    cell.sum += r.score;
    cell.count += 1;
    cell.participants.push_back(r.participant_id);
  }
  std::vector<GaitEntry> out;
  for (auto& [gait, items] : cells) {
    double total = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      auto& cell = items[i];
      if (cell.count == 0) {
        throw FriendlinessError("gait '" + gait + "' has no ratings for item '" +
                                std::string(to_string(kItems[i])) + "'");
      }
      std::sort(cell.participants.begin(), cell.participants.end());
      if (std::adjacent_find(cell.participants.begin(), cell.participants.end()) != cell.participants.end()) {
        throw FriendlinessError("gait '" + gait + "' has duplicate ratings for item '" +
                                std::string(to_string(kItems[i])) + "'");
      }
      total += static_cast<double>(cell.sum) / static_cast<double>(cell.count);
    }
    out.push_back({gait, normalize_likert(total / 7.0)});
  }
  return GaitMap(std::move(out));
}

/// Gait whose friendliness is nearest to f_des; ties go to the smallest id.
inline std::string select_gait(const GaitMap& map, Friendliness f_des) {
  if (map.empty()) throw FriendlinessError("gait map is empty");
  constexpr double kTie = 1e-12;
  const GaitEntry* best = nullptr;
  double best_d = 0.0;
  for (const auto& e : map.entries()) {  // sorted by id
    const double d = std::abs(e.f - f_des.value());
    if (!best || d < best_d - kTie) {
      best = &e;
      best_d = d;
    }
  }
  return best->gait_id;
}

enum class HandGesture { Absent, Closed, Open };
enum class HeadGesture { Absent, Present };

inline constexpr std::string_view to_string(HandGesture g) {
  switch (g) {
    case HandGesture::Absent: return "absent";
    case HandGesture::Closed: return "closed";
    case HandGesture::Open: return "open";
  }
  return "";
}

inline constexpr std::string_view to_string(HeadGesture g) {
  return g == HeadGesture::Present ? "present" : "absent";
}

struct GestureMode {
  HandGesture hand{HandGesture::Absent};
  HeadGesture head{HeadGesture::Absent};
};

/// Absent up to 0.33 inclusive, closed below 0.67, open from 0.67.
inline constexpr HandGesture hand_gesture_mode(Friendliness f) {
  if (f.value() <= 0.33) return HandGesture::Absent;
  if (f.value() < 0.67) return HandGesture::Closed;
  return HandGesture::Open;
}

inline constexpr HeadGesture head_gesture_mode(Friendliness f) {
  return f.value() < 0.5 ? HeadGesture::Absent : HeadGesture::Present;
}

/// Eye contact is maintained from f = 0.5 upward.
inline constexpr bool gaze_flag(Friendliness f) { return f.value() >= 0.5; }

inline GestureMode gesture_mode(Friendliness f) { return {hand_gesture_mode(f), head_gesture_mode(f)}; }

// ---- file formats ----------------------------------------------------------

/// Ratings CSV with header `gait_id,participant_id,item,score`.
inline std::vector<RatingRecord> parse_ratings_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw FriendlinessError("ratings CSV is empty");
  const std::vector<std::string> header{"gait_id", "participant_id", "item", "score"};
  if (rows[0] != header) throw FriendlinessError("ratings CSV header must be gait_id,participant_id,item,score");
  std::vector<RatingRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "ratings CSV row " + std::to_string(r + 1);
    if (row.size() != 4) throw FriendlinessError(where + ": expected 4 fields");
    const auto item = parse_item(row[2]);
    if (!item) throw FriendlinessError(where + ": unknown item '" + row[2] + "'");
    int score = 0;
    try {
      std::size_t used = 0;
      score = std::stoi(row[3], &used);
      if (used != row[3].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw FriendlinessError(where + ": score '" + row[3] + "' is not an integer");
    }
    out.push_back({row[0], row[1], *item, score});
  }
  return out;
}

inline nlohmann::json gait_map_to_json(const GaitMap& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries()) entries.push_back({{"gait_id", e.gait_id}, {"f", e.f}});
  return {{"entries", entries}};
}

inline GaitMap gait_map_from_json(const nlohmann::json& j) {
  std::vector<GaitEntry> entries;
  for (const auto& e : j.at("entries")) entries.push_back({e.at("gait_id").get<std::string>(), e.at("f").get<double>()});
  return GaitMap(std::move(entries));
}

/// Bundled calibration: the three validated gaits plus the default gait.
inline GaitMap builtin_gait_map() {
  return GaitMap({{"Gait1", 0.39}, {"Gait2", 0.48}, {"Gait3", 0.80}, {"default", 0.52}});
}

}  // namespace fva
