#pragma once

#include "fva/geometry.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace fva::nav {

class NavError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Convex polygon, vertices stored counterclockwise.
class Polygon {
 public:
  Polygon() = default;
  explicit Polygon(std::vector<Vec2> vertices) : v_(std::move(vertices)) {
    if (v_.size() < 3) throw NavError("polygon needs at least 3 vertices");
    const double a = signed_area();
    if (!(std::abs(a) > 0.0)) throw NavError("polygon is degenerate (zero area)");
    if (a < 0.0) std::reverse(v_.begin(), v_.end());
    const std::size_t n = v_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (left_of(v_[i], v_[(i + 1) % n], v_[(i + 2) % n]) < 0.0) throw NavError("polygon is not convex");
    }
  }

  static Polygon rect(Vec2 lo, Vec2 hi) { return Polygon({lo, {hi.x, lo.y}, hi, {lo.x, hi.y}}); }

  const std::vector<Vec2>& vertices() const { return v_; }
  std::size_t size() const { return v_.size(); }

  double signed_area() const {
    double a = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i) a += det(v_[i], v_[(i + 1) % v_.size()]);
    return 0.5 * a;
  }

  /// Closed containment (boundary counts as inside).
  bool contains(const Vec2& p) const {
    for (std::size_t i = 0; i < v_.size(); ++i) {
      if (left_of(v_[i], v_[(i + 1) % v_.size()], p) < 0.0) return false;
    }
    return true;
  }

  double distance(const Vec2& p) const {
    if (contains(p)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v_.size(); ++i) {
      best = std::min(best, dist_sq_point_segment(v_[i], v_[(i + 1) % v_.size()], p));
    }
    return std::sqrt(best);
  }

 private:
  std::vector<Vec2> v_;
};

struct AgentSpec {
  std::string id;
  Vec2 position;
  Vec2 velocity;
  double radius{0.3};
  double pref_speed{1.0};
  double max_speed{1.5};
  double heading{0.0};       // radians, 0 faces +x
  std::vector<Vec2> goals;   // background walkers cycle through these; empty = scripted agent
};

struct UserSpec {
  Vec2 position;
  Vec2 velocity;
  double radius{0.3};
  double eye_height{1.2};  // seated participant
};

/// Static obstacles plus dynamic discs (agents and the tracked user).
struct EnvironmentState {
  std::vector<Polygon> obstacles;
  std::vector<AgentSpec> agents;
  std::optional<UserSpec> user;

  void validate() const {
    std::set<std::string> ids;
    for (const auto& a : agents) {
      if (!(a.radius > 0.0)) throw NavError("agent '" + a.id + "' radius must be positive");
      if (!(a.pref_speed > 0.0)) throw NavError("agent '" + a.id + "' pref_speed must be positive");
      if (a.max_speed < a.pref_speed) throw NavError("agent '" + a.id + "' max_speed below pref_speed");
      if (!ids.insert(a.id).second) throw NavError("duplicate agent id '" + a.id + "'");
    }
    if (user && !(user->radius > 0.0)) throw NavError("user radius must be positive");
  }
};

namespace detail {
inline Vec2 v2(const nlohmann::json& a) { return {a.at(0).get<double>(), a.at(1).get<double>()}; }
inline nlohmann::json j2(const Vec2& v) { return nlohmann::json::array({v.x, v.y}); }
}  // namespace detail

/// {obstacles:[[[x,y],...]], agents:[{id,pos,radius,pref_speed,max_speed}], user:{pos}}
/// Optional extras: agent heading (radians) and goals, user radius and eye_height.
inline EnvironmentState environment_from_json(const nlohmann::json& j) {
  EnvironmentState env;
  if (j.contains("obstacles")) {
    for (const auto& poly : j.at("obstacles")) {
      std::vector<Vec2> vs;
      for (const auto& p : poly) vs.push_back(detail::v2(p));
      env.obstacles.emplace_back(std::move(vs));
    }
  }
  if (j.contains("agents")) {
    for (const auto& a : j.at("agents")) {
      AgentSpec s;
      s.id = a.at("id").get<std::string>();
      s.position = detail::v2(a.at("pos"));
      if (a.contains("vel")) s.velocity = detail::v2(a.at("vel"));
      s.radius = a.value("radius", s.radius);
      s.pref_speed = a.value("pref_speed", s.pref_speed);
      s.max_speed = a.value("max_speed", std::max(s.pref_speed, s.max_speed));
      s.heading = a.value("heading", 0.0);
      if (a.contains("goals")) {
        for (const auto& g : a.at("goals")) s.goals.push_back(detail::v2(g));
      }
      env.agents.push_back(std::move(s));
    }
  }
  if (j.contains("user") && !j.at("user").is_null()) {
    const auto& u = j.at("user");
    UserSpec us;
    us.position = detail::v2(u.at("pos"));
    if (u.contains("vel")) us.velocity = detail::v2(u.at("vel"));
    us.radius = u.value("radius", us.radius);
    us.eye_height = u.value("eye_height", us.eye_height);
    env.user = us;
  }
  env.validate();
  return env;
}

inline nlohmann::json environment_to_json(const EnvironmentState& env) {
  nlohmann::json obs = nlohmann::json::array();
  for (const auto& p : env.obstacles) {
    nlohmann::json poly = nlohmann::json::array();
    for (const auto& v : p.vertices()) poly.push_back(detail::j2(v));
    obs.push_back(poly);
  }
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : env.agents) {
    nlohmann::json ja{{"id", a.id},           {"pos", detail::j2(a.position)}, {"radius", a.radius},
                      {"pref_speed", a.pref_speed}, {"max_speed", a.max_speed}, {"heading", a.heading}};
    if (!a.goals.empty()) {
      nlohmann::json gs = nlohmann::json::array();
      for (const auto& g : a.goals) gs.push_back(detail::j2(g));
      ja["goals"] = gs;
    }
    agents.push_back(ja);
  }
  nlohmann::json out{{"obstacles", obs}, {"agents", agents}};
  if (env.user) {
    out["user"] = {{"pos", detail::j2(env.user->position)},
                   {"radius", env.user->radius},
                   {"eye_height", env.user->eye_height}};
  }
  return out;
}

/// Study room: seated user at the origin, agent station in front, a wall with
/// a door at x = 4 leading to the adjacent room, and a table.
inline EnvironmentState canonical_environment() {
  EnvironmentState env;
  env.obstacles = {
      Polygon::rect({4.0, 0.8}, {4.2, 4.0}),     // wall north of the door
      Polygon::rect({4.0, -4.0}, {4.2, -0.8}),   // wall south of the door
      Polygon::rect({2.3, -0.7}, {2.9, 0.1}),    // table
      Polygon::rect({-1.0, 2.0}, {4.0, 2.2}),    // room north wall
      Polygon::rect({-1.0, -2.2}, {4.0, -2.0}),  // room south wall
  };
  AgentSpec fva;
  fva.id = "fva";
  fva.position = {1.2, 0.0};
  fva.radius = 0.4;
  fva.pref_speed = 1.0;
  fva.max_speed = 1.5;
  fva.heading = std::numbers::pi;  // facing the user
  env.agents.push_back(fva);
  env.user = UserSpec{{0.0, 0.0}, {0.0, 0.0}, 0.3, 1.2};
  return env;
}

}  // namespace fva::nav
