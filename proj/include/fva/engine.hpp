#pragma once

// Fixed-timestep simulation of scripted agents (driven by the behavioural
// state machine) and background walkers. Each tick, per agent: apply queued
// events, plan when the goal changes, steer toward the current waypoint,
// avoid collisions, integrate, advance the gait, layer gestures and gaze, and
// queue the arrival / timer / response events for the next tick.

#include "fva/bfsm.hpp"
#include "fva/friendliness.hpp"
#include "fva/gaze.hpp"
#include "fva/motion/clip_store.hpp"
#include "fva/motion/kinematics.hpp"
#include "fva/nav/environment.hpp"
#include "fva/nav/grid.hpp"
#include "fva/nav/orca.hpp"
#include "fva/nav/visibility.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace fva::engine {

using Json = nlohmann::ordered_json;

struct EngineConfig {
  double dt{1.0 / 60.0};
  double crossfade{0.3};       // gesture fade in / out, seconds
  double response_hold{2.0};   // seconds a spoken response occupies the agent
  double cell_size{0.1};
  double arrive_tolerance{0.1};
  double waypoint_radius{0.2};  // lower bound; the agent's diameter is used when larger
  double perturbation{1e-4};    // m/s, symmetry breaking on the preferred velocity
  double grid_margin{1.0};
  double eye_offset{kEyeOffset};
  nav::OrcaParams orca{};
};

/// Profile per scripted agent, with a fallback for unnamed ones.
struct ProfileMap {
  AgentProfile fallback{fva_profile()};
  std::map<std::string, AgentProfile> per_agent;

  const AgentProfile& get(const std::string& id) const {
    auto it = per_agent.find(id);
    return it == per_agent.end() ? fallback : it->second;
  }
};

struct ClipWeight {
  std::string id;
  double weight{0.0};

  bool operator==(const ClipWeight&) const = default;
};

struct AgentSnapshot {
  std::string id;
  std::int64_t tick{0};
  Vec2 position;
  Vec2 velocity;
  double heading{0.0};
  std::string state;  // empty for background walkers
  bool gaze{false};
  NeckPose neck;
  std::vector<ClipWeight> clips;
  std::vector<Eigen::Vector3d> pose;  // world joint positions, z up
  std::optional<std::string> say;
  bool user_visible{false};
  std::optional<std::string> fault;
};

enum class LogKind { Event, Rejected, Response, Gesture, Fault, Timeout };

inline constexpr std::string_view to_string(LogKind k) {
  switch (k) {
    case LogKind::Event: return "event";
    case LogKind::Rejected: return "rejected";
    case LogKind::Response: return "response";
    case LogKind::Gesture: return "gesture";
    case LogKind::Fault: return "fault";
    case LogKind::Timeout: return "timeout";
  }
  return "";
}

/// One line of the event log. Field use by kind:
///   event     name = event, from / to = states
///   rejected  name = event, from = state, text = error code
///   response  name = acceptance|completion|farewell, text = utterance
///   gesture   name = clip id, text = hand|head
///   fault     name = code, text = message
///   timeout   text = message
struct LogEntry {
  std::int64_t tick{0};
  LogKind kind{LogKind::Event};
  std::string agent;
  std::string name;
  std::string from;
  std::string to;
  std::string text;

  bool operator==(const LogEntry&) const = default;
};

/// External stimulus applied at the start of `tick`. An empty agent id
/// addresses the first scripted agent.
struct Command {
  std::int64_t tick{0};
  std::string agent;
  BfsmEvent event;

  bool operator==(const Command&) const = default;
};

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct ActiveGesture {
  std::string clip;
  GestureSlot slot{GestureSlot::Hand};
  double start{0.0};
  double weight{0.0};
};

struct AgentState {
  nav::AgentSpec spec;
  std::optional<Bfsm> bfsm;
  AgentProfile profile;
  std::string gait_id;
  double gait_phase{0.0};

  std::optional<Vec2> goal;
  bool needs_plan{false};
  std::vector<Vec2> plan;
  std::size_t waypoint{0};
  std::size_t walker_goal{0};

  std::int64_t entered_tick{0};
  bool timer_fired{false};
  std::optional<std::int64_t> response_due;
  std::optional<std::string> speaking;
  std::vector<BfsmEvent> internal;  // raised last tick
  std::vector<BfsmEvent> external;  // submitted since last tick

  std::vector<ActiveGesture> gestures;
  NeckPose neck;
  bool xi{false};
  bool user_visible{false};
  motion::JointConfig config;
  std::vector<Eigen::Vector3d> pose;
  std::optional<std::string> fault;
};

inline Json vec2_json(Vec2 v) { return Json::array({v.x, v.y}); }

}  // namespace detail

class Simulation {
 public:
  Simulation(ScenarioScript script, ProfileMap profiles, nav::EnvironmentState env,
             std::shared_ptr<const motion::ClipStore> clips, GaitMap gait_map, EngineConfig config = {},
             std::uint64_t seed = 42)
      : script_(std::make_shared<const ScenarioScript>(std::move(script))),
        profiles_(std::move(profiles)),
        env_(std::move(env)),
        clips_(std::move(clips)),
        gait_map_(std::move(gait_map)),
        cfg_(config),
        rng_(seed) {
    if (!(cfg_.dt > 0.0)) throw EngineError("dt must be positive");
    if (!clips_) throw EngineError("clip store is required");
    env_.validate();
    obstacles_ = nav::ObstacleSet(env_.obstacles);
    compute_bounds();
    for (const auto& spec : env_.agents) agents_.push_back(make_agent(spec));
  }

  std::int64_t tick() const { return tick_; }
  double time() const { return static_cast<double>(tick_) * cfg_.dt; }
  const EngineConfig& config() const { return cfg_; }
  const nav::EnvironmentState& environment() const { return env_; }
  const std::vector<LogEntry>& log() const { return log_; }
  const std::vector<Command>& applied_commands() const { return applied_; }

  /// Ids of agents driven by the state machine, in environment order.
  std::vector<std::string> scripted_agents() const {
    std::vector<std::string> out;
    for (const auto& a : agents_) {
      if (a.bfsm) out.push_back(a.spec.id);
    }
    return out;
  }

  std::optional<BfsmStateId> state_of(const std::string& agent) const {
    const auto* a = find(agent);
    if (!a || !a->bfsm) return std::nullopt;
    return a->bfsm->state();
  }

  const Bfsm* bfsm_of(const std::string& agent) const {
    const auto* a = find(agent);
    return a && a->bfsm ? &*a->bfsm : nullptr;
  }

  /// True once every scripted agent has reached Done.
  bool finished() const {
    bool any = false;
    for (const auto& a : agents_) {
      if (!a.bfsm) continue;
      any = true;
      if (a.bfsm->state().kind != StateKind::Done) return false;
    }
    return any;
  }

  /// Queues an event for the next tick. Returns false for an unknown agent.
  bool submit(std::string agent, BfsmEvent event) {
    if (agent.empty()) {
      const auto ids = scripted_agents();
      if (ids.empty()) return false;
      agent = ids.front();
    }
    auto* a = find(agent);
    if (!a || !a->bfsm) return false;
    a->external.push_back(std::move(event));
    return true;
  }

  void set_user_position(Vec2 p) {
    if (env_.user) env_.user->position = p;
  }

  void step() {
    const double t = time();
    const std::int64_t now = tick_;
    for (auto& a : agents_) apply_events(a, now, t);
    for (auto& a : agents_) update_plan(a);

    std::vector<Vec2> pref(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) pref[i] = preferred_velocity(agents_[i]);

    std::vector<Vec2> next_vel(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) next_vel[i] = avoid(i, pref[i]);

    for (std::size_t i = 0; i < agents_.size(); ++i) {
      auto& a = agents_[i];
      a.spec.velocity = next_vel[i];
      a.spec.position += next_vel[i] * cfg_.dt;
      const double speed = length(next_vel[i]);
      if (speed > 1e-3) a.spec.heading = std::atan2(next_vel[i].y, next_vel[i].x);
      if (speed > 0.0) a.gait_phase += cfg_.dt * speed / a.spec.pref_speed;
    }

    ++tick_;
    const double t_next = time();
    for (auto& a : agents_) {
      check_arrival(a);
      compose_pose(a, t_next);
      raise_events(a);
    }
  }

  std::vector<AgentSnapshot> snapshot() const {
    std::vector<AgentSnapshot> out;
    out.reserve(agents_.size());
    for (const auto& a : agents_) {
      AgentSnapshot s;
      s.id = a.spec.id;
      s.tick = tick_;
      s.position = a.spec.position;
      s.velocity = a.spec.velocity;
      s.heading = a.spec.heading;
      if (a.bfsm) s.state = a.bfsm->state().str();
      s.gaze = a.xi;
      s.neck = a.neck;
      s.clips.push_back({a.gait_id, 1.0});
      for (const auto& g : a.gestures) s.clips.push_back({g.clip, g.weight});
      s.pose = a.pose;
      s.say = a.speaking;
      s.user_visible = a.user_visible;
      s.fault = a.fault;
      out.push_back(std::move(s));
    }
    return out;
  }

 private:
  detail::AgentState* find(const std::string& id) {
    for (auto& a : agents_) {
      if (a.spec.id == id) return &a;
    }
    return nullptr;
  }
  const detail::AgentState* find(const std::string& id) const {
    for (const auto& a : agents_) {
      if (a.spec.id == id) return &a;
    }
    return nullptr;
  }

  void compute_bounds() {
    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi = -lo;
    auto grow = [&](Vec2 p) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    };
    for (const auto& p : env_.obstacles) {
      for (const auto& v : p.vertices()) grow(v);
    }
    for (const auto& a : env_.agents) {
      grow(a.position);
      for (const auto& g : a.goals) grow(g);
    }
    if (env_.user) grow(env_.user->position);
    grow(script_->adjacent_room);
    grow(script_->station);
    lo_ = lo - Vec2{cfg_.grid_margin, cfg_.grid_margin};
    hi_ = hi + Vec2{cfg_.grid_margin, cfg_.grid_margin};
  }

  const nav::NavGrid& grid_for(double radius) {
    auto it = grids_.find(radius);
    if (it == grids_.end()) {
      it = grids_
               .emplace(radius, nav::NavGrid::rasterize(env_.obstacles, lo_, hi_, cfg_.cell_size,
                                                        radius + 0.5 * cfg_.cell_size))
               .first;
    }
    return it->second;
  }

  detail::AgentState make_agent(const nav::AgentSpec& spec) {
    detail::AgentState a;
    a.spec = spec;
    if (spec.goals.empty()) {
      a.profile = profiles_.get(spec.id);
      a.bfsm.emplace(script_, a.profile);
      a.gait_id = a.profile.gait_id ? *a.profile.gait_id : select_gait(gait_map_, a.profile.f_des);
    } else {
      a.profile = default_profile(spec.id);
      a.gait_id = clips_->contains("default") ? "default" : select_gait(gait_map_, a.profile.f_des);
      a.goal = spec.goals.front();
      a.needs_plan = true;
    }
    const auto& gait = clips_->at(a.gait_id).clip;
    if (gait.kind != motion::ClipKind::Gait) throw EngineError("clip '" + a.gait_id + "' is not a gait");
    if (!rig_) rig_ = NeckRig::for_skeleton(*gait.skeleton);
    a.config = gait.frames.front();
    a.neck = rig_->read(a.config);
    a.pose = world_pose(a);
    return a;
  }

  std::vector<Eigen::Vector3d> world_pose(const detail::AgentState& a) const {
    const auto& sk = *clips_->at(a.gait_id).clip.skeleton;
    auto pose = motion::forward_kinematics(sk, a.config).positions;
    for (auto& p : pose) p = skeleton_to_world(p, a.spec.position, a.spec.heading);
    return pose;
  }

  void log(LogKind kind, const detail::AgentState& a, std::string name, std::string from = {},
           std::string to = {}, std::string text = {}) {
    log_.push_back({tick_, kind, a.spec.id, std::move(name), std::move(from), std::move(to), std::move(text)});
  }

  void apply_events(detail::AgentState& a, std::int64_t now, double t) {
    if (!a.bfsm) return;
    std::vector<BfsmEvent> events = std::move(a.internal);
    a.internal.clear();
    for (auto& e : a.external) {
      applied_.push_back({now, a.spec.id, e});
      events.push_back(std::move(e));
    }
    a.external.clear();
    for (const auto& e : events) {
      const std::string from = a.bfsm->state().str();
      BfsmOutput out;
      try {
        out = a.bfsm->step(e, t);
      } catch (const BfsmError& err) {
        log(LogKind::Rejected, a, e.str(), from, {}, std::string(to_string(err.code())));
        continue;
      }
      log(LogKind::Event, a, e.str(), from, out.state.str());
      a.entered_tick = now;
      a.timer_fired = false;
      a.response_due.reset();
      a.speaking.reset();
      if (out.say) {
        log(LogKind::Response, a, std::string(to_string(out.say->kind)), {}, {}, out.say->text);
        a.speaking = out.say->text;
        a.response_due = now + std::max<std::int64_t>(1, std::llround(cfg_.response_hold / cfg_.dt));
      }
      if (out.gesture_request) start_gesture(a, *out.gesture_request, t);
      if (out.goal != a.goal) {
        a.goal = out.goal;
        a.needs_plan = a.goal.has_value();
        a.plan.clear();
        a.waypoint = 0;
      }
    }
  }

  void start_gesture(detail::AgentState& a, const GestureRequest& req, double t) {
    if (!clips_->contains(req.clip)) {
      log(LogKind::Fault, a, "missing_clip", {}, {}, "gesture clip '" + req.clip + "' not in store");
      return;
    }
    if (clips_->at(req.clip).clip.skeleton->channel_count() != a.config.channels.size()) {
      log(LogKind::Fault, a, "skeleton_mismatch", {}, {}, "gesture clip '" + req.clip + "' uses another skeleton");
      return;
    }
    std::erase_if(a.gestures, [&](const detail::ActiveGesture& g) { return g.slot == req.slot; });
    a.gestures.push_back({req.clip, req.slot, t, 0.0});
    log(LogKind::Gesture, a, req.clip, {}, {}, req.slot == GestureSlot::Hand ? "hand" : "head");
  }

  /// Nearest free cell to `c` by breadth-first search, if any.
  static std::optional<nav::Cell> nearest_free(const nav::NavGrid& g, nav::Cell c) {
    if (!g.blocked(c)) return c;
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(g.width()) * static_cast<std::size_t>(g.height()), 0);
    std::deque<nav::Cell> q;
    auto push = [&](nav::Cell n) {
      if (!g.in_bounds(n) || seen[g.index(n)]) return;
      seen[g.index(n)] = 1;
      q.push_back(n);
    };
    push({std::clamp(c.x, 0, g.width() - 1), std::clamp(c.y, 0, g.height() - 1)});
    while (!q.empty()) {
      const nav::Cell cur = q.front();
      q.pop_front();
      if (!g.blocked(cur)) return cur;
      push({cur.x + 1, cur.y});
      push({cur.x - 1, cur.y});
      push({cur.x, cur.y + 1});
      push({cur.x, cur.y - 1});
    }
    return std::nullopt;
  }

  void update_plan(detail::AgentState& a) {
    if (!a.needs_plan || !a.goal || a.fault) return;
    a.needs_plan = false;
    const auto& g = grid_for(a.spec.radius);
    try {
      Vec2 start = a.spec.position;
      std::optional<Vec2> detour;
      if (g.blocked(g.cell_of(start))) {
        // Pushed against an obstacle by avoidance: leave via the nearest free cell.
        const auto free = nearest_free(g, g.cell_of(start));
        if (!free) throw nav::PlanError(nav::PlanError::Code::StartBlocked, "start position is blocked");
        detour = g.center(*free);
        start = *detour;
      }
      a.plan = nav::plan_global(g, start, *a.goal);
      if (detour) a.plan.insert(a.plan.begin(), a.spec.position);
      a.waypoint = a.plan.size() > 1 ? 1 : 0;
    } catch (const nav::PlanError& e) {
      static constexpr std::array<std::string_view, 3> codes{"start_blocked", "goal_blocked", "no_path"};
      a.fault = e.what();
      a.plan.clear();
      a.goal.reset();
      a.spec.velocity = {};
      log(LogKind::Fault, a, std::string(codes[static_cast<std::size_t>(e.code())]), {}, {}, e.what());
    }
  }

  Vec2 preferred_velocity(detail::AgentState& a) {
    if (a.plan.empty() || a.fault) return {};
    const double advance = std::max(2.0 * a.spec.radius, cfg_.waypoint_radius);
    while (a.waypoint + 1 < a.plan.size() && length(a.plan[a.waypoint] - a.spec.position) <= advance) {
      ++a.waypoint;
    }
    Vec2 v = nav::goal_velocity(a.spec.position, a.plan[a.waypoint], a.spec.pref_speed, cfg_.dt);
    if (abs_sq(v) == 0.0) return {};
    const double ang = unit() * 2.0 * std::numbers::pi;
    const double mag = unit() * cfg_.perturbation;
    v += Vec2{std::cos(ang), std::sin(ang)} * mag;
    return v;
  }

  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  Vec2 avoid(std::size_t i, Vec2 pref) const {
    const auto& a = agents_[i];
    if (a.fault) return {};
    nav::Disc self{a.spec.position, a.spec.velocity, a.spec.radius, a.spec.max_speed};
    std::vector<nav::Neighbor> nbs;
    nbs.reserve(agents_.size());
    for (std::size_t j = 0; j < agents_.size(); ++j) {
      if (j == i) continue;
      const auto& b = agents_[j];
      nbs.push_back({{b.spec.position, b.spec.velocity, b.spec.radius, b.spec.max_speed}, 0.5});
    }
    if (env_.user) nbs.push_back({{env_.user->position, env_.user->velocity, env_.user->radius, 0.0}, 1.0});
    // Without a plan pref is zero: the agent only yields.
    return nav::orca_velocity(self, nbs, obstacles_, nav::keep_right(pref, self, nbs, cfg_.orca), cfg_.orca, cfg_.dt);
  }

  void check_arrival(detail::AgentState& a) {
    if (a.plan.empty() || a.waypoint + 1 < a.plan.size()) return;
    if (length(a.plan.back() - a.spec.position) > cfg_.arrive_tolerance) return;
    a.spec.velocity = {};
    a.plan.clear();
    a.waypoint = 0;
    if (a.bfsm) {
      a.goal.reset();
      if (is_navigate(a.bfsm->state().kind)) a.internal.push_back({EventKind::ArrivedAtGoal, {}});
    } else {
      a.walker_goal = (a.walker_goal + 1) % a.spec.goals.size();
      a.goal = a.spec.goals[a.walker_goal];
      a.needs_plan = true;
    }
  }

  void compose_pose(detail::AgentState& a, double t) {
    const auto& gait = clips_->at(a.gait_id).clip;
    const auto& sk = *gait.skeleton;
    const bool moving = length(a.spec.velocity) > 0.0;
    a.config = moving ? motion::sample_clip(gait, a.gait_phase, true) : gait.frames.front();

    for (auto& g : a.gestures) {
      const auto& stored = clips_->at(g.clip);
      const double elapsed = t - g.start;
      const double dur = stored.clip.duration();
      const double fade = cfg_.crossfade > 0.0 ? cfg_.crossfade : cfg_.dt;
      g.weight = elapsed < dur ? std::min(1.0, elapsed / fade) : std::max(0.0, 1.0 - (elapsed - dur) / fade);
      const auto layer = motion::sample_clip(stored.clip, std::max(0.0, elapsed), false);
      a.config = motion::overlay(sk, a.config, layer, stored.mask, g.weight);
    }
    std::erase_if(a.gestures, [&](const detail::ActiveGesture& g) {
      return t - g.start >= clips_->at(g.clip).clip.duration() && g.weight <= 0.0;
    });

    bool xi = false;
    NeckPose target = rig_->read(a.config);
    a.user_visible = false;
    if (env_.user) {
      a.user_visible = nav::line_of_sight(env_, a.spec.position, env_.user->position);
      const bool xi_bfsm = a.bfsm && gaze_for_state(a.bfsm->state());
      xi = combine_gaze(gaze_flag(a.profile.f_des), xi_bfsm, a.profile.gaze_enabled);
      if (xi) {
        const Eigen::Vector3d eye{env_.user->position.x, env_.user->position.y, env_.user->eye_height};
        const Eigen::Vector3d origin =
            gaze_origin(sk, a.config, *rig_, a.spec.position, a.spec.heading, cfg_.eye_offset);
        try {
          const GazeTarget g{eye, origin, a.spec.heading};
          const bool left = agent_frame_direction(g).y() >= 0.0;
          target = neck_look_at(sk, a.config, *rig_, agent_to_skeleton(gaze_direction(gaze_angles(g), left)));
        } catch (const GazeError&) {
          xi = false;
        }
      }
    }
    a.xi = xi;
    a.neck = apply_gaze(a.config, *rig_, a.neck, target, xi, cfg_.dt);
    a.pose = world_pose(a);
  }

  void raise_events(detail::AgentState& a) {
    if (!a.bfsm) return;
    if (a.bfsm->state().kind == StateKind::PerformTask && !a.timer_fired) {
      const auto dwell = std::llround(a.bfsm->script().dwell_seconds / cfg_.dt);
      if (tick_ - a.entered_tick >= dwell) {
        a.timer_fired = true;
        a.internal.push_back({EventKind::TimerElapsed, {}});
      }
    }
    if (a.response_due && tick_ >= *a.response_due) {
      a.response_due.reset();
      a.internal.push_back({EventKind::ResponseDelivered, {}});
    }
  }

  std::shared_ptr<const ScenarioScript> script_;
  ProfileMap profiles_;
  nav::EnvironmentState env_;
  std::shared_ptr<const motion::ClipStore> clips_;
  GaitMap gait_map_;
  EngineConfig cfg_;
  std::mt19937_64 rng_;
  nav::ObstacleSet obstacles_;
  Vec2 lo_;
  Vec2 hi_;
  std::map<double, nav::NavGrid> grids_;
  std::optional<NeckRig> rig_;
  std::vector<detail::AgentState> agents_;
  std::vector<LogEntry> log_;
  std::vector<Command> applied_;
  std::int64_t tick_{0};
};

// ---- trace serialization ----------------------------------------------------

inline Json snapshot_to_json(const AgentSnapshot& s) {
  Json clips = Json::array();
  for (const auto& c : s.clips) clips.push_back({{"id", c.id}, {"weight", c.weight}});
  Json pose = Json::array();
  for (const auto& p : s.pose) pose.push_back(Json::array({p.x(), p.y(), p.z()}));
  Json j;
  j["type"] = "snapshot";
  j["tick"] = s.tick;
  j["id"] = s.id;
  j["position"] = detail::vec2_json(s.position);
  j["velocity"] = detail::vec2_json(s.velocity);
  j["heading"] = s.heading;
  j["bfsm_state"] = s.state.empty() ? Json(nullptr) : Json(s.state);
  j["gaze"] = s.gaze;
  j["neck"] = {{"flexion", s.neck.flexion}, {"rotation", s.neck.rotation}};
  j["clips"] = clips;
  j["pose"] = pose;
  j["say"] = s.say ? Json(*s.say) : Json(nullptr);
  j["user_visible"] = s.user_visible;
  j["fault"] = s.fault ? Json(*s.fault) : Json(nullptr);
  return j;
}

inline AgentSnapshot snapshot_from_json(const Json& j) {
  AgentSnapshot s;
  s.id = j.at("id").get<std::string>();
  s.tick = j.at("tick").get<std::int64_t>();
  s.position = {j.at("position").at(0).get<double>(), j.at("position").at(1).get<double>()};
  s.velocity = {j.at("velocity").at(0).get<double>(), j.at("velocity").at(1).get<double>()};
  s.heading = j.at("heading").get<double>();
  if (!j.at("bfsm_state").is_null()) s.state = j.at("bfsm_state").get<std::string>();
  s.gaze = j.at("gaze").get<bool>();
  s.neck = {j.at("neck").at("flexion").get<double>(), j.at("neck").at("rotation").get<double>()};
  for (const auto& c : j.at("clips")) s.clips.push_back({c.at("id").get<std::string>(), c.at("weight").get<double>()});
  for (const auto& p : j.at("pose")) s.pose.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
  if (!j.at("say").is_null()) s.say = j.at("say").get<std::string>();
  s.user_visible = j.at("user_visible").get<bool>();
  if (!j.at("fault").is_null()) s.fault = j.at("fault").get<std::string>();
  return s;
}

inline Json log_entry_to_json(const LogEntry& e) {
  Json j;
  j["type"] = to_string(e.kind);
  j["tick"] = e.tick;
  j["agent"] = e.agent;
  switch (e.kind) {
    case LogKind::Event:
      j["event"] = e.name;
      j["from"] = e.from;
      j["to"] = e.to;
      break;
    case LogKind::Rejected:
      j["event"] = e.name;
      j["state"] = e.from;
      j["code"] = e.text;
      break;
    case LogKind::Response:
      j["kind"] = e.name;
      j["text"] = e.text;
      break;
    case LogKind::Gesture:
      j["clip"] = e.name;
      j["slot"] = e.text;
      break;
    case LogKind::Fault:
      j["code"] = e.name;
      j["message"] = e.text;
      break;
    case LogKind::Timeout:
      j["message"] = e.text;
      break;
  }
  return j;
}

// ---- command traces -----------------------------------------------------------

/// [{"tick":n,"task":"A1"}]; non-command events use "event", and "agent"
/// addresses a specific scripted agent.
inline Json commands_to_json(const std::vector<Command>& cmds) {
  Json arr = Json::array();
  for (const auto& c : cmds) {
    Json j;
    j["tick"] = c.tick;
    if (!c.agent.empty()) j["agent"] = c.agent;
    if (c.event.kind == EventKind::UserCommand) j["task"] = c.event.task;
    else j["event"] = to_string(c.event.kind);
    arr.push_back(j);
  }
  return arr;
}

template <class J>
std::vector<Command> commands_from_json(const J& arr) {
  std::vector<Command> out;
  for (const auto& j : arr) {
    Command c;
    c.tick = j.at("tick").template get<std::int64_t>();
    if (c.tick < 0) throw EngineError("command tick must be non-negative");
    if (j.contains("agent")) c.agent = j.at("agent").template get<std::string>();
    if (j.contains("task")) {
      c.event = BfsmEvent::command(j.at("task").template get<std::string>());
    } else {
      const auto name = j.at("event").template get<std::string>();
      const auto kind = parse_event_kind(name);
      if (!kind) throw EngineError("unknown event '" + name + "'");
      c.event = {*kind, {}};
    }
    if (!out.empty() && c.tick < out.back().tick) throw EngineError("command trace is not sorted by tick");
    out.push_back(std::move(c));
  }
  return out;
}

// ---- scenario runs ------------------------------------------------------------

struct RunOptions {
  std::int64_t max_ticks{60 * 60 * 10};
  std::int64_t snapshot_stride{1};  // 0 disables snapshots
  /// When set, a simulated operator commands the next task this many seconds
  /// after the agent becomes ready (Introduction / AwaitCommand).
  std::optional<double> auto_operator_delay;
};

struct ScenarioResult {
  std::vector<std::vector<AgentSnapshot>> snapshots;  // one row per recorded tick
  std::vector<LogEntry> log;
  std::vector<Command> commands;  // as applied, replayable
  std::int64_t ticks{0};
  bool timed_out{false};

  /// JSON Lines: per tick, the log records raised in it, then its snapshots.
  std::string trace_jsonl() const {
    std::string out;
    std::size_t li = 0;
    auto flush_log = [&](std::int64_t upto) {
      while (li < log.size() && log[li].tick <= upto) {
        out += log_entry_to_json(log[li++]).dump();
        out += '\n';
      }
    };
    for (const auto& row : snapshots) {
      if (row.empty()) continue;
      flush_log(row.front().tick - 1);
      for (const auto& s : row) {
        out += snapshot_to_json(s).dump();
        out += '\n';
      }
    }
    flush_log(std::numeric_limits<std::int64_t>::max());
    return out;
  }

  /// Event log only, one record per line.
  std::string log_jsonl() const {
    std::string out;
    for (const auto& e : log) {
      out += log_entry_to_json(e).dump();
      out += '\n';
    }
    return out;
  }
};

inline ScenarioResult run_scenario(const ScenarioScript& script, const ProfileMap& profiles,
                                   const nav::EnvironmentState& env, const std::vector<Command>& commands,
                                   std::uint64_t seed, const RunOptions& opts = {},
                                   std::shared_ptr<const motion::ClipStore> clips = nullptr,
                                   const GaitMap& gait_map = builtin_gait_map(), const EngineConfig& config = {}) {
  for (std::size_t i = 1; i < commands.size(); ++i) {
    if (commands[i].tick < commands[i - 1].tick) throw EngineError("command trace is not sorted by tick");
  }
  if (!clips) clips = std::make_shared<const motion::ClipStore>(motion::builtin_clip_store());
  Simulation sim(script, profiles, env, std::move(clips), gait_map, config, seed);
  ScenarioResult res;
  auto record = [&] {
    if (opts.snapshot_stride > 0 && sim.tick() % opts.snapshot_stride == 0) res.snapshots.push_back(sim.snapshot());
  };
  record();
  std::size_t ci = 0;
  std::map<std::string, std::int64_t> ready_since;
  const auto scripted = sim.scripted_agents();
  while (!sim.finished()) {
    if (sim.tick() >= opts.max_ticks) {
      res.timed_out = true;
      break;
    }
    while (ci < commands.size() && commands[ci].tick <= sim.tick()) {
      sim.submit(commands[ci].agent, commands[ci].event);
      ++ci;
    }
    if (opts.auto_operator_delay) {
      const auto delay = std::llround(*opts.auto_operator_delay / sim.config().dt);
      for (const auto& id : scripted) {
        const auto st = sim.state_of(id)->kind;
        if (st != StateKind::Introduction && st != StateKind::AwaitCommand) {
          ready_since.erase(id);
          continue;
        }
        auto [it, fresh] = ready_since.try_emplace(id, sim.tick());
        if (!fresh && sim.tick() - it->second >= delay) {
          if (auto next = sim.bfsm_of(id)->next_task()) sim.submit(id, BfsmEvent::command(*next));
          ready_since.erase(id);
        }
      }
    }
    sim.step();
    record();
  }
  res.ticks = sim.tick();
  res.log = sim.log();
  res.commands = sim.applied_commands();
  if (res.timed_out) {
    std::string states;
    for (const auto& id : scripted) states += (states.empty() ? "" : ", ") + id + "=" + sim.state_of(id)->str();
    res.log.push_back({sim.tick(), LogKind::Timeout, {}, {}, {}, {},
                       "max_ticks " + std::to_string(opts.max_ticks) + " reached before Done (" + states + ")"});
  }
  return res;
}

}  // namespace fva::engine
