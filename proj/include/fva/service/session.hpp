#pragma once

// One interactive session: owns the engine, turns client frames into engine
// events and session records, and turns engine output into server frames.
// Transport-free; the websocket server and the tests drive it directly.

#include "fva/engine.hpp"
#include "fva/service/wire.hpp"
#include "fva/stats.hpp"

#include <memory>
#include <string>
#include <vector>

namespace fva::service {

struct SessionConfig {
  ScenarioScript script{canonical_script()};
  nav::EnvironmentState env{nav::canonical_environment()};
  AgentProfile profile{fva_profile()};
  std::shared_ptr<const motion::ClipStore> clips;
  GaitMap gait_map{builtin_gait_map()};
  engine::EngineConfig engine{};
  std::uint64_t seed{42};
  std::int64_t snapshot_stride{3};  // ticks between state frames
  std::string session_id{"session"};
  std::string participant{"P1"};
};

class ServiceSession {
 public:
  explicit ServiceSession(SessionConfig cfg) : cfg_(std::move(cfg)) {
    if (!cfg_.clips) cfg_.clips = std::make_shared<const motion::ClipStore>(motion::builtin_clip_store());
    if (cfg_.snapshot_stride < 1) cfg_.snapshot_stride = 1;
    rebuild();
  }

  const engine::Simulation& simulation() const { return *sim_; }
  const std::vector<engine::Command>& command_log() const { return sim_->applied_commands(); }
  const std::vector<stats::SessionRecord>& records() const { return records_; }
  const AgentProfile& profile() const { return cfg_.profile; }
  std::uint64_t seed() const { return cfg_.seed; }
  bool done() const { return sim_->finished(); }

  /// Starts a fresh per-connection sequence in both directions.
  void reset_connection() {
    last_client_seq_.reset();
    out_seq_ = 0;
  }

  /// Frame sent right after a client connects.
  std::vector<std::string> greeting() {
    std::vector<std::string> out;
    out.push_back(state_frame());
    return out;
  }

  /// Handles one client frame; returns the frames to send immediately.
  std::vector<std::string> handle(std::string_view text) {
    std::vector<std::string> out;
    const auto parsed = parse_frame(text);
    if (parsed.error) {
      out.push_back(error_frame(parsed.error->code, parsed.error->message));
      return out;
    }
    const Envelope& env = *parsed.envelope;
    if (last_client_seq_ && env.seq <= *last_client_seq_) {
      out.push_back(error_frame("bad_seq", "seq " + std::to_string(env.seq) + " is not greater than " +
                                               std::to_string(*last_client_seq_)));
      return out;
    }
    last_client_seq_ = env.seq;
    if (!is_client_type(env.type)) {
      out.push_back(error_frame("unknown_type", "unknown message type '" + env.type + "'"));
      return out;
    }
    try {
      if (env.type == "configure") on_configure(env.payload, out);
      else if (env.type == "command") on_command(env.payload, out);
      else if (env.type == "rating") on_rating(env.payload, out);
      else if (env.type == "questionnaire") on_questionnaire(env.payload, out);
      else if (env.type == "reset") on_reset(out);
    } catch (const Json::exception& e) {
      out.push_back(error_frame("bad_payload", e.what()));
    } catch (const std::exception& e) {
      out.push_back(error_frame("bad_payload", e.what()));
    }
    return out;
  }

  /// Advances the engine by one tick and returns the resulting frames.
  std::vector<std::string> advance() {
    std::vector<std::string> out;
    if (sim_->finished()) return out;
    sim_->step();
    const auto& log = sim_->log();
    for (; log_cursor_ < log.size(); ++log_cursor_) forward(log[log_cursor_], out);
    if (sim_->tick() % cfg_.snapshot_stride == 0 || sim_->finished()) out.push_back(state_frame());
    if (sim_->finished()) out.push_back(summary_frame());
    return out;
  }

  std::string summary_frame() {
    Json recs = Json::array();
    for (const auto& r : records_) {
      recs.push_back({{"session", r.session},
                      {"participant", r.participant},
                      {"condition", r.condition},
                      {"measure", r.measure},
                      {"item", r.item},
                      {"score", r.score}});
    }
    Json p;
    p["records"] = recs;
    p["csv"] = stats::session_records_to_csv(records_);
    p["commands"] = engine::commands_to_json(command_log());
    p["seed"] = cfg_.seed;
    return frame("session_summary", std::move(p));
  }

 private:
  void rebuild() {
    engine::ProfileMap profiles;
    profiles.fallback = cfg_.profile;
    sim_ = std::make_unique<engine::Simulation>(cfg_.script, profiles, cfg_.env, cfg_.clips, cfg_.gait_map,
                                                cfg_.engine, cfg_.seed);
    log_cursor_ = 0;
  }

  std::string frame(std::string_view type, Json payload) {
    return encode_frame(type, ++out_seq_, std::move(payload));
  }

  std::string error_frame(const std::string& code, const std::string& message) {
    return frame("error", {{"code", code}, {"message", message}});
  }

  std::string state_frame() {
    Json agents = Json::array();
    for (const auto& s : sim_->snapshot()) agents.push_back(engine::snapshot_to_json(s));
    return frame("state", {{"tick", sim_->tick()}, {"agents", agents}});
  }

  void forward(const engine::LogEntry& e, std::vector<std::string>& out) {
    switch (e.kind) {
      case engine::LogKind::Event:
        out.push_back(frame("event", {{"name", e.name}, {"tick", e.tick}}));
        break;
      case engine::LogKind::Response:
        out.push_back(frame("response", {{"kind", e.name}, {"text", e.text}}));
        break;
      case engine::LogKind::Gesture:
        out.push_back(frame("event", {{"name", "gesture:" + e.name}, {"tick", e.tick}}));
        break;
      case engine::LogKind::Rejected:
        out.push_back(error_frame(e.text, "event " + e.name + " rejected in state " + e.from));
        break;
      case engine::LogKind::Fault:
        out.push_back(error_frame("fault", e.name + ": " + e.text));
        break;
      case engine::LogKind::Timeout:
        break;
    }
  }

  static int likert(const Json& v, const char* field) {
    if (!v.is_number_integer()) throw std::invalid_argument(std::string("'") + field + "' must be an integer 1..7");
    const int s = v.get<int>();
    if (s < 1 || s > 7) throw std::invalid_argument(std::string("'") + field + "' must be in 1..7");
    return s;
  }

  void on_configure(const Json& p, std::vector<std::string>& out) {
    AgentProfile prof = cfg_.profile;
    if (p.contains("f_des")) prof.f_des = Friendliness(p.at("f_des").get<double>());
    if (p.contains("gestures_enabled")) prof.gestures_enabled = p.at("gestures_enabled").get<bool>();
    if (p.contains("gaze_enabled")) prof.gaze_enabled = p.at("gaze_enabled").get<bool>();
    if (p.contains("model_id")) prof.model_id = p.at("model_id").get<std::string>();
    if (p.contains("gait_id")) {
      if (p.at("gait_id").is_null()) {
        prof.gait_id.reset();
      } else {
        const auto g = p.at("gait_id").get<std::string>();
        if (!cfg_.clips->contains(g)) throw std::invalid_argument("unknown gait '" + g + "'");
        prof.gait_id = g;
      }
    }
    if (p.contains("participant")) cfg_.participant = p.at("participant").get<std::string>();
    if (p.contains("session")) cfg_.session_id = p.at("session").get<std::string>();
    cfg_.profile = prof;
    rebuild();
    out.push_back(state_frame());
  }

  void on_command(const Json& p, std::vector<std::string>& out) {
    const auto task = p.at("task").get<std::string>();
    if (!cfg_.script.find(task)) {
      out.push_back(error_frame("unknown_task", "unknown task '" + task + "'"));
      return;
    }
    sim_->submit({}, BfsmEvent::command(task));
  }

  void on_rating(const Json& p, std::vector<std::string>& out) {
    const auto task = p.at("task").get<std::string>();
    if (!cfg_.script.find(task)) {
      out.push_back(error_frame("unknown_task", "unknown task '" + task + "'"));
      return;
    }
    const int score = likert(p.at("confidence"), "confidence");
    add_record("confidence", task, score, out);
  }

  void on_questionnaire(const Json& p, std::vector<std::string>& out) {
    const auto measure = p.at("measure").get<std::string>();
    const auto item = p.at("item").get<std::string>();
    if (measure.empty() || item.empty()) throw std::invalid_argument("measure and item must be non-empty");
    if (measure == "confidence") throw std::invalid_argument("'confidence' is reserved for task ratings");
    const int score = likert(p.at("score"), "score");
    add_record(measure, item, score, out);
  }

  void add_record(const std::string& measure, const std::string& item, int score, std::vector<std::string>& out) {
    stats::SessionRecord rec{cfg_.session_id, cfg_.participant, cfg_.profile.model_id, measure, item,
                             static_cast<double>(score)};
    auto same = [&](const stats::SessionRecord& r) {
      return r.session == rec.session && r.participant == rec.participant && r.condition == rec.condition &&
             r.measure == rec.measure && r.item == rec.item;
    };
    auto it = std::find_if(records_.begin(), records_.end(), same);
    if (it != records_.end()) *it = rec;  // a re-rating replaces the earlier answer
    else records_.push_back(rec);
    if (sim_->finished()) out.push_back(summary_frame());
  }

  void on_reset(std::vector<std::string>& out) {
    rebuild();
    out.push_back(state_frame());
  }

  SessionConfig cfg_;
  std::unique_ptr<engine::Simulation> sim_;
  std::size_t log_cursor_{0};
  std::optional<std::int64_t> last_client_seq_;
  std::int64_t out_seq_{0};
  std::vector<stats::SessionRecord> records_;
};

}  // namespace fva::service
