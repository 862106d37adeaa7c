#pragma once

// Behavioral finite state machine driving the seven-task interaction script:
// introduction, per-task accept / walk out / perform / walk back / complete,
// and farewell. Also maps states to gestures and to the state-level gaze flag.

#include "fva/friendliness.hpp"
#include "fva/geometry.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace fva {

enum class StateKind {
  Introduction,
  AwaitCommand,
  AcceptTask,
  NavigateOut,
  PerformTask,
  NavigateBack,
  CompleteTask,
  Farewell,
  Done,
};

inline constexpr std::string_view to_string(StateKind k) {
  switch (k) {
    case StateKind::Introduction: return "Introduction";
    case StateKind::AwaitCommand: return "AwaitCommand";
    case StateKind::AcceptTask: return "AcceptTask";
    case StateKind::NavigateOut: return "NavigateOut";
    case StateKind::PerformTask: return "PerformTask";
    case StateKind::NavigateBack: return "NavigateBack";
    case StateKind::CompleteTask: return "CompleteTask";
    case StateKind::Farewell: return "Farewell";
    case StateKind::Done: return "Done";
  }
  return "";
}

inline constexpr bool is_task_state(StateKind k) {
  return k == StateKind::AcceptTask || k == StateKind::NavigateOut || k == StateKind::PerformTask ||
         k == StateKind::NavigateBack || k == StateKind::CompleteTask;
}

inline constexpr bool is_navigate(StateKind k) {
  return k == StateKind::NavigateOut || k == StateKind::NavigateBack;
}

struct BfsmStateId {
  StateKind kind{StateKind::Introduction};
  std::string task;  // set only for task states

  bool operator==(const BfsmStateId&) const = default;

  /// "NavigateOut(A1)" or "Introduction".
  std::string str() const {
    return task.empty() ? std::string(to_string(kind)) : std::string(to_string(kind)) + "(" + task + ")";
  }
};

struct TaskSpec {
  std::string id;
  std::string command;
  std::string acceptance;
  std::string completion;
};

struct ScenarioScript {
  std::vector<TaskSpec> tasks;
  double dwell_seconds{5.0};
  Vec2 adjacent_room{6.0, 1.0};
  Vec2 station{1.2, 0.0};
  std::string farewell{"Bye Bye"};

  const TaskSpec* find(std::string_view id) const {
    for (const auto& t : tasks) {
      if (t.id == id) return &t;
    }
    return nullptr;
  }
};

/// The three awareness and four influence tasks with their scripted texts.
inline ScenarioScript canonical_script() {
  ScenarioScript s;
  s.tasks = {
      {"A1", "Please check if anyone is in the adjacent room.",
       "Okay! I am checking if anyone is in the adjacent room right now.",
       "There are a few people in the adjacent room."},
      {"A2", "Please check if it is quiet enough to perform the experiment.",
       "Okay! I am checking if it is quiet enough to perform the experiment.",
       "It is quiet enough to perform the experiment."},
      {"A3", "Please check if the temperature is high enough to conduct the experiment.",
       "Okay! I am checking if the temperature is high enough to conduct the experiment.",
       "The temperature is high enough to conduct the experiment."},
      {"I1", "Please close the adjacent room's other entrance.",
       "Okay! I am closing the adjacent room's other entrance.",
       "I closed the adjacent room's other entrance."},
      {"I2", "Please tell someone that the experiment will end in 15 minutes.",
       "Okay! I am telling someone that the experiment will end in 15 minutes.",
       "I told someone that the experiment will end in 15 minutes."},
      {"I3", "Please tell someone that I am not feeling well.",
       "Okay! I am telling someone that you are not feeling well.",
       "I told someone that you are not feeling well."},
      {"I4", "Please turn off the audio and video recording in the adjacent room.",
       "Okay! I am turning off the audio and video recording in the adjacent room.",
       "I turned off the audio and video recording in the adjacent room."},
  };
  return s;
}

inline nlohmann::json script_to_json(const ScenarioScript& s) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : s.tasks) {
    tasks.push_back({{"id", t.id}, {"command", t.command}, {"acceptance", t.acceptance}, {"completion", t.completion}});
  }
  return {{"tasks", tasks},
          {"dwell_seconds", s.dwell_seconds},
          {"adjacent_room", {s.adjacent_room.x, s.adjacent_room.y}},
          {"station", {s.station.x, s.station.y}},
          {"farewell", s.farewell}};
}

inline ScenarioScript script_from_json(const nlohmann::json& j) {
  ScenarioScript s;
  for (const auto& t : j.at("tasks")) {
    s.tasks.push_back({t.at("id").get<std::string>(), t.value("command", std::string{}),
                       t.at("acceptance").get<std::string>(), t.at("completion").get<std::string>()});
  }
  s.dwell_seconds = j.value("dwell_seconds", 5.0);
  auto v2 = [](const nlohmann::json& a) { return Vec2{a.at(0).get<double>(), a.at(1).get<double>()}; };
  if (j.contains("adjacent_room")) s.adjacent_room = v2(j.at("adjacent_room"));
  if (j.contains("station")) s.station = v2(j.at("station"));
  s.farewell = j.value("farewell", std::string{"Bye Bye"});
  return s;
}

struct AgentProfile {
  Friendliness f_des{0.5};
  bool gestures_enabled{true};
  bool gaze_enabled{true};
  std::string model_id{"agent"};
  std::optional<std::string> gait_id;  // overrides nearest-match selection
};

/// Friendliness-model agent used in the interaction study.
inline AgentProfile fva_profile(std::string model_id = "FVA") {
  return {Friendliness{0.97}, true, true, std::move(model_id), std::nullopt};
}

/// Baseline agent: default gait, no gestures, no eye contact.
inline AgentProfile default_profile(std::string model_id = "Default") {
  return {Friendliness{0.52}, false, false, std::move(model_id), std::nullopt};
}

enum class EventKind { UserCommand, ArrivedAtGoal, TimerElapsed, ResponseDelivered, SessionEnd };

inline constexpr std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::UserCommand: return "UserCommand";
    case EventKind::ArrivedAtGoal: return "ArrivedAtGoal";
    case EventKind::TimerElapsed: return "TimerElapsed";
    case EventKind::ResponseDelivered: return "ResponseDelivered";
    case EventKind::SessionEnd: return "SessionEnd";
  }
  return "";
}

inline std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (auto k : {EventKind::UserCommand, EventKind::ArrivedAtGoal, EventKind::TimerElapsed,
                 EventKind::ResponseDelivered, EventKind::SessionEnd}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

struct BfsmEvent {
  EventKind kind{EventKind::UserCommand};
  std::string task;  // UserCommand only

  static BfsmEvent command(std::string task) { return {EventKind::UserCommand, std::move(task)}; }
  bool operator==(const BfsmEvent&) const = default;

  std::string str() const { return task.empty() ? std::string(to_string(kind)) : std::string(to_string(kind)) + "(" + task + ")"; }
};

enum class GestureSlot { Hand, Head };

struct GestureRequest {
  GestureSlot slot{GestureSlot::Hand};
  std::string clip;  // wave_open, wave_closed or nod

  bool operator==(const GestureRequest&) const = default;
};

enum class ResponseKind { Acceptance, Completion, Farewell };

inline constexpr std::string_view to_string(ResponseKind k) {
  switch (k) {
    case ResponseKind::Acceptance: return "acceptance";
    case ResponseKind::Completion: return "completion";
    case ResponseKind::Farewell: return "farewell";
  }
  return "";
}

struct Utterance {
  ResponseKind kind{ResponseKind::Acceptance};
  std::string text;
};

struct BfsmOutput {
  BfsmStateId state;
  std::optional<Vec2> goal;
  std::optional<GestureRequest> gesture_request;
  bool gaze_bfsm{false};
  std::optional<Utterance> say;
};

/// State-to-gesture mapping: waving on farewell, nodding on task completion.
inline std::optional<GestureRequest> gesture_for_state(const BfsmStateId& state, const AgentProfile& profile) {
  if (!profile.gestures_enabled) return std::nullopt;
  if (state.kind == StateKind::Farewell) {
    switch (hand_gesture_mode(profile.f_des)) {
      case HandGesture::Open: return GestureRequest{GestureSlot::Hand, "wave_open"};
      case HandGesture::Closed: return GestureRequest{GestureSlot::Hand, "wave_closed"};
      case HandGesture::Absent: return std::nullopt;
    }
  }
  if (state.kind == StateKind::CompleteTask && head_gesture_mode(profile.f_des) == HeadGesture::Present) {
    return GestureRequest{GestureSlot::Head, "nod"};
  }
  return std::nullopt;
}

/// State-level eye contact: off while walking away, performing the task
/// facing away, walking back, and after the session.
inline constexpr bool gaze_for_state(StateKind k) {
  switch (k) {
    case StateKind::Introduction:
    case StateKind::AwaitCommand:
    case StateKind::AcceptTask:
    case StateKind::CompleteTask:
    case StateKind::Farewell: return true;
    case StateKind::NavigateOut:
    case StateKind::PerformTask:
    case StateKind::NavigateBack:
    case StateKind::Done: return false;
  }
  return false;
}

inline bool gaze_for_state(const BfsmStateId& s) { return gaze_for_state(s.kind); }

inline constexpr bool combine_gaze(bool xi_f, bool xi_bfsm, bool gaze_enabled) {
  return xi_f && xi_bfsm && gaze_enabled;
}

class BfsmError : public std::runtime_error {
 public:
  enum class Code { EmptyScript, StateMismatch, UnknownTask, TaskAlreadyDone };

  BfsmError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

inline constexpr std::string_view to_string(BfsmError::Code c) {
  switch (c) {
    case BfsmError::Code::EmptyScript: return "empty_script";
    case BfsmError::Code::StateMismatch: return "state_mismatch";
    case BfsmError::Code::UnknownTask: return "unknown_task";
    case BfsmError::Code::TaskAlreadyDone: return "task_already_done";
  }
  return "";
}

namespace detail {

struct Transition {
  StateKind from;
  EventKind on;
  StateKind to;
};

// CompleteTask --ResponseDelivered--> AwaitCommand is redirected to Farewell
// once every task is done.
inline constexpr std::array<Transition, 9> kTransitions{{
    {StateKind::Introduction, EventKind::UserCommand, StateKind::AcceptTask},
    {StateKind::AwaitCommand, EventKind::UserCommand, StateKind::AcceptTask},
    {StateKind::AcceptTask, EventKind::ResponseDelivered, StateKind::NavigateOut},
    {StateKind::NavigateOut, EventKind::ArrivedAtGoal, StateKind::PerformTask},
    {StateKind::PerformTask, EventKind::TimerElapsed, StateKind::NavigateBack},
    {StateKind::NavigateBack, EventKind::ArrivedAtGoal, StateKind::CompleteTask},
    {StateKind::CompleteTask, EventKind::ResponseDelivered, StateKind::AwaitCommand},
    {StateKind::Farewell, EventKind::ResponseDelivered, StateKind::Done},
    {StateKind::Done, EventKind::SessionEnd, StateKind::Done},
}};

}  // namespace detail

class Bfsm {
 public:
  Bfsm(std::shared_ptr<const ScenarioScript> script, AgentProfile profile)
      : script_(std::move(script)), profile_(std::move(profile)) {
    if (!script_ || script_->tasks.empty()) throw BfsmError(BfsmError::Code::EmptyScript, "scenario script has no tasks");
    if (!(script_->dwell_seconds > 0.0)) throw BfsmError(BfsmError::Code::EmptyScript, "dwell_seconds must be positive");
  }

  Bfsm(const ScenarioScript& script, AgentProfile profile)
      : Bfsm(std::make_shared<const ScenarioScript>(script), std::move(profile)) {}

  const BfsmStateId& state() const { return state_; }
  const AgentProfile& profile() const { return profile_; }
  const ScenarioScript& script() const { return *script_; }
  double entered_at() const { return entered_at_; }
  const std::set<std::string>& completed() const { return completed_; }

  /// First task not yet completed, in script order.
  std::optional<std::string> next_task() const {
    for (const auto& t : script_->tasks) {
      if (!completed_.contains(t.id)) return t.id;
    }
    return std::nullopt;
  }

  bool accepts(const BfsmEvent& e) const {
    try {
      resolve(e);
      return true;
    } catch (const BfsmError&) {
      return false;
    }
  }

  /// Applies an event at time t. Invalid events throw BfsmError and leave the
  /// machine untouched.
  BfsmOutput step(const BfsmEvent& event, double t) {
    BfsmStateId next = resolve(event);
    if (state_.kind == StateKind::CompleteTask && event.kind == EventKind::ResponseDelivered) {
      completed_.insert(state_.task);
      if (completed_.size() == script_->tasks.size()) next = {StateKind::Farewell, {}};
    }
    state_ = std::move(next);
    entered_at_ = t;
    BfsmOutput out = output();
    out.say = entry_utterance();
    out.gesture_request = gesture_for_state(state_, profile_);
    return out;
  }

  /// Steady-state output of the current state (no entry actions).
  BfsmOutput output() const {
    BfsmOutput out;
    out.state = state_;
    if (state_.kind == StateKind::NavigateOut) out.goal = script_->adjacent_room;
    if (state_.kind == StateKind::NavigateBack) out.goal = script_->station;
    out.gaze_bfsm = gaze_for_state(state_);
    return out;
  }

 private:
  BfsmStateId resolve(const BfsmEvent& e) const {
    if (e.kind == EventKind::SessionEnd) return {StateKind::Done, {}};
    for (const auto& tr : detail::kTransitions) {
      if (tr.from != state_.kind || tr.on != e.kind) continue;
      if (e.kind == EventKind::UserCommand) {
        if (!script_->find(e.task)) {
          throw BfsmError(BfsmError::Code::UnknownTask, "unknown task '" + e.task + "'");
        }
        if (completed_.contains(e.task)) {
          throw BfsmError(BfsmError::Code::TaskAlreadyDone, "task '" + e.task + "' already completed");
        }
        return {tr.to, e.task};
      }
      return {tr.to, is_task_state(tr.to) ? state_.task : std::string{}};
    }
    throw BfsmError(BfsmError::Code::StateMismatch,
                    "event " + e.str() + " is not valid in state " + state_.str());
  }

  std::optional<Utterance> entry_utterance() const {
    switch (state_.kind) {
      case StateKind::AcceptTask: return Utterance{ResponseKind::Acceptance, script_->find(state_.task)->acceptance};
      case StateKind::CompleteTask: return Utterance{ResponseKind::Completion, script_->find(state_.task)->completion};
      case StateKind::Farewell: return Utterance{ResponseKind::Farewell, script_->farewell};
      default: return std::nullopt;
    }
  }

  std::shared_ptr<const ScenarioScript> script_;
  AgentProfile profile_;
  BfsmStateId state_{StateKind::Introduction, {}};
  std::set<std::string> completed_;
  double entered_at_{0.0};
};

}  // namespace fva
