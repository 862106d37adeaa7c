#include "fva/service/session.hpp"

#include <gtest/gtest.h>

using namespace fva;
using namespace fva::service;

namespace {

std::string client(std::string_view type, std::int64_t seq, Json payload = Json::object()) {
  return encode_frame(type, seq, std::move(payload));
}

std::vector<Json> parsed(const std::vector<std::string>& frames) {
  std::vector<Json> out;
  for (const auto& f : frames) out.push_back(Json::parse(f));
  return out;
}

std::vector<Json> of_type(const std::vector<Json>& frames, std::string_view type) {
  std::vector<Json> out;
  for (const auto& f : frames) {
    if (f.at("type") == type) out.push_back(f);
  }
  return out;
}

/// Runs the session until `pred` holds on a produced frame or `max_ticks` pass.
std::vector<Json> advance_until(ServiceSession& s, const std::function<bool(const Json&)>& pred,
                                int max_ticks = 20000) {
  std::vector<Json> out;
  for (int i = 0; i < max_ticks; ++i) {
    for (auto& f : parsed(s.advance())) {
      out.push_back(f);
      if (pred(f)) return out;
    }
  }
  ADD_FAILURE() << "condition not reached within " << max_ticks << " ticks";
  return out;
}

}  // namespace

TEST(Wire, ParseAndEncode) {
  const auto p = parse_frame(R"({"type":"command","seq":3,"payload":{"task":"A1"}})");
  ASSERT_TRUE(p.envelope);
  EXPECT_EQ(p.envelope->type, "command");
  EXPECT_EQ(p.envelope->seq, 3);
  EXPECT_EQ(p.envelope->payload.at("task"), "A1");
  const auto q = parse_frame(encode_frame("reset", 9, Json::object()));
  ASSERT_TRUE(q.envelope);
  EXPECT_EQ(q.envelope->type, "reset");
  EXPECT_TRUE(parse_frame(R"({"type":"reset","seq":1})").envelope);
}

TEST(Wire, Errors) {
  auto code = [](std::string_view text) {
    const auto p = parse_frame(text);
    return p.error ? p.error->code : std::string("ok");
  };
  EXPECT_EQ(code("{not json"), "malformed_json");
  EXPECT_EQ(code("[1,2]"), "bad_envelope");
  EXPECT_EQ(code(R"({"seq":1})"), "bad_envelope");
  EXPECT_EQ(code(R"({"type":"reset","seq":"1"})"), "bad_envelope");
  EXPECT_EQ(code(R"({"type":"reset","seq":1.5})"), "bad_envelope");
  EXPECT_EQ(code(R"({"type":"reset","seq":1,"payload":[]})"), "bad_envelope");
}

TEST(Session, GreetingIsStateAtTickZero) {
  ServiceSession s({});
  const auto g = parsed(s.greeting());
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].at("type"), "state");
  EXPECT_EQ(g[0].at("seq"), 1);
  EXPECT_EQ(g[0].at("payload").at("tick"), 0);
  EXPECT_EQ(g[0].at("payload").at("agents").at(0).at("bfsm_state"), "Introduction");
}

TEST(Session, CommandAcceptedOnNextTickWithScriptedText) {
  ServiceSession s({});
  EXPECT_EQ(parsed(s.handle(client("configure", 1, {{"f_des", 0.97}}))).at(0).at("type"), "state");
  EXPECT_TRUE(s.handle(client("command", 2, {{"task", "A1"}})).empty());
  const auto frames = parsed(s.advance());
  const auto responses = of_type(frames, "response");
  ASSERT_EQ(responses.size(), 1u);
  EXPECT_EQ(responses[0].at("payload").at("kind"), "acceptance");
  EXPECT_EQ(responses[0].at("payload").at("text"), canonical_script().tasks[0].acceptance);
  const auto events = of_type(frames, "event");
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].at("payload").at("name"), "UserCommand(A1)");
  EXPECT_EQ(events[0].at("payload").at("tick"), 0);
}

TEST(Session, OutgoingSeqStrictlyIncreases) {
  ServiceSession s({});
  std::vector<std::string> all = s.greeting();
  for (auto& f : s.handle(client("command", 1, {{"task", "A1"}}))) all.push_back(f);
  for (int i = 0; i < 400; ++i) {
    for (auto& f : s.advance()) all.push_back(f);
  }
  for (auto& f : s.handle("garbage")) all.push_back(f);
  std::int64_t prev = 0;
  for (const auto& f : all) {
    const auto seq = Json::parse(f).at("seq").get<std::int64_t>();
    EXPECT_GT(seq, prev);
    prev = seq;
  }
}

TEST(Session, StateFramesAtConfiguredStride) {
  SessionConfig cfg;
  cfg.snapshot_stride = 3;
  ServiceSession s(cfg);
  std::vector<std::int64_t> ticks;
  for (int i = 0; i < 12; ++i) {
    for (const auto& f : of_type(parsed(s.advance()), "state")) ticks.push_back(f.at("payload").at("tick"));
  }
  EXPECT_EQ(ticks, (std::vector<std::int64_t>{3, 6, 9, 12}));
}

TEST(Session, ProtocolErrorsLeaveSessionAlive) {
  ServiceSession s({});
  auto first_error = [&](std::string_view text) {
    const auto out = of_type(parsed(s.handle(text)), "error");
    return out.empty() ? std::string("none") : out[0].at("payload").at("code").get<std::string>();
  };
  EXPECT_EQ(first_error("{oops"), "malformed_json");
  EXPECT_EQ(first_error(R"({"type":"command"})"), "bad_envelope");
  EXPECT_EQ(first_error(client("dance", 5)), "unknown_type");
  EXPECT_EQ(first_error(client("command", 5, {{"task", "A1"}})), "bad_seq");
  EXPECT_EQ(first_error(client("command", 4, {{"task", "A1"}})), "bad_seq");
  EXPECT_EQ(first_error(client("command", 6, {{"task", "Q7"}})), "unknown_task");
  EXPECT_EQ(first_error(client("command", 7, Json::object())), "bad_payload");
  EXPECT_EQ(first_error(client("configure", 8, {{"f_des", 1.5}})), "bad_payload");
  EXPECT_EQ(first_error(client("configure", 9, {{"gait_id", "moonwalk"}})), "bad_payload");
  EXPECT_EQ(first_error(client("rating", 10, {{"task", "A1"}, {"confidence", 8}})), "bad_payload");
  EXPECT_EQ(first_error(client("rating", 11, {{"task", "A1"}, {"confidence", 3.5}})), "bad_payload");
  EXPECT_EQ(first_error(client("questionnaire", 12, {{"measure", "confidence"}, {"item", "x"}, {"score", 3}})),
            "bad_payload");
  EXPECT_EQ(first_error(client("command", 13, {{"task", "A3"}})), "none");
  const auto frames = parsed(s.advance());
  EXPECT_EQ(of_type(frames, "response").at(0).at("payload").at("text"), canonical_script().tasks[2].acceptance);
  EXPECT_TRUE(s.records().empty());
}

TEST(Session, EngineRejectionBecomesErrorFrame) {
  ServiceSession s({});
  s.handle(client("command", 1, {{"task", "A1"}}));
  s.advance();
  s.handle(client("command", 2, {{"task", "A2"}}));
  const auto errors = of_type(parsed(s.advance()), "error");
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0].at("payload").at("code"), "state_mismatch");
}

TEST(Session, ResetReturnsToTickZeroAndKeepsSeq) {
  ServiceSession s({});
  s.handle(client("command", 1, {{"task", "A1"}}));
  for (int i = 0; i < 50; ++i) s.advance();
  EXPECT_EQ(s.simulation().tick(), 50);
  const auto out = parsed(s.handle(client("reset", 2)));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].at("payload").at("tick"), 0);
  EXPECT_EQ(s.simulation().tick(), 0);
  EXPECT_TRUE(s.command_log().empty());
  EXPECT_EQ(of_type(parsed(s.handle(client("reset", 2))), "error").at(0).at("payload").at("code"), "bad_seq");
  s.reset_connection();
  EXPECT_EQ(parsed(s.handle(client("reset", 1))).at(0).at("seq"), 1);
}

TEST(Session, ConfigureSelectsProfile) {
  ServiceSession s({});
  const auto out = parsed(s.handle(
      client("configure", 1, {{"f_des", 0.2}, {"gestures_enabled", false}, {"gaze_enabled", false},
                              {"model_id", "Default"}, {"participant", "P7"}, {"session", "S2"}})));
  EXPECT_EQ(s.profile().model_id, "Default");
  EXPECT_FALSE(s.profile().gestures_enabled);
  EXPECT_EQ(out.at(0).at("payload").at("agents").at(0).at("clips").at(0).at("id"), "Gait1");
  s.handle(client("configure", 2, {{"gait_id", "Gait3"}}));
  EXPECT_EQ(s.profile().gait_id, "Gait3");
  s.handle(client("configure", 3, {{"gait_id", nullptr}}));
  EXPECT_FALSE(s.profile().gait_id);
}

TEST(Session, RatingsReplaceAndFeedStats) {
  ServiceSession s({});
  s.handle(client("configure", 1, {{"participant", "P1"}, {"model_id", "FVA"}}));
  s.handle(client("rating", 2, {{"task", "A1"}, {"confidence", 3}}));
  s.handle(client("rating", 3, {{"task", "A1"}, {"confidence", 6}}));
  s.handle(client("questionnaire", 4, {{"measure", "friendliness"}, {"item", "warm"}, {"score", 5}}));
  ASSERT_EQ(s.records().size(), 2u);
  EXPECT_EQ(s.records()[0].score, 6.0);
  const auto summary = Json::parse(s.summary_frame());
  EXPECT_EQ(summary.at("type"), "session_summary");
  const auto csv = summary.at("payload").at("csv").get<std::string>();
  const auto back = stats::parse_session_csv(csv);
  EXPECT_EQ(back, s.records());
  const auto m = stats::session_to_matrix(back, "confidence");
  EXPECT_EQ(m.rows(), 1u);
  EXPECT_EQ(m(0, 0), 6.0);
  EXPECT_EQ(summary.at("payload").at("records").size(), 2u);
}

TEST(Session, FullFlowEndsWithSummaryAndMatchesBatchReplay) {
  ServiceSession s({});
  std::int64_t seq = 0;
  std::vector<Json> responses;
  auto ready = [&](const Json& f) {
    return f.at("type") == "state" &&
           (f.at("payload").at("agents").at(0).at("bfsm_state") == "AwaitCommand" ||
            f.at("payload").at("agents").at(0).at("bfsm_state") == "Introduction");
  };
  std::vector<Json> tail;
  for (const auto& task : canonical_script().tasks) {
    s.handle(client("command", ++seq, {{"task", task.id}}));
    for (const auto& f : of_type(parsed(s.advance()), "response")) responses.push_back(f);
    s.handle(client("rating", ++seq, {{"task", task.id}, {"confidence", 4 + static_cast<int>(seq % 3)}}));
    tail = advance_until(s, [&](const Json& f) { return ready(f) || f.at("type") == "session_summary"; });
    for (const auto& f : tail) {
      if (f.at("type") == "response") responses.push_back(f);
    }
  }
  ASSERT_FALSE(tail.empty());
  EXPECT_EQ(tail.back().at("type"), "session_summary");
  EXPECT_TRUE(s.done());
  ASSERT_EQ(responses.size(), 15u);
  EXPECT_EQ(responses.back().at("payload").at("text"), "Bye Bye");
  EXPECT_TRUE(s.advance().empty());
  const auto late = parsed(s.handle(client("questionnaire", ++seq, {{"measure", "trust"}, {"item", "q1"}, {"score", 2}})));
  ASSERT_EQ(late.size(), 1u);
  EXPECT_EQ(late[0].at("type"), "session_summary");
  EXPECT_EQ(late[0].at("payload").at("records").size(), 8u);
  const auto summary = tail.back().at("payload");
  EXPECT_EQ(summary.at("records").size(), 7u);
  EXPECT_EQ(summary.at("seed"), 42);

  // The recorded command trace replays to the same event log offline.
  const auto cmds = engine::commands_from_json(summary.at("commands"));
  ASSERT_EQ(cmds.size(), 7u);
  engine::ProfileMap profiles;
  engine::RunOptions opts;
  opts.snapshot_stride = 0;
  const auto batch = engine::run_scenario(canonical_script(), profiles, nav::canonical_environment(), cmds, 42, opts);
  EXPECT_EQ(batch.log_jsonl(), [&] {
    std::string out;
    for (const auto& e : s.simulation().log()) out += engine::log_entry_to_json(e).dump() + "\n";
    return out;
  }());
}
