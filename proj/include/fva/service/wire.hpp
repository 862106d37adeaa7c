#pragma once

// JSON text frames exchanged with the console: {type, seq, payload}.

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fva::service {

using Json = nlohmann::ordered_json;

inline constexpr std::array<std::string_view, 5> kClientTypes{"configure", "command", "rating", "questionnaire",
                                                              "reset"};
inline constexpr std::array<std::string_view, 5> kServerTypes{"state", "response", "event", "error",
                                                              "session_summary"};

struct Envelope {
  std::string type;
  std::int64_t seq{0};
  Json payload = Json::object();
};

struct WireError {
  std::string code;
  std::string message;
};

/// Either an envelope or the reason the frame was refused.
struct ParsedFrame {
  std::optional<Envelope> envelope;
  std::optional<WireError> error;
};

inline bool is_client_type(std::string_view t) {
  for (auto c : kClientTypes) {
    if (c == t) return true;
  }
  return false;
}

inline ParsedFrame parse_frame(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    return {std::nullopt, WireError{"malformed_json", e.what()}};
  }
  if (!j.is_object()) return {std::nullopt, WireError{"bad_envelope", "frame must be a JSON object"}};
  if (!j.contains("type") || !j["type"].is_string()) {
    return {std::nullopt, WireError{"bad_envelope", "missing string field 'type'"}};
  }
  if (!j.contains("seq") || !j["seq"].is_number_integer()) {
    return {std::nullopt, WireError{"bad_envelope", "missing integer field 'seq'"}};
  }
  Envelope env;
  env.type = j["type"].get<std::string>();
  env.seq = j["seq"].get<std::int64_t>();
  if (j.contains("payload")) {
    if (!j["payload"].is_object()) return {std::nullopt, WireError{"bad_envelope", "'payload' must be an object"}};
    env.payload = j["payload"];
  }
  return {std::move(env), std::nullopt};
}

inline std::string encode_frame(std::string_view type, std::int64_t seq, Json payload) {
  Json j;
  j["type"] = type;
  j["seq"] = seq;
  j["payload"] = std::move(payload);
  return j.dump();
}

}  // namespace fva::service
