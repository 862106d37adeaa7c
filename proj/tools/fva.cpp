// fva: scenario runner, calibration, statistics, BVH conversion and the
// interactive session service.

#include "fva/engine.hpp"
#include "fva/friendliness.hpp"
#include "fva/motion/bvh.hpp"
#include "fva/motion/clip_json.hpp"
#include "fva/service/server.hpp"
#include "fva/stats.hpp"

#include <CLI11.hpp>
#include <boost/asio/signal_set.hpp>

#include <algorithm>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace fva;

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

AgentProfile profile_by_name(const std::string& name) {
  if (name == "fva") return fva_profile();
  if (name == "default") return default_profile();
  throw std::runtime_error("unknown profile '" + name + "' (expected fva or default)");
}

struct Inputs {
  std::string scenario;
  std::string env;
  std::string gaitmap;
  std::string clips;
  std::string profile{"fva"};
  std::uint64_t seed{42};
};

void add_inputs(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--scenario", in.scenario, "Scenario script JSON (default: built-in seven-task script)");
  cmd->add_option("--env", in.env, "Environment JSON (default: built-in study room)");
  cmd->add_option("--gaitmap", in.gaitmap, "Gait map JSON (default: built-in calibration)");
  cmd->add_option("--clips", in.clips, "Directory of BVH / clip JSON files added to the built-in clips");
  cmd->add_option("--profile", in.profile, "Agent profile: fva or default")->check(CLI::IsMember({"fva", "default"}));
  cmd->add_option("--seed", in.seed, "Random seed");
}

ScenarioScript load_script(const Inputs& in) {
  return in.scenario.empty() ? canonical_script() : script_from_json(read_json(in.scenario));
}

nav::EnvironmentState load_env(const Inputs& in) {
  return in.env.empty() ? nav::canonical_environment() : nav::environment_from_json(read_json(in.env));
}

GaitMap load_gaitmap(const Inputs& in) {
  return in.gaitmap.empty() ? builtin_gait_map() : gait_map_from_json(read_json(in.gaitmap));
}

std::shared_ptr<const motion::ClipStore> load_clips(const Inputs& in) {
  auto store = motion::builtin_clip_store();
  if (!in.clips.empty()) store.load_directory(in.clips);
  return std::make_shared<const motion::ClipStore>(std::move(store));
}

int cmd_run(const Inputs& in, const std::string& commands, const std::string& out, const std::string& log_out,
            const std::string& commands_out, std::int64_t max_ticks, double auto_delay, std::int64_t stride) {
  engine::ProfileMap profiles;
  profiles.fallback = profile_by_name(in.profile);
  std::vector<engine::Command> cmds;
  if (!commands.empty()) cmds = engine::commands_from_json(read_json(commands));
  engine::RunOptions opts;
  opts.max_ticks = max_ticks;
  opts.snapshot_stride = stride;
  if (auto_delay >= 0.0) opts.auto_operator_delay = auto_delay;
  const auto res = engine::run_scenario(load_script(in), profiles, load_env(in), cmds, in.seed, opts, load_clips(in),
                                        load_gaitmap(in));
  write_text(out, res.trace_jsonl());
  if (!log_out.empty()) write_text(log_out, res.log_jsonl());
  if (!commands_out.empty()) write_text(commands_out, engine::commands_to_json(res.commands).dump(2) + "\n");
  if (res.timed_out) {
    std::cerr << "fva run: " << res.log.back().text << "\n";
    return 2;
  }
  return 0;
}

int cmd_calibrate(const std::string& ratings, const std::string& out) {
  const auto map = aggregate_ratings(parse_ratings_csv(read_text_file(ratings)));
  write_text(out, gait_map_to_json(map).dump(2) + "\n");
  return 0;
}

int cmd_stats(const std::string& input, const std::string& test) {
  const std::string text = read_text_file(input);
  if (test == "alpha") {
    std::printf("alpha %.15g\n", stats::cronbach_alpha(stats::parse_matrix_csv(text)));
  } else if (test == "friedman") {
    const auto r = stats::friedman(stats::parse_matrix_csv(text));
    std::printf("chi2 %.15g\ndf %.15g\np %.15g\nn %zu\nk %zu\n", r.statistic, r.df, r.p_value, r.n, r.k);
  } else {
    const auto cols = stats::parse_columns_csv(text);
    if (cols.size() != 2) throw std::runtime_error("ttest expects exactly two columns");
    const auto r = stats::t_test_independent(cols[0].second, cols[1].second);
    std::printf("t %.15g\ndf %.15g\np %.15g\n", r.statistic, r.df, r.p_value);
  }
  return 0;
}

int cmd_parse_bvh(const std::string& file, const std::string& out, double scale, const std::string& kind,
                  std::string id, bool loop) {
  motion::BvhOptions o;
  o.scale = scale;
  o.kind = motion::parse_clip_kind(kind);
  o.loopable = loop;
  o.clip_id = id.empty() ? std::filesystem::path(file).stem().string() : std::move(id);
  const auto [sk, clip] = motion::load_bvh(file, o);
  write_text(out, motion::clip_to_json(clip).dump() + "\n");
  std::cerr << "parsed " << sk.joint_count() << " joints, " << clip.frames.size() << " frames\n";
  return 0;
}

double tick_hz_from_env() {
  const char* v = std::getenv("FVA_TICK_HZ");
  if (!v || !*v) return 60.0;
  char* end = nullptr;
  const double hz = std::strtod(v, &end);
  if (end == v || *end != '\0' || !(hz > 0.0)) throw std::runtime_error(std::string("invalid FVA_TICK_HZ '") + v + "'");
  return hz;
}

int cmd_serve(const Inputs& in, const std::string& address, unsigned short port, double snapshot_hz) {
  service::SessionConfig cfg;
  cfg.script = load_script(in);
  cfg.env = load_env(in);
  cfg.gait_map = load_gaitmap(in);
  cfg.clips = load_clips(in);
  cfg.profile = profile_by_name(in.profile);
  cfg.seed = in.seed;
  const double tick_hz = tick_hz_from_env();
  if (!(snapshot_hz > 0.0)) throw std::runtime_error("--snapshot-hz must be positive");
  cfg.snapshot_stride = std::max<std::int64_t>(1, std::llround(tick_hz / snapshot_hz));
  service::ServiceSession session(std::move(cfg));

  service::net::io_context ioc;
  auto server = std::make_shared<service::WsServer>(ioc, session, service::WsServer::Options{address, port, tick_hz});
  server->start();
  service::net::signal_set signals(ioc, SIGINT, SIGTERM);
  signals.async_wait([&](const boost::system::error_code&, int) {
    server->stop();
    ioc.stop();
  });
  std::cerr << "fva serve: listening on ws://" << address << ":" << server->port() << " (tick " << tick_hz
            << " Hz)\n";
  ioc.run();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Friendly virtual agent simulation tools"};
  app.require_subcommand(1);

  Inputs in;
  std::string commands, out{"trace.jsonl"}, log_out, commands_out;
  std::int64_t max_ticks = 60 * 60 * 10;
  std::int64_t stride = 1;
  double auto_delay = -1.0;
  auto* run = app.add_subcommand("run", "Run a scenario headless and write a JSON Lines trace");
  add_inputs(run, in);
  run->add_option("--commands", commands, "Command trace JSON [{\"tick\":n,\"task\":\"A1\"}]");
  run->add_option("--out", out, "Trace output (JSON Lines; - for stdout)");
  run->add_option("--log-out", log_out, "Event log output (JSON Lines)");
  run->add_option("--commands-out", commands_out, "Write the applied command trace");
  run->add_option("--max-ticks", max_ticks, "Stop after this many ticks");
  run->add_option("--snapshot-stride", stride, "Ticks between recorded snapshots (0 = none)");
  run->add_option("--auto-operator", auto_delay, "Issue the next task this many seconds after the agent is ready");

  std::string ratings, gaitmap_out{"gaitmap.json"};
  auto* cal = app.add_subcommand("calibrate", "Aggregate ratings into a gait map");
  cal->add_option("--ratings", ratings, "Ratings CSV")->required();
  cal->add_option("--out", gaitmap_out, "Gait map JSON output");

  std::string input, test;
  auto* st = app.add_subcommand("stats", "Run a statistical test on a CSV");
  st->add_option("--input", input, "CSV input")->required();
  st->add_option("--test", test, "friedman, alpha or ttest")->required()->check(CLI::IsMember({"friedman", "alpha", "ttest"}));

  std::string bvh_file, clip_out{"clip.json"}, kind{"gait"}, clip_id;
  double scale = 0.01;
  bool loop = false;
  auto* pb = app.add_subcommand("parse-bvh", "Convert a BVH file to clip JSON");
  pb->add_option("file", bvh_file, "BVH input")->required();
  pb->add_option("--out", clip_out, "Clip JSON output");
  pb->add_option("--scale", scale, "Length scale applied to offsets and positions");
  pb->add_option("--kind", kind, "gait, gesture_hand or gesture_head");
  pb->add_option("--id", clip_id, "Clip id (default: file stem)");
  pb->add_flag("--loop", loop, "Mark the clip loopable");

  std::string address{"127.0.0.1"};
  unsigned short port = 8765;
  double snapshot_hz = 20.0;
  auto* sv = app.add_subcommand("serve", "Serve one interactive session over websocket");
  add_inputs(sv, in);
  sv->add_option("--address", address, "Listen address");
  sv->add_option("--port", port, "Listen port");
  sv->add_option("--snapshot-hz", snapshot_hz, "State frame rate");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(in, commands, out, log_out, commands_out, max_ticks, auto_delay, stride);
    if (*cal) return cmd_calibrate(ratings, gaitmap_out);
    if (*st) return cmd_stats(input, test);
    if (*pb) return cmd_parse_bvh(bvh_file, clip_out, scale, kind, clip_id, loop);
    if (*sv) return cmd_serve(in, address, port, snapshot_hz);
  } catch (const std::exception& e) {
    std::cerr << "fva " << app.get_subcommands().front()->get_name() << ": " << e.what() << "\n";
    return 1;
  }
  return 1;
}
