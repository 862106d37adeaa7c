#include "fva/service/server.hpp"

#include <gtest/gtest.h>

#include <thread>

using namespace fva;
using namespace fva::service;

namespace {

using Client = websocket::stream<tcp::socket>;

/// Server on an ephemeral port, ticking on its own thread.
struct Harness {
  net::io_context ioc;
  ServiceSession session{SessionConfig{}};
  std::shared_ptr<WsServer> server;
  std::thread thread;

  explicit Harness(double tick_hz) {
    server = std::make_shared<WsServer>(ioc, session, WsServer::Options{"127.0.0.1", 0, tick_hz});
    server->start();
    thread = std::thread([this] { ioc.run(); });
  }
  ~Harness() {
    net::post(ioc, [s = server] { s->stop(); });
    ioc.stop();
    thread.join();
  }
};

std::unique_ptr<Client> connect(net::io_context& ioc, unsigned short port) {
  auto ws = std::make_unique<Client>(ioc);
  tcp::resolver resolver(ioc);
  net::connect(ws->next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
  ws->handshake("127.0.0.1", "/");
  return ws;
}

Json read_frame(Client& ws) {
  beast::flat_buffer buf;
  ws.read(buf);
  return Json::parse(beast::buffers_to_string(buf.data()));
}

void send(Client& ws, std::string_view type, std::int64_t seq, Json payload = Json::object()) {
  ws.write(net::buffer(encode_frame(type, seq, std::move(payload))));
}

}  // namespace

TEST(WebSocket, FullSessionOverTheWire) {
  Harness h(3000.0);
  net::io_context cioc;
  auto ws = connect(cioc, h.server->port());

  const auto hello = read_frame(*ws);
  EXPECT_EQ(hello.at("type"), "state");
  EXPECT_EQ(hello.at("seq"), 1);

  std::int64_t seq = 0;
  send(*ws, "configure", ++seq, {{"f_des", 0.97}, {"participant", "P3"}});
  std::vector<std::string> spoken;
  std::size_t next = 0;
  bool pending = false;
  std::int64_t last_seq = 0;
  Json summary;
  const auto tasks = canonical_script().tasks;
  while (summary.is_null()) {
    const auto f = read_frame(*ws);
    EXPECT_GT(f.at("seq").get<std::int64_t>(), last_seq);
    last_seq = f.at("seq").get<std::int64_t>();
    const auto type = f.at("type").get<std::string>();
    if (type == "response") {
      spoken.push_back(f.at("payload").at("text"));
      if (f.at("payload").at("kind") == "acceptance") pending = false;
    } else if (type == "state") {
      const auto state = f.at("payload").at("agents").at(0).at("bfsm_state").get<std::string>();
      if (!pending && next < tasks.size() && (state == "Introduction" || state == "AwaitCommand")) {
        send(*ws, "command", ++seq, {{"task", tasks[next].id}});
        send(*ws, "rating", ++seq, {{"task", tasks[next].id}, {"confidence", 5}});
        ++next;
        pending = true;
      }
    } else if (type == "session_summary") {
      summary = f.at("payload");
    } else if (type == "error") {
      ADD_FAILURE() << f.dump();
    }
  }
  ASSERT_EQ(spoken.size(), 15u);
  EXPECT_EQ(spoken.back(), "Bye Bye");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    EXPECT_EQ(spoken[2 * i], tasks[i].acceptance);
    EXPECT_EQ(spoken[2 * i + 1], tasks[i].completion);
  }
  EXPECT_EQ(summary.at("records").size(), 7u);
  const auto recs = stats::parse_session_csv(summary.at("csv").get<std::string>());
  EXPECT_EQ(recs.front().participant, "P3");
  EXPECT_EQ(stats::session_to_matrix(recs, "confidence").rows(), 1u);
  ws->close(websocket::close_code::normal);
}

TEST(WebSocket, MalformedFrameGetsErrorAndConnectionSurvives) {
  Harness h(200.0);
  net::io_context cioc;
  auto ws = connect(cioc, h.server->port());
  read_frame(*ws);
  ws->write(net::buffer(std::string("{definitely not json")));
  send(*ws, "teleport", 1);
  send(*ws, "command", 2, {{"task", "A1"}});
  std::vector<std::string> codes;
  bool accepted = false;
  while (!accepted) {
    const auto f = read_frame(*ws);
    if (f.at("type") == "error") codes.push_back(f.at("payload").at("code"));
    if (f.at("type") == "response") accepted = f.at("payload").at("text") == canonical_script().tasks[0].acceptance;
  }
  EXPECT_EQ(codes, (std::vector<std::string>{"malformed_json", "unknown_type"}));
  ws->close(websocket::close_code::normal);
}

TEST(WebSocket, SecondClientIsTurnedAway) {
  Harness h(100.0);
  net::io_context cioc;
  auto first = connect(cioc, h.server->port());
  read_frame(*first);
  auto second = connect(cioc, h.server->port());
  const auto f = read_frame(*second);
  EXPECT_EQ(f.at("type"), "error");
  EXPECT_EQ(f.at("payload").at("code"), "busy");
  beast::flat_buffer buf;
  beast::error_code ec;
  second->read(buf, ec);
  EXPECT_EQ(ec, websocket::error::closed);
  // The first client is still served.
  send(*first, "reset", 1);
  bool got_tick_zero = false;
  for (int i = 0; i < 50 && !got_tick_zero; ++i) {
    const auto g = read_frame(*first);
    got_tick_zero = g.at("type") == "state" && g.at("payload").at("tick") == 0;
  }
  EXPECT_TRUE(got_tick_zero);
  first->close(websocket::close_code::normal);
}

TEST(WebSocket, ReconnectStartsFreshSequence) {
  Harness h(100.0);
  net::io_context cioc;
  {
    auto ws = connect(cioc, h.server->port());
    read_frame(*ws);
    send(*ws, "command", 40, {{"task", "A1"}});
    read_frame(*ws);
    ws->close(websocket::close_code::normal);
  }
  std::unique_ptr<Client> ws;
  Json hello;
  // The server may still be tearing down the first connection.
  for (int attempt = 0; attempt < 50; ++attempt) {
    ws = connect(cioc, h.server->port());
    hello = read_frame(*ws);
    if (hello.at("type") == "state") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  EXPECT_EQ(hello.at("type"), "state");
  EXPECT_EQ(hello.at("seq"), 1);
  send(*ws, "reset", 1);
  bool ok = false;
  for (int i = 0; i < 50 && !ok; ++i) {
    const auto f = read_frame(*ws);
    ASSERT_NE(f.at("type"), "error") << f.dump();
    ok = f.at("type") == "state" && f.at("payload").at("tick") == 0;
  }
  EXPECT_TRUE(ok);
  ws->close(websocket::close_code::normal);
}

TEST(WebSocket, PortBusyIsReported) {
  Harness h(10.0);
  net::io_context ioc;
  ServiceSession session{SessionConfig{}};
  try {
    WsServer clash(ioc, session, {"127.0.0.1", h.server->port(), 10.0});
    FAIL() << "second bind succeeded";
  } catch (const ServiceError& e) {
    EXPECT_NE(std::string(e.what()).find("port busy"), std::string::npos) << e.what();
  }
}

TEST(WebSocket, InvalidOptions) {
  net::io_context ioc;
  ServiceSession session{SessionConfig{}};
  EXPECT_THROW(WsServer(ioc, session, {"127.0.0.1", 0, 0.0}), ServiceError);
  EXPECT_THROW(WsServer(ioc, session, {"not an address", 0, 10.0}), ServiceError);
}
