#pragma once

// Websocket endpoint for a ServiceSession. Everything runs on one io_context
// thread: the ticker, the reader and the writer share the session without
// locks. One client at a time; further clients receive a `busy` error frame
// and are closed.

#include "fva/service/session.hpp"

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <stdexcept>

namespace fva::service {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = boost::beast::websocket;
using tcp = net::ip::tcp;

class ServiceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class WsServer : public std::enable_shared_from_this<WsServer> {
 public:
  struct Options {
    std::string address{"127.0.0.1"};
    unsigned short port{8765};  // 0 picks a free port
    double tick_hz{60.0};
  };

  WsServer(net::io_context& ioc, ServiceSession& session, Options opts)
      : session_(session), opts_(std::move(opts)), acceptor_(ioc), timer_(ioc) {
    if (!(opts_.tick_hz > 0.0)) throw ServiceError("tick rate must be positive");
    beast::error_code ec;
    const tcp::endpoint ep{net::ip::make_address(opts_.address, ec), opts_.port};
    if (ec) throw ServiceError("invalid address '" + opts_.address + "': " + ec.message());
    acceptor_.open(ep.protocol(), ec);
    if (!ec) acceptor_.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor_.bind(ep, ec);
    if (!ec) acceptor_.listen(net::socket_base::max_listen_connections, ec);
    if (ec) {
      throw ServiceError("cannot listen on " + opts_.address + ":" + std::to_string(opts_.port) + ": " +
                         ec.message() + (ec == net::error::address_in_use ? " (port busy)" : ""));
    }
  }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  /// Observer for every outgoing frame (logging, tests).
  void on_frame(std::function<void(const std::string&)> f) { observer_ = std::move(f); }

  void start() {
    accept();
    schedule_tick(std::chrono::steady_clock::now());
  }

  void stop() {
    beast::error_code ec;
    acceptor_.close(ec);
    timer_.cancel();
    if (client_) client_->close();
  }

 private:
  class Connection : public std::enable_shared_from_this<Connection> {
   public:
    Connection(tcp::socket socket, std::weak_ptr<WsServer> server)
        : ws_(std::move(socket)), server_(std::move(server)) {}

    void run(bool busy) {
      busy_ = busy;
      ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
      ws_.async_accept([self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
    }

    void send(std::string frame) {
      if (closed_) return;
      queue_.push_back(std::move(frame));
      if (queue_.size() == 1 && open_) write_next();
    }

    void close() {
      if (closed_) return;
      closed_ = true;
      ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
    }

    bool closed() const { return closed_; }

   private:
    void on_accept(beast::error_code ec) {
      if (ec) return finish();
      open_ = true;
      if (busy_) {
        send(encode_frame("error", 1, {{"code", "busy"}, {"message", "another session is active"}}));
        close_after_write_ = true;
        return;
      }
      if (auto s = server_.lock()) s->attached(shared_from_this());
      if (!queue_.empty()) write_next();
      read();
    }

    void read() {
      ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) return self->finish();
        std::string text = beast::buffers_to_string(self->buffer_.data());
        self->buffer_.consume(self->buffer_.size());
        if (auto s = self->server_.lock()) s->received(text);
        self->read();
      });
    }

    void write_next() {
      ws_.text(true);
      ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) return self->finish();
        self->queue_.pop_front();
        if (!self->queue_.empty()) {
          self->write_next();
        } else if (self->close_after_write_) {
          self->close();
        }
      });
    }

    void finish() {
      closed_ = true;
      if (busy_) return;
      if (auto s = server_.lock()) s->detached(this);
    }

    websocket::stream<beast::tcp_stream> ws_;
    std::weak_ptr<WsServer> server_;
    beast::flat_buffer buffer_;
    std::deque<std::string> queue_;
    bool open_{false};
    bool busy_{false};
    bool closed_{false};
    bool close_after_write_{false};
  };

  void accept() {
    acceptor_.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      const bool busy = self->client_ && !self->client_->closed();
      std::make_shared<Connection>(std::move(socket), self)->run(busy);
      self->accept();
    });
  }

  void attached(std::shared_ptr<Connection> c) {
    client_ = std::move(c);
    session_.reset_connection();
    emit(session_.greeting());
  }

  void detached(const Connection* c) {
    if (client_.get() == c) client_.reset();
  }

  void received(const std::string& text) { emit(session_.handle(text)); }

  void emit(const std::vector<std::string>& frames) {
    for (const auto& f : frames) {
      if (observer_) observer_(f);
      if (client_) client_->send(f);
    }
  }

  void schedule_tick(std::chrono::steady_clock::time_point due) {
    const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / opts_.tick_hz));
    next_due_ = due + period;
    timer_.expires_at(next_due_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      // Frames produced while nobody is connected are not buffered; a
      // reconnecting client receives a fresh state frame.
      self->emit(self->session_.advance());
      self->schedule_tick(self->next_due_);
    });
  }

  ServiceSession& session_;
  Options opts_;
  tcp::acceptor acceptor_;
  net::steady_timer timer_;
  std::chrono::steady_clock::time_point next_due_;
  std::shared_ptr<Connection> client_;
  std::function<void(const std::string&)> observer_;
};

}  // namespace fva::service
