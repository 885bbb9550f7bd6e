#include "server.hpp"

#include <chrono>
#include <deque>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace familiar::tools {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

constexpr auto kTickPeriod = std::chrono::milliseconds(100);

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, const Config& config, SessionOptions options)
      : ws_(std::move(socket)), session_(config, options) {}

  template <class OnClose>
  void start(OnClose on_close) {
    on_close_ = std::move(on_close);
    ws_.text(true);
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->close();
      self->send({self->session_.handle_message(json{{"type", "get_snapshot"}})});
      self->read();
    });
  }

  void tick() {
    if (open_) send(session_.tick());
  }

  bool open() const { return open_; }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      const std::string data = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      std::size_t start = 0;
      while (start <= data.size()) {
        std::size_t end = data.find('\n', start);
        if (end == std::string::npos) end = data.size();
        const std::string_view line(data.data() + start, end - start);
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) self->send(self->session_.handle_line(line));
        start = end + 1;
      }
      self->read();
    });
  }

  void send(const std::vector<json>& msgs) {
    if (!open_) return;
    const bool idle = outbox_.empty();
    for (const auto& m : msgs) outbox_.push_back(m.dump());
    if (idle && !outbox_.empty()) write();
  }

  void write() {
    ws_.async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      self->outbox_.pop_front();
      if (!self->outbox_.empty()) self->write();
    });
  }

  void close() {
    if (!open_) return;
    open_ = false;
    outbox_.clear();
    if (on_close_) on_close_(this);
  }

  websocket::stream<tcp::socket> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  Session session_;
  bool open_ = true;
  std::function<void(Connection*)> on_close_;
};

class Server {
 public:
  Server(asio::io_context& io, const Config& config, const ServeOptions& options)
      : io_(io), acceptor_(io, tcp::endpoint(tcp::v4(), options.port)), timer_(io), config_(config), options_(options) {}

  void run() {
    accept();
    schedule_tick();
  }

 private:
  void accept() {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (!ec) {
        if (connections_.size() >= options_.max_sessions) {
          beast::error_code ignored;
          socket.shutdown(tcp::socket::shutdown_both, ignored);
          socket.close(ignored);
          std::cerr << "rejected connection: session limit " << options_.max_sessions << " reached\n";
        } else {
          auto conn = std::make_shared<Connection>(std::move(socket), config_, options_.session);
          connections_[conn.get()] = conn;
          conn->start([this](Connection* c) { connections_.erase(c); });
        }
      }
      accept();
    });
  }

  void schedule_tick() {
    timer_.expires_after(kTickPeriod);
    timer_.async_wait([this](beast::error_code ec) {
      if (ec) return;
      // Copy: a tick may close a connection and erase it from the map.
      auto conns = connections_;
      for (auto& [_, c] : conns) c->tick();
      schedule_tick();
    });
  }

  asio::io_context& io_;
  tcp::acceptor acceptor_;
  asio::steady_timer timer_;
  const Config& config_;
  ServeOptions options_;
  std::map<Connection*, std::shared_ptr<Connection>> connections_;
};

void print(const std::vector<json>& msgs) {
  for (const auto& m : msgs) std::cout << m.dump() << '\n';
  std::cout.flush();
}

}  // namespace

int serve_websocket(const Config& config, const ServeOptions& options) {
  asio::io_context io;
  Server server(io, config, options);
  server.run();
  asio::signal_set signals(io, SIGINT, SIGTERM);
  signals.async_wait([&](beast::error_code, int) { io.stop(); });
  std::cerr << "listening on ws://0.0.0.0:" << options.port << '\n';
  io.run();
  return 0;
}

int serve_stdio(const Config& config, const ServeOptions& options) {
  asio::io_context io;
  auto work = asio::make_work_guard(io);
  Session session(config, options.session);
  print(session.handle_message(json{{"type", "get_snapshot"}}));

  asio::steady_timer timer(io);
  std::function<void()> schedule = [&] {
    timer.expires_after(kTickPeriod);
    timer.async_wait([&](beast::error_code ec) {
      if (ec) return;
      print(session.tick());
      schedule();
    });
  };
  schedule();

  // Reader thread only hands complete lines to the loop.
  std::thread reader([&] {
    std::string line;
    while (std::getline(std::cin, line))
      asio::post(io, [&session, line] {
        if (line.find_first_not_of(" \t\r") != std::string::npos) print(session.handle_line(line));
      });
    asio::post(io, [&] {
      timer.cancel();
      work.reset();
    });
  });
  io.run();
  reader.join();
  return 0;
}

}  // namespace familiar::tools
