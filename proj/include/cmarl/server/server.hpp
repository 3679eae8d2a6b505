#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <mutex>
#include <string>
#include <thread>

#include "cmarl/server/protocol.hpp"

namespace cmarl::server {

/// TCP endpoint serving one Session per connection, each on its own thread.
class Server {
 public:
  /// Port 0 picks a free port. At most `max_sessions` connections are
  /// served at once; later ones wait in the accept queue.
  Server(std::string bind_address, std::uint16_t port, int max_sessions = 64);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts accepting in the background. Raises Io on bind failure.
  void start();
  void stop();
  std::uint16_t port() const { return port_; }
  int sessions_served() const { return served_.load(); }

 private:
  void accept_loop();
  void serve(int fd);

  std::string address_;
  std::uint16_t port_;
  int max_sessions_;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::atomic<int> active_{0};
  std::atomic<int> served_{0};
  std::thread acceptor_;
  std::mutex mutex_;
  std::list<std::thread> workers_;
  std::list<int> open_fds_;
};

/// Port from $CMARL_PORT, else `fallback`.
std::uint16_t port_from_environment(std::uint16_t fallback = 7878);

/// Blocking request/response client, mainly for tests and tools.
class Client {
 public:
  Client(const std::string& host, std::uint16_t port);
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  Json request(const Json& message);
  /// Sends raw payload bytes inside a frame and returns the parsed reply.
  Json request_raw(std::string_view payload);
  /// Sends arbitrary bytes (no framing) for malformed-input tests.
  void send_bytes(std::string_view bytes);
  /// Reads one framed reply.
  Json read_reply();

 private:
  int fd_ = -1;
  FrameDecoder decoder_;
};

}  // namespace cmarl::server
