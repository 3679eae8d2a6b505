#include "cmarl/server/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>

#include "cmarl/core/errors.hpp"

namespace cmarl::server {

namespace {

bool send_all(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

/// Reads once into the decoder; false on EOF or error.
bool receive(int fd, FrameDecoder& decoder) {
  char buf[65536];
  for (;;) {
    const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    decoder.feed(std::string_view(buf, static_cast<std::size_t>(n)));
    return true;
  }
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

Server::Server(std::string bind_address, std::uint16_t port, int max_sessions)
    : address_(std::move(bind_address)), port_(port), max_sessions_(max_sessions) {}

Server::~Server() { stop(); }

void Server::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) raise(ErrorCode::Io, std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port_);
  if (::inet_pton(AF_INET, address_.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    raise(ErrorCode::Io, "bad bind address '" + address_ + "'");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 128) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    raise(ErrorCode::Io, "cannot bind " + address_ + ":" + std::to_string(port_) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void Server::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  std::list<std::thread> workers;
  {
    std::lock_guard lock(mutex_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
}

void Server::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return;
    }
    while (running_ && active_.load() >= max_sessions_) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    set_nodelay(fd);
    std::lock_guard lock(mutex_);
    open_fds_.push_back(fd);
    ++active_;
    workers_.emplace_back([this, fd] { serve(fd); });
  }
}

void Server::serve(int fd) {
  Session session;
  FrameDecoder decoder;
  bool alive = true;
  while (alive && receive(fd, decoder)) {
    try {
      while (auto payload = decoder.next()) {
        if (!send_all(fd, encode_frame(session.handle_payload(*payload).dump()))) {
          alive = false;
          break;
        }
      }
    } catch (const Error& e) {
      // Oversized length prefix: the stream cannot be resynchronised.
      send_all(fd, encode_frame(err_response("bad_frame", e.what()).dump()));
      alive = false;
    }
  }
  {
    std::lock_guard lock(mutex_);
    open_fds_.remove(fd);
  }
  ::close(fd);
  --active_;
  ++served_;
}

std::uint16_t port_from_environment(std::uint16_t fallback) {
  const char* v = std::getenv("CMARL_PORT");
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const long p = std::strtol(v, &end, 10);
  if (*end != '\0' || p < 0 || p > 65535) raise(ErrorCode::BadConfig, std::string("CMARL_PORT is not a port: ") + v);
  return static_cast<std::uint16_t>(p);
}

Client::Client(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &found) != 0 || !found) {
    raise(ErrorCode::Io, "cannot resolve " + host);
  }
  fd_ = ::socket(found->ai_family, found->ai_socktype, found->ai_protocol);
  const int rc = fd_ < 0 ? -1 : ::connect(fd_, found->ai_addr, found->ai_addrlen);
  ::freeaddrinfo(found);
  if (rc != 0) {
    if (fd_ >= 0) ::close(fd_);
    raise(ErrorCode::Io, "cannot connect to " + host + ":" + std::to_string(port));
  }
  set_nodelay(fd_);
}

Client::~Client() {
  if (fd_ >= 0) ::close(fd_);
}

void Client::send_bytes(std::string_view bytes) {
  if (!send_all(fd_, bytes)) raise(ErrorCode::Io, "send failed");
}

Json Client::read_reply() {
  for (;;) {
    if (auto payload = decoder_.next()) return Json::parse(*payload);
    if (!receive(fd_, decoder_)) raise(ErrorCode::Io, "connection closed by server");
  }
}

Json Client::request_raw(std::string_view payload) {
  send_bytes(encode_frame(payload));
  return read_reply();
}

Json Client::request(const Json& message) { return request_raw(message.dump()); }

}  // namespace cmarl::server
