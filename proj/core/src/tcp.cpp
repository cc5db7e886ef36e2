#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <system_error>

#include "chartduel/stream.hpp"

namespace chartduel::stream {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw std::system_error(errno, std::generic_category(), what);
}

constexpr int kPollSliceMs = 50;

bool send_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const auto n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

bool send_frames(int fd, const std::vector<std::string>& frames) {
  if (frames.empty()) return true;
  std::string buf;
  for (const auto& f : frames) {
    buf += f;
    buf.push_back('\n');
  }
  return send_all(fd, buf);
}

// Appends whatever is readable; false on EOF or error.
bool read_some(int fd, std::string& buffer) {
  char chunk[4096];
  for (;;) {
    const auto n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n > 0) {
      buffer.append(chunk, static_cast<std::size_t>(n));
      return true;
    }
    if (n < 0 && errno == EINTR) continue;
    return false;
  }
}

std::vector<std::string> split_lines(std::string& buffer) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (auto nl = buffer.find('\n'); nl != std::string::npos; nl = buffer.find('\n', start)) {
    std::string line = buffer.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
    start = nl + 1;
  }
  buffer.erase(0, start);
  return lines;
}

}  // namespace

TcpServer::TcpServer(engine::Engine& engine, ServerOptions options)
    : engine_(engine), options_(std::move(options)) {}

TcpServer::~TcpServer() { stop(); }

void TcpServer::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (listen_fd_ < 0) throw_errno("socket");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(options_.port);
  if (::inet_pton(AF_INET, options_.host.c_str(), &addr.sin_addr) != 1) {
    throw std::system_error(std::make_error_code(std::errc::invalid_argument),
                            "bad bind address '" + options_.host + "'");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    throw_errno("bind " + options_.host + ":" + std::to_string(options_.port));
  }
  if (::listen(listen_fd_, 64) != 0) throw_errno("listen");
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

void TcpServer::stop() {
  if (stopping_.exchange(true)) return;
  if (acceptor_.joinable()) acceptor_.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(workers_mutex_);
    workers.swap(workers_);
  }
  for (auto& w : workers) w.join();
}

void TcpServer::accept_loop() {
  std::size_t next_id = 0;
  while (!stopping_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, kPollSliceMs);
    if (ready <= 0) continue;
    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    std::lock_guard lock(workers_mutex_);
    workers_.emplace_back([this, fd, id = next_id++] { serve_connection(fd, id); });
  }
}

void TcpServer::serve_connection(int fd, std::size_t connection) {
  SessionProtocol session(engine_, static_cast<bool>(options_.on_transcript));
  std::string buffer;
  bool peer_open = true;
  try {
    while (!stopping_ && peer_open && !session.closed()) {
      int timeout = kPollSliceMs;
      if (auto wake = session.next_wakeup()) {
        const auto wait = *wake - options_.clock();
        timeout = static_cast<int>(std::clamp<TimestampMs>(wait, 0, kPollSliceMs));
      }
      pollfd pfd{fd, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, timeout);
      if (ready > 0) {
        if (!read_some(fd, buffer)) {
          peer_open = false;
        } else {
          for (const auto& line : split_lines(buffer)) {
            if (!send_frames(fd, session.on_frame(line, options_.clock()))) peer_open = false;
            if (session.closed()) break;
          }
        }
      }
      if (peer_open && !session.closed()) {
        if (!send_frames(fd, session.on_timer(options_.clock()))) peer_open = false;
      }
    }
  } catch (const std::exception&) {
    // Session state is forfeited below; the connection simply drops.
  }
  if (!session.closed()) session.on_disconnect(options_.clock());
  ::shutdown(fd, SHUT_RDWR);
  ::close(fd);
  ++served_;
  if (options_.on_transcript) options_.on_transcript(connection, session.transcript());
}

void run_tcp_client(ClientEndpoint& client, const std::string& host, std::uint16_t port,
                    Clock clock) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res); rc != 0) {
    throw std::system_error(std::make_error_code(std::errc::host_unreachable),
                            std::string("resolve ") + host + ": " + ::gai_strerror(rc));
  }
  const int fd = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    throw_errno("socket");
  }
  if (::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
    const int saved = errno;
    ::freeaddrinfo(res);
    ::close(fd);
    errno = saved;
    throw_errno("connect " + host + ":" + std::to_string(port));
  }
  ::freeaddrinfo(res);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

  std::string buffer;
  bool open = send_frames(fd, client.on_connect(clock()));
  while (open && !client.finished()) {
    pollfd pfd{fd, POLLIN, 0};
    if (::poll(&pfd, 1, kPollSliceMs) <= 0) continue;
    if (!read_some(fd, buffer)) break;
    for (const auto& line : split_lines(buffer)) {
      if (!send_frames(fd, client.on_frame(line, clock()))) {
        open = false;
        break;
      }
    }
  }
  ::shutdown(fd, SHUT_RDWR);
  ::close(fd);
}

}  // namespace chartduel::stream
