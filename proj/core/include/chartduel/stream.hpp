#pragma once

// Serving side of the wire protocol.
//
// SessionProtocol is the per-connection state machine. It is transport- and
// clock-agnostic: the caller feeds it inbound frames and timer wakeups with
// the current time and ships whatever frames it returns. VirtualHub drives
// many of them against in-process clients on a virtual clock (tests,
// simulation); TcpServer drives them over sockets in real time.
//
// Per trial: trial_start, then one (top, bottom) tick pair every
// tick_interval until points_per_chart pairs are out, then a wait for the
// guess until the deadline. A guess may arrive at any point after
// trial_start; it stops the remaining ticks. The next trial starts as soon as
// the previous one ends.

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "chartduel/engine.hpp"
#include "chartduel/protocol.hpp"
#include "chartduel/transcript.hpp"

namespace chartduel::stream {

using engine::TimestampMs;

class SessionProtocol {
 public:
  SessionProtocol(engine::Engine& engine, bool record_transcript = false);

  /// Handles one inbound frame; returns the frames to send, in order.
  std::vector<std::string> on_frame(std::string_view frame, TimestampMs now);
  /// Emits ticks that are due and resolves an elapsed deadline.
  std::vector<std::string> on_timer(TimestampMs now);
  /// Earliest time on_timer has work, if any.
  std::optional<TimestampMs> next_wakeup() const;
  /// Remaining trials are forfeited as timeouts.
  void on_disconnect(TimestampMs now);

  bool closed() const { return phase_ == Phase::kClosed; }
  const std::string& session_id() const { return session_id_; }
  const protocol::Transcript& transcript() const { return transcript_; }

 private:
  enum class Phase { kAwaitHello, kAwaitOpen, kRunning, kClosed };

  void send(std::vector<std::string>& out, protocol::Kind kind, nlohmann::json body);
  void send_error(std::vector<std::string>& out, std::string_view code, const std::string& message,
                  bool fatal);
  void start_trial(std::vector<std::string>& out, TimestampMs now);
  void end_trial(std::vector<std::string>& out, const std::string& outcome, TimestampMs now);
  void handle(const protocol::Message& m, std::vector<std::string>& out, TimestampMs now);
  void close(TimestampMs now);

  engine::Engine& engine_;
  bool record_;
  protocol::Transcript transcript_;
  Phase phase_ = Phase::kAwaitHello;
  std::uint64_t seq_ = 0;
  std::string subject_id_;
  stats::Profession profession_ = stats::Profession::kUndeclared;
  std::string session_id_;

  std::optional<engine::TrialCharts> trial_;
  TimestampMs trial_started_ = 0;
  std::uint32_t next_point_ = 1;  // next tick pair to send
  bool streaming_done_ = false;
  std::size_t assigned_ = 0;
  std::size_t done_ = 0;
  std::size_t answered_ = 0;
  std::int64_t score_ = 0;
};

/// In-process counterpart of a protocol client.
class ClientEndpoint {
 public:
  virtual ~ClientEndpoint() = default;
  /// Frames sent right after connecting.
  virtual std::vector<std::string> on_connect(TimestampMs now) = 0;
  virtual std::vector<std::string> on_frame(std::string_view frame, TimestampMs now) = 0;
  /// A finished client disconnects.
  virtual bool finished() const = 0;
};

struct WireRecord {
  std::size_t connection = 0;
  protocol::Direction dir = protocol::Direction::kServerToClient;
  TimestampMs time = 0;
  std::string frame;
};

/// Deterministic discrete-event driver. Frames are delivered with zero
/// latency in FIFO order; the clock jumps to the earliest pending wakeup.
class VirtualHub {
 public:
  explicit VirtualHub(engine::Engine& engine, TimestampMs start = 0, bool record_wire = false);

  /// Returns the connection index.
  std::size_t connect(ClientEndpoint& client);
  /// Runs until no session has pending work.
  void run();
  TimestampMs now() const { return now_; }

  const std::vector<WireRecord>& wire_log() const { return wire_; }
  /// Frames of one connection rebuilt from the interleaved wire log.
  protocol::Transcript demultiplex(std::size_t connection) const;
  const SessionProtocol& session(std::size_t connection) const { return *links_[connection].server; }

 private:
  struct Link {
    ClientEndpoint* client = nullptr;
    std::unique_ptr<SessionProtocol> server;
    bool disconnected = false;
  };
  struct Pending {
    std::size_t connection;
    protocol::Direction dir;
    std::string frame;
  };

  void enqueue(std::size_t connection, protocol::Direction dir, std::vector<std::string> frames);
  void drain();

  engine::Engine& engine_;
  TimestampMs now_;
  bool record_;
  std::vector<Link> links_;
  std::vector<Pending> queue_;
  std::size_t head_ = 0;
  std::vector<WireRecord> wire_;
};

using Clock = std::function<TimestampMs()>;
/// Wall-clock UTC milliseconds.
TimestampMs system_now();

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks a free port
  Clock clock = system_now;
  /// Called once per finished connection with its transcript (if set, the
  /// sessions record transcripts).
  std::function<void(std::size_t connection, const protocol::Transcript&)> on_transcript;
};

/// Newline-delimited JSON over TCP, one thread per connection.
class TcpServer {
 public:
  TcpServer(engine::Engine& engine, ServerOptions options = {});
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  /// Binds and starts accepting. Throws std::system_error on failure.
  void start();
  void stop();
  std::uint16_t port() const { return port_; }
  std::size_t connections_served() const { return served_.load(); }

 private:
  void accept_loop();
  void serve_connection(int fd, std::size_t connection);

  engine::Engine& engine_;
  ServerOptions options_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> served_{0};
  std::thread acceptor_;
  std::mutex workers_mutex_;
  std::vector<std::thread> workers_;
};

/// Blocking client side: connects, pumps frames through `client` until it
/// finishes or the server closes. Throws std::system_error on socket errors.
void run_tcp_client(ClientEndpoint& client, const std::string& host, std::uint16_t port,
                    Clock clock = system_now);

}  // namespace chartduel::stream
