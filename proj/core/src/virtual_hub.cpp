#include <algorithm>

#include "chartduel/stream.hpp"

namespace chartduel::stream {

using protocol::Direction;

VirtualHub::VirtualHub(engine::Engine& engine, TimestampMs start, bool record_wire)
    : engine_(engine), now_(start), record_(record_wire) {}

std::size_t VirtualHub::connect(ClientEndpoint& client) {
  const std::size_t id = links_.size();
  links_.push_back({&client, std::make_unique<SessionProtocol>(engine_), false});
  enqueue(id, Direction::kClientToServer, client.on_connect(now_));
  return id;
}

void VirtualHub::enqueue(std::size_t connection, Direction dir, std::vector<std::string> frames) {
  for (auto& f : frames) {
    // Server frames are logged when produced so the per-connection order is
    // exactly what the session observed.
    if (record_ && dir == Direction::kServerToClient) wire_.push_back({connection, dir, now_, f});
    queue_.push_back({connection, dir, std::move(f)});
  }
}

void VirtualHub::drain() {
  while (head_ < queue_.size()) {
    Pending p = std::move(queue_[head_++]);
    auto& link = links_[p.connection];
    if (p.dir == Direction::kClientToServer) {
      if (record_) wire_.push_back({p.connection, p.dir, now_, p.frame});
      if (!link.server->closed()) {
        enqueue(p.connection, Direction::kServerToClient, link.server->on_frame(p.frame, now_));
      }
    } else if (!link.disconnected) {
      enqueue(p.connection, Direction::kClientToServer, link.client->on_frame(p.frame, now_));
    }
  }
  queue_.clear();
  head_ = 0;
}

void VirtualHub::run() {
  drain();
  for (;;) {
    for (auto& link : links_) {
      if (!link.disconnected && link.client->finished()) {
        link.disconnected = true;
        if (!link.server->closed()) link.server->on_disconnect(now_);
      }
    }
    std::optional<TimestampMs> earliest;
    for (const auto& link : links_) {
      if (link.server->closed()) continue;
      if (auto w = link.server->next_wakeup()) earliest = earliest ? std::min(*earliest, *w) : *w;
    }
    if (!earliest) break;
    now_ = std::max(now_, *earliest);
    for (std::size_t i = 0; i < links_.size(); ++i) {
      auto& server = *links_[i].server;
      if (server.closed()) continue;
      const auto w = server.next_wakeup();
      if (w && *w <= now_) enqueue(i, Direction::kServerToClient, server.on_timer(now_));
    }
    drain();
  }
}

protocol::Transcript VirtualHub::demultiplex(std::size_t connection) const {
  protocol::Transcript out;
  for (const auto& w : wire_) {
    if (w.connection == connection) out.push_back({w.dir, w.frame});
  }
  return out;
}

}  // namespace chartduel::stream
