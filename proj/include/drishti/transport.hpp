#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "drishti/wire.hpp"

namespace drishti::wire {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultPort;

  /// "host:port", "host" (default port) or ":port".
  static Endpoint parse(std::string_view text);
};

/// Ordered hand-off between a producer thread and the server.
class FrameQueue {
 public:
  enum class PopStatus { Item, Timeout, Closed };

  void push(WireFrame frame);
  /// No further pushes; the server drains what is queued and returns.
  void close();
  PopStatus pop_for(std::chrono::milliseconds timeout, WireFrame& out);
  bool drained() const;

 private:
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<WireFrame> frames_;
  bool closed_ = false;
};

struct ServeOptions {
  std::chrono::milliseconds heartbeat_interval{1000};
  /// Called once the socket listens, with the bound port (useful with port 0).
  std::function<void(std::uint16_t)> on_listening;
  /// Optional external stop flag, checked between waits.
  const std::atomic<bool>* stop = nullptr;
};

/// Push-only server: one client at a time, frames in queue order, a heartbeat
/// after each idle interval. Inbound bytes from the client are never read.
/// A client that goes away sends the server back to accepting; the frame that
/// could not be delivered goes to the next client. Returns once the queue is
/// closed and drained. Throws BindFailure.
void serve(const Endpoint& endpoint, FrameQueue& stream, const ServeOptions& options = {});

struct ReceivedEvent {
  WireFrame frame;
  bool local = false;  // generated by the client itself (link failure)
};

struct ReceiveOptions {
  /// A link silent this long is treated as dead; heartbeats keep it alive.
  std::chrono::milliseconds idle_timeout{3000};
};

/// Receive-only client. Calls `handler` for every decoded frame in arrival
/// order; returning false from the handler ends the session quietly. Loss of
/// the link (EOF, socket error, silence, undecodable bytes) produces one local
/// Beep event and ends the session. Throws ConnectFailure.
void receive(const Endpoint& endpoint, const std::function<bool(const ReceivedEvent&)>& handler,
             const ReceiveOptions& options = {});

}  // namespace drishti::wire
