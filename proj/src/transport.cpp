#include "drishti/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <fmt/format.h>

#include "drishti/error.hpp"
#include "text_util.hpp"

namespace drishti::wire {

namespace {

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = o.fd_;
      o.fd_ = -1;
    }
    return *this;
  }
  ~Socket() { reset(); }

  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

sockaddr_in resolve(const Endpoint& ep, Errc failure) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res);
  if (rc != 0 || !res) throw Error(failure, fmt::format("cannot resolve {}: {}", ep.host, ::gai_strerror(rc)));
  sockaddr_in addr{};
  std::memcpy(&addr, res->ai_addr, sizeof(addr));
  ::freeaddrinfo(res);
  addr.sin_port = htons(ep.port);
  return addr;
}

// True when the peer has hung up; never consumes inbound data.
bool peer_gone(int fd) {
  pollfd p{fd, POLLRDHUP, 0};
  if (::poll(&p, 1, 0) < 0) return true;
  return (p.revents & (POLLRDHUP | POLLHUP | POLLERR | POLLNVAL)) != 0;
}

bool send_all(int fd, const Bytes& bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

bool stop_requested(const ServeOptions& o) { return o.stop && o.stop->load(); }

}  // namespace

Endpoint Endpoint::parse(std::string_view text) {
  Endpoint ep;
  const auto colon = text.rfind(':');
  const auto host = text::trim(colon == std::string_view::npos ? text : text.substr(0, colon));
  if (!host.empty()) ep.host = std::string(host);
  if (colon != std::string_view::npos) {
    const auto port = text::parse_uint(text::trim(text.substr(colon + 1)), 0);
    if (port > 65535) throw Error(Errc::MalformedLine, fmt::format("port {} out of range", port));
    ep.port = static_cast<std::uint16_t>(port);
  }
  return ep;
}

void FrameQueue::push(WireFrame frame) {
  {
    std::lock_guard lock(mutex_);
    frames_.push_back(std::move(frame));
  }
  ready_.notify_one();
}

void FrameQueue::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  ready_.notify_all();
}

FrameQueue::PopStatus FrameQueue::pop_for(std::chrono::milliseconds timeout, WireFrame& out) {
  std::unique_lock lock(mutex_);
  ready_.wait_for(lock, timeout, [&] { return !frames_.empty() || closed_; });
  if (!frames_.empty()) {
    out = std::move(frames_.front());
    frames_.pop_front();
    return PopStatus::Item;
  }
  return closed_ ? PopStatus::Closed : PopStatus::Timeout;
}

bool FrameQueue::drained() const {
  std::lock_guard lock(mutex_);
  return closed_ && frames_.empty();
}

void serve(const Endpoint& endpoint, FrameQueue& stream, const ServeOptions& options) {
  const sockaddr_in addr = resolve(endpoint, Errc::BindFailure);
  Socket listener(::socket(AF_INET, SOCK_STREAM, 0));
  if (!listener) throw Error(Errc::BindFailure, std::strerror(errno));
  const int one = 1;
  ::setsockopt(listener.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(listener.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0)
    throw Error(Errc::BindFailure, fmt::format("{}:{}: {}", endpoint.host, endpoint.port, std::strerror(errno)));
  if (::listen(listener.get(), 4) != 0) throw Error(Errc::BindFailure, std::strerror(errno));
  if (options.on_listening) {
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(listener.get(), reinterpret_cast<sockaddr*>(&bound), &len);
    options.on_listening(ntohs(bound.sin_port));
  }

  std::optional<WireFrame> pending;
  while (!stop_requested(options)) {
    if (!pending && stream.drained()) return;
    pollfd p{listener.get(), POLLIN, 0};
    if (::poll(&p, 1, 100) <= 0) continue;
    Socket client(::accept(listener.get(), nullptr, nullptr));
    if (!client) continue;

    for (;;) {
      if (stop_requested(options)) return;
      if (!pending) {
        WireFrame next;
        const auto status = stream.pop_for(options.heartbeat_interval, next);
        if (status == FrameQueue::PopStatus::Closed) return;
        if (status == FrameQueue::PopStatus::Timeout) {
          if (peer_gone(client.get()) || !send_all(client.get(), encode_frame(heartbeat_frame()))) break;
          continue;
        }
        pending = std::move(next);
      }
      if (peer_gone(client.get()) || !send_all(client.get(), encode_frame(*pending))) break;
      pending.reset();
    }
  }
}

void receive(const Endpoint& endpoint, const std::function<bool(const ReceivedEvent&)>& handler,
             const ReceiveOptions& options) {
  const sockaddr_in addr = resolve(endpoint, Errc::ConnectFailure);
  Socket sock(::socket(AF_INET, SOCK_STREAM, 0));
  if (!sock) throw Error(Errc::ConnectFailure, std::strerror(errno));
  if (::connect(sock.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0)
    throw Error(Errc::ConnectFailure, fmt::format("{}:{}: {}", endpoint.host, endpoint.port, std::strerror(errno)));

  const auto link_lost = [&] { handler(ReceivedEvent{beep_frame(), true}); };
  Bytes buffer;
  std::uint8_t chunk[4096];
  for (;;) {
    pollfd p{sock.get(), POLLIN, 0};
    const int ready = ::poll(&p, 1, static_cast<int>(options.idle_timeout.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) {
      link_lost();
      return;
    }
    const ssize_t n = ::recv(sock.get(), chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      link_lost();
      return;
    }
    buffer.insert(buffer.end(), chunk, chunk + n);

    std::size_t offset = 0;
    for (;;) {
      const auto result = decode_frame(std::span(buffer).subspan(offset));
      if (result.is_frame()) {
        offset += result.consumed;
        if (!handler(ReceivedEvent{result.frame, false})) return;
        continue;
      }
      if (result.is_error()) {
        link_lost();
        return;
      }
      break;
    }
    buffer.erase(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(offset));
  }
}

}  // namespace drishti::wire
