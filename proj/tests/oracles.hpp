#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's algorithms; only plain data types are shared.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "drishti/error.hpp"
#include "drishti/route.hpp"
#include "drishti/wire.hpp"

namespace oracle {

template <class F>
drishti::Errc error_code(F&& f) {
  try {
    f();
  } catch (const drishti::Error& e) {
    return e.code();
  }
  return drishti::Errc::IoFailure;  // sentinel: nothing was thrown
}

inline double haversine(double lat1, double lon1, double lat2, double lon2) {
  const double rad = std::numbers::pi / 180.0;
  const double a = std::pow(std::sin((lat2 - lat1) * rad / 2), 2) +
                   std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::pow(std::sin((lon2 - lon1) * rad / 2), 2);
  return 2.0 * 6371000.0 * std::asin(std::min(1.0, std::sqrt(a)));
}

struct SmallGraph {
  struct N {
    std::uint32_t id;
    double lat, lon;
  };
  std::vector<N> nodes;
  std::vector<std::pair<int, int>> edges;  // indices into nodes
};

/// Random connected-or-not graph with at most `max_nodes` nodes in a ~1 km patch.
inline SmallGraph random_graph(std::mt19937_64& rng, int max_nodes = 8) {
  SmallGraph g;
  std::uniform_int_distribution<int> count(2, max_nodes);
  std::uniform_real_distribution<double> jitter(-0.005, 0.005);
  const int n = count(rng);
  for (int i = 0; i < n; ++i)
    g.nodes.push_back({static_cast<std::uint32_t>(10 + 3 * i + rng() % 3), 47.6 + jitter(rng), -122.3 + jitter(rng)});
  std::bernoulli_distribution keep(0.45);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (keep(rng)) g.edges.emplace_back(i, j);
  return g;
}

/// Length of the shortest simple path by exhaustive DFS; nullopt when disconnected.
inline std::optional<double> brute_force_shortest(const SmallGraph& g, int src, int dst) {
  const int n = static_cast<int>(g.nodes.size());
  std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(n));
  for (auto [a, b] : g.edges) {
    const auto& na = g.nodes[static_cast<std::size_t>(a)];
    const auto& nb = g.nodes[static_cast<std::size_t>(b)];
    const double len = haversine(na.lat, na.lon, nb.lat, nb.lon);
    adj[static_cast<std::size_t>(a)].emplace_back(b, len);
    adj[static_cast<std::size_t>(b)].emplace_back(a, len);
  }
  std::optional<double> best;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::function<void(int, double)> dfs = [&](int at, double so_far) {
    if (at == dst) {
      if (!best || so_far < *best) best = so_far;
      return;
    }
    seen[static_cast<std::size_t>(at)] = true;
    for (auto [next, len] : adj[static_cast<std::size_t>(at)])
      if (!seen[static_cast<std::size_t>(next)]) dfs(next, so_far + len);
    seen[static_cast<std::size_t>(at)] = false;
  };
  dfs(src, 0.0);
  return best;
}

/// Exhaustive simple-path minimum over a built graph's own edge lengths, summed
/// from the source outwards.
inline std::optional<double> brute_force_shortest(const drishti::route::RouteGraph& g, drishti::route::NodeId src,
                                                  drishti::route::NodeId dst) {
  std::optional<double> best;
  std::map<drishti::route::NodeId, bool> seen;
  std::function<void(drishti::route::NodeId, double)> dfs = [&](drishti::route::NodeId at, double so_far) {
    if (at == dst) {
      if (!best || so_far < *best) best = so_far;
      return;
    }
    seen[at] = true;
    for (const auto& e : g.edges()) {
      if (e.a != at && e.b != at) continue;
      const auto next = e.a == at ? e.b : e.a;
      if (!seen[next]) dfs(next, so_far + e.length_m);
    }
    seen[at] = false;
  };
  dfs(src, 0.0);
  return best;
}

inline drishti::route::RouteGraph to_route_graph(const SmallGraph& g) {
  drishti::route::RouteGraph out;
  for (const auto& n : g.nodes) out.add_node({n.id, "n" + std::to_string(n.id), n.lat, n.lon});
  for (auto [a, b] : g.edges)
    out.add_edge(g.nodes[static_cast<std::size_t>(a)].id, g.nodes[static_cast<std::size_t>(b)].id, std::nullopt);
  return out;
}

/// Random valid frame of any kind; batches carry up to 40 objects.
inline drishti::wire::WireFrame random_frame(std::mt19937_64& rng) {
  using namespace drishti::wire;
  switch (rng() % 4) {
    case 0: return heartbeat_frame();
    case 1: return beep_frame();
    default: break;
  }
  ReportBatch b;
  b.frame_id = static_cast<std::uint32_t>(rng());
  const std::size_t n = rng() % 41;
  for (std::size_t i = 0; i < n; ++i) {
    WireObject o;
    o.label_id = static_cast<std::uint16_t>(rng());
    o.distance_mm = rng() % 8 == 0 ? kUnknownDistance : static_cast<std::uint32_t>(rng());
    o.x = static_cast<std::uint16_t>(rng());
    o.y = static_cast<std::uint16_t>(rng());
    o.w = static_cast<std::uint16_t>(rng());
    o.h = static_cast<std::uint16_t>(rng());
    b.objects.push_back(o);
  }
  return batch_frame(b);
}

/// Hand-assembled frame bytes, independent of the encoder.
inline std::vector<std::uint8_t> frame_bytes(std::uint8_t kind, const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> out{'D', 'R', 'S', 'H', 0x01, kind, static_cast<std::uint8_t>(payload.size() & 0xFF),
                                static_cast<std::uint8_t>(payload.size() >> 8)};
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

/// A stream of a few valid frames with random byte edits, insertions, deletions or truncation.
inline std::vector<std::uint8_t> mutated_stream(std::mt19937_64& rng) {
  std::vector<std::uint8_t> s;
  const int frames = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < frames; ++i) {
    const auto f = drishti::wire::encode_frame(random_frame(rng));
    s.insert(s.end(), f.begin(), f.end());
  }
  const int edits = 1 + static_cast<int>(rng() % 6);
  for (int e = 0; e < edits && !s.empty(); ++e) {
    const std::size_t at = rng() % s.size();
    switch (rng() % 4) {
      case 0: s[at] = static_cast<std::uint8_t>(rng()); break;
      case 1: s.insert(s.begin() + static_cast<std::ptrdiff_t>(at), static_cast<std::uint8_t>(rng())); break;
      case 2: s.erase(s.begin() + static_cast<std::ptrdiff_t>(at)); break;
      default: s.resize(at); break;
    }
  }
  return s;
}

/// Feeds a stream through the decoder the way a connection would. Returns false
/// if the decoder ever reports something outside its contract.
inline bool drain_stream(std::span<const std::uint8_t> s, std::size_t* frames = nullptr) {
  using drishti::wire::DecodeStatus;
  std::size_t at = 0, count = 0;
  while (at <= s.size()) {
    const auto r = drishti::wire::decode_frame(s.subspan(at));
    switch (r.status) {
      case DecodeStatus::Frame:
        if (r.consumed < 8 || r.consumed > s.size() - at) return false;
        at += r.consumed;
        ++count;
        continue;
      case DecodeStatus::NeedMoreBytes:
      case DecodeStatus::BadMagic:
      case DecodeStatus::UnknownVersion:
      case DecodeStatus::UnknownKind:
      case DecodeStatus::PayloadLengthMismatch:
        if (frames) *frames = count;
        return r.consumed == 0;
    }
    return false;
  }
  return false;
}

}  // namespace oracle
