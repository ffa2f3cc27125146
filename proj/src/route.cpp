#include "drishti/route.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include <fmt/format.h>

#include "drishti/error.hpp"
#include "text_util.hpp"

namespace drishti::route {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<std::string> optional_field(std::string_view s) {
  if (s.empty() || s == "-") return std::nullopt;
  return std::string(s);
}

std::string way_name(const Edge& e) { return e.way.value_or("unnamed road"); }

// Signed change in heading, (-180, 180]; positive is clockwise (a right turn).
double heading_change(double from, double to) {
  double d = std::fmod(to - from, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

}  // namespace

void RouteGraph::add_node(Node node, std::size_t line) {
  if (!std::isfinite(node.lat) || !std::isfinite(node.lon) || node.lat < -90.0 || node.lat > 90.0 ||
      node.lon < -180.0 || node.lon > 180.0)
    throw Error(Errc::BadCoordinate, fmt::format("({}, {})", node.lat, node.lon), line);
  if (nodes_.count(node.id)) throw Error(Errc::DuplicateNodeId, fmt::format("node {}", node.id), line);
  adjacency_[node.id];
  nodes_.emplace(node.id, std::move(node));
}

void RouteGraph::add_edge(NodeId a, NodeId b, std::optional<std::string> way, std::size_t line) {
  const Node* na = find(a);
  const Node* nb = find(b);
  if (!na || !nb) throw Error(Errc::DanglingEdge, fmt::format("edge {}-{} references a missing node", a, b), line);
  if (a == b) throw Error(Errc::MalformedLine, fmt::format("self-loop at node {}", a), line);
  edges_.push_back(Edge{a, b, std::move(way), haversine_m(na->lat, na->lon, nb->lat, nb->lon)});
  adjacency_[a].push_back(edges_.size() - 1);
  adjacency_[b].push_back(edges_.size() - 1);
}

const Node* RouteGraph::find(NodeId id) const {
  const auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const Node& RouteGraph::node(NodeId id) const {
  const Node* n = find(id);
  if (!n) throw Error(Errc::UnknownNode, fmt::format("node {}", id));
  return *n;
}

const std::vector<std::size_t>& RouteGraph::incident(NodeId id) const {
  const auto it = adjacency_.find(id);
  if (it == adjacency_.end()) throw Error(Errc::UnknownNode, fmt::format("node {}", id));
  return it->second;
}

std::string RouteGraph::display_name(NodeId id) const {
  const Node& n = node(id);
  return n.name ? *n.name : fmt::format("node {}", id);
}

RouteGraph parse_route_graph(std::string_view text) {
  const auto lines = text::data_lines(text);
  RouteGraph graph;
  for (const auto& line : lines) {
    if (line.fields[0] != "node") continue;
    if (line.fields.size() != 5) throw Error(Errc::MalformedLine, "expected node,<id>,<name|->,<lat>,<lon>", line.number);
    const auto id = text::parse_uint(line.fields[1], line.number);
    if (id > std::numeric_limits<NodeId>::max()) throw Error(Errc::MalformedLine, "node id exceeds u32", line.number);
    graph.add_node(Node{static_cast<NodeId>(id), optional_field(line.fields[2]), text::parse_double(line.fields[3], line.number),
                        text::parse_double(line.fields[4], line.number)},
                   line.number);
  }
  for (const auto& line : lines) {
    if (line.fields[0] == "node") continue;
    if (line.fields[0] != "edge" || line.fields.size() != 4)
      throw Error(Errc::MalformedLine, "expected edge,<a>,<b>,<wayname|->", line.number);
    const auto a = text::parse_uint(line.fields[1], line.number);
    const auto b = text::parse_uint(line.fields[2], line.number);
    if (a > std::numeric_limits<NodeId>::max() || b > std::numeric_limits<NodeId>::max())
      throw Error(Errc::DanglingEdge, "node id exceeds u32", line.number);
    graph.add_edge(static_cast<NodeId>(a), static_cast<NodeId>(b), optional_field(line.fields[3]), line.number);
  }
  return graph;
}

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  const double dlat = (lat2 - lat1) * kDeg;
  const double dlon = (lon2 - lon1) * kDeg;
  const double s1 = std::sin(0.5 * dlat);
  const double s2 = std::sin(0.5 * dlon);
  const double a = s1 * s1 + std::cos(lat1 * kDeg) * std::cos(lat2 * kDeg) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

double initial_bearing_deg(double lat1, double lon1, double lat2, double lon2) {
  const double p1 = lat1 * kDeg, p2 = lat2 * kDeg;
  const double dl = (lon2 - lon1) * kDeg;
  const double y = std::sin(dl) * std::cos(p2);
  const double x = std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl);
  double b = std::atan2(y, x) / kDeg;
  b = std::fmod(b + 360.0, 360.0);
  return b >= 360.0 ? 0.0 : b;
}

std::string_view compass_word(double bearing_deg) {
  static constexpr std::string_view kWords[8] = {"north", "northeast", "east", "southeast",
                                                 "south", "southwest", "west", "northwest"};
  const double b = std::fmod(std::fmod(bearing_deg, 360.0) + 360.0, 360.0);
  return kWords[static_cast<int>(std::floor((b + 22.5) / 45.0)) % 8];
}

NodeId geocode(const RouteGraph& graph, std::string_view destination_name) {
  const std::string wanted = lower(text::trim(destination_name));
  std::optional<NodeId> hit;
  for (const auto& [id, node] : graph.nodes()) {
    if (!node.name || lower(*node.name) != wanted) continue;
    if (hit) throw Error(Errc::AmbiguousDestination, fmt::format("'{}' names nodes {} and {}", destination_name, *hit, id));
    hit = id;
  }
  if (!hit) throw Error(Errc::DestinationNotFound, fmt::format("'{}'", destination_name));
  return *hit;
}

Path shortest_path(const RouteGraph& graph, NodeId src, NodeId dst) {
  graph.node(src);
  graph.node(dst);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr NodeId kNone = std::numeric_limits<NodeId>::max();
  struct Label {
    double dist = kInf;
    NodeId pred = kNone;
    std::size_t edge = 0;
    bool done = false;
  };
  std::map<NodeId, Label> labels;
  for (const auto& [id, _] : graph.nodes()) labels[id];
  labels[src].dist = 0.0;

  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  queue.emplace(0.0, src);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    Label& lu = labels[u];
    if (lu.done || d > lu.dist) continue;
    lu.done = true;
    if (u == dst) break;
    for (const std::size_t ei : graph.incident(u)) {
      const Edge& e = graph.edges()[ei];
      const NodeId v = e.a == u ? e.b : e.a;
      Label& lv = labels[v];
      if (lv.done) continue;
      const double nd = lu.dist + e.length_m;
      if (nd < lv.dist || (nd == lv.dist && u < lv.pred)) {
        const bool improved = nd < lv.dist;
        lv.dist = nd;
        lv.pred = u;
        lv.edge = ei;
        if (improved) queue.emplace(nd, v);
      }
    }
  }
  if (!(labels[dst].dist < kInf)) throw Error(Errc::NoRoute, fmt::format("no path from {} to {}", src, dst));

  Path path;
  path.length_m = labels[dst].dist;
  for (NodeId at = dst; at != src; at = labels[at].pred) {
    path.nodes.push_back(at);
    path.edges.push_back(labels[at].edge);
  }
  path.nodes.push_back(src);
  std::reverse(path.nodes.begin(), path.nodes.end());
  std::reverse(path.edges.begin(), path.edges.end());
  return path;
}

std::vector<RouteStep> generate_instructions(const RouteGraph& graph, const Path& path, const InstructionOptions& options) {
  if (path.nodes.empty()) throw Error(Errc::NoRoute, "empty path");
  const std::string destination = graph.display_name(path.nodes.back());
  std::vector<RouteStep> steps;
  double previous_bearing = 0.0;
  for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
    const Node& a = graph.node(path.nodes[i]);
    const Node& b = graph.node(path.nodes[i + 1]);
    const Edge& e = graph.edges()[path.edges[i]];
    const double bearing = initial_bearing_deg(a.lat, a.lon, b.lat, b.lon);
    const std::string way = way_name(e);
    RouteStep step{"", fmt::format("{} on {}", compass_word(bearing), way), e.length_m, bearing};
    if (i == 0) {
      step.text = "Head " + step.phrase;
    } else {
      const double turn = heading_change(previous_bearing, bearing);
      if (turn > options.turn_threshold_deg) {
        step.text = "Turn right onto " + way;
      } else if (turn < -options.turn_threshold_deg) {
        step.text = "Turn left onto " + way;
      } else {
        step.text = "Continue on " + way;
        if (options.merge_continues && !steps.empty()) {
          steps.back().distance_m += step.distance_m;
          previous_bearing = bearing;
          continue;
        }
      }
    }
    previous_bearing = bearing;
    steps.push_back(std::move(step));
  }
  steps.push_back(RouteStep{"You have arrived at " + destination, "to " + destination, 0.0, previous_bearing});
  return steps;
}

}  // namespace drishti::route
