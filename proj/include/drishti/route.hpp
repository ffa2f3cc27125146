#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drishti::route {

using NodeId = std::uint32_t;

constexpr double kEarthRadiusM = 6'371'000.0;

struct Node {
  NodeId id = 0;
  std::optional<std::string> name;
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
};

struct Edge {
  NodeId a = 0;
  NodeId b = 0;
  std::optional<std::string> way;
  double length_m = 0.0;
};

/// Undirected geographic graph with haversine edge lengths.
class RouteGraph {
 public:
  /// Throws BadCoordinate / DuplicateNodeId.
  void add_node(Node node, std::size_t line = 0);
  /// Throws DanglingEdge, or MalformedLine for self-loops.
  void add_edge(NodeId a, NodeId b, std::optional<std::string> way, std::size_t line = 0);

  const Node* find(NodeId id) const;
  const Node& node(NodeId id) const;
  const std::map<NodeId, Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Edge indices incident to `id`, in insertion order.
  const std::vector<std::size_t>& incident(NodeId id) const;

  /// "name" or "node <id>" when unnamed.
  std::string display_name(NodeId id) const;

 private:
  std::map<NodeId, Node> nodes_;
  std::vector<Edge> edges_;
  std::map<NodeId, std::vector<std::size_t>> adjacency_;
};

/// Lines "node,<id>,<name|->,<lat>,<lon>" and "edge,<a>,<b>,<wayname|->".
RouteGraph parse_route_graph(std::string_view text);

double haversine_m(double lat1, double lon1, double lat2, double lon2);

/// Forward azimuth from the first point to the second, degrees in [0, 360).
double initial_bearing_deg(double lat1, double lon1, double lat2, double lon2);

/// 8-sector compass word ("north", "northeast", ...).
std::string_view compass_word(double bearing_deg);

/// Case-insensitive exact name match. Throws DestinationNotFound / AmbiguousDestination.
NodeId geocode(const RouteGraph& graph, std::string_view destination_name);

struct Path {
  std::vector<NodeId> nodes;
  std::vector<std::size_t> edges;  // edges[i] joins nodes[i] and nodes[i+1]
  double length_m = 0.0;
};

/// Dijkstra; equal-cost predecessors resolve to the smaller node id. Throws UnknownNode / NoRoute.
Path shortest_path(const RouteGraph& graph, NodeId src, NodeId dst);

struct RouteStep {
  std::string text;    // display instruction, e.g. "Turn right onto Elm Street"
  std::string phrase;  // heading phrase for guidance, e.g. "east on Elm Street"
  double distance_m = 0.0;
  double bearing_deg = 0.0;
};

struct InstructionOptions {
  bool merge_continues = false;
  double turn_threshold_deg = 30.0;
};

std::vector<RouteStep> generate_instructions(const RouteGraph& graph, const Path& path, const InstructionOptions& options = {});

}  // namespace drishti::route
