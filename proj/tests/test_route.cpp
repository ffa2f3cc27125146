#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "drishti/error.hpp"
#include "drishti/route.hpp"
#include "oracles.hpp"

using namespace drishti;

namespace {

// A plus-shaped neighbourhood: center 1, north 2, east 3, and 4 further north of 2.
const char* kCampus =
    "node,1,Quad,47.6000,-122.3000\n"
    "node,2,library,47.6010,-122.3000\n"
    "node,3,Gym,47.6000,-122.2985\n"
    "node,4,Gate,47.6020,-122.3000\n"
    "node,5,-,47.6010,-122.2985\n"
    "edge,1,2,Main Way\n"
    "edge,1,3,Elm Street\n"
    "edge,2,4,Main Way\n"
    "edge,2,5,-\n";

}  // namespace

TEST_SUITE("route") {

TEST_CASE("parsing") {
  const auto g = route::parse_route_graph("node,1,A,0,0\nnode,2,B,0,0.001\nedge,1,2,Road\n");
  CHECK(g.nodes().size() == 2);
  CHECK(g.edges().size() == 1);
  CHECK(g.edges()[0].length_m == doctest::Approx(oracle::haversine(0, 0, 0, 0.001)).epsilon(1e-12));

  CHECK(oracle::error_code([] { route::parse_route_graph("node,1,A,0,0\nedge,1,9,x\n"); }) == Errc::DanglingEdge);
  CHECK(oracle::error_code([] { route::parse_route_graph("node,1,A,91,0\n"); }) == Errc::BadCoordinate);
  CHECK(oracle::error_code([] { route::parse_route_graph("node,1,A,0,181\n"); }) == Errc::BadCoordinate);
  CHECK(oracle::error_code([] { route::parse_route_graph("node,1,A,0,0\nnode,1,B,1,1\n"); }) == Errc::DuplicateNodeId);
  try {
    route::parse_route_graph("node,1,A,0,0\n\nedge,1,7,-\n");
    FAIL("expected DanglingEdge");
  } catch (const Error& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("haversine properties") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> lat(-80, 80), lon(-179, 179);
  for (int i = 0; i < 500; ++i) {
    const double a = lat(rng), b = lon(rng), c = lat(rng), d = lon(rng);
    CHECK(route::haversine_m(a, b, c, d) == route::haversine_m(c, d, a, b));
    CHECK(route::haversine_m(a, b, a, b) == 0.0);
    CHECK(route::haversine_m(a, b, c, d) > 0.0);
    CHECK(route::haversine_m(a, b, c, d) == doctest::Approx(oracle::haversine(a, b, c, d)).epsilon(1e-9));
  }
  // A quarter meridian.
  CHECK(route::haversine_m(0, 0, 90, 0) == doctest::Approx(6371000.0 * M_PI / 2).epsilon(1e-12));
}

TEST_CASE("compass sectors") {
  CHECK(route::compass_word(0) == "north");
  CHECK(route::compass_word(359) == "north");
  CHECK(route::compass_word(45) == "northeast");
  CHECK(route::compass_word(90) == "east");
  CHECK(route::compass_word(180) == "south");
  CHECK(route::compass_word(270) == "west");
  CHECK(route::compass_word(314) == "northwest");
}

TEST_CASE("geocode") {
  const auto g = route::parse_route_graph(kCampus);
  CHECK(route::geocode(g, "Library") == 2);
  CHECK(route::geocode(g, "  gym ") == 3);
  CHECK(oracle::error_code([&] { route::geocode(g, "Atlantis"); }) == Errc::DestinationNotFound);
  const auto dup = route::parse_route_graph("node,1,gate,0,0\nnode,2,Gate,0,1\n");
  CHECK(oracle::error_code([&] { route::geocode(dup, "gate"); }) == Errc::AmbiguousDestination);
}

TEST_CASE("shortest path basics") {
  const auto g = route::parse_route_graph("node,1,A,10,10\nnode,2,B,10.001,10\n");
  auto g2 = g;
  g2.add_edge(1, 2, "Road");
  const auto p = route::shortest_path(g2, 1, 2);
  CHECK(p.nodes == std::vector<route::NodeId>{1, 2});
  CHECK(p.length_m == doctest::Approx(oracle::haversine(10, 10, 10.001, 10)));

  const auto self = route::shortest_path(g2, 1, 1);
  CHECK(self.nodes == std::vector<route::NodeId>{1});
  CHECK(self.length_m == 0.0);

  CHECK(oracle::error_code([&] { route::shortest_path(g, 1, 2); }) == Errc::NoRoute);
  CHECK(oracle::error_code([&] { route::shortest_path(g, 1, 42); }) == Errc::UnknownNode);
}

TEST_CASE("shortest path equals the exhaustive optimum") {
  std::mt19937_64 rng(1234);
  for (int instance = 0; instance < 100; ++instance) {
    const auto sg = oracle::random_graph(rng);
    const auto g = oracle::to_route_graph(sg);
    const int n = static_cast<int>(sg.nodes.size());
    const int s = static_cast<int>(rng() % n), t = static_cast<int>(rng() % n);
    const auto best = oracle::brute_force_shortest(sg, s, t);
    const auto src = sg.nodes[s].id, dst = sg.nodes[t].id;
    if (!best) {
      CHECK(oracle::error_code([&] { route::shortest_path(g, src, dst); }) == Errc::NoRoute);
      continue;
    }
    const auto p = route::shortest_path(g, src, dst);
    CHECK(p.length_m == doctest::Approx(*best).epsilon(1e-12));
    REQUIRE(!p.nodes.empty());
    CHECK(p.nodes.front() == src);
    CHECK(p.nodes.back() == dst);
    REQUIRE(p.edges.size() + 1 == p.nodes.size());
    double sum = 0;
    for (std::size_t i = 0; i < p.edges.size(); ++i) {
      const auto& e = g.edges()[p.edges[i]];
      CHECK(((e.a == p.nodes[i] && e.b == p.nodes[i + 1]) || (e.b == p.nodes[i] && e.a == p.nodes[i + 1])));
      sum += e.length_m;
    }
    CHECK(sum == doctest::Approx(p.length_m).epsilon(1e-12));
    CHECK(std::set<route::NodeId>(p.nodes.begin(), p.nodes.end()).size() == p.nodes.size());
  }
}

TEST_CASE("tie break prefers the smaller predecessor id") {
  // Two equal-length routes 1-2-4 and 1-3-4 (mirror images about the meridian).
  const auto g = route::parse_route_graph(
      "node,1,S,0,0\nnode,3,L,0.001,-0.001\nnode,2,R,0.001,0.001\nnode,4,T,0.002,0\n"
      "edge,1,3,-\nedge,3,4,-\nedge,1,2,-\nedge,2,4,-\n");
  for (int i = 0; i < 5; ++i) CHECK(route::shortest_path(g, 1, 4).nodes == std::vector<route::NodeId>{1, 2, 4});
}

TEST_CASE("instructions") {
  const auto g = route::parse_route_graph(kCampus);

  const auto north = route::generate_instructions(g, route::shortest_path(g, 1, 2));
  REQUIRE(north.size() == 2);
  CHECK(north[0].text == "Head north on Main Way");
  CHECK(north[0].phrase == "north on Main Way");
  CHECK(north[1].text == "You have arrived at library");

  const auto turn = route::generate_instructions(g, route::shortest_path(g, 1, 5));
  REQUIRE(turn.size() == 3);
  CHECK(turn[0].text == "Head north on Main Way");
  CHECK(turn[1].text == "Turn right onto unnamed road");
  CHECK(turn[2].text == "You have arrived at node 5");

  const auto straight = route::generate_instructions(g, route::shortest_path(g, 1, 4));
  REQUIRE(straight.size() == 3);
  CHECK(straight[1].text == "Continue on Main Way");
  route::InstructionOptions merge;
  merge.merge_continues = true;
  const auto merged = route::generate_instructions(g, route::shortest_path(g, 1, 4), merge);
  CHECK(merged.size() == 2);
  CHECK(merged[0].distance_m == doctest::Approx(straight[0].distance_m + straight[1].distance_m));

  const auto left = route::generate_instructions(g, route::shortest_path(g, 5, 1));
  CHECK(left[1].text == "Turn left onto Main Way");

  const auto here = route::generate_instructions(g, route::shortest_path(g, 3, 3));
  REQUIRE(here.size() == 1);
  CHECK(here[0].text == "You have arrived at Gym");
}

TEST_CASE("instruction count equals edge count plus one") {
  std::mt19937_64 rng(55);
  for (int instance = 0; instance < 50; ++instance) {
    const auto sg = oracle::random_graph(rng);
    const auto g = oracle::to_route_graph(sg);
    try {
      const auto p = route::shortest_path(g, sg.nodes.front().id, sg.nodes.back().id);
      const auto steps = route::generate_instructions(g, p);
      CHECK(steps.size() == p.edges.size() + 1);
      for (const auto& s : steps) {
        CHECK(s.distance_m >= 0.0);
        CHECK(s.bearing_deg >= 0.0);
        CHECK(s.bearing_deg < 360.0);
      }
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NoRoute);
    }
  }
}

}  // TEST_SUITE
