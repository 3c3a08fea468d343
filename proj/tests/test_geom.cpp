#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "ocs/geom.hpp"
#include "ocs/roadgraph.hpp"
#include "ocs/scene.hpp"

using namespace ocs;

TEST_CASE("polyline length") {
  CHECK(polyline_length({}) == 0.0);
  CHECK(polyline_length({{0, 0}}) == 0.0);
  CHECK(polyline_length({{0, 0}, {3, 4}}) == doctest::Approx(5.0));
  CHECK(polyline_length({{0, 0}, {1, 0}, {1, 1}}) == doctest::Approx(2.0));
}

TEST_CASE("point in polygon, boundary counts as outside") {
  Polygon square = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  CHECK(point_in_polygon({1, 1}, square));
  CHECK_FALSE(point_in_polygon({3, 1}, square));
  CHECK_FALSE(point_in_polygon({0, 1}, square));   // on edge
  CHECK_FALSE(point_in_polygon({0, 0}, square));   // on vertex
  CHECK_FALSE(point_in_polygon({2, 1}, square));
}

TEST_CASE("segment crossing") {
  CHECK(segments_cross({0, 0}, {2, 2}, {0, 2}, {2, 0}));
  CHECK_FALSE(segments_cross({0, 0}, {1, 0}, {0, 1}, {1, 1}));
  // collinear overlap is not a proper crossing
  CHECK_FALSE(segments_cross({0, 0}, {2, 0}, {1, 0}, {3, 0}));
}

TEST_CASE("segment through a square footprint") {
  Polygon square = {{1, -1}, {3, -1}, {3, 1}, {1, 1}};
  CHECK(segment_intersects_polygon({0, 0}, {4, 0}, square));
  CHECK_FALSE(segment_intersects_polygon({0, 2}, {4, 2}, square));
  // grazing along an edge does not enter the interior
  CHECK_FALSE(segment_intersects_polygon({0, 1}, {4, 1}, square));
  // fully inside
  CHECK(segment_intersects_polygon({1.5, 0}, {2.5, 0}, square));
}

TEST_CASE("projection and distance") {
  Vec2 q = project_to_segment({1, 1}, {0, 0}, {2, 0});
  CHECK(q.x == doctest::Approx(1.0));
  CHECK(q.y == doctest::Approx(0.0));
  CHECK(point_segment_distance({1, 1}, {0, 0}, {2, 0}) == doctest::Approx(1.0));
  // beyond the end clamps
  CHECK(point_segment_distance({5, 0}, {0, 0}, {2, 0}) == doctest::Approx(3.0));
}

TEST_CASE("point along polyline") {
  Polyline pl = {{0, 0}, {10, 0}, {10, 10}};
  Vec2 a = point_along(pl, 5.0);
  CHECK(a.x == doctest::Approx(5.0));
  Vec2 b = point_along(pl, 15.0);
  CHECK(b.x == doctest::Approx(10.0));
  CHECK(b.y == doctest::Approx(5.0));
  Vec2 c = point_along(pl, 99.0);   // clamped to the end
  CHECK(c.y == doctest::Approx(10.0));
}

TEST_CASE("polygon simplicity") {
  CHECK(polygon_is_simple({{0, 0}, {2, 0}, {2, 2}, {0, 2}}));
  CHECK_FALSE(polygon_is_simple({{0, 0}, {2, 2}, {2, 0}, {0, 2}}));   // bow tie
}

TEST_CASE("normalize angle wraps into (-pi, pi]") {
  CHECK(normalize_angle(0.0) == doctest::Approx(0.0));
  CHECK(normalize_angle(M_PI) == doctest::Approx(M_PI));
  CHECK(normalize_angle(-M_PI) == doctest::Approx(M_PI));
  CHECK(normalize_angle(3 * M_PI) == doctest::Approx(M_PI));
  CHECK(normalize_angle(M_PI + 0.1) == doctest::Approx(-M_PI + 0.1));
}

TEST_CASE("scene bundle JSON round-trip") {
  SceneBundle b = fixtures::cross_scene();
  b.validate();
  std::string j = b.to_json();
  SceneBundle b2 = SceneBundle::from_json(j);
  CHECK(b2.to_json() == j);
  CHECK(b2.roads.size() == 2);
  CHECK(b2.places.size() == 3);
  CHECK(b2.bus_lines[0].stops.size() == 2);
  CHECK(b2.heightfield.rows == 3);
}

TEST_CASE("scene validation rejects broken cross-references") {
  SceneBundle b = fixtures::cross_scene();
  b.bus_lines[0].stops.push_back("nonexistent");
  b.bus_lines[0].offsets_s.push_back(1.0);
  CHECK_THROWS_AS(b.validate(), SceneError);

  SceneBundle c = fixtures::cross_scene();
  c.places[0].building_id = "nope";
  CHECK_THROWS_AS(c.validate(), SceneError);

  SceneBundle d = fixtures::cross_scene();
  d.buildings[0].footprint = {{0, 0}, {2, 2}, {2, 0}, {0, 2}};   // self-intersecting
  CHECK_THROWS_AS(d.validate(), SceneError);
}

TEST_CASE("road graph: snap, lengths, paths") {
  SceneBundle b = fixtures::bare_scene();
  RoadGraph g(b.roads);

  auto v = g.snap({99.0, 1.0});
  REQUIRE(v.has_value());
  CHECK(distance(g.vertex(*v), {100, 0}) < 2.0);
  CHECK_FALSE(g.snap({1000, 1000}).has_value());

  // a = b -> 0
  auto z = g.path_length({50, 0}, {50, 0});
  REQUIRE(z.has_value());
  CHECK(*z == doctest::Approx(0.0));

  // along the straight street
  auto d = g.path_length({0, 0}, {200, 0});
  REQUIRE(d.has_value());
  CHECK(*d == doctest::Approx(200.0));

  // across the junction
  auto d2 = g.path_length({0, 0}, {100, 100});
  REQUIRE(d2.has_value());
  CHECK(*d2 == doctest::Approx(200.0));

  auto pts = g.shortest_path_points({0, 0}, {200, 0});
  REQUIRE(pts.size() >= 2);
  CHECK(distance(pts.front(), {0, 0}) < 1e-9);
  CHECK(distance(pts.back(), {200, 0}) < 1e-9);
}

TEST_CASE("road graph ring matches enumeration oracle") {
  // square ring of four 10 m segments
  std::vector<RoadSegment> roads;
  auto seg = [&](const char* id, Vec2 a, Vec2 b) {
    RoadSegment r;
    r.id = id;
    r.centerline = {a, b};
    roads.push_back(r);
  };
  seg("r0", {0, 0}, {10, 0});
  seg("r1", {10, 0}, {10, 10});
  seg("r2", {10, 10}, {0, 10});
  seg("r3", {0, 10}, {0, 0});
  RoadGraph g(roads);
  // opposite corners: both arcs are 20, shortest = 20
  auto d = g.path_length({0, 0}, {10, 10});
  REQUIRE(d.has_value());
  CHECK(*d == doctest::Approx(20.0));
  // adjacent corners: min(10, 30)
  auto d2 = g.path_length({0, 0}, {10, 0});
  REQUIRE(d2.has_value());
  CHECK(*d2 == doctest::Approx(10.0));
}

TEST_CASE("road path triangle inequality over sampled triples") {
  SceneBundle b = fixtures::bare_scene();
  RoadGraph g(b.roads);
  std::mt19937_64 rng(7);
  auto sample = [&]() -> Vec2 {
    double t = double(rng() % 2000) / 10.0;
    return rng() % 2 == 0 ? Vec2{t, 0.0} : Vec2{100.0, t - 100.0};
  };
  for (int i = 0; i < 200; ++i) {
    Vec2 a = sample(), b2 = sample(), c = sample();
    auto ab = g.path_length(a, b2), bc = g.path_length(b2, c), ac = g.path_length(a, c);
    REQUIRE(ab.has_value());
    REQUIRE(bc.has_value());
    REQUIRE(ac.has_value());
    CHECK(*ac <= *ab + *bc + 1e-6);
  }
}
