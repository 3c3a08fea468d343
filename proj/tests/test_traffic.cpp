#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "ocs/traffic.hpp"

using namespace ocs;
using namespace ocs::traffic;

namespace {

// Four 60 m arms meeting at one junction; every arm terminates at the center.
SceneBundle star_scene() {
  SceneBundle b;
  auto seg = [&](const char* id, Vec2 a, Vec2 c) {
    RoadSegment r;
    r.id = id;
    r.centerline = {a, c};
    b.roads.push_back(r);
  };
  seg("e", {0, 0}, {60, 0});
  seg("n", {0, 0}, {0, 60});
  seg("s", {0, -60}, {0, 0});
  seg("w", {-60, 0}, {0, 0});
  Junction j;
  j.id = "j0";
  j.center = {0, 0};
  j.incident_segments = {"e", "n", "s", "w"};
  b.junctions = {j};
  return b;
}

SceneBundle single_road(double len = 200.0, int lanes = 2) {
  SceneBundle b;
  RoadSegment r;
  r.id = "s";
  r.centerline = {{0, 0}, {len, 0}};
  r.lane_count = lanes;
  b.roads = {r};
  return b;
}

}  // namespace

TEST_CASE("junction gate grants once and is reentrant for the holder") {
  JunctionGate gate{"j0", std::nullopt};
  CHECK(request_junction(gate, 7));
  CHECK(gate.occupant == 7);
  CHECK(request_junction(gate, 7));    // holder may re-request
  CHECK_FALSE(request_junction(gate, 9));
  CHECK(gate.occupant == 7);
  gate.occupant.reset();
  CHECK(request_junction(gate, 9));
}

TEST_CASE("pedestrian_adjust: offsets to the right, zero beyond proximity") {
  TrafficConfig cfg;
  // 2 m apart: no adjustment
  auto [z1, z2] = pedestrian_adjust({0, 0}, 0.0, {2, 0}, M_PI, cfg);
  CHECK(z1.x == 0.0);
  CHECK(z1.y == 0.0);
  CHECK(z2.x == 0.0);
  CHECK(z2.y == 0.0);

  // head-on inside 1 m: each steps 0.3 m to their own right
  auto [o1, o2] = pedestrian_adjust({0, 0}, 0.0, {0.8, 0}, M_PI, cfg);
  CHECK(o1.x == doctest::Approx(0.0));
  CHECK(o1.y == doctest::Approx(-0.3));   // east-bound: right is -y
  CHECK(o2.x == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(o2.y == doctest::Approx(0.3));    // west-bound: right is +y

  // north-bound: right is +x
  auto [n1, n2] = pedestrian_adjust({0, 0}, M_PI / 2, {0, 0.5}, -M_PI / 2, cfg);
  CHECK(n1.x == doctest::Approx(0.3));
  CHECK(n1.y == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(n2.x == doctest::Approx(-0.3));
}

TEST_CASE("head-on pedestrian avoidance never decreases separation") {
  TrafficConfig cfg;
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    double h = double(rng() % 6283) / 1000.0;
    double t = 0.05 + double(rng() % 900) / 1000.0;   // 0.05..0.95 m apart
    Vec2 p1{double(rng() % 100), double(rng() % 100)};
    Vec2 p2{p1.x + std::cos(h) * t, p1.y + std::sin(h) * t};
    auto [o1, o2] = pedestrian_adjust(p1, h, p2, h + M_PI, cfg);
    double before = distance(p1, p2);
    double after = distance(p1 + o1, p2 + o2);
    CHECK(after >= before - 1e-12);
  }
}

TEST_CASE("vehicles and pedestrians advance at their configured speeds") {
  WorldMap map(single_road());
  TrafficSim sim(map);
  sim.add_entity(EntityKind::vehicle, "s", 0, 1, 10.0);
  sim.add_entity(EntityKind::pedestrian, "s", 0, 1, 10.0);
  sim.step(1.0);
  CHECK(sim.entities()[0].arc == doctest::Approx(18.0));
  CHECK(sim.entities()[0].pos.x == doctest::Approx(18.0));
  CHECK(sim.entities()[0].pos.y == doctest::Approx(0.0));
  CHECK(sim.entities()[1].arc == doctest::Approx(11.4));
  // sidewalk: 1 m band right of travel, half road width + 0.5
  CHECK(sim.entities()[1].pos.y == doctest::Approx(-3.5));
  sim.step(0.5);
  CHECK(sim.entities()[0].arc == doctest::Approx(22.0));
}

TEST_CASE("dead end without a junction turns the entity around") {
  WorldMap map(single_road(50.0));
  TrafficSim sim(map);
  sim.add_entity(EntityKind::vehicle, "s", 0, 1, 46.0);
  sim.step(1.0);
  CHECK(sim.entities()[0].direction == -1);
  sim.step(1.0);
  CHECK(sim.entities()[0].arc == doctest::Approx(8.0));
  CHECK(sim.entities()[0].pos.x == doctest::Approx(42.0));
}

TEST_CASE("car following keeps the 4 m safety gap behind a slower point") {
  WorldMap map(single_road(500.0));
  TrafficSim sim(map);
  // leader starts far enough ahead that it never interacts
  sim.add_entity(EntityKind::vehicle, "s", 0, 1, 30.0);
  sim.add_entity(EntityKind::vehicle, "s", 0, 1, 25.0);   // 5 m behind
  for (int i = 0; i < 20; ++i) {
    sim.step(1.0);
    double gap = sim.entities()[0].arc - sim.entities()[1].arc;
    CHECK(gap >= 4.0 - 1e-9);
  }
}

TEST_CASE("choose_direction picks the least-loaded arm, ties to lowest id") {
  WorldMap map(star_scene());
  TrafficSim sim(map);
  const Junction& j = map.bundle().junctions[0];

  // empty network: every arm has 0 vehicles, tie -> lexicographic
  CHECK(sim.choose_direction(j, "w") == "e");
  CHECK(sim.choose_direction(j, "e") == "n");

  sim.add_entity(EntityKind::vehicle, "e", 0, 1, 20.0);
  sim.add_entity(EntityKind::vehicle, "e", 0, 1, 40.0);
  sim.add_entity(EntityKind::vehicle, "n", 0, 1, 20.0);
  CHECK(sim.choose_direction(j, "w") == "s");   // 2 on e, 1 on n, 0 on s
  sim.add_entity(EntityKind::vehicle, "s", 1, -1, 20.0);
  CHECK(sim.choose_direction(j, "w") == "n");   // tie n/s at 1 -> "n"

  // dead end: only the incoming segment -> U-turn
  Junction dead;
  dead.id = "jd";
  dead.incident_segments = {"e"};
  CHECK(sim.choose_direction(dead, "e") == "e");
}

TEST_CASE("congestion rule moves a vehicle to a strictly emptier lane") {
  WorldMap map(single_road(50.0, 2));
  TrafficSim sim(map);
  // 6 vehicles in lane 0 -> density 0.12 > 0.1
  for (int i = 0; i < 6; ++i)
    sim.add_entity(EntityKind::vehicle, "s", 0, 1, 10.0 + 5.0 * i);
  CHECK(sim.maybe_lane_change(sim.entities()[0]) == 1);

  // adjacent slot blocked within the safety gap: no change for that car
  sim.add_entity(EntityKind::vehicle, "s", 1, 1, 11.0);
  CHECK(sim.maybe_lane_change(sim.entities()[0]) == 0);
  CHECK(sim.maybe_lane_change(sim.entities()[2]) == 1);   // 20 m slot is clear

  // below the density threshold nothing moves
  WorldMap map2(single_road(50.0, 2));
  TrafficSim calm(map2);
  for (int i = 0; i < 5; ++i)
    calm.add_entity(EntityKind::vehicle, "s", 0, 1, 10.0 + 6.0 * i);
  CHECK(calm.maybe_lane_change(calm.entities()[0]) == 0);

  // single-lane roads never change
  WorldMap map3(single_road(50.0, 1));
  TrafficSim narrow(map3);
  for (int i = 0; i < 6; ++i)
    narrow.add_entity(EntityKind::vehicle, "s", 0, 1, 10.0 + 5.0 * i);
  CHECK(narrow.maybe_lane_change(narrow.entities()[0]) == 0);
}

TEST_CASE("spawn is deterministic in the seed and respects margins") {
  WorldMap map(star_scene());
  TrafficSim a(map), b(map), c(map);
  a.spawn(10, 6, 42);
  b.spawn(10, 6, 42);
  c.spawn(10, 6, 43);
  REQUIRE(a.entities().size() == b.entities().size());
  bool same = true, differs = false;
  for (size_t i = 0; i < a.entities().size(); ++i) {
    const auto& ea = a.entities()[i];
    const auto& eb = b.entities()[i];
    same = same && ea.segment == eb.segment && ea.lane == eb.lane &&
           ea.direction == eb.direction && ea.arc == eb.arc;
    if (i < c.entities().size() && ea.arc != c.entities()[i].arc) differs = true;
  }
  CHECK(same);
  CHECK(differs);
  for (const auto& e : a.entities()) {
    double len = 60.0;
    CHECK(e.arc >= 9.0 - 1e-9);            // junction_radius + 1 margin
    CHECK(e.arc <= len - 9.0 + 1e-9);
  }
}

TEST_CASE("fuzz: gates and gaps hold over 300 ticks") {
  WorldMap map(star_scene());
  for (uint64_t seed : {1u, 2u, 3u}) {
    TrafficSim sim(map);
    sim.spawn(8, 5, seed);
    REQUIRE(sim.entities().size() >= 10);
    const Vec2 center = map.bundle().junctions[0].center;
    for (int t = 0; t < 300; ++t) {
      sim.step(1.0);
      // at most one entity inside the junction core
      int inside = 0;
      for (const auto& e : sim.entities())
        if (distance(e.pos, center) < 8.0 - 1.0) ++inside;
      CHECK(inside <= 1);
      // same-lane vehicles never violate the safety gap
      const auto& es = sim.entities();
      for (size_t i = 0; i < es.size(); ++i) {
        for (size_t k = i + 1; k < es.size(); ++k) {
          if (es[i].kind != EntityKind::vehicle || es[k].kind != EntityKind::vehicle)
            continue;
          if (es[i].segment != es[k].segment || es[i].lane != es[k].lane ||
              es[i].direction != es[k].direction)
            continue;
          CHECK(std::abs(es[i].arc - es[k].arc) >= 4.0 - 1e-6);
        }
      }
    }
  }
}

TEST_CASE("census reports per-segment counts") {
  WorldMap map(star_scene());
  TrafficSim sim(map);
  sim.add_entity(EntityKind::vehicle, "e", 0, 1, 20.0);
  sim.add_entity(EntityKind::vehicle, "e", 1, 1, 30.0);
  sim.add_entity(EntityKind::pedestrian, "n", 0, 1, 20.0);
  std::string j = sim.census_json();
  CHECK(j.find("\"e\"") != std::string::npos);
  CHECK(sim.vehicles_on_segment("e") == 2);
  CHECK(sim.vehicles_on("e", 0, 1) == 1);
  CHECK(sim.vehicles_on_segment("n") == 0);
}
