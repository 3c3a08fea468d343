#pragma once

// Hand-built micro scenes shared across suites.

#include "ocs/scene.hpp"

namespace fixtures {

inline ocs::Heightfield flat_field(double z, double extent = 400.0) {
  ocs::Heightfield hf;
  hf.origin = {-extent, -extent};
  hf.cell_size = extent;
  hf.rows = 3;
  hf.cols = 3;
  hf.elevations.assign(9, z);
  return hf;
}

// A 200 m cross of two streets with one junction, one building with a
// place, a two-stop bus loop along the horizontal street, and two bike
// stations near the stop doors.
inline ocs::SceneBundle cross_scene() {
  ocs::SceneBundle b;

  ocs::RoadSegment h1;
  h1.id = "rh";
  h1.centerline = {{0, 0}, {100, 0}, {200, 0}};
  ocs::RoadSegment v1;
  v1.id = "rv";
  v1.centerline = {{100, -100}, {100, 0}, {100, 100}};
  b.roads = {h1, v1};

  ocs::Junction j;
  j.id = "j0";
  j.center = {100, 0};
  j.incident_segments = {"rh", "rv"};
  b.junctions = {j};

  ocs::Building bd;
  bd.id = "b1";
  bd.name = "house";
  bd.footprint = {{40, 20}, {60, 20}, {60, 40}, {40, 40}};
  b.buildings = {bd};

  ocs::Place home;
  home.id = "p_home";
  home.name = "home";
  home.category = ocs::PlaceCategory::accommodation;
  home.building_id = "b1";
  home.door = {50, 20};

  ocs::Place s1;
  s1.id = "p_stop_a";
  s1.name = "stop a";
  s1.category = ocs::PlaceCategory::open;
  s1.door = {0, 0};

  ocs::Place s2;
  s2.id = "p_stop_b";
  s2.name = "stop b";
  s2.category = ocs::PlaceCategory::open;
  s2.door = {200, 0};

  b.places = {home, s1, s2};

  ocs::BusLine line;
  line.id = "L";
  line.stops = {"p_stop_a", "p_stop_b"};
  line.offsets_s = {20.0, 20.0};   // 200 m each way at 10 m/s
  line.loop_period_s = 40.0;
  b.bus_lines = {line};

  ocs::BikeStation k0;
  k0.id = "bike0";
  k0.location = {10, 0};
  k0.capacity = 8;
  k0.initial_count = 4;
  ocs::BikeStation k1;
  k1.id = "bike1";
  k1.location = {190, 0};
  k1.capacity = 8;
  k1.initial_count = 4;
  b.bike_stations = {k0, k1};

  b.heightfield = flat_field(0.0);
  return b;
}

// Cross scene without transit, for tests that need a bare road graph.
inline ocs::SceneBundle bare_scene() {
  ocs::SceneBundle b = cross_scene();
  b.bus_lines.clear();
  b.bike_stations.clear();
  return b;
}

}  // namespace fixtures
