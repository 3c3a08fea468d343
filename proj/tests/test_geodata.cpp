#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <string>

#include "doctest.h"
#include "ocs/geodata.hpp"
#include "ocs/worldmodel.hpp"

using namespace ocs;
using namespace ocs::geodata;

namespace {

// Minimal OSM v0.6 document builder around lat/lon near the equator so the
// equirectangular projection is ~111.3 km/degree in both axes.
std::string osm_doc(const std::string& body) {
  return "<?xml version='1.0' encoding='UTF-8'?>\n<osm version='0.6'>\n" + body +
         "</osm>\n";
}

std::string node(int64_t id, double lat, double lon, const std::string& tags = "") {
  return "<node id='" + std::to_string(id) + "' lat='" + std::to_string(lat) +
         "' lon='" + std::to_string(lon) + "'>" + tags + "</node>\n";
}

std::string tag(const std::string& k, const std::string& v) {
  return "<tag k='" + k + "' v='" + v + "'/>";
}

std::string way(int64_t id, const std::vector<int64_t>& refs,
                const std::string& tags = "") {
  std::string s = "<way id='" + std::to_string(id) + "'>";
  for (int64_t r : refs) s += "<nd ref='" + std::to_string(r) + "'/>";
  return s + tags + "</way>\n";
}

// degree offset that maps to roughly `meters` at lat 0
double deg(double meters) { return meters / 111194.9266; }

}  // namespace

TEST_CASE("parse_osm: empty and minimal documents") {
  RawGeo empty = parse_osm(osm_doc(""));
  CHECK(empty.nodes.empty());
  CHECK(empty.ways.empty());

  RawGeo no_ways = parse_osm(osm_doc(node(1, 0.0, 0.0)));
  CHECK(no_ways.nodes.size() == 1);
  CHECK(no_ways.ways.empty());

  RawGeo minimal =
      parse_osm(osm_doc(node(1, 0, 0) + node(2, 0, deg(10)) + way(1, {1, 2})));
  CHECK(minimal.ways.at(1).node_refs.size() == 2);
}

TEST_CASE("parse_osm: dangling node reference names the way") {
  std::string doc = osm_doc(node(1, 0, 0) + way(1, {1, 99}));
  CHECK_THROWS_WITH_AS(parse_osm(doc), "way w1: unknown node 99", ValidationError);
}

TEST_CASE("parse_osm: malformed XML reports a line") {
  try {
    parse_osm("<osm><node id='1' </osm>");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("parse -> serialize -> parse round-trip") {
  std::string doc = osm_doc(
      node(1, 0, 0, tag("amenity", "restaurant") + tag("name", "A & B <cafe>")) +
      node(2, deg(5), deg(5)) + node(3, deg(9), 0) +
      way(1, {1, 2, 3}, tag("highway", "residential") + tag("custom:tag", "kept")) +
      "<relation id='7'><member type='way' ref='1' role='outer'/>" +
      tag("type", "multipolygon") + "</relation>\n");
  RawGeo g1 = parse_osm(doc);
  RawGeo g2 = parse_osm(serialize_osm(g1));
  CHECK(g1 == g2);
  CHECK(g1.ways.at(1).tags.at("custom:tag") == "kept");
  CHECK(g1.relations.at(7).members.at(0).type == "way");
}

TEST_CASE("build_road_graph: crossing ways split into 4 segments, 1 junction") {
  // two 200 m ways sharing the center node
  std::string doc = osm_doc(
      node(1, 0, deg(-100)) + node(2, 0, 0) + node(3, 0, deg(100)) +
      node(4, deg(-100), 0) + node(5, deg(100), 0) +
      way(1, {1, 2, 3}, tag("highway", "residential")) +
      way(2, {4, 2, 5}, tag("highway", "residential")));
  RoadGraphResult r = build_road_graph(parse_osm(doc));
  CHECK(r.junctions.size() == 1);
  CHECK(r.roads.size() == 4);
  CHECK(r.junctions[0].incident_segments.size() == 4);
}

TEST_CASE("build_road_graph: isolated road has no junctions") {
  std::string doc = osm_doc(node(1, 0, 0) + node(2, 0, deg(50)) +
                            way(1, {1, 2}, tag("highway", "residential")));
  RoadGraphResult r = build_road_graph(parse_osm(doc));
  CHECK(r.junctions.empty());
  CHECK(r.roads.size() == 1);
  CHECK(polyline_length(r.roads[0].centerline) == doctest::Approx(50.0).epsilon(0.01));
  // defaults when tags are absent
  CHECK(r.roads[0].width == doctest::Approx(6.0));
  CHECK(r.roads[0].lane_count == 2);
}

TEST_CASE("build_road_graph: T-intersection has 3 incident segments") {
  std::string doc = osm_doc(
      node(1, 0, deg(-100)) + node(2, 0, 0) + node(3, 0, deg(100)) +
      node(4, deg(80), 0) +
      way(1, {1, 2, 3}, tag("highway", "residential")) +
      way(2, {2, 4}, tag("highway", "residential")));
  RoadGraphResult r = build_road_graph(parse_osm(doc));
  REQUIRE(r.junctions.size() == 1);
  CHECK(r.junctions[0].incident_segments.size() == 3);
  CHECK(r.roads.size() == 3);
}

TEST_CASE("build_road_graph: zero-length way dropped with warning") {
  std::string doc = osm_doc(node(1, 0, 0) + node(2, 0, deg(40)) +
                            way(1, {1, 1}, tag("highway", "residential")) +
                            way(2, {1, 2}, tag("highway", "residential")));
  RoadGraphResult r = build_road_graph(parse_osm(doc));
  CHECK(r.roads.size() == 1);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("annotate_places: containment, radius drop, open space") {
  // building square ~40x40 m centered near the origin, road to the south
  std::string doc = osm_doc(
      node(1, deg(-20), deg(-20)) + node(2, deg(-20), deg(20)) +
      node(3, deg(20), deg(20)) + node(4, deg(20), deg(-20)) +
      node(10, deg(-40), deg(-60)) + node(11, deg(-40), deg(60)) +
      node(20, 0, 0, tag("amenity", "restaurant") + tag("name", "diner")) +
      node(21, deg(500), deg(500), tag("amenity", "restaurant")) +
      node(30, deg(-35), deg(35)) + node(31, deg(-35), deg(45)) +
      node(32, deg(-25), deg(45)) + node(33, deg(-25), deg(35)) +
      way(1, {1, 2, 3, 4, 1}, tag("building", "yes")) +
      way(2, {10, 11}, tag("highway", "residential")) +
      way(3, {30, 31, 32, 33, 30}, tag("leisure", "park")));
  RawGeo geo = parse_osm(doc);
  auto buildings = build_buildings(geo);
  REQUIRE(buildings.size() == 1);
  auto roads = build_road_graph(geo).roads;
  PlaceResult pr = annotate_places(geo, buildings, roads);

  const Place* diner = nullptr;
  const Place* park = nullptr;
  for (const auto& p : pr.places) {
    if (p.name == "diner") diner = &p;
    if (p.category == PlaceCategory::open) park = &p;
  }
  REQUIRE(diner != nullptr);
  CHECK(diner->category == PlaceCategory::food);
  REQUIRE(diner->building_id.has_value());
  CHECK(*diner->building_id == buildings[0].id);
  // door sits on the footprint boundary
  bool on_boundary = false;
  const Polygon& fp = buildings[0].footprint;
  for (size_t i = 0; i < fp.size(); ++i)
    if (point_segment_distance(diner->door, fp[i], fp[(i + 1) % fp.size()]) < 1e-6)
      on_boundary = true;
  CHECK(on_boundary);

  REQUIRE(park != nullptr);
  CHECK_FALSE(park->building_id.has_value());

  // the amenity 500+ m out was dropped
  CHECK(pr.dropped >= 1);
  for (const auto& p : pr.places) CHECK(p.name != "");
}

TEST_CASE("elevation CSV parser") {
  auto rows = read_elevation_csv("x,y,z\n0,0,5\n1, 0, 5\n2 0 5\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].x == doctest::Approx(2.0));
  CHECK_THROWS_AS(read_elevation_csv("x,y,z\n1,2\n"), ParseError);
}

TEST_CASE("build_heightfield: constant field and exact sample reproduction") {
  std::vector<ElevationSample> samples;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      samples.push_back({i * 10.0, j * 10.0, 5.0});
  Heightfield hf = build_heightfield(samples, 10.0);
  for (double z : hf.elevations) CHECK(z == doctest::Approx(5.0));

  // grid nodes that coincide with a sample reproduce it within 1e-9
  std::vector<ElevationSample> varied;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      varied.push_back({i * 10.0, j * 10.0, 0.1 * i + 0.05 * j});
  Heightfield hv = build_heightfield(varied, 10.0);
  CHECK(hv.at(0, 0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(hv.at(2, 3) == doctest::Approx(0.3 + 0.1).epsilon(1e-9));
}

TEST_CASE("build_heightfield: planted 500 m outlier filtered") {
  std::vector<ElevationSample> samples;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      samples.push_back({i * 10.0, j * 10.0, 0.01 * i});
  samples.push_back({45.0, 45.0, 500.0});
  Heightfield hf = build_heightfield(samples, 10.0);
  for (double z : hf.elevations) CHECK(z < 10.0);
}

TEST_CASE("build_heightfield: error cases") {
  CHECK_THROWS_AS(build_heightfield({{0, 0, 1}, {1, 0, 1}, {0, 1, 1}}, 1.0),
                  ValidationError);
  CHECK_THROWS_AS(
      build_heightfield({{0, 0, 1}, {0, 1, 1}, {0, 2, 1}, {0, 3, 1}}, 1.0),
      ValidationError);   // degenerate bbox (zero width)
}

TEST_CASE("heightfield corners 0,0,0,4: center queried via worldmodel is 1.0") {
  SceneBundle b;
  RoadSegment r;
  r.id = "r0";
  r.centerline = {{0, 0}, {1, 0}};
  b.roads = {r};
  b.heightfield.origin = {0, 0};
  b.heightfield.cell_size = 1.0;
  b.heightfield.rows = 2;
  b.heightfield.cols = 2;
  b.heightfield.elevations = {0, 0, 0, 4};
  WorldMap map(std::move(b));
  CHECK(map.elevation_at({0.5, 0.5}) == doctest::Approx(1.0));
}

TEST_CASE("annotate_transit: two stops, symmetric offsets") {
  std::vector<RoadSegment> roads;
  RoadSegment r;
  r.id = "r0";
  r.centerline = {{0, 0}, {300, 0}};
  roads = {r};
  std::vector<Place> places;
  Place a;
  a.id = "pa";
  a.name = "a";
  a.category = PlaceCategory::open;
  a.door = {0, 0};
  Place b;
  b.id = "pb";
  b.name = "b";
  b.category = PlaceCategory::open;
  b.door = {300, 0};
  places = {a, b};
  TransitParams tp;
  tp.n_stops = 2;
  tp.n_stations = 1;
  TransitResult tr = annotate_transit(places, roads, tp, 1);
  REQUIRE(tr.bus_lines.size() == 1);
  REQUIRE(tr.bus_lines[0].stops.size() == 2);
  REQUIRE(tr.bus_lines[0].offsets_s.size() == 2);
  CHECK(tr.bus_lines[0].offsets_s[0] ==
        doctest::Approx(tr.bus_lines[0].offsets_s[1]));
  CHECK(tr.bus_lines[0].offsets_s[0] == doctest::Approx(30.0));   // 300 m / 10 m/s
}

TEST_CASE("annotate_transit: collinear places visited in spatial order") {
  std::vector<RoadSegment> roads;
  RoadSegment r;
  r.id = "r0";
  r.centerline = {{0, 0}, {400, 0}};
  roads = {r};
  std::vector<Place> places;
  for (int i = 0; i < 4; ++i) {
    Place p;
    p.id = "p" + std::to_string(i);
    p.name = p.id;
    p.category = PlaceCategory::open;
    p.door = {100.0 * i, 0};
    places.push_back(p);
  }
  TransitParams tp;
  tp.n_stops = 4;
  tp.n_stations = 1;
  TransitResult tr = annotate_transit(places, roads, tp, 3);
  REQUIRE(tr.bus_lines.size() == 1);
  const auto& stops = tr.bus_lines[0].stops;
  REQUIRE(stops.size() == 4);
  // nearest-neighbor tour from the lowest id is the spatial order
  CHECK(stops == std::vector<std::string>{"p0", "p1", "p2", "p3"});
}

TEST_CASE("annotate_transit: disconnected stops raise an error") {
  std::vector<RoadSegment> roads;
  RoadSegment r1;
  r1.id = "r0";
  r1.centerline = {{0, 0}, {100, 0}};
  RoadSegment r2;
  r2.id = "r1";
  r2.centerline = {{5000, 0}, {5100, 0}};
  roads = {r1, r2};
  std::vector<Place> places;
  Place a;
  a.id = "pa";
  a.name = "a";
  a.category = PlaceCategory::open;
  a.door = {0, 0};
  Place b;
  b.id = "pb";
  b.name = "b";
  b.category = PlaceCategory::open;
  b.door = {5000, 0};
  places = {a, b};
  TransitParams tp;
  tp.n_stops = 2;
  tp.n_stations = 0;
  CHECK_THROWS_AS(annotate_transit(places, roads, tp, 1), ValidationError);
}

TEST_CASE("synth_scene: deterministic and statistically plausible") {
  SceneBundle a = synth_scene(42);
  SceneBundle b = synth_scene(42);
  CHECK(a.to_json() == b.to_json());   // byte-identical

  SceneBundle c = synth_scene(43);
  CHECK(a.to_json() != c.to_json());

  // default params target Table-average counts within +-50%
  CHECK(a.buildings.size() >= 27);
  CHECK(a.buildings.size() <= 79);
  CHECK(a.places.size() >= 43);
  CHECK(a.places.size() <= 127);
  CHECK(a.junctions.size() >= 38);
  CHECK(a.junctions.size() <= 114);
  CHECK_NOTHROW(a.validate());
}

TEST_CASE("synth_scene: parameter edges") {
  SynthParams p;
  p.buildings = 1;
  p.places = 4;
  SceneBundle b = synth_scene(1, p);
  CHECK(b.buildings.size() == 1);

  SynthParams bad;
  bad.extent = 10.0;
  CHECK_THROWS_AS(synth_scene(1, bad), ValidationError);
  SynthParams bad2;
  bad2.h_streets = 1;
  CHECK_THROWS_AS(synth_scene(1, bad2), ValidationError);
}

TEST_CASE("synth_scene: categories always in the six-category set") {
  SceneBundle b = synth_scene(9);
  for (const auto& p : b.places) {
    std::string c = to_string(p.category);
    CHECK((c == "accommodation" || c == "entertainment" || c == "food" ||
           c == "office" || c == "stores" || c == "open"));
  }
}
