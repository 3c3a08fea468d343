#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ocs/scene.hpp"

namespace ocs::geodata {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using TagMap = std::map<std::string, std::string>;

struct OsmNode {
  double lat = 0.0;
  double lon = 0.0;
  TagMap tags;
  bool operator==(const OsmNode&) const = default;
};

struct OsmWay {
  std::vector<int64_t> node_refs;
  TagMap tags;
  bool operator==(const OsmWay&) const = default;
};

struct OsmMember {
  std::string type;   // node | way | relation
  int64_t ref = 0;
  std::string role;
  bool operator==(const OsmMember&) const = default;
};

struct OsmRelation {
  std::vector<OsmMember> members;
  TagMap tags;
  bool operator==(const OsmRelation&) const = default;
};

struct RawGeo {
  std::map<int64_t, OsmNode> nodes;
  std::map<int64_t, OsmWay> ways;
  std::map<int64_t, OsmRelation> relations;
  bool operator==(const RawGeo&) const = default;
};

// OSM v0.6 XML subset (node/way/relation). Unknown tags survive round-trips.
RawGeo parse_osm(const std::string& document);
std::string serialize_osm(const RawGeo& geo);

// Local equirectangular projection about the node centroid.
std::map<int64_t, Vec2> project_enu(const RawGeo& geo);

struct RoadGraphResult {
  std::vector<RoadSegment> roads;
  std::vector<Junction> junctions;
  std::vector<std::string> warnings;
};

RoadGraphResult build_road_graph(const RawGeo& geo);

std::vector<Building> build_buildings(const RawGeo& geo);

struct PlaceResult {
  std::vector<Place> places;
  int dropped = 0;
};

// Match radius for amenity -> building association, meters.
constexpr double kPlaceMatchRadius = 50.0;

PlaceResult annotate_places(const RawGeo& geo, const std::vector<Building>& buildings,
                            const std::vector<RoadSegment>& roads);

struct ElevationSample {
  double x = 0.0, y = 0.0, z = 0.0;
};

// |z - median(z of 8 nearest)| > 3 m drops a sample.
constexpr double kOutlierThreshold = 3.0;

Heightfield build_heightfield(std::vector<ElevationSample> samples, double cell_size);

std::vector<ElevationSample> read_elevation_csv(const std::string& text);

struct TransitResult {
  std::vector<BusLine> bus_lines;
  std::vector<BikeStation> bike_stations;
};

struct TransitParams {
  int n_stops = 4;
  int n_stations = 3;
  double bus_speed = 10.0;
  int station_capacity = 8;
  int station_initial = 4;
};

TransitResult annotate_transit(const std::vector<Place>& places,
                               const std::vector<RoadSegment>& roads,
                               const TransitParams& params, uint64_t seed);

struct SynthParams {
  double extent = 800.0;        // scene side length, meters
  int buildings = 53;
  int places = 85;
  int h_streets = 8;
  int v_streets = 9;
  int n_stops = 6;
  int n_stations = 4;
  double heightfield_cell = 25.0;
};

SceneBundle synth_scene(uint64_t seed, const SynthParams& params = {});

// Full OSM + elevation ingest pipeline.
SceneBundle ingest(const std::string& osm_xml, const std::string& elevation_csv,
                   const TransitParams& transit = {}, uint64_t seed = 0);

}  // namespace ocs::geodata
