#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocs/geom.hpp"

namespace ocs {

struct SceneError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class PlaceCategory { accommodation, entertainment, food, office, stores, open };

std::string to_string(PlaceCategory c);
PlaceCategory place_category_from_string(const std::string& s);

struct RoadSegment {
  std::string id;
  Polyline centerline;   // meters, ENU
  double width = 6.0;
  int lane_count = 2;
  bool one_way = false;

  double length() const { return polyline_length(centerline); }
};

struct Junction {
  std::string id;
  Vec2 center;
  double radius = 8.0;
  std::vector<std::string> incident_segments;
};

struct Building {
  std::string id;
  std::string name;
  Polygon footprint;   // meters, ENU
  double height = 10.0;
  std::string category;
};

struct Place {
  std::string id;
  std::string name;
  PlaceCategory category = PlaceCategory::open;
  std::optional<std::string> building_id;
  Vec2 door;
};

struct BusLine {
  std::string id;
  std::vector<std::string> stops;        // place ids, loop order
  std::vector<double> offsets_s;         // travel time from stop i to i+1 (wraps)
  double loop_period_s = 0.0;
};

struct BikeStation {
  std::string id;
  Vec2 location;
  int capacity = 0;
  int initial_count = 0;
};

struct Heightfield {
  Vec2 origin;
  double cell_size = 1.0;
  int rows = 0;
  int cols = 0;
  std::vector<double> elevations;   // row-major, rows*cols

  double at(int r, int c) const { return elevations[static_cast<size_t>(r) * cols + c]; }
  double& at(int r, int c) { return elevations[static_cast<size_t>(r) * cols + c]; }
  bool contains(const Vec2& p) const {
    return p.x >= origin.x && p.y >= origin.y &&
           p.x <= origin.x + cell_size * (cols - 1) &&
           p.y <= origin.y + cell_size * (rows - 1);
  }
};

struct SceneBundle {
  std::vector<RoadSegment> roads;
  std::vector<Junction> junctions;
  std::vector<Building> buildings;
  std::vector<Place> places;
  std::vector<BusLine> bus_lines;
  std::vector<BikeStation> bike_stations;
  Heightfield heightfield;

  const Place* find_place(const std::string& id) const;
  const Building* find_building(const std::string& id) const;

  // Throws SceneError on any broken cross-reference or invariant.
  void validate() const;

  std::string to_json() const;
  static SceneBundle from_json(const std::string& text);
};

}  // namespace ocs
