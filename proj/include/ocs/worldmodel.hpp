#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ocs/roadgraph.hpp"
#include "ocs/scene.hpp"

namespace ocs {

struct WorldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Immutable scene queries. Safe for unrestricted concurrent reads.
class WorldMap {
 public:
  explicit WorldMap(SceneBundle bundle);

  static WorldMap load(const std::string& json_text) {
    return WorldMap(SceneBundle::from_json(json_text));
  }

  const SceneBundle& bundle() const { return bundle_; }
  const RoadGraph& road_graph() const { return *road_graph_; }

  double elevation_at(const Vec2& p) const;

  // True iff segment a-b misses every building footprint interior.
  // Boundary grazing counts as visible.
  bool line_of_sight(const Vec2& a, const Vec2& b) const;

  // Ties resolved by lowest id. Throws WorldError when the scene has no transit.
  std::pair<std::string, double> nearest_stop(const Vec2& p) const;
  std::pair<std::string, double> nearest_station(const Vec2& p) const;

  // Dijkstra over segment lengths; endpoints must snap within 30 m.
  double road_path_length(const Vec2& a, const Vec2& b) const;

  const Place* place(const std::string& id) const { return bundle_.find_place(id); }
  const Building* building(const std::string& id) const { return bundle_.find_building(id); }
  const BikeStation* station(const std::string& id) const;
  const BusLine* bus_line(const std::string& id) const;

  // All place ids a bus line stops at; empty when id unknown.
  std::vector<std::string> stop_place_ids() const;

  // Buildings whose footprint bounding box intersects the segment's bbox.
  std::vector<const Building*> buildings_near(const Vec2& a, const Vec2& b) const;

  bool point_in_any_building(const Vec2& p) const;

 private:
  SceneBundle bundle_;
  std::shared_ptr<RoadGraph> road_graph_;

  // uniform grid over footprints, 25 m cells
  static constexpr double kGridCell = 25.0;
  Vec2 grid_origin_;
  int grid_cols_ = 0, grid_rows_ = 0;
  std::vector<std::vector<int>> grid_;   // building indices per cell

  std::unordered_map<std::string, std::vector<std::string>> stop_lines_;

  void build_indices();
  std::vector<int> candidate_buildings(const Vec2& a, const Vec2& b) const;
};

}  // namespace ocs
