#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "ocs/geom.hpp"

namespace ocs::nav {

struct NavError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
  auto operator<=>(const Cell&) const = default;
};

inline int64_t cell_key(const Cell& c) {
  return (static_cast<int64_t>(c.x) << 32) ^ (static_cast<uint32_t>(c.y));
}

struct Ray {
  double direction = 0.0;               // world heading, radians
  std::optional<double> hit_distance;   // nullopt = max-range miss
};

// Sparse occupancy evidence at 0.1 m. Monotone: cells are never forgotten;
// occupied wins over free.
class SensedStore {
 public:
  static constexpr double kResolution = 0.1;

  void integrate_sensing(const Vec2& origin, const std::vector<Ray>& rays,
                         double max_range);

  bool is_occupied(const Cell& c) const { return occupied_.count(cell_key(c)) > 0; }
  bool is_free(const Cell& c) const {
    return !is_occupied(c) && free_.count(cell_key(c)) > 0;
  }
  size_t occupied_count() const { return occupied_.size(); }
  size_t free_count() const { return free_.size(); }

  static Cell cell_of(const Vec2& p) {
    return {static_cast<int>(std::floor(p.x / kResolution)),
            static_cast<int>(std::floor(p.y / kResolution))};
  }

 private:
  std::unordered_set<int64_t> occupied_;
  std::unordered_set<int64_t> free_;
};

enum class CellState : uint8_t { unknown, free, occupied };

// 0.5 m planning grid downsampled 5x5 from the sensed store.
struct OccupancyGrid {
  Vec2 origin;                       // world position of cell (0,0) corner
  static constexpr double kResolution = 0.5;
  int width = 0, height = 0;
  std::vector<CellState> cells;

  CellState at(const Cell& c) const {
    if (c.x < 0 || c.y < 0 || c.x >= width || c.y >= height) return CellState::occupied;
    return cells[static_cast<size_t>(c.y) * width + c.x];
  }
  void set(const Cell& c, CellState s) {
    cells[static_cast<size_t>(c.y) * width + c.x] = s;
  }
  Cell cell_of(const Vec2& p) const {
    return {static_cast<int>(std::floor((p.x - origin.x) / kResolution)),
            static_cast<int>(std::floor((p.y - origin.y) / kResolution))};
  }
  Vec2 center_of(const Cell& c) const {
    return {origin.x + (c.x + 0.5) * kResolution, origin.y + (c.y + 0.5) * kResolution};
  }

  std::string to_pgm() const;   // P2 text dump for debugging
};

OccupancyGrid to_occupancy(const SensedStore& store, const Vec2& min_corner,
                           const Vec2& max_corner);

constexpr double kUnknownPenalty = 1.5;

// 8-connected A*: straight 1, diagonal sqrt(2), octile heuristic, unknown
// cells traversable at kUnknownPenalty. Throws NavError("unreachable").
std::vector<Cell> plan_path(const OccupancyGrid& grid, const Cell& start,
                            const std::set<Cell>& goal_region);

double path_cost(const OccupancyGrid& grid, const std::vector<Cell>& path);

struct MotionCommand {
  enum class Kind { turn, move } kind = Kind::move;
  double amount = 0.0;   // radians (signed) or meters
};

// One primitive per tick: align heading first (5 deg tolerance), then step
// up to speed_cap toward the next waypoint.
MotionCommand next_action(const OccupancyGrid& grid, const std::vector<Cell>& path,
                          const Vec2& pose_pos, double pose_heading,
                          double speed_cap = 2.0);

}  // namespace ocs::nav
