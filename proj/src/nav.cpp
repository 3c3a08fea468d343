#include "ocs/nav.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

namespace ocs::nav {

namespace {

// Amanatides-Woo traversal over 0.1 m cells from origin along a ray.
template <typename Visit>
void walk_ray(const Vec2& origin, double heading, double length, Visit&& visit) {
  const double res = SensedStore::kResolution;
  double dx = std::cos(heading), dy = std::sin(heading);
  int x = static_cast<int>(std::floor(origin.x / res));
  int y = static_cast<int>(std::floor(origin.y / res));
  int step_x = dx > 0 ? 1 : -1;
  int step_y = dy > 0 ? 1 : -1;
  double inf = std::numeric_limits<double>::infinity();
  double t_dx = std::abs(dx) < 1e-15 ? inf : res / std::abs(dx);
  double t_dy = std::abs(dy) < 1e-15 ? inf : res / std::abs(dy);
  double next_bx = (dx > 0 ? (x + 1) * res : x * res);
  double next_by = (dy > 0 ? (y + 1) * res : y * res);
  double t_x = std::abs(dx) < 1e-15 ? inf : (next_bx - origin.x) / dx;
  double t_y = std::abs(dy) < 1e-15 ? inf : (next_by - origin.y) / dy;
  double t = 0.0;
  while (t < length) {
    visit(Cell{x, y}, t);
    if (t_x < t_y) {
      t = t_x;
      t_x += t_dx;
      x += step_x;
    } else {
      t = t_y;
      t_y += t_dy;
      y += step_y;
    }
  }
}

}  // namespace

void SensedStore::integrate_sensing(const Vec2& origin, const std::vector<Ray>& rays,
                                    double max_range) {
  for (const auto& ray : rays) {
    double len = ray.hit_distance ? std::min(*ray.hit_distance, max_range) : max_range;
    walk_ray(origin, ray.direction, len,
             [&](const Cell& c, double) { free_.insert(cell_key(c)); });
    if (ray.hit_distance && *ray.hit_distance <= max_range) {
      Vec2 hit{origin.x + std::cos(ray.direction) * *ray.hit_distance,
               origin.y + std::sin(ray.direction) * *ray.hit_distance};
      Cell hc = cell_of(hit);
      occupied_.insert(cell_key(hc));
      free_.erase(cell_key(hc));
    }
  }
}

OccupancyGrid to_occupancy(const SensedStore& store, const Vec2& min_corner,
                           const Vec2& max_corner) {
  OccupancyGrid g;
  const double res = OccupancyGrid::kResolution;
  g.origin = {std::floor(min_corner.x / res) * res, std::floor(min_corner.y / res) * res};
  g.width = std::max(1, static_cast<int>(std::ceil((max_corner.x - g.origin.x) / res)));
  g.height = std::max(1, static_cast<int>(std::ceil((max_corner.y - g.origin.y) / res)));
  g.cells.assign(static_cast<size_t>(g.width) * g.height, CellState::unknown);

  // each 0.5 m cell covers a 5x5 block of 0.1 m cells
  for (int cy = 0; cy < g.height; ++cy) {
    for (int cx = 0; cx < g.width; ++cx) {
      int base_x = static_cast<int>(std::llround(g.origin.x / SensedStore::kResolution)) + cx * 5;
      int base_y = static_cast<int>(std::llround(g.origin.y / SensedStore::kResolution)) + cy * 5;
      bool any_occ = false, any_free = false;
      for (int dy = 0; dy < 5 && !any_occ; ++dy) {
        for (int dx = 0; dx < 5; ++dx) {
          Cell fine{base_x + dx, base_y + dy};
          if (store.is_occupied(fine)) {
            any_occ = true;
            break;
          }
          if (store.is_free(fine)) any_free = true;
        }
      }
      CellState s = any_occ ? CellState::occupied
                            : (any_free ? CellState::free : CellState::unknown);
      g.set({cx, cy}, s);
    }
  }
  return g;
}

std::string OccupancyGrid::to_pgm() const {
  std::ostringstream out;
  out << "P2\n" << width << " " << height << "\n255\n";
  for (int y = height - 1; y >= 0; --y) {
    for (int x = 0; x < width; ++x) {
      CellState s = at({x, y});
      out << (s == CellState::occupied ? 0 : s == CellState::free ? 255 : 128);
      out << (x + 1 == width ? '\n' : ' ');
    }
  }
  return out.str();
}

namespace {

double octile(const Cell& a, const Cell& b) {
  double dx = std::abs(a.x - b.x), dy = std::abs(a.y - b.y);
  return (dx + dy) + (M_SQRT2 - 2.0) * std::min(dx, dy);
}

struct OpenItem {
  double f;
  double g;
  Cell cell;
  // lower f, then higher g, then lexicographic cell order
  bool operator>(const OpenItem& o) const {
    if (f != o.f) return f > o.f;
    if (g != o.g) return g < o.g;
    return cell > o.cell;
  }
};

}  // namespace

std::vector<Cell> plan_path(const OccupancyGrid& grid, const Cell& start,
                            const std::set<Cell>& goal_region) {
  if (goal_region.empty()) throw NavError("empty goal region");
  if (grid.at(start) == CellState::occupied) throw NavError("start cell occupied");
  if (goal_region.count(start)) return {start};

  auto heuristic = [&](const Cell& c) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : goal_region) best = std::min(best, octile(c, g));
    return best;
  };

  std::priority_queue<OpenItem, std::vector<OpenItem>, std::greater<>> open;
  std::map<Cell, double> g_score;
  std::map<Cell, Cell> came_from;
  g_score[start] = 0.0;
  open.push({heuristic(start), 0.0, start});

  const int dxs[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  const int dys[8] = {0, 0, 1, -1, 1, -1, 1, -1};

  while (!open.empty()) {
    auto item = open.top();
    open.pop();
    auto it = g_score.find(item.cell);
    if (it == g_score.end() || item.g > it->second + 1e-12) continue;
    if (goal_region.count(item.cell)) {
      std::vector<Cell> path = {item.cell};
      Cell c = item.cell;
      while (came_from.count(c)) {
        c = came_from[c];
        path.push_back(c);
      }
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (int k = 0; k < 8; ++k) {
      Cell n{item.cell.x + dxs[k], item.cell.y + dys[k]};
      CellState s = grid.at(n);
      if (s == CellState::occupied) continue;
      double base = k < 4 ? 1.0 : M_SQRT2;
      double cost = base * (s == CellState::unknown ? kUnknownPenalty : 1.0);
      double ng = item.g + cost;
      auto git = g_score.find(n);
      if (git == g_score.end() || ng < git->second - 1e-12) {
        g_score[n] = ng;
        came_from[n] = item.cell;
        open.push({ng + heuristic(n), ng, n});
      }
    }
  }
  throw NavError("unreachable");
}

double path_cost(const OccupancyGrid& grid, const std::vector<Cell>& path) {
  double cost = 0.0;
  for (size_t i = 1; i < path.size(); ++i) {
    int dx = std::abs(path[i].x - path[i - 1].x);
    int dy = std::abs(path[i].y - path[i - 1].y);
    double base = (dx + dy == 2 && dx == 1) ? M_SQRT2 : 1.0;
    cost += base * (grid.at(path[i]) == CellState::unknown ? kUnknownPenalty : 1.0);
  }
  return cost;
}

MotionCommand next_action(const OccupancyGrid& grid, const std::vector<Cell>& path,
                          const Vec2& pose_pos, double pose_heading, double speed_cap) {
  if (path.empty()) return {MotionCommand::Kind::move, 0.0};
  // first waypoint meaningfully ahead of the agent
  Vec2 target = grid.center_of(path.back());
  for (const auto& c : path) {
    Vec2 w = grid.center_of(c);
    if (distance(w, pose_pos) > 0.25) {
      target = w;
      break;
    }
  }
  double d = distance(target, pose_pos);
  if (d < 1e-9) return {MotionCommand::Kind::move, 0.0};
  double bearing = std::atan2(target.y - pose_pos.y, target.x - pose_pos.x);
  double delta = normalize_angle(bearing - pose_heading);
  constexpr double kAlignTolerance = 5.0 * M_PI / 180.0;
  if (std::abs(delta) > kAlignTolerance) return {MotionCommand::Kind::turn, delta};
  return {MotionCommand::Kind::move, std::min(speed_cap, d)};
}

}  // namespace ocs::nav
