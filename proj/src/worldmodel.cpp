#include "ocs/worldmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace ocs {

WorldMap::WorldMap(SceneBundle bundle) : bundle_(std::move(bundle)) {
  bundle_.validate();
  road_graph_ = std::make_shared<RoadGraph>(bundle_.roads);
  build_indices();
}

void WorldMap::build_indices() {
  double minx = 0.0, miny = 0.0, maxx = 0.0, maxy = 0.0;
  bool first = true;
  for (const auto& b : bundle_.buildings) {
    for (const auto& p : b.footprint) {
      if (first) {
        minx = maxx = p.x;
        miny = maxy = p.y;
        first = false;
      }
      minx = std::min(minx, p.x);
      maxx = std::max(maxx, p.x);
      miny = std::min(miny, p.y);
      maxy = std::max(maxy, p.y);
    }
  }
  grid_origin_ = {minx, miny};
  grid_cols_ = std::max(1, static_cast<int>((maxx - minx) / kGridCell) + 1);
  grid_rows_ = std::max(1, static_cast<int>((maxy - miny) / kGridCell) + 1);
  grid_.assign(static_cast<size_t>(grid_cols_) * grid_rows_, {});

  for (int i = 0; i < static_cast<int>(bundle_.buildings.size()); ++i) {
    const auto& fp = bundle_.buildings[i].footprint;
    double bx0 = fp[0].x, bx1 = fp[0].x, by0 = fp[0].y, by1 = fp[0].y;
    for (const auto& p : fp) {
      bx0 = std::min(bx0, p.x);
      bx1 = std::max(bx1, p.x);
      by0 = std::min(by0, p.y);
      by1 = std::max(by1, p.y);
    }
    int c0 = std::clamp(static_cast<int>((bx0 - grid_origin_.x) / kGridCell), 0, grid_cols_ - 1);
    int c1 = std::clamp(static_cast<int>((bx1 - grid_origin_.x) / kGridCell), 0, grid_cols_ - 1);
    int r0 = std::clamp(static_cast<int>((by0 - grid_origin_.y) / kGridCell), 0, grid_rows_ - 1);
    int r1 = std::clamp(static_cast<int>((by1 - grid_origin_.y) / kGridCell), 0, grid_rows_ - 1);
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c)
        grid_[static_cast<size_t>(r) * grid_cols_ + c].push_back(i);
  }

  for (const auto& line : bundle_.bus_lines)
    for (const auto& stop : line.stops) stop_lines_[stop].push_back(line.id);
}

double WorldMap::elevation_at(const Vec2& p) const {
  const Heightfield& h = bundle_.heightfield;
  if (h.rows < 2 || h.cols < 2) throw WorldError("scene has no heightfield");
  if (!h.contains(p)) throw WorldError("elevation query out of heightfield bounds");
  double fx = (p.x - h.origin.x) / h.cell_size;
  double fy = (p.y - h.origin.y) / h.cell_size;
  int c = std::min(static_cast<int>(fx), h.cols - 2);
  int r = std::min(static_cast<int>(fy), h.rows - 2);
  double tx = fx - c;
  double ty = fy - r;
  double z00 = h.at(r, c), z01 = h.at(r, c + 1);
  double z10 = h.at(r + 1, c), z11 = h.at(r + 1, c + 1);
  return z00 * (1 - tx) * (1 - ty) + z01 * tx * (1 - ty) + z10 * (1 - tx) * ty +
         z11 * tx * ty;
}

std::vector<int> WorldMap::candidate_buildings(const Vec2& a, const Vec2& b) const {
  if (bundle_.buildings.empty()) return {};
  double x0 = std::min(a.x, b.x) - kGridCell, x1 = std::max(a.x, b.x) + kGridCell;
  double y0 = std::min(a.y, b.y) - kGridCell, y1 = std::max(a.y, b.y) + kGridCell;
  int c0 = std::clamp(static_cast<int>((x0 - grid_origin_.x) / kGridCell), 0, grid_cols_ - 1);
  int c1 = std::clamp(static_cast<int>((x1 - grid_origin_.x) / kGridCell), 0, grid_cols_ - 1);
  int r0 = std::clamp(static_cast<int>((y0 - grid_origin_.y) / kGridCell), 0, grid_rows_ - 1);
  int r1 = std::clamp(static_cast<int>((y1 - grid_origin_.y) / kGridCell), 0, grid_rows_ - 1);
  std::set<int> seen;
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c)
      for (int i : grid_[static_cast<size_t>(r) * grid_cols_ + c]) seen.insert(i);
  return {seen.begin(), seen.end()};
}

bool WorldMap::line_of_sight(const Vec2& a, const Vec2& b) const {
  for (int i : candidate_buildings(a, b)) {
    if (segment_intersects_polygon(a, b, bundle_.buildings[i].footprint)) return false;
  }
  return true;
}

bool WorldMap::point_in_any_building(const Vec2& p) const {
  for (int i : candidate_buildings(p, p))
    if (point_in_polygon(p, bundle_.buildings[i].footprint)) return true;
  return false;
}

std::pair<std::string, double> WorldMap::nearest_stop(const Vec2& p) const {
  std::string best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [stop, lines] : stop_lines_) {
    const Place* pl = bundle_.find_place(stop);
    if (!pl) continue;
    double d = distance(p, pl->door);
    if (d < best_d || (d == best_d && stop < best)) {
      best_d = d;
      best = stop;
    }
  }
  if (best.empty()) throw WorldError("scene has no bus stops");
  return {best, best_d};
}

std::pair<std::string, double> WorldMap::nearest_station(const Vec2& p) const {
  std::string best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& s : bundle_.bike_stations) {
    double d = distance(p, s.location);
    if (d < best_d || (d == best_d && s.id < best)) {
      best_d = d;
      best = s.id;
    }
  }
  if (best.empty()) throw WorldError("scene has no bike stations");
  return {best, best_d};
}

double WorldMap::road_path_length(const Vec2& a, const Vec2& b) const {
  auto len = road_graph_->path_length(a, b, 30.0);
  if (!len) throw WorldError("no road path between query points");
  return *len;
}

std::vector<const Building*> WorldMap::buildings_near(const Vec2& a, const Vec2& b) const {
  double x0 = std::min(a.x, b.x), x1 = std::max(a.x, b.x);
  double y0 = std::min(a.y, b.y), y1 = std::max(a.y, b.y);
  std::vector<const Building*> out;
  for (int i : candidate_buildings(a, b)) {
    const auto& fp = bundle_.buildings[i].footprint;
    double bx0 = fp[0].x, bx1 = fp[0].x, by0 = fp[0].y, by1 = fp[0].y;
    for (const auto& p : fp) {
      bx0 = std::min(bx0, p.x);
      bx1 = std::max(bx1, p.x);
      by0 = std::min(by0, p.y);
      by1 = std::max(by1, p.y);
    }
    if (bx1 >= x0 && bx0 <= x1 && by1 >= y0 && by0 <= y1)
      out.push_back(&bundle_.buildings[i]);
  }
  return out;
}

const BikeStation* WorldMap::station(const std::string& id) const {
  for (const auto& s : bundle_.bike_stations)
    if (s.id == id) return &s;
  return nullptr;
}

const BusLine* WorldMap::bus_line(const std::string& id) const {
  for (const auto& l : bundle_.bus_lines)
    if (l.id == id) return &l;
  return nullptr;
}

std::vector<std::string> WorldMap::stop_place_ids() const {
  std::set<std::string> ids;
  for (const auto& line : bundle_.bus_lines)
    for (const auto& s : line.stops) ids.insert(s);
  return {ids.begin(), ids.end()};
}

}  // namespace ocs
