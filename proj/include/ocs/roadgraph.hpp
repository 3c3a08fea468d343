#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ocs/scene.hpp"

namespace ocs {

// Undirected graph over road segment polyline vertices. Vertices shared
// between segments are merged by coordinate (1e-6 m quantization).
class RoadGraph {
 public:
  explicit RoadGraph(const std::vector<RoadSegment>& roads);

  // Nearest graph vertex within max_snap, or nullopt.
  std::optional<int> snap(const Vec2& p, double max_snap = 30.0) const;

  // Shortest-path length between vertices; nullopt if unreachable.
  std::optional<double> shortest_path(int from, int to) const;

  // Convenience: project both endpoints onto the nearest road edge
  // (perpendicular distance <= max_snap) and run Dijkstra. Includes the
  // approach offsets so a=b yields 0. nullopt if unsnappable/unreachable.
  std::optional<double> path_length(const Vec2& a, const Vec2& b,
                                    double max_snap = 30.0) const;

  // Point sequence of the shortest path, starting at a's projection and
  // ending at b's projection (empty if unreachable).
  std::vector<Vec2> shortest_path_points(const Vec2& a, const Vec2& b,
                                         double max_snap = 30.0) const;

  int vertex_count() const { return static_cast<int>(points_.size()); }
  const Vec2& vertex(int i) const { return points_[i]; }

 private:
  struct Edge {
    int u, v;
  };
  struct Anchor {
    int edge;
    Vec2 q;        // projection onto the edge
    double dist;   // perpendicular distance from the query point
  };

  std::vector<Vec2> points_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
  std::vector<Edge> edges_;

  std::optional<Anchor> nearest_edge(const Vec2& p, double max_snap) const;
  std::vector<double> dijkstra(int from, std::vector<int>* prev = nullptr) const;
  std::vector<double> dijkstra_seeded(const std::vector<std::pair<int, double>>& seeds,
                                      std::vector<int>* prev = nullptr) const;
};

}  // namespace ocs
