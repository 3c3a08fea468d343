#include "ocs/roadgraph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace ocs {

namespace {
struct Key {
  int64_t qx, qy;
  bool operator<(const Key& o) const { return qx != o.qx ? qx < o.qx : qy < o.qy; }
};
Key quantize(const Vec2& p) {
  return {static_cast<int64_t>(std::llround(p.x * 1e6)),
          static_cast<int64_t>(std::llround(p.y * 1e6))};
}
}  // namespace

RoadGraph::RoadGraph(const std::vector<RoadSegment>& roads) {
  std::map<Key, int> index;
  auto vertex_id = [&](const Vec2& p) {
    auto [it, inserted] = index.try_emplace(quantize(p), static_cast<int>(points_.size()));
    if (inserted) {
      points_.push_back(p);
      adj_.emplace_back();
    }
    return it->second;
  };
  for (const auto& r : roads) {
    for (size_t i = 1; i < r.centerline.size(); ++i) {
      int a = vertex_id(r.centerline[i - 1]);
      int b = vertex_id(r.centerline[i]);
      double len = distance(r.centerline[i - 1], r.centerline[i]);
      if (a == b) continue;
      adj_[a].push_back({b, len});
      adj_[b].push_back({a, len});
      edges_.push_back({a, b});
    }
  }
}

std::optional<RoadGraph::Anchor> RoadGraph::nearest_edge(const Vec2& p,
                                                         double max_snap) const {
  std::optional<Anchor> best;
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    Vec2 q = project_to_segment(p, points_[edges_[e].u], points_[edges_[e].v]);
    double d = distance(p, q);
    if (d <= max_snap && (!best || d < best->dist)) best = Anchor{e, q, d};
  }
  return best;
}

std::optional<int> RoadGraph::snap(const Vec2& p, double max_snap) const {
  int best = -1;
  double best_d = max_snap;
  for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
    double d = distance(p, points_[i]);
    if (d < best_d || (best < 0 && d <= best_d)) {
      best = i;
      best_d = d;
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

std::vector<double> RoadGraph::dijkstra(int from, std::vector<int>* prev) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(points_.size(), inf);
  if (prev) prev->assign(points_.size(), -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[from] = 0.0;
  pq.push({0.0, from});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (auto [v, w] : adj_[u]) {
      if (d + w < dist[v]) {
        dist[v] = d + w;
        if (prev) (*prev)[v] = u;
        pq.push({d + w, v});
      }
    }
  }
  return dist;
}

std::optional<double> RoadGraph::shortest_path(int from, int to) const {
  auto dist = dijkstra(from);
  if (!std::isfinite(dist[to])) return std::nullopt;
  return dist[to];
}

std::vector<double> RoadGraph::dijkstra_seeded(
    const std::vector<std::pair<int, double>>& seeds, std::vector<int>* prev) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(points_.size(), inf);
  if (prev) prev->assign(points_.size(), -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (auto [v, d0] : seeds) {
    if (d0 < dist[v]) {
      dist[v] = d0;
      pq.push({d0, v});
    }
  }
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (auto [v, w] : adj_[u]) {
      if (d + w < dist[v]) {
        dist[v] = d + w;
        if (prev) (*prev)[v] = u;
        pq.push({d + w, v});
      }
    }
  }
  return dist;
}

std::optional<double> RoadGraph::path_length(const Vec2& a, const Vec2& b,
                                             double max_snap) const {
  if (distance(a, b) < 1e-12) return 0.0;
  auto ea = nearest_edge(a, max_snap);
  auto eb = nearest_edge(b, max_snap);
  if (!ea || !eb) return std::nullopt;

  double best = std::numeric_limits<double>::infinity();
  if (ea->edge == eb->edge) best = distance(ea->q, eb->q);

  const Edge& A = edges_[ea->edge];
  const Edge& B = edges_[eb->edge];
  auto dist = dijkstra_seeded({{A.u, distance(ea->q, points_[A.u])},
                               {A.v, distance(ea->q, points_[A.v])}});
  best = std::min(best, dist[B.u] + distance(points_[B.u], eb->q));
  best = std::min(best, dist[B.v] + distance(points_[B.v], eb->q));
  if (!std::isfinite(best)) return std::nullopt;
  return ea->dist + best + eb->dist;
}

std::vector<Vec2> RoadGraph::shortest_path_points(const Vec2& a, const Vec2& b,
                                                  double max_snap) const {
  auto ea = nearest_edge(a, max_snap);
  auto eb = nearest_edge(b, max_snap);
  if (!ea || !eb) return {};
  if (ea->edge == eb->edge) return {ea->q, eb->q};

  const Edge& A = edges_[ea->edge];
  const Edge& B = edges_[eb->edge];
  std::vector<int> prev;
  auto dist = dijkstra_seeded({{A.u, distance(ea->q, points_[A.u])},
                               {A.v, distance(ea->q, points_[A.v])}},
                              &prev);
  double via_u = dist[B.u] + distance(points_[B.u], eb->q);
  double via_v = dist[B.v] + distance(points_[B.v], eb->q);
  if (!std::isfinite(std::min(via_u, via_v))) return {};
  int exit = via_u <= via_v ? B.u : B.v;
  std::vector<Vec2> path;
  for (int v = exit; v != -1; v = prev[v]) path.push_back(points_[v]);
  std::reverse(path.begin(), path.end());
  path.insert(path.begin(), ea->q);
  path.push_back(eb->q);
  return path;
}

}  // namespace ocs
