#include "ocs/geom.hpp"

#include <algorithm>

namespace ocs {

double polyline_length(const Polyline& pl) {
  double len = 0.0;
  for (size_t i = 1; i < pl.size(); ++i) len += distance(pl[i - 1], pl[i]);
  return len;
}

bool point_in_polygon(const Vec2& p, const Polygon& poly) {
  const size_t n = poly.size();
  if (n < 3) return false;
  // boundary check first: boundary counts as outside
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if (point_segment_distance(p, a, b) < 1e-12) return false;
  }
  bool inside = false;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < xint) inside = !inside;
    }
  }
  return inside;
}

static int orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  double v = (b - a).cross(c - a);
  if (v > 1e-12) return 1;
  if (v < -1e-12) return -1;
  return 0;
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  int o1 = orient(a, b, c);
  int o2 = orient(a, b, d);
  int o3 = orient(c, d, a);
  int o4 = orient(c, d, b);
  return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

bool segment_intersects_polygon(const Vec2& a, const Vec2& b, const Polygon& poly) {
  const size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    if (segments_cross(a, b, poly[i], poly[(i + 1) % n])) return true;
  }
  // fully-contained segment crosses no edge; check the midpoint
  Vec2 mid = (a + b) * 0.5;
  return point_in_polygon(mid, poly);
}

Vec2 project_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.dot(ab);
  if (len2 < 1e-18) return a;
  double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + ab * t;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  return distance(p, project_to_segment(p, a, b));
}

Vec2 point_along(const Polyline& pl, double s) {
  if (pl.empty()) return {};
  if (s <= 0.0) return pl.front();
  for (size_t i = 1; i < pl.size(); ++i) {
    double seg = distance(pl[i - 1], pl[i]);
    if (s <= seg) {
      if (seg < 1e-15) return pl[i];
      double t = s / seg;
      return pl[i - 1] + (pl[i] - pl[i - 1]) * t;
    }
    s -= seg;
  }
  return pl.back();
}

bool polygon_is_simple(const Polygon& poly) {
  const size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      // skip adjacent edges (share a vertex)
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
        return false;
    }
  }
  return true;
}

double normalize_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

}  // namespace ocs
