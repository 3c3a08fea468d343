#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace ocs {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2& o) const = default;

  double norm() const { return std::hypot(x, y); }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
};

inline double distance(const Vec2& a, const Vec2& b) { return (b - a).norm(); }

using Polygon = std::vector<Vec2>;   // closed implicitly, no repeated last point
using Polyline = std::vector<Vec2>;

double polyline_length(const Polyline& pl);

// Point strictly inside the polygon. Boundary points count as outside.
bool point_in_polygon(const Vec2& p, const Polygon& poly);

// Proper segment/segment crossing (interiors intersect).
bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

// True if the open segment a-b passes through the polygon interior.
bool segment_intersects_polygon(const Vec2& a, const Vec2& b, const Polygon& poly);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

// Closest point on segment a-b to p.
Vec2 project_to_segment(const Vec2& p, const Vec2& a, const Vec2& b);

// Point at arc-length s along a polyline (clamped to ends).
Vec2 point_along(const Polyline& pl, double s);

// True if the polygon has no self-intersecting edges.
bool polygon_is_simple(const Polygon& poly);

double normalize_angle(double a);   // wraps into (-pi, pi]

}  // namespace ocs
