#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

namespace fddlm {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

struct BoundingBox {
  Point2 lower{};
  Point2 upper{};

  bool overlaps(const BoundingBox& other) const {
    return lower.x <= other.upper.x && other.lower.x <= upper.x &&
           lower.y <= other.upper.y && other.lower.y <= upper.y;
  }
  bool contains(Point2 p, double tol = 0.0) const {
    return p.x >= lower.x - tol && p.x <= upper.x + tol && p.y >= lower.y - tol &&
           p.y <= upper.y + tol;
  }
};

/// Convex polygon with counterclockwise vertex order.
struct ConvexPolygon {
  std::vector<Point2> vertices;

  std::size_t size() const { return vertices.size(); }
  BoundingBox bounds() const;
};

struct Triangle {
  std::array<Point2, 3> v;

  double signed_area() const { return 0.5 * cross(v[1] - v[0], v[2] - v[0]); }
  /// Maps barycentric-style reference coordinates of the unit triangle
  /// (0,0),(1,0),(0,1) onto this triangle.
  Point2 map(Point2 ref) const {
    return v[0] + ref.x * (v[1] - v[0]) + ref.y * (v[2] - v[0]);
  }
};

/// Shoelace signed area. Positive for counterclockwise input, 0 for fewer
/// than three vertices.
double signed_area(const ConvexPolygon& p);

/// Vertex average; lies inside any convex polygon.
Point2 vertex_centroid(const ConvexPolygon& p);

/// True when the polygon is counterclockwise and convex up to a tolerance
/// relative to its size.
bool is_convex_ccw(const ConvexPolygon& p, double rel_tol = 1e-12);

/// Sutherland-Hodgman intersection of two convex counterclockwise polygons.
/// Returns nullopt when the overlap has area below 1e-12 * area(subject).
std::optional<ConvexPolygon> clip_convex(const ConvexPolygon& subject,
                                         const ConvexPolygon& clipper);

/// Splits a convex polygon into triangles fanning from its vertex centroid.
/// Degenerate (zero-area) triangles from repeated vertices are dropped.
std::vector<Triangle> fan_triangulate(const ConvexPolygon& p);

}  // namespace fddlm
