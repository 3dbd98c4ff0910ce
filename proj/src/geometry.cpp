#include "fddlm/geometry.hpp"

#include <algorithm>
#include <limits>

namespace fddlm {

BoundingBox ConvexPolygon::bounds() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  BoundingBox box{{inf, inf}, {-inf, -inf}};
  for (const auto& p : vertices) {
    box.lower.x = std::min(box.lower.x, p.x);
    box.lower.y = std::min(box.lower.y, p.y);
    box.upper.x = std::max(box.upper.x, p.x);
    box.upper.y = std::max(box.upper.y, p.y);
  }
  return box;
}

double signed_area(const ConvexPolygon& p) {
  const auto n = p.vertices.size();
  if (n < 3) return 0.0;
  // Shifting by the first vertex reduces cancellation for polygons far from
  // the origin.
  const Point2 o = p.vertices[0];
  double twice = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i)
    twice += cross(p.vertices[i] - o, p.vertices[i + 1] - o);
  return 0.5 * twice;
}

Point2 vertex_centroid(const ConvexPolygon& p) {
  Point2 c{};
  for (const auto& v : p.vertices) c = c + v;
  return (1.0 / static_cast<double>(p.vertices.size())) * c;
}

bool is_convex_ccw(const ConvexPolygon& p, double rel_tol) {
  const auto n = p.vertices.size();
  if (n < 3 || signed_area(p) <= 0.0) return false;
  const auto box = p.bounds();
  const double scale = std::max(box.upper.x - box.lower.x, box.upper.y - box.lower.y);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 e0 = p.vertices[(i + 1) % n] - p.vertices[i];
    const Point2 e1 = p.vertices[(i + 2) % n] - p.vertices[(i + 1) % n];
    if (cross(e0, e1) < -rel_tol * scale * scale) return false;
  }
  return true;
}

namespace {

// Keeps the part of `poly` on the left of the directed line a->b.
std::vector<Point2> clip_half_plane(const std::vector<Point2>& poly, Point2 a, Point2 b) {
  std::vector<Point2> out;
  const auto n = poly.size();
  if (n == 0) return out;
  out.reserve(n + 2);
  const Point2 dir = b - a;
  auto side = [&](Point2 p) { return cross(dir, p - a); };

  for (std::size_t i = 0; i < n; ++i) {
    const Point2 cur = poly[i];
    const Point2 next = poly[(i + 1) % n];
    const double sc = side(cur);
    const double sn = side(next);
    if (sc >= 0.0) out.push_back(cur);
    if ((sc > 0.0 && sn < 0.0) || (sc < 0.0 && sn > 0.0)) {
      const double t = sc / (sc - sn);
      out.push_back(cur + t * (next - cur));
    }
  }
  return out;
}

void drop_repeated(std::vector<Point2>& pts, double tol) {
  std::vector<Point2> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    if (out.empty() || distance(out.back(), p) > tol) out.push_back(p);
  }
  while (out.size() > 1 && distance(out.front(), out.back()) <= tol) out.pop_back();
  pts = std::move(out);
}

}  // namespace

std::optional<ConvexPolygon> clip_convex(const ConvexPolygon& subject,
                                         const ConvexPolygon& clipper) {
  const double subject_area = signed_area(subject);
  if (subject_area <= 0.0 || clipper.size() < 3) return std::nullopt;
  if (!subject.bounds().overlaps(clipper.bounds())) return std::nullopt;

  std::vector<Point2> poly = subject.vertices;
  const auto m = clipper.size();
  for (std::size_t i = 0; i < m && !poly.empty(); ++i)
    poly = clip_half_plane(poly, clipper.vertices[i], clipper.vertices[(i + 1) % m]);

  const auto box = subject.bounds();
  const double scale = std::max(box.upper.x - box.lower.x, box.upper.y - box.lower.y);
  drop_repeated(poly, 1e-14 * scale);
  if (poly.size() < 3) return std::nullopt;

  ConvexPolygon result{std::move(poly)};
  if (signed_area(result) < 1e-12 * subject_area) return std::nullopt;
  return result;
}

std::vector<Triangle> fan_triangulate(const ConvexPolygon& p) {
  std::vector<Triangle> tris;
  const auto n = p.vertices.size();
  if (n < 3) return tris;
  const Point2 c = vertex_centroid(p);
  tris.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Triangle t{{c, p.vertices[i], p.vertices[(i + 1) % n]}};
    if (t.signed_area() != 0.0) tris.push_back(t);
  }
  return tris;
}

}  // namespace fddlm
