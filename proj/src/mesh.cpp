#include "fddlm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fddlm {

DomainSpec DomainSpec::rectangle(Point2 lower, Point2 upper, int nx, int ny) {
  DomainSpec s;
  s.kind = DomainKind::rectangle;
  s.lower = lower;
  s.upper = upper;
  s.cells_x = nx;
  s.cells_y = ny;
  return s;
}

DomainSpec DomainSpec::square_patch(Point2 lower, Point2 upper, int n) {
  DomainSpec s = rectangle(lower, upper, n, n);
  s.kind = DomainKind::square_patch;
  return s;
}

DomainSpec DomainSpec::lshape(Point2 lower, Point2 upper, Point2 notch_lower, int n) {
  DomainSpec s = rectangle(lower, upper, n, n);
  s.kind = DomainKind::lshape;
  s.notch_lower = notch_lower;
  return s;
}

DomainSpec DomainSpec::disk(Point2 center, double radius, int resolution) {
  DomainSpec s;
  s.kind = DomainKind::disk;
  s.center = center;
  s.radius = radius;
  s.cells_x = s.cells_y = resolution;
  s.lower = {center.x - radius, center.y - radius};
  s.upper = {center.x + radius, center.y + radius};
  return s;
}

DomainSpec DomainSpec::flower(Point2 center, double radius, double amplitude, int lobes,
                              int resolution) {
  DomainSpec s = disk(center, radius, resolution);
  s.kind = DomainKind::flower;
  s.amplitude = amplitude;
  s.lobes = lobes;
  const double r = radius * (1.0 + std::abs(amplitude));
  s.lower = {center.x - r, center.y - r};
  s.upper = {center.x + r, center.y + r};
  return s;
}

double DomainSpec::area() const {
  switch (kind) {
    case DomainKind::rectangle:
    case DomainKind::square_patch:
      return (upper.x - lower.x) * (upper.y - lower.y);
    case DomainKind::lshape:
      return (upper.x - lower.x) * (upper.y - lower.y) -
             (upper.x - notch_lower.x) * (upper.y - notch_lower.y);
    case DomainKind::disk:
      return std::numbers::pi * radius * radius;
    case DomainKind::flower:
      // (1/2) int_0^{2pi} r^2 dt with r = R (1 + a cos(k t)), k >= 1.
      return std::numbers::pi * radius * radius * (1.0 + 0.5 * amplitude * amplitude);
  }
  return 0.0;
}

double DomainSpec::boundary_radius(double theta) const {
  if (kind == DomainKind::flower) return radius * (1.0 + amplitude * std::cos(lobes * theta));
  return radius;
}

void DomainSpec::validate() const {
  if (cells_x < 1 || cells_y < 1)
    throw std::invalid_argument("domain: cell counts must be positive");
  switch (kind) {
    case DomainKind::rectangle:
    case DomainKind::square_patch:
      if (!(upper.x > lower.x && upper.y > lower.y))
        throw std::invalid_argument("domain: empty or inverted rectangle");
      break;
    case DomainKind::lshape: {
      if (!(upper.x > lower.x && upper.y > lower.y))
        throw std::invalid_argument("domain: empty or inverted L-shape bounding box");
      if (!(notch_lower.x > lower.x && notch_lower.x < upper.x && notch_lower.y > lower.y &&
            notch_lower.y < upper.y))
        throw std::invalid_argument("domain: L-shape notch must lie strictly inside the box");
      const double fx = (notch_lower.x - lower.x) / (upper.x - lower.x) * cells_x;
      const double fy = (notch_lower.y - lower.y) / (upper.y - lower.y) * cells_y;
      if (std::abs(fx - std::round(fx)) > 1e-9 || std::abs(fy - std::round(fy)) > 1e-9)
        throw std::invalid_argument("domain: L-shape notch does not align with the grid");
      break;
    }
    case DomainKind::disk:
    case DomainKind::flower:
      if (!(radius > 0.0)) throw std::invalid_argument("domain: radius must be positive");
      if (!(std::abs(amplitude) < 0.5))
        throw std::invalid_argument("domain: flower amplitude must be below 0.5");
      break;
  }
}

std::array<Point2, 4> QuadMesh::cell_vertices(std::size_t c) const {
  const auto& ids = cells.at(c);
  return {nodes[ids[0]], nodes[ids[1]], nodes[ids[2]], nodes[ids[3]]};
}

ConvexPolygon cell_polygon(const QuadMesh& m, std::size_t cell) {
  if (cell >= m.num_cells())
    throw std::out_of_range("cell " + std::to_string(cell) + " out of range");
  const auto v = m.cell_vertices(cell);
  return ConvexPolygon{{v.begin(), v.end()}};
}

double cell_diameter(const QuadMesh& m, std::size_t cell) {
  const auto v = m.cell_vertices(cell);
  return std::max(distance(v[0], v[2]), distance(v[1], v[3]));
}

double cell_area(const QuadMesh& m, std::size_t cell) { return signed_area(cell_polygon(m, cell)); }

double total_area(const QuadMesh& m) {
  double a = 0.0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) a += cell_area(m, c);
  return a;
}

MeshEdges build_edges(const QuadMesh& m) {
  MeshEdges e;
  std::map<std::pair<int, int>, int> ids;
  e.cell_edges.resize(m.num_cells());
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    for (int k = 0; k < 4; ++k) {
      int a = m.cells[c][k];
      int b = m.cells[c][(k + 1) % 4];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = ids.try_emplace({a, b}, static_cast<int>(e.nodes.size()));
      if (inserted) {
        e.nodes.push_back({a, b});
        e.cell_count.push_back(0);
      }
      e.cell_edges[c][k] = it->second;
      ++e.cell_count[it->second];
    }
  }
  return e;
}

void finalize_mesh(QuadMesh& m) {
  const auto edges = build_edges(m);
  std::vector<char> on_boundary(m.num_nodes(), 0);
  for (std::size_t k = 0; k < edges.nodes.size(); ++k) {
    if (edges.cell_count[k] == 1) {
      on_boundary[edges.nodes[k][0]] = 1;
      on_boundary[edges.nodes[k][1]] = 1;
    }
  }
  m.boundary_nodes.clear();
  for (std::size_t i = 0; i < m.num_nodes(); ++i)
    if (on_boundary[i]) m.boundary_nodes.push_back(static_cast<int>(i));
  m.h = 0.0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) m.h = std::max(m.h, cell_diameter(m, c));
}

namespace {

// Accumulates nodes, merging points that coincide up to rounding.
class NodeMerger {
 public:
  explicit NodeMerger(double scale) : inv_tol_(1e9 / scale) {}

  int add(Point2 p, std::vector<Point2>& nodes) {
    const std::pair<long long, long long> key{std::llround(p.x * inv_tol_),
                                              std::llround(p.y * inv_tol_)};
    auto [it, inserted] = index_.try_emplace(key, static_cast<int>(nodes.size()));
    if (inserted) nodes.push_back(p);
    return it->second;
  }

 private:
  double inv_tol_;
  std::map<std::pair<long long, long long>, int> index_;
};

void add_cell(QuadMesh& m, std::array<int, 4> ids) {
  ConvexPolygon poly{{m.nodes[ids[0]], m.nodes[ids[1]], m.nodes[ids[2]], m.nodes[ids[3]]}};
  if (signed_area(poly) < 0.0) std::swap(ids[1], ids[3]);
  m.cells.push_back(ids);
}

QuadMesh structured_grid(const DomainSpec& s, int nx, int ny, bool drop_notch) {
  QuadMesh m;
  const double dx = (s.upper.x - s.lower.x) / nx;
  const double dy = (s.upper.y - s.lower.y) / ny;
  std::vector<int> id((nx + 1) * (ny + 1), -1);
  auto in_notch = [&](int i, int j) {
    const double cx = s.lower.x + (i + 0.5) * dx;
    const double cy = s.lower.y + (j + 0.5) * dy;
    return drop_notch && cx > s.notch_lower.x && cy > s.notch_lower.y;
  };
  auto node = [&](int i, int j) {
    int& slot = id[j * (nx + 1) + i];
    if (slot < 0) {
      slot = static_cast<int>(m.nodes.size());
      const double x = (i == nx) ? s.upper.x : s.lower.x + i * dx;
      const double y = (j == ny) ? s.upper.y : s.lower.y + j * dy;
      m.nodes.push_back({x, y});
    }
    return slot;
  };
  // Number nodes row by row so the ordering is independent of cell removal.
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const bool used = (i > 0 && j > 0 && !in_notch(i - 1, j - 1)) ||
                        (i < nx && j > 0 && !in_notch(i, j - 1)) ||
                        (i > 0 && j < ny && !in_notch(i - 1, j)) ||
                        (i < nx && j < ny && !in_notch(i, j));
      if (used) node(i, j);
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (in_notch(i, j)) continue;
      m.cells.push_back({node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)});
    }
  return m;
}

// Five-block disk of radius R centred at the origin with resolution r.
QuadMesh five_block_disk(double R, int r) {
  QuadMesh m;
  NodeMerger merger(R);
  const double s = 0.5 * R;
  const int nt = 2 * r;

  // Central square block.
  std::vector<int> central((nt + 1) * (nt + 1));
  for (int j = 0; j <= nt; ++j)
    for (int i = 0; i <= nt; ++i) {
      const Point2 p{-s + 2.0 * s * i / nt, -s + 2.0 * s * j / nt};
      central[j * (nt + 1) + i] = merger.add(p, m.nodes);
    }
  for (int j = 0; j < nt; ++j)
    for (int i = 0; i < nt; ++i)
      add_cell(m, {central[j * (nt + 1) + i], central[j * (nt + 1) + i + 1],
                   central[(j + 1) * (nt + 1) + i + 1], central[(j + 1) * (nt + 1) + i]});

  // Outer blocks: linear blend between a square side and a quarter arc.
  for (int q = 0; q < 4; ++q) {
    const double rot = q * 0.5 * std::numbers::pi;
    auto rotate = [&](Point2 p) {
      if (q == 0) return p;
      if (q == 1) return Point2{-p.y, p.x};
      if (q == 2) return Point2{-p.x, -p.y};
      return Point2{p.y, -p.x};
    };
    std::vector<int> ids((nt + 1) * (r + 1));
    for (int j = 0; j <= r; ++j) {
      const double eta = static_cast<double>(j) / r;
      for (int i = 0; i <= nt; ++i) {
        const double xi = static_cast<double>(i) / nt;
        const Point2 inner{s, -s + 2.0 * s * xi};
        const double theta = -0.25 * std::numbers::pi + 0.5 * std::numbers::pi * xi;
        Point2 p;
        if (j == 0) {
          p = rotate(inner);
        } else if (j == r) {
          // Evaluate the arc point directly in the rotated frame so boundary
          // nodes lie on the circle to rounding.
          const double t = theta + rot;
          p = {R * std::cos(t), R * std::sin(t)};
        } else {
          const Point2 outer{R * std::cos(theta), R * std::sin(theta)};
          p = rotate((1.0 - eta) * inner + eta * outer);
        }
        ids[j * (nt + 1) + i] = merger.add(p, m.nodes);
      }
    }
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < nt; ++i)
        add_cell(m, {ids[j * (nt + 1) + i], ids[j * (nt + 1) + i + 1],
                     ids[(j + 1) * (nt + 1) + i + 1], ids[(j + 1) * (nt + 1) + i]});
  }
  return m;
}

}  // namespace

QuadMesh build_mesh(const DomainSpec& spec, int level) {
  if (level < 0) throw std::invalid_argument("build_mesh: level must be nonnegative");
  spec.validate();
  const int scale = 1 << level;
  QuadMesh m;
  switch (spec.kind) {
    case DomainKind::rectangle:
    case DomainKind::square_patch:
      m = structured_grid(spec, spec.cells_x * scale, spec.cells_y * scale, false);
      break;
    case DomainKind::lshape:
      m = structured_grid(spec, spec.cells_x * scale, spec.cells_y * scale, true);
      break;
    case DomainKind::disk:
    case DomainKind::flower: {
      // Refine the coarse layout hierarchically on the reference circle, then
      // map to the actual boundary curve.
      m = five_block_disk(spec.radius, spec.cells_x);
      m.domain = DomainSpec::disk({0.0, 0.0}, spec.radius, spec.cells_x);
      for (int k = 0; k < level; ++k) m = refine_uniform(m);
      for (auto& p : m.nodes) {
        if (spec.kind == DomainKind::flower) {
          const double rho = norm(p);
          if (rho > 0.0) {
            const double theta = std::atan2(p.y, p.x);
            p = (spec.boundary_radius(theta) / spec.radius) * p;
          }
        }
        p = p + spec.center;
      }
      break;
    }
  }
  m.domain = spec;
  finalize_mesh(m);
  return m;
}

QuadMesh refine_uniform(const QuadMesh& m) {
  QuadMesh out;
  out.domain = m.domain;
  out.nodes = m.nodes;
  const auto edges = build_edges(m);
  const bool curved = m.domain && m.domain->curved();

  std::vector<int> edge_mid(edges.nodes.size());
  for (std::size_t k = 0; k < edges.nodes.size(); ++k) {
    const Point2 a = m.nodes[edges.nodes[k][0]];
    const Point2 b = m.nodes[edges.nodes[k][1]];
    Point2 mid = 0.5 * (a + b);
    if (curved && edges.cell_count[k] == 1) {
      const Point2 d = mid - m.domain->center;
      const double theta = std::atan2(d.y, d.x);
      const double r = m.domain->boundary_radius(theta);
      mid = m.domain->center + Point2{r * std::cos(theta), r * std::sin(theta)};
    }
    edge_mid[k] = static_cast<int>(out.nodes.size());
    out.nodes.push_back(mid);
  }
  out.cells.reserve(4 * m.num_cells());
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto& v = m.cells[c];
    const auto& e = edges.cell_edges[c];
    const auto verts = m.cell_vertices(c);
    const int center = static_cast<int>(out.nodes.size());
    // Coons patch center: the vertex average unless a boundary edge midpoint
    // was moved onto the curve.
    Point2 mids{0.0, 0.0};
    for (int k = 0; k < 4; ++k) mids = mids + out.nodes[edge_mid[e[k]]];
    out.nodes.push_back(0.5 * mids - 0.25 * (verts[0] + verts[1] + verts[2] + verts[3]));
    out.cells.push_back({v[0], edge_mid[e[0]], center, edge_mid[e[3]]});
    out.cells.push_back({edge_mid[e[0]], v[1], edge_mid[e[1]], center});
    out.cells.push_back({center, edge_mid[e[1]], v[2], edge_mid[e[2]]});
    out.cells.push_back({edge_mid[e[3]], center, edge_mid[e[2]], v[3]});
  }
  finalize_mesh(out);
  return out;
}

CellLocator::CellLocator(const QuadMesh& mesh) : mesh_(&mesh) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  box_ = {{inf, inf}, {-inf, -inf}};
  cell_boxes_.reserve(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto b = cell_polygon(mesh, c).bounds();
    cell_boxes_.push_back(b);
    box_.lower.x = std::min(box_.lower.x, b.lower.x);
    box_.lower.y = std::min(box_.lower.y, b.lower.y);
    box_.upper.x = std::max(box_.upper.x, b.upper.x);
    box_.upper.y = std::max(box_.upper.y, b.upper.y);
  }
  const int n = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_cells()))));
  nx_ = ny_ = n;
  dx_ = std::max(box_.upper.x - box_.lower.x, 1e-300) / nx_;
  dy_ = std::max(box_.upper.y - box_.lower.y, 1e-300) / ny_;
  bins_.resize(static_cast<std::size_t>(nx_) * ny_);
  for (std::size_t c = 0; c < cell_boxes_.size(); ++c) {
    const auto lo = bin_of(cell_boxes_[c].lower);
    const auto hi = bin_of(cell_boxes_[c].upper);
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int i = lo[0]; i <= hi[0]; ++i) bins_[j * nx_ + i].push_back(static_cast<int>(c));
  }
}

std::array<int, 2> CellLocator::bin_of(Point2 p) const {
  const int i = static_cast<int>(std::floor((p.x - box_.lower.x) / dx_));
  const int j = static_cast<int>(std::floor((p.y - box_.lower.y) / dy_));
  return {std::clamp(i, 0, nx_ - 1), std::clamp(j, 0, ny_ - 1)};
}

std::vector<int> CellLocator::candidates(const BoundingBox& box) const {
  std::vector<int> out;
  if (!box.overlaps(box_)) return out;
  const auto lo = bin_of(box.lower);
  const auto hi = bin_of(box.upper);
  for (int j = lo[1]; j <= hi[1]; ++j)
    for (int i = lo[0]; i <= hi[0]; ++i)
      for (int c : bins_[j * nx_ + i])
        if (cell_boxes_[c].overlaps(box)) out.push_back(c);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<CellLocator::Hit> CellLocator::locate(Point2 p, bool nearest) const {
  constexpr double tol = 1e-10;
  const auto b = bin_of(p);
  if (box_.contains(p, tol * (dx_ + dy_))) {
    for (int c : bins_[b[1] * nx_ + b[0]]) {
      if (!cell_boxes_[c].contains(p, tol * (dx_ + dy_))) continue;
      const auto ref = mesh_->cell_map(c).inverse(p);
      if (ref && ref->x >= -tol && ref->x <= 1.0 + tol && ref->y >= -tol && ref->y <= 1.0 + tol)
        return Hit{c, {std::clamp(ref->x, 0.0, 1.0), std::clamp(ref->y, 0.0, 1.0)}};
    }
  }
  if (!nearest) return std::nullopt;

  Hit best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < mesh_->num_cells(); ++c) {
    const auto map = mesh_->cell_map(c);
    auto ref = map.inverse(p).value_or(Point2{0.5, 0.5});
    ref = {std::clamp(ref.x, 0.0, 1.0), std::clamp(ref.y, 0.0, 1.0)};
    const double d = distance(map.map(ref), p);
    if (d < best_dist) {
      best_dist = d;
      best = Hit{static_cast<int>(c), ref};
    }
  }
  return best;
}

}  // namespace fddlm
