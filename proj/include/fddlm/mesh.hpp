#pragma once

#include <array>
#include <optional>
#include <vector>

#include "fddlm/element.hpp"
#include "fddlm/geometry.hpp"

namespace fddlm {

enum class DomainKind { rectangle, square_patch, lshape, disk, flower };

/// Geometry and level-0 resolution of a meshed domain.
///
/// rectangle / square_patch: [lower, upper], cells_x by cells_y cells.
/// lshape: [lower, upper] minus the notch [notch_lower, upper]; the notch must
///         align with the grid of cells_x by cells_y cells.
/// disk / flower: center, radius; boundary radius r(t) = radius (1 + amplitude
///         cos(lobes t)). Five-block layout with resolution `cells_x` (the
///         central block has 2 cells_x cells per side, the four outer blocks
///         2 cells_x tangential by cells_x radial).
struct DomainSpec {
  DomainKind kind = DomainKind::rectangle;
  Point2 lower{0.0, 0.0};
  Point2 upper{1.0, 1.0};
  Point2 notch_lower{0.5, 0.5};
  Point2 center{0.0, 0.0};
  double radius = 1.0;
  double amplitude = 0.0;
  int lobes = 0;
  int cells_x = 1;
  int cells_y = 1;

  static DomainSpec rectangle(Point2 lower, Point2 upper, int nx, int ny);
  static DomainSpec square_patch(Point2 lower, Point2 upper, int n);
  static DomainSpec lshape(Point2 lower, Point2 upper, Point2 notch_lower, int n);
  static DomainSpec disk(Point2 center, double radius, int resolution);
  static DomainSpec flower(Point2 center, double radius, double amplitude, int lobes,
                           int resolution);

  bool curved() const { return kind == DomainKind::disk || kind == DomainKind::flower; }
  /// Exact area of the domain.
  double area() const;
  /// Radius of the curved boundary in direction `theta` (curved kinds only).
  double boundary_radius(double theta) const;
  /// Throws std::invalid_argument for empty or inverted domains.
  void validate() const;
};

struct QuadMesh {
  std::vector<Point2> nodes;
  std::vector<std::array<int, 4>> cells;  // counterclockwise node indices
  std::vector<int> boundary_nodes;        // sorted
  double h = 0.0;                         // max cell diagonal
  std::optional<DomainSpec> domain;       // used to project refined boundary nodes

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_cells() const { return cells.size(); }
  std::array<Point2, 4> cell_vertices(std::size_t c) const;
  CellMap cell_map(std::size_t c) const { return CellMap(cell_vertices(c)); }
};

/// Unique undirected edges of a mesh, numbered in first-visit order over
/// cells, with per-cell local edge ids (edge k joins local vertices k, k+1).
struct MeshEdges {
  std::vector<std::array<int, 2>> nodes;        // sorted node pair
  std::vector<std::array<int, 4>> cell_edges;
  std::vector<int> cell_count;                  // incident cells per edge
};

MeshEdges build_edges(const QuadMesh& m);

QuadMesh build_mesh(const DomainSpec& spec, int level);

/// Splits every cell into four through edge midpoints and the cell center.
/// On curved domains, new boundary nodes are projected radially onto the
/// exact boundary curve.
QuadMesh refine_uniform(const QuadMesh& m);

ConvexPolygon cell_polygon(const QuadMesh& m, std::size_t cell);
double cell_diameter(const QuadMesh& m, std::size_t cell);
double cell_area(const QuadMesh& m, std::size_t cell);
double total_area(const QuadMesh& m);

/// Recomputes boundary_nodes (nodes on edges with a single incident cell)
/// and h.
void finalize_mesh(QuadMesh& m);

/// Uniform-grid bucket index over the cells of a mesh.
class CellLocator {
 public:
  explicit CellLocator(const QuadMesh& mesh);

  /// Cells whose bounding boxes overlap `box`, in ascending order.
  std::vector<int> candidates(const BoundingBox& box) const;

  struct Hit {
    int cell = -1;
    Point2 ref{};
  };
  /// Finds the cell containing `p` and the reference coordinates of `p` in it.
  /// With `nearest`, points outside the mesh fall back to the closest cell and
  /// reference coordinates clamped to [0,1]^2.
  std::optional<Hit> locate(Point2 p, bool nearest = false) const;

  const QuadMesh& mesh() const { return *mesh_; }

 private:
  std::array<int, 2> bin_of(Point2 p) const;

  const QuadMesh* mesh_;
  BoundingBox box_;
  int nx_ = 1, ny_ = 1;
  double dx_ = 1.0, dy_ = 1.0;
  std::vector<BoundingBox> cell_boxes_;
  std::vector<std::vector<int>> bins_;
};

}  // namespace fddlm
