#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "fddlm/geometry.hpp"
#include "fddlm/mesh.hpp"
#include "fddlm/space.hpp"

namespace fddlm {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Piece of an immersed cell lying inside one background cell, with a
/// composite quadrature built on its fan triangulation.
struct Fragment {
  int background_cell = -1;
  ConvexPolygon piece;
  std::vector<Point2> points;      // physical coordinates
  std::vector<Point2> background;  // reference coordinates in the background cell
  std::vector<double> weights;
};

/// Intersection mesh of the immersed mesh against the background mesh.
struct CouplingTable {
  std::vector<std::vector<Fragment>> cells;  // indexed by immersed cell

  std::size_t num_fragments() const;
  double total_area() const;
};

/// Clips every immersed cell against the background cells it overlaps.
/// Fragments of a cell are ordered by background cell index, so results do
/// not depend on `threads`. Throws std::runtime_error naming the first cell
/// whose fragments do not cover it (immersed mesh leaving the background).
CouplingTable build_intersections(const QuadMesh& immersed, const QuadMesh& background,
                                  int threads = 1, int triangle_degree = 4);

/// C1(i, j) = integral over immersed cell K_i of background basis psi_j.
SparseMatrix assemble_C1(const CouplingTable& table, const FeSpace& lambda_space,
                         const FeSpace& vh_space);

/// C2(i, j) = integral over immersed cell K_i of immersed basis phi_j.
SparseMatrix assemble_C2(const FeSpace& lambda_space, const FeSpace& v2_space);

}  // namespace fddlm
