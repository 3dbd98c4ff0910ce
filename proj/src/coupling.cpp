#include "fddlm/coupling.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fddlm/parallel.hpp"

namespace fddlm {

std::size_t CouplingTable::num_fragments() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.size();
  return n;
}

double CouplingTable::total_area() const {
  double a = 0.0;
  for (const auto& c : cells)
    for (const auto& f : c) a += signed_area(f.piece);
  return a;
}

CouplingTable build_intersections(const QuadMesh& immersed, const QuadMesh& background,
                                  int threads, int triangle_degree) {
  const CellLocator locator(background);
  const QuadratureRule rule = gauss_triangle(triangle_degree);
  CouplingTable table;
  table.cells.resize(immersed.num_cells());

  parallel_for(immersed.num_cells(), threads, [&](std::size_t i) {
    const ConvexPolygon cell = cell_polygon(immersed, i);
    const double area = signed_area(cell);
    double covered = 0.0;
    auto& fragments = table.cells[i];
    for (int b : locator.candidates(cell.bounds())) {
      auto piece = clip_convex(cell, cell_polygon(background, static_cast<std::size_t>(b)));
      if (!piece) continue;
      Fragment f;
      f.background_cell = b;
      const CellMap map = background.cell_map(static_cast<std::size_t>(b));
      for (const auto& tri : fan_triangulate(*piece)) {
        const double jac = 2.0 * tri.signed_area();
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const Point2 x = tri.map(rule.points[q]);
          const auto ref = map.inverse(x);
          if (!ref)
            throw std::runtime_error("build_intersections: cannot invert background cell " +
                                     std::to_string(b));
          f.points.push_back(x);
          f.background.push_back(*ref);
          f.weights.push_back(jac * rule.weights[q]);
        }
      }
      covered += signed_area(*piece);
      f.piece = std::move(*piece);
      fragments.push_back(std::move(f));
    }
    if (std::abs(covered - area) > 1e-10 * area)
      throw std::runtime_error("build_intersections: immersed cell " + std::to_string(i) +
                               " is not covered by the background mesh (covered " +
                               std::to_string(covered) + " of " + std::to_string(area) + ")");
  });
  return table;
}

SparseMatrix assemble_C1(const CouplingTable& table, const FeSpace& lambda_space,
                         const FeSpace& vh_space) {
  if (lambda_space.family() != Family::P0)
    throw std::invalid_argument("assemble_C1: multiplier space must be P0");
  if (table.cells.size() != lambda_space.size())
    throw std::invalid_argument("assemble_C1: coupling table does not match the multiplier space");
  const Family fam = vh_space.family();
  const int k = vh_space.dofs_per_cell();
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < table.cells.size(); ++i) {
    const int row = lambda_space.cell_dofs(i)[0];
    for (const auto& f : table.cells[i]) {
      const auto dofs = vh_space.cell_dofs(static_cast<std::size_t>(f.background_cell));
      for (int a = 0; a < k; ++a) {
        double v = 0.0;
        for (std::size_t q = 0; q < f.weights.size(); ++q)
          v += f.weights[q] * eval_basis(fam, a, f.background[q]);
        triplets.emplace_back(row, dofs[a], v);
      }
    }
  }
  SparseMatrix c1(static_cast<Eigen::Index>(lambda_space.size()),
                  static_cast<Eigen::Index>(vh_space.size()));
  c1.setFromTriplets(triplets.begin(), triplets.end());
  c1.makeCompressed();
  return c1;
}

SparseMatrix assemble_C2(const FeSpace& lambda_space, const FeSpace& v2_space) {
  if (lambda_space.family() != Family::P0)
    throw std::invalid_argument("assemble_C2: multiplier space must be P0");
  if (lambda_space.mesh().num_cells() != v2_space.mesh().num_cells())
    throw std::invalid_argument("assemble_C2: spaces must live on the same mesh");
  const auto& mesh = v2_space.mesh();
  const Family fam = v2_space.family();
  const int k = v2_space.dofs_per_cell();
  const QuadratureRule rule = gauss_square(3);
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellMap map = mesh.cell_map(c);
    const int row = lambda_space.cell_dofs(c)[0];
    const auto dofs = v2_space.cell_dofs(c);
    for (int a = 0; a < k; ++a) {
      double v = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q)
        v += rule.weights[q] * map.det(rule.points[q]) * eval_basis(fam, a, rule.points[q]);
      triplets.emplace_back(row, dofs[a], v);
    }
  }
  SparseMatrix c2(static_cast<Eigen::Index>(lambda_space.size()),
                  static_cast<Eigen::Index>(v2_space.size()));
  c2.setFromTriplets(triplets.begin(), triplets.end());
  c2.makeCompressed();
  return c2;
}

}  // namespace fddlm
