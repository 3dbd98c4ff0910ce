#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fddlm/element.hpp"
#include "fddlm/mesh.hpp"

namespace fddlm {

using ScalarField = std::function<double(Point2)>;

/// A finite element space on a quadrilateral mesh.
///
/// Global numbering: mesh nodes first (in mesh order), then edge dofs (Q2),
/// then cell-interior dofs (Q2 centers, Q1B bubbles, P0 constants).
class FeSpace {
 public:
  FeSpace(std::shared_ptr<const QuadMesh> mesh, Family family);

  const QuadMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const QuadMesh> mesh_ptr() const { return mesh_; }
  Family family() const { return family_; }
  int dofs_per_cell() const { return num_local_dofs(family_); }
  std::size_t size() const { return ndofs_; }

  std::span<const int> cell_dofs(std::size_t cell) const {
    const auto k = static_cast<std::size_t>(dofs_per_cell());
    return {dof_map_.data() + cell * k, k};
  }
  const std::vector<Point2>& dof_coords() const { return dof_coords_; }

  /// Whether dof i is a nodal (Lagrange) dof; bubble dofs are not.
  bool is_nodal(std::size_t dof) const { return nodal_[dof] != 0; }

  double evaluate(const Eigen::VectorXd& coeffs, std::size_t cell, Point2 ref) const;
  Point2 gradient(const Eigen::VectorXd& coeffs, std::size_t cell, Point2 ref) const;

 private:
  std::shared_ptr<const QuadMesh> mesh_;
  Family family_;
  std::size_t ndofs_ = 0;
  std::vector<int> dof_map_;
  std::vector<Point2> dof_coords_;
  std::vector<char> nodal_;
};

FeSpace build_space(std::shared_ptr<const QuadMesh> mesh, Family family);

/// Nodal interpolant. Bubble coefficients are zero; P0 takes the value at the
/// cell center.
Eigen::VectorXd interpolate(const FeSpace& space, const ScalarField& g);

/// Essential boundary condition on the background space. Values may be
/// nonzero (the trace of a known exact solution).
struct DirichletBC {
  std::vector<int> dofs;       // sorted
  std::vector<double> values;  // same length as dofs
};

/// Constrains every dof on the mesh boundary to g (zero when g is empty).
DirichletBC boundary_condition(const FeSpace& space, const ScalarField& g = {});

/// Evaluates a finite element function at arbitrary points of its mesh.
class FieldEvaluator {
 public:
  FieldEvaluator(const FeSpace& space, Eigen::VectorXd coeffs);

  /// Points outside the mesh use the nearest cell (extrapolation).
  double value(Point2 p) const;
  Point2 gradient(Point2 p) const;

 private:
  const FeSpace* space_;
  Eigen::VectorXd coeffs_;
  CellLocator locator_;
};

}  // namespace fddlm
