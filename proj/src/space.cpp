#include "fddlm/space.hpp"

#include <algorithm>
#include <stdexcept>

namespace fddlm {

FeSpace::FeSpace(std::shared_ptr<const QuadMesh> mesh, Family family)
    : mesh_(std::move(mesh)), family_(family) {
  if (!mesh_) throw std::invalid_argument("FeSpace: null mesh");
  const auto& m = *mesh_;
  const std::size_t nc = m.num_cells();
  const std::size_t nn = m.num_nodes();
  const int k = dofs_per_cell();
  dof_map_.assign(nc * k, -1);

  auto cell_center = [&](std::size_t c) {
    const auto v = m.cell_vertices(c);
    return 0.25 * (v[0] + v[1] + v[2] + v[3]);
  };

  switch (family_) {
    case Family::P0:
      ndofs_ = nc;
      for (std::size_t c = 0; c < nc; ++c) {
        dof_map_[c] = static_cast<int>(c);
        dof_coords_.push_back(cell_center(c));
        nodal_.push_back(1);
      }
      break;
    case Family::Q1:
    case Family::Q1B:
      dof_coords_ = m.nodes;
      nodal_.assign(nn, 1);
      for (std::size_t c = 0; c < nc; ++c)
        for (int i = 0; i < 4; ++i) dof_map_[c * k + i] = m.cells[c][i];
      ndofs_ = nn;
      if (family_ == Family::Q1B) {
        for (std::size_t c = 0; c < nc; ++c) {
          dof_map_[c * k + 4] = static_cast<int>(nn + c);
          dof_coords_.push_back(cell_center(c));
          nodal_.push_back(0);
        }
        ndofs_ += nc;
      }
      break;
    case Family::Q2: {
      const auto edges = build_edges(m);
      const std::size_t ne = edges.nodes.size();
      dof_coords_ = m.nodes;
      for (const auto& e : edges.nodes)
        dof_coords_.push_back(0.5 * (m.nodes[e[0]] + m.nodes[e[1]]));
      for (std::size_t c = 0; c < nc; ++c) dof_coords_.push_back(cell_center(c));
      nodal_.assign(nn + ne + nc, 1);
      for (std::size_t c = 0; c < nc; ++c) {
        for (int i = 0; i < 4; ++i) dof_map_[c * k + i] = m.cells[c][i];
        for (int e = 0; e < 4; ++e)
          dof_map_[c * k + 4 + e] = static_cast<int>(nn + edges.cell_edges[c][e]);
        dof_map_[c * k + 8] = static_cast<int>(nn + ne + c);
      }
      ndofs_ = nn + ne + nc;
      break;
    }
  }
}

double FeSpace::evaluate(const Eigen::VectorXd& coeffs, std::size_t cell, Point2 ref) const {
  const auto dofs = cell_dofs(cell);
  double v = 0.0;
  for (int i = 0; i < dofs_per_cell(); ++i) v += coeffs[dofs[i]] * eval_basis(family_, i, ref);
  return v;
}

Point2 FeSpace::gradient(const Eigen::VectorXd& coeffs, std::size_t cell, Point2 ref) const {
  const auto dofs = cell_dofs(cell);
  Point2 g{};
  for (int i = 0; i < dofs_per_cell(); ++i) g = g + coeffs[dofs[i]] * eval_grad(family_, i, ref);
  return mesh_->cell_map(cell).physical_gradient(ref, g);
}

FeSpace build_space(std::shared_ptr<const QuadMesh> mesh, Family family) {
  return FeSpace(std::move(mesh), family);
}

Eigen::VectorXd interpolate(const FeSpace& space, const ScalarField& g) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
  const auto& coords = space.dof_coords();
  for (std::size_t i = 0; i < space.size(); ++i)
    if (space.is_nodal(i)) out[static_cast<Eigen::Index>(i)] = g(coords[i]);
  return out;
}

DirichletBC boundary_condition(const FeSpace& space, const ScalarField& g) {
  if (space.family() == Family::P0)
    throw std::invalid_argument("boundary_condition: P0 spaces carry no boundary dofs");
  const auto& m = space.mesh();
  DirichletBC bc;
  bc.dofs = m.boundary_nodes;
  if (space.family() == Family::Q2) {
    const auto edges = build_edges(m);
    for (std::size_t e = 0; e < edges.nodes.size(); ++e)
      if (edges.cell_count[e] == 1) bc.dofs.push_back(static_cast<int>(m.num_nodes() + e));
  }
  std::sort(bc.dofs.begin(), bc.dofs.end());
  bc.values.reserve(bc.dofs.size());
  for (int d : bc.dofs) bc.values.push_back(g ? g(space.dof_coords()[d]) : 0.0);
  return bc;
}

FieldEvaluator::FieldEvaluator(const FeSpace& space, Eigen::VectorXd coeffs)
    : space_(&space), coeffs_(std::move(coeffs)), locator_(space.mesh()) {
  if (static_cast<std::size_t>(coeffs_.size()) != space.size())
    throw std::invalid_argument("FieldEvaluator: coefficient vector does not match the space");
}

double FieldEvaluator::value(Point2 p) const {
  const auto hit = locator_.locate(p, true);
  return space_->evaluate(coeffs_, static_cast<std::size_t>(hit->cell), hit->ref);
}

Point2 FieldEvaluator::gradient(Point2 p) const {
  const auto hit = locator_.locate(p, true);
  return space_->gradient(coeffs_, static_cast<std::size_t>(hit->cell), hit->ref);
}

}  // namespace fddlm
