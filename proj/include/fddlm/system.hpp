#pragma once

#include <functional>
#include <optional>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "fddlm/coupling.hpp"
#include "fddlm/space.hpp"

namespace fddlm {

/// Discretisation choices for (V_h, V_2h, Lambda_h); the multiplier is P0 in
/// all three.
enum class ElementChoice {
  elm1,    // Q1 - (Q1 + bubble) - P0
  elm2,    // Q2 - Q2 - P0
  q1q1p0,  // Q1 - Q1 - P0, fails the discrete inf-sup test
};

struct ElementFamilies {
  Family background;
  Family immersed;
};

ElementFamilies families(ElementChoice e);
std::string_view to_string(ElementChoice e);
std::optional<ElementChoice> parse_element(std::string_view tag);

/// The saddle-point operator
///
///   [ A1   0   C1^T ] [u ]   [F1]
///   [ 0    A2 -C2^T ] [u2] = [F2]
///   [ C1  -C2  0    ] [l ]   [G ]
///
/// G is zero for the continuous problem; it becomes nonzero only after
/// eliminating nonzero Dirichlet values.
struct BlockSystem {
  SparseMatrix A1, A2, C1, C2;
  Eigen::VectorXd F1, F2, G;

  Eigen::Index n() const { return A1.rows(); }
  Eigen::Index n2() const { return A2.rows(); }
  Eigen::Index m() const { return C1.rows(); }
};

SparseMatrix assemble_stiffness(const FeSpace& space, double coefficient);
SparseMatrix assemble_mass(const FeSpace& space);

/// (beta grad u, grad v) on the background mesh. Throws for beta <= 0.
SparseMatrix assemble_A1(const FeSpace& vh_space, double beta);
/// ((beta2 - beta) grad u2, grad v2) on the immersed mesh. The factor may be
/// negative.
SparseMatrix assemble_A2(const FeSpace& v2_space, double beta, double beta2);

struct LoadVectors {
  Eigen::VectorXd F1;  // (f, v)_Omega
  Eigen::VectorXd F2;  // (f2 - f, v2)_Omega2
};
LoadVectors assemble_rhs(const FeSpace& vh_space, const FeSpace& v2_space, double f, double f2);

SparseMatrix block_matrix(const BlockSystem& sys);
Eigen::VectorXd block_rhs(const BlockSystem& sys);

/// Symmetric elimination of the background Dirichlet dofs: constrained rows
/// and columns of A1 become identity rows, the columns of C1 are dropped and
/// the known values are moved to F1 and G.
BlockSystem apply_dirichlet(BlockSystem sys, const DirichletBC& bc);

struct SolveOptions {
  /// Systems smaller than this use a dense LU.
  Eigen::Index dense_threshold = 2000;
  /// Maximum relative residual of the full block system.
  double tolerance = 1e-10;
  int refinement_steps = 5;
};

struct SolutionTriple {
  Eigen::VectorXd u, u2, lambda;
  double residual = 0.0;             // ||K x - b|| / ||b|| (absolute when b = 0)
  double constraint_residual = 0.0;  // ||C1 u - C2 u2 - G||_inf
};

/// Eliminates `bc`, then solves the block system with a pivoting LU. Throws
/// std::runtime_error on a singular factorisation or when the residual is
/// above the tolerance.
SolutionTriple solve_saddle(const BlockSystem& sys, const DirichletBC& bc,
                            const SolveOptions& options = {});

/// A field given by its value and gradient at a point.
struct AnalyticField {
  ScalarField value;
  std::function<Point2(Point2)> gradient;
};

/// Reference (exact or fine-level) solution. The background error is split
/// along the immersed mesh: u_outer is used outside the immersed mesh and
/// u_inner inside it.
struct ReferenceSolution {
  AnalyticField u_outer;
  AnalyticField u_inner;
  AnalyticField u2;
};

struct ErrorNorms {
  double l2_u = 0.0;
  double h1_u = 0.0;   // |u - u_h|_{1, Omega}
  double l2_u2 = 0.0;
  double h1_u2 = 0.0;  // ||u2 - u2_h||_{1, Omega2}
};

ErrorNorms error_norms(const SolutionTriple& sol, const FeSpace& vh_space,
                       const FeSpace& v2_space, const CouplingTable& table,
                       const ReferenceSolution& reference);

/// sum_i lambda_i |K_i|, the discrete pairing of the multiplier with 1.
double multiplier_integral(const Eigen::VectorXd& lambda, const QuadMesh& immersed);

/// h2 * || lambda_h - P lambda_ref ||_{0, Omega2}, where P averages the
/// reference multiplier (on a finer immersed mesh) over the coarse cells.
double multiplier_error(const Eigen::VectorXd& lambda_h, const QuadMesh& coarse,
                        const Eigen::VectorXd& lambda_ref, const QuadMesh& fine);

}  // namespace fddlm
