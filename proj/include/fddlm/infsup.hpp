#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "fddlm/coupling.hpp"
#include "fddlm/space.hpp"

namespace fddlm {

struct NormMatrices {
  SparseMatrix N1;  // P0 mass matrix, diag(|K_i|)
  SparseMatrix N2;  // H1 matrix of the immersed space: stiffness + mass
};

NormMatrices build_norm_matrices(const FeSpace& v2_space, const FeSpace& lambda_space);

/// Discrete inf-sup estimate from the pencil
///
///   C2^T (h2^2 N1)^{-1} C2 v = sigma N2 v
///
/// solved densely. The operator on the left has rank at most m = rows(C2), so
/// n2 - m eigenvalues vanish by construction; the statistic is the square
/// root of the m-th largest eigenvalue.
double infsup_constant(const SparseMatrix& C2, const SparseMatrix& N1, const SparseMatrix& N2,
                       double h2);

/// Same statistic as the smallest singular value of L^{-1} C2^T D^{-1/2},
/// where N2 = L L^T and D = h2^2 N1. Works on an m-by-m matrix and scales to
/// larger immersed meshes than the dense pencil.
double infsup_constant_svd(const SparseMatrix& C2, const SparseMatrix& N1, const SparseMatrix& N2,
                           double h2);

/// Same statistic for meshes beyond dense reach: Lanczos iteration for the
/// largest eigenvalue of (G + delta I)^{-1}, G = D^{-1/2} C2 N2^{-1} C2^T
/// D^{-1/2}, applied through a sparse LDL^T factorisation of the regularised
/// saddle matrix [N2, C2^T D^{-1/2}; D^{-1/2} C2, -delta I].
struct LanczosOptions {
  double delta = 1e-10;
  double tolerance = 1e-9;  // Ritz residual relative to the Ritz value
  int max_iterations = 400;
};
double infsup_constant_lanczos(const SparseMatrix& C2, const SparseMatrix& N1,
                               const SparseMatrix& N2, double h2,
                               const LanczosOptions& options = {});

struct InfSupLevel {
  int level = 0;
  double h2 = 0.0;
  std::size_t dim_v2h = 0;
  std::size_t dim_lh = 0;
  double sigma_min = 0.0;
  double gamma_est = 0.0;
};

enum class InfSupVerdict { stable, degenerating, inconclusive };

struct InfSupReport {
  std::string element;
  std::vector<InfSupLevel> levels;

  /// gamma(finest) / gamma(coarsest).
  double decay_ratio() const;
  bool monotone_decreasing() const;
  /// stable: ratio >= 0.5 over at least 4 levels; degenerating: strictly
  /// decreasing with ratio < 0.5.
  InfSupVerdict verdict() const;
};

std::string_view to_string(InfSupVerdict v);

}  // namespace fddlm
