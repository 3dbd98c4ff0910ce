#include "fddlm/infsup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "fddlm/system.hpp"

namespace fddlm {

NormMatrices build_norm_matrices(const FeSpace& v2_space, const FeSpace& lambda_space) {
  if (lambda_space.family() != Family::P0)
    throw std::invalid_argument("build_norm_matrices: multiplier space must be P0");
  NormMatrices out;
  out.N1 = assemble_mass(lambda_space);
  out.N2 = assemble_stiffness(v2_space, 1.0) + assemble_mass(v2_space);
  out.N2.makeCompressed();
  return out;
}

namespace {

void check_dimensions(const SparseMatrix& C2, const SparseMatrix& N1, const SparseMatrix& N2,
                      double h2) {
  if (N1.rows() != C2.rows() || N1.cols() != C2.rows() || N2.rows() != C2.cols() ||
      N2.cols() != C2.cols())
    throw std::invalid_argument("infsup: inconsistent matrix dimensions");
  if (!(h2 > 0.0)) throw std::invalid_argument("infsup: h2 must be positive");
  if (C2.rows() == 0) throw std::invalid_argument("infsup: empty multiplier space");
}

Eigen::VectorXd inverse_sqrt_diag(const SparseMatrix& N1, double h2) {
  Eigen::VectorXd d = N1.diagonal();
  if (d.minCoeff() <= 0.0) throw std::invalid_argument("infsup: N1 must have a positive diagonal");
  return (h2 * d.array().sqrt()).inverse().matrix();
}

}  // namespace

double infsup_constant(const SparseMatrix& C2, const SparseMatrix& N1, const SparseMatrix& N2,
                       double h2) {
  check_dimensions(C2, N1, N2, h2);
  const Eigen::Index m = C2.rows();
  const Eigen::VectorXd s = inverse_sqrt_diag(N1, h2);
  // S = C2^T D^{-1} C2, symmetric positive semidefinite.
  const Eigen::MatrixXd scaled = s.asDiagonal() * Eigen::MatrixXd(C2);
  Eigen::MatrixXd S = scaled.transpose() * scaled;
  S = 0.5 * (S + S.transpose()).eval();
  const Eigen::MatrixXd B(N2);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(S, B, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("infsup_constant: generalized eigensolver did not converge");
  const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
  const Eigen::Index n2 = ev.size();
  if (m > n2) return 0.0;  // more multipliers than test functions: C2^T has a kernel
  const double sigma = std::max(ev[n2 - m], 0.0);
  return std::sqrt(sigma);
}

double infsup_constant_svd(const SparseMatrix& C2, const SparseMatrix& N1, const SparseMatrix& N2,
                           double h2) {
  check_dimensions(C2, N1, N2, h2);
  const Eigen::Index m = C2.rows();
  const Eigen::Index n2 = C2.cols();
  if (m > n2) return 0.0;
  const Eigen::VectorXd s = inverse_sqrt_diag(N1, h2);

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt{Eigen::SparseMatrix<double>(N2)};
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("infsup_constant_svd: N2 is not positive definite");

  // G = D^{-1/2} C2 N2^{-1} C2^T D^{-1/2}, whose eigenvalues are the squared
  // singular values of L^{-1} C2^T D^{-1/2}. Built a block of columns at a time.
  const Eigen::SparseMatrix<double> ct = (C2.transpose() * s.asDiagonal());
  const SparseMatrix cs = s.asDiagonal() * C2;
  Eigen::MatrixXd G(m, m);
  constexpr Eigen::Index block = 256;
  for (Eigen::Index j0 = 0; j0 < m; j0 += block) {
    const Eigen::Index nb = std::min(block, m - j0);
    const Eigen::MatrixXd rhs = Eigen::MatrixXd(ct.middleCols(j0, nb));
    const Eigen::MatrixXd z = llt.solve(rhs);
    G.middleCols(j0, nb) = cs * z;
  }
  G = 0.5 * (G + G.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(G, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("infsup_constant_svd: eigensolver did not converge");
  return std::sqrt(std::max(solver.eigenvalues()[0], 0.0));
}

double infsup_constant_lanczos(const SparseMatrix& C2, const SparseMatrix& N1,
                               const SparseMatrix& N2, double h2, const LanczosOptions& options) {
  check_dimensions(C2, N1, N2, h2);
  const Eigen::Index m = C2.rows();
  const Eigen::Index n2 = C2.cols();
  if (m > n2) return 0.0;
  const Eigen::VectorXd s = inverse_sqrt_diag(N1, h2);
  const SparseMatrix cs = s.asDiagonal() * C2;

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(N2.nonZeros() + 2 * cs.nonZeros() + m);
  for (Eigen::Index r = 0; r < N2.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(N2, r); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index r = 0; r < cs.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(cs, r); it; ++it) {
      t.emplace_back(n2 + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), n2 + it.row(), it.value());
    }
  for (Eigen::Index i = 0; i < m; ++i) t.emplace_back(n2 + i, n2 + i, -options.delta);
  Eigen::SparseMatrix<double> k(n2 + m, n2 + m);
  k.setFromTriplets(t.begin(), t.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(k);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("infsup_constant_lanczos: factorization of the saddle matrix failed");

  // x -> (G + delta I)^{-1} x
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n2 + m);
  auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    rhs.tail(m) = x;
    return -ldlt.solve(rhs).tail(m);
  };

  const int kmax = static_cast<int>(std::min<Eigen::Index>(options.max_iterations, m));
  Eigen::MatrixXd q(m, kmax + 1);
  std::vector<double> alpha, beta;
  // Deterministic start vector with components in every direction.
  Eigen::VectorXd v(m);
  for (Eigen::Index i = 0; i < m; ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + 7.0 * static_cast<double>(i));
  q.col(0) = v.normalized();

  double theta = 0.0;
  for (int j = 0; j < kmax; ++j) {
    Eigen::VectorXd w = apply(q.col(j));
    alpha.push_back(q.col(j).dot(w));
    // Full reorthogonalisation, twice.
    for (int pass = 0; pass < 2; ++pass)
      w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
    const double b = w.norm();

    const int n = j + 1;
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      tri(i, i) = alpha[i];
      if (i + 1 < n) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    theta = es.eigenvalues()[n - 1];
    const double residual = std::abs(b * es.eigenvectors()(n - 1, n - 1));
    if (residual <= options.tolerance * theta || b <= 1e-14 * theta) break;
    beta.push_back(b);
    q.col(j + 1) = w / b;
  }
  if (!(theta > 0.0)) throw std::runtime_error("infsup_constant_lanczos: no positive Ritz value");
  return std::sqrt(std::max(1.0 / theta - options.delta, 0.0));
}

double InfSupReport::decay_ratio() const {
  if (levels.size() < 2 || levels.front().gamma_est <= 0.0) return 0.0;
  return levels.back().gamma_est / levels.front().gamma_est;
}

bool InfSupReport::monotone_decreasing() const {
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (!(levels[i].gamma_est < levels[i - 1].gamma_est)) return false;
  return levels.size() >= 2;
}

InfSupVerdict InfSupReport::verdict() const {
  const double r = decay_ratio();
  if (levels.size() >= 4 && r >= 0.5) return InfSupVerdict::stable;
  if (monotone_decreasing() && r < 0.5) return InfSupVerdict::degenerating;
  return InfSupVerdict::inconclusive;
}

std::string_view to_string(InfSupVerdict v) {
  switch (v) {
    case InfSupVerdict::stable: return "stable";
    case InfSupVerdict::degenerating: return "degenerating";
    case InfSupVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

}  // namespace fddlm
