#include "fddlm/system.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

namespace fddlm {

ElementFamilies families(ElementChoice e) {
  switch (e) {
    case ElementChoice::elm1: return {Family::Q1, Family::Q1B};
    case ElementChoice::elm2: return {Family::Q2, Family::Q2};
    case ElementChoice::q1q1p0: return {Family::Q1, Family::Q1};
  }
  return {Family::Q1, Family::Q1};
}

std::string_view to_string(ElementChoice e) {
  switch (e) {
    case ElementChoice::elm1: return "elm1";
    case ElementChoice::elm2: return "elm2";
    case ElementChoice::q1q1p0: return "q1q1p0";
  }
  return "?";
}

std::optional<ElementChoice> parse_element(std::string_view tag) {
  if (tag == "elm1") return ElementChoice::elm1;
  if (tag == "elm2") return ElementChoice::elm2;
  if (tag == "q1q1p0") return ElementChoice::q1q1p0;
  return std::nullopt;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Volume rule for stiffness, mass and load integrals.
const QuadratureRule& assembly_rule() {
  static const QuadratureRule rule = gauss_square(3);
  return rule;
}

// Two orders above the assembly rule.
const QuadratureRule& error_rule() {
  static const QuadratureRule rule = gauss_square(5);
  return rule;
}

template <class Kernel>
SparseMatrix assemble_cellwise(const FeSpace& space, Kernel&& kernel) {
  const auto& mesh = space.mesh();
  const Family fam = space.family();
  const int k = space.dofs_per_cell();
  const auto& rule = assembly_rule();
  Triplets t;
  t.reserve(mesh.num_cells() * k * k);
  std::vector<double> local(k * k);
  std::vector<double> phi(k);
  std::vector<Point2> grad(k);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellMap map = mesh.cell_map(c);
    std::fill(local.begin(), local.end(), 0.0);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point2 p = rule.points[q];
      const double jxw = rule.weights[q] * map.det(p);
      for (int a = 0; a < k; ++a) {
        phi[a] = eval_basis(fam, a, p);
        grad[a] = map.physical_gradient(p, eval_grad(fam, a, p));
      }
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) local[a * k + b] += jxw * kernel(phi[a], grad[a], phi[b], grad[b]);
    }
    const auto dofs = space.cell_dofs(c);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) t.emplace_back(dofs[a], dofs[b], local[a * k + b]);
  }
  const auto n = static_cast<Eigen::Index>(space.size());
  return from_triplets(n, n, t);
}

Eigen::VectorXd load_vector(const FeSpace& space, double value) {
  const auto& mesh = space.mesh();
  const auto& rule = assembly_rule();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
  if (value == 0.0) return f;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellMap map = mesh.cell_map(c);
    const auto dofs = space.cell_dofs(c);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point2 p = rule.points[q];
      const double jxw = rule.weights[q] * map.det(p);
      for (int a = 0; a < space.dofs_per_cell(); ++a)
        f[dofs[a]] += value * jxw * eval_basis(space.family(), a, p);
    }
  }
  return f;
}

}  // namespace

SparseMatrix assemble_stiffness(const FeSpace& space, double coefficient) {
  return assemble_cellwise(space, [coefficient](double, Point2 ga, double, Point2 gb) {
    return coefficient * dot(ga, gb);
  });
}

SparseMatrix assemble_mass(const FeSpace& space) {
  return assemble_cellwise(space, [](double pa, Point2, double pb, Point2) { return pa * pb; });
}

SparseMatrix assemble_A1(const FeSpace& vh_space, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("assemble_A1: beta must be positive");
  return assemble_stiffness(vh_space, beta);
}

SparseMatrix assemble_A2(const FeSpace& v2_space, double beta, double beta2) {
  return assemble_stiffness(v2_space, beta2 - beta);
}

LoadVectors assemble_rhs(const FeSpace& vh_space, const FeSpace& v2_space, double f, double f2) {
  return {load_vector(vh_space, f), load_vector(v2_space, f2 - f)};
}

SparseMatrix block_matrix(const BlockSystem& sys) {
  const Eigen::Index n = sys.n(), n2 = sys.n2(), m = sys.m();
  Triplets t;
  t.reserve(sys.A1.nonZeros() + sys.A2.nonZeros() + 2 * (sys.C1.nonZeros() + sys.C2.nonZeros()));
  auto add = [&](const SparseMatrix& a, Eigen::Index r0, Eigen::Index c0, double s, bool transpose) {
    for (Eigen::Index r = 0; r < a.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
        if (transpose)
          t.emplace_back(r0 + it.col(), c0 + it.row(), s * it.value());
        else
          t.emplace_back(r0 + it.row(), c0 + it.col(), s * it.value());
      }
  };
  add(sys.A1, 0, 0, 1.0, false);
  add(sys.A2, n, n, 1.0, false);
  add(sys.C1, n + n2, 0, 1.0, false);
  add(sys.C1, 0, n + n2, 1.0, true);
  add(sys.C2, n + n2, n, -1.0, false);
  add(sys.C2, n, n + n2, -1.0, true);
  return from_triplets(n + n2 + m, n + n2 + m, t);
}

Eigen::VectorXd block_rhs(const BlockSystem& sys) {
  Eigen::VectorXd b(sys.n() + sys.n2() + sys.m());
  b << sys.F1, sys.F2, sys.G;
  return b;
}

BlockSystem apply_dirichlet(BlockSystem sys, const DirichletBC& bc) {
  if (bc.dofs.size() != bc.values.size())
    throw std::invalid_argument("apply_dirichlet: dofs and values differ in length");
  const Eigen::Index n = sys.n();
  std::vector<char> fixed(n, 0);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < bc.dofs.size(); ++k) {
    const int d = bc.dofs[k];
    if (d < 0 || d >= n) throw std::out_of_range("apply_dirichlet: constrained dof out of range");
    fixed[d] = 1;
    g[d] = bc.values[k];
  }
  if (sys.G.size() == 0) sys.G = Eigen::VectorXd::Zero(sys.m());

  Triplets a1;
  a1.reserve(sys.A1.nonZeros());
  for (Eigen::Index r = 0; r < sys.A1.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(sys.A1, r); it; ++it) {
      const auto row = it.row(), col = it.col();
      if (fixed[col]) {
        if (!fixed[row]) sys.F1[row] -= it.value() * g[col];
        continue;
      }
      if (fixed[row]) continue;
      a1.emplace_back(row, col, it.value());
    }
  for (Eigen::Index d = 0; d < n; ++d)
    if (fixed[d]) {
      a1.emplace_back(d, d, 1.0);
      sys.F1[d] = g[d];
    }
  sys.A1 = from_triplets(n, n, a1);

  Triplets c1;
  c1.reserve(sys.C1.nonZeros());
  for (Eigen::Index r = 0; r < sys.C1.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(sys.C1, r); it; ++it) {
      if (fixed[it.col()])
        sys.G[it.row()] -= it.value() * g[it.col()];
      else
        c1.emplace_back(it.row(), it.col(), it.value());
    }
  sys.C1 = from_triplets(sys.C1.rows(), sys.C1.cols(), c1);
  return sys;
}

SolutionTriple solve_saddle(const BlockSystem& input, const DirichletBC& bc,
                            const SolveOptions& options) {
  BlockSystem sys = apply_dirichlet(input, bc);
  const Eigen::Index n = sys.n(), n2 = sys.n2(), m = sys.m();
  const SparseMatrix k = block_matrix(sys);
  const Eigen::VectorXd b = block_rhs(sys);
  const std::string dims = " (blocks " + std::to_string(n) + " + " + std::to_string(n2) + " + " +
                           std::to_string(m) + ")";

  Eigen::VectorXd x;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> solve;
  Eigen::PartialPivLU<Eigen::MatrixXd> dense;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> sparse;
  if (k.rows() < options.dense_threshold) {
    dense.compute(Eigen::MatrixXd(k));
    // PartialPivLU does not report singularity; check the pivots.
    const auto& lu = dense.matrixLU();
    const double scale = lu.cwiseAbs().maxCoeff();
    if (lu.diagonal().cwiseAbs().minCoeff() <= 1e-14 * scale)
      throw std::runtime_error("solve_saddle: singular factorization" + dims);
    solve = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return dense.solve(r); };
  } else {
    const Eigen::SparseMatrix<double> kc(k);
    sparse.analyzePattern(kc);
    sparse.factorize(kc);
    if (sparse.info() != Eigen::Success)
      throw std::runtime_error("solve_saddle: singular factorization" + dims + ": " +
                               sparse.lastErrorMessage());
    solve = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return sparse.solve(r); };
  }

  const double bnorm = b.norm();
  // Residuals are accumulated in long double so refinement is not limited by
  // cancellation in b - K x when the A2 block is large.
  auto residual = [&](const Eigen::VectorXd& v, double& rel) {
    std::vector<long double> acc(b.data(), b.data() + b.size());
    for (Eigen::Index row = 0; row < k.outerSize(); ++row)
      for (SparseMatrix::InnerIterator it(k, row); it; ++it)
        acc[row] -= static_cast<long double>(it.value()) * v[it.col()];
    Eigen::VectorXd r(b.size());
    long double sq = 0.0L;
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      r[i] = static_cast<double>(acc[i]);
      sq += acc[i] * acc[i];
    }
    const double norm = static_cast<double>(std::sqrt(sq));
    rel = bnorm > 0.0 ? norm / bnorm : norm;
    return r;
  };
  x = solve(b);
  double rel = 0.0;
  Eigen::VectorXd r = residual(x, rel);
  Eigen::VectorXd best = x;
  double best_rel = rel;
  for (int step = 0; step < options.refinement_steps && rel > 1e-15; ++step) {
    x += solve(r);
    r = residual(x, rel);
    if (rel < best_rel) {
      best = x;
      best_rel = rel;
    }
  }
  x = best;

  SolutionTriple sol;
  sol.u = x.segment(0, n);
  sol.u2 = x.segment(n, n2);
  sol.lambda = x.segment(n + n2, m);
  sol.residual = best_rel;
  if (!std::isfinite(sol.residual) || sol.residual > options.tolerance) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", sol.residual);
    throw std::runtime_error(std::string("solve_saddle: relative residual ") + buf +
                             " exceeds tolerance" + dims);
  }
  // Constraint rows of the original system, boundary values included.
  const Eigen::VectorXd c = input.C1 * sol.u - input.C2 * sol.u2 -
                            (input.G.size() ? input.G : Eigen::VectorXd::Zero(m));
  sol.constraint_residual = m > 0 ? c.cwiseAbs().maxCoeff() : 0.0;
  return sol;
}

ErrorNorms error_norms(const SolutionTriple& sol, const FeSpace& vh_space,
                       const FeSpace& v2_space, const CouplingTable& table,
                       const ReferenceSolution& ref) {
  const auto& bg = vh_space.mesh();
  const auto& im = v2_space.mesh();
  const auto& rule = error_rule();

  auto accumulate = [](double& l2, double& h1, double w, double e, Point2 ge) {
    l2 += w * e * e;
    h1 += w * dot(ge, ge);
  };

  // Background: outer reference everywhere, then swap in the inner reference
  // on the intersection mesh.
  double l2_u = 0.0, h1_u = 0.0;
  for (std::size_t c = 0; c < bg.num_cells(); ++c) {
    const CellMap map = bg.cell_map(c);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point2 p = rule.points[q];
      const Point2 x = map.map(p);
      const double w = rule.weights[q] * map.det(p);
      accumulate(l2_u, h1_u, w, vh_space.evaluate(sol.u, c, p) - ref.u_outer.value(x),
                 vh_space.gradient(sol.u, c, p) - ref.u_outer.gradient(x));
    }
  }
  const QuadratureRule tri_rule = conical_triangle(5);
  double l2_corr = 0.0, h1_corr = 0.0;
  for (const auto& fragments : table.cells)
    for (const auto& f : fragments) {
      const auto c = static_cast<std::size_t>(f.background_cell);
      const CellMap map = bg.cell_map(c);
      for (const auto& tri : fan_triangulate(f.piece)) {
        const double jac = 2.0 * tri.signed_area();
        for (std::size_t q = 0; q < tri_rule.size(); ++q) {
          const Point2 x = tri.map(tri_rule.points[q]);
          const Point2 p = map.inverse(x).value_or(Point2{0.5, 0.5});
          const double w = jac * tri_rule.weights[q];
          const double uh = vh_space.evaluate(sol.u, c, p);
          const Point2 guh = vh_space.gradient(sol.u, c, p);
          const double eo = uh - ref.u_outer.value(x);
          const Point2 go = guh - ref.u_outer.gradient(x);
          const double ei = uh - ref.u_inner.value(x);
          const Point2 gi = guh - ref.u_inner.gradient(x);
          l2_corr += w * (ei * ei - eo * eo);
          h1_corr += w * (dot(gi, gi) - dot(go, go));
        }
      }
    }
  l2_u = std::max(0.0, l2_u + l2_corr);
  h1_u = std::max(0.0, h1_u + h1_corr);

  double l2_u2 = 0.0, h1_u2 = 0.0;
  for (std::size_t c = 0; c < im.num_cells(); ++c) {
    const CellMap map = im.cell_map(c);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point2 p = rule.points[q];
      const Point2 x = map.map(p);
      const double w = rule.weights[q] * map.det(p);
      accumulate(l2_u2, h1_u2, w, v2_space.evaluate(sol.u2, c, p) - ref.u2.value(x),
                 v2_space.gradient(sol.u2, c, p) - ref.u2.gradient(x));
    }
  }

  return {std::sqrt(l2_u), std::sqrt(h1_u), std::sqrt(l2_u2), std::sqrt(l2_u2 + h1_u2)};
}

double multiplier_integral(const Eigen::VectorXd& lambda, const QuadMesh& immersed) {
  if (static_cast<std::size_t>(lambda.size()) != immersed.num_cells())
    throw std::invalid_argument("multiplier_integral: size mismatch");
  double s = 0.0;
  for (std::size_t c = 0; c < immersed.num_cells(); ++c) s += lambda[c] * cell_area(immersed, c);
  return s;
}

double multiplier_error(const Eigen::VectorXd& lambda_h, const QuadMesh& coarse,
                        const Eigen::VectorXd& lambda_ref, const QuadMesh& fine) {
  if (static_cast<std::size_t>(lambda_h.size()) != coarse.num_cells() ||
      static_cast<std::size_t>(lambda_ref.size()) != fine.num_cells())
    throw std::invalid_argument("multiplier_error: multiplier sizes do not match their meshes");
  const CellLocator locator(coarse);
  std::vector<double> sum(coarse.num_cells(), 0.0), weight(coarse.num_cells(), 0.0);
  for (std::size_t f = 0; f < fine.num_cells(); ++f) {
    const auto v = fine.cell_vertices(f);
    const Point2 centre = 0.25 * (v[0] + v[1] + v[2] + v[3]);
    const auto hit = locator.locate(centre, true);
    const double a = cell_area(fine, f);
    sum[hit->cell] += a * lambda_ref[f];
    weight[hit->cell] += a;
  }
  double err = 0.0;
  for (std::size_t c = 0; c < coarse.num_cells(); ++c) {
    if (weight[c] <= 0.0)
      throw std::invalid_argument("multiplier_error: mismatched meshes (coarse cell " +
                                  std::to_string(c) + " has no fine cells)");
    const double d = lambda_h[c] - sum[c] / weight[c];
    err += cell_area(coarse, c) * d * d;
  }
  return coarse.h * std::sqrt(err);
}

}  // namespace fddlm
