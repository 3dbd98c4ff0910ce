#include "fddlm/element.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fddlm {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Q1: return "Q1";
    case Family::Q2: return "Q2";
    case Family::Q1B: return "Q1B";
    case Family::P0: return "P0";
  }
  return "?";
}

namespace {

void check_index(Family f, int i) {
  if (i < 0 || i >= num_local_dofs(f))
    throw std::out_of_range("local dof " + std::to_string(i) + " out of range for " +
                            std::string(to_string(f)));
}

// Lattice position (0, 1 or 2 along each axis) of the Q2 local dofs.
constexpr std::array<std::array<int, 2>, 9> kQ2Lattice{{
    {0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 0}, {2, 1}, {1, 2}, {0, 1}, {1, 1}}};

constexpr std::array<std::array<int, 2>, 4> kQ1Corners{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};

double linear(int k, double x) { return k == 0 ? 1.0 - x : x; }
double linear_d(int k) { return k == 0 ? -1.0 : 1.0; }

// Quadratic Lagrange polynomials on the nodes {0, 1/2, 1}.
double quad(int k, double x) {
  switch (k) {
    case 0: return 2.0 * (x - 0.5) * (x - 1.0);
    case 1: return 4.0 * x * (1.0 - x);
    default: return 2.0 * x * (x - 0.5);
  }
}
double quad_d(int k, double x) {
  switch (k) {
    case 0: return 4.0 * x - 3.0;
    case 1: return 4.0 - 8.0 * x;
    default: return 4.0 * x - 1.0;
  }
}

}  // namespace

Point2 reference_dof_point(Family f, int i) {
  check_index(f, i);
  switch (f) {
    case Family::Q1:
    case Family::Q1B:
      if (i == 4) return {0.5, 0.5};
      return {double(kQ1Corners[i][0]), double(kQ1Corners[i][1])};
    case Family::Q2:
      return {0.5 * kQ2Lattice[i][0], 0.5 * kQ2Lattice[i][1]};
    case Family::P0:
      return {0.5, 0.5};
  }
  return {};
}

double eval_basis(Family f, int i, Point2 p) {
  check_index(f, i);
  switch (f) {
    case Family::P0:
      return 1.0;
    case Family::Q1:
    case Family::Q1B:
      if (i == 4) return bubble(p);
      return linear(kQ1Corners[i][0], p.x) * linear(kQ1Corners[i][1], p.y);
    case Family::Q2:
      return quad(kQ2Lattice[i][0], p.x) * quad(kQ2Lattice[i][1], p.y);
  }
  return 0.0;
}

Point2 eval_grad(Family f, int i, Point2 p) {
  check_index(f, i);
  switch (f) {
    case Family::P0:
      return {0.0, 0.0};
    case Family::Q1:
    case Family::Q1B: {
      if (i == 4)
        return {16.0 * (1.0 - 2.0 * p.x) * p.y * (1.0 - p.y),
                16.0 * p.x * (1.0 - p.x) * (1.0 - 2.0 * p.y)};
      const int kx = kQ1Corners[i][0];
      const int ky = kQ1Corners[i][1];
      return {linear_d(kx) * linear(ky, p.y), linear(kx, p.x) * linear_d(ky)};
    }
    case Family::Q2: {
      const int kx = kQ2Lattice[i][0];
      const int ky = kQ2Lattice[i][1];
      return {quad_d(kx, p.x) * quad(ky, p.y), quad(kx, p.x) * quad_d(ky, p.y)};
    }
  }
  return {};
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1 || n > 12) throw std::invalid_argument("gauss_legendre: n must be in [1, 12]");
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n starting from the Chebyshev-like guess.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0;
    double p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    // Map from [-1,1] to [0,1], ascending order.
    x[n - 1 - i] = 0.5 * (1.0 + z);
    w[n - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

QuadratureRule gauss_square(int n) {
  if (n < 1 || n > 6) throw std::invalid_argument("gauss_square: n must be in [1, 6]");
  const auto [x, w] = gauss_legendre(n);
  QuadratureRule rule;
  rule.degree = 2 * n - 1;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      rule.points.push_back({x[i], x[j]});
      rule.weights.push_back(w[i] * w[j]);
    }
  return rule;
}

namespace {

void add_orbit3(QuadratureRule& r, double a, double w) {
  r.points.push_back({a, a});
  r.points.push_back({1.0 - 2.0 * a, a});
  r.points.push_back({a, 1.0 - 2.0 * a});
  for (int k = 0; k < 3; ++k) r.weights.push_back(w);
}

}  // namespace

QuadratureRule gauss_triangle(int deg) {
  QuadratureRule r;
  switch (deg) {
    case 1:
      r.points = {{1.0 / 3.0, 1.0 / 3.0}};
      r.weights = {0.5};
      r.degree = 1;
      return r;
    case 2:
      add_orbit3(r, 1.0 / 6.0, 1.0 / 6.0);
      r.degree = 2;
      return r;
    case 3:
    case 4:
      // Six-point rule; the four-point cubic rule has a negative weight.
      add_orbit3(r, 0.445948490915964886318329253883, 0.5 * 0.223381589678011465944930812044);
      add_orbit3(r, 0.091576213509770743459571463402, 0.5 * 0.109951743655321867638326324900);
      r.degree = 4;
      return r;
    case 5: {
      const double s15 = std::sqrt(15.0);
      r.points = {{1.0 / 3.0, 1.0 / 3.0}};
      r.weights = {0.5 * 9.0 / 40.0};
      add_orbit3(r, (6.0 - s15) / 21.0, 0.5 * (155.0 - s15) / 1200.0);
      add_orbit3(r, (6.0 + s15) / 21.0, 0.5 * (155.0 + s15) / 1200.0);
      r.degree = 5;
      return r;
    }
    default:
      throw std::invalid_argument("gauss_triangle: unsupported degree " + std::to_string(deg));
  }
}

QuadratureRule conical_triangle(int n) {
  const auto [x, w] = gauss_legendre(n);
  QuadratureRule r;
  r.degree = 2 * n - 2;
  // (u, v) in [0,1]^2 -> (u, v (1 - u)), Jacobian (1 - u).
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      r.points.push_back({x[i], x[j] * (1.0 - x[i])});
      r.weights.push_back(w[i] * w[j] * (1.0 - x[i]));
    }
  return r;
}

CellMap::CellMap(const std::array<Point2, 4>& v)
    : v_(v), a_(v[1] - v[0]), b_(v[3] - v[0]), c_(v[0] - v[1] + v[2] - v[3]) {
  const double scale = norm(a_) + norm(b_);
  affine_ = norm(c_) <= 1e-14 * scale;
}

Point2 CellMap::map(Point2 p) const { return v_[0] + p.x * a_ + p.y * b_ + (p.x * p.y) * c_; }

std::array<Point2, 2> CellMap::jacobian(Point2 p) const {
  return {a_ + p.y * c_, b_ + p.x * c_};
}

double CellMap::det(Point2 p) const {
  const auto j = jacobian(p);
  return cross(j[0], j[1]);
}

Point2 CellMap::physical_gradient(Point2 p, Point2 g) const {
  // J = [j0 j1] (columns). J^{-T} g solves J^T y = g.
  const auto j = jacobian(p);
  const double d = cross(j[0], j[1]);
  // J^T = [[j0.x, j0.y], [j1.x, j1.y]]; inverse = 1/d [[j1.y, -j0.y], [-j1.x, j0.x]]
  return {(j[1].y * g.x - j[0].y * g.y) / d, (-j[1].x * g.x + j[0].x * g.y) / d};
}

std::optional<Point2> CellMap::inverse(Point2 phys) const {
  auto solve_linear = [&](Point2 p, Point2 rhs) -> Point2 {
    const auto j = jacobian(p);
    const double d = cross(j[0], j[1]);
    return {cross(rhs, j[1]) / d, cross(j[0], rhs) / d};
  };
  Point2 ref{0.5, 0.5};
  if (affine_) return solve_linear(ref, phys - v_[0]);

  const double scale = norm(a_) + norm(b_);
  for (int it = 0; it < 50; ++it) {
    const Point2 r = map(ref) - phys;
    if (norm(r) <= 1e-15 * scale) return ref;
    const Point2 step = solve_linear(ref, r);
    ref = ref - step;
    if (!std::isfinite(ref.x) || !std::isfinite(ref.y)) return std::nullopt;
    if (norm(step) <= 1e-15) return ref;
  }
  if (norm(map(ref) - phys) <= 1e-11 * scale) return ref;
  return std::nullopt;
}

}  // namespace fddlm
