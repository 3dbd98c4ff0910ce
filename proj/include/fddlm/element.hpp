#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "fddlm/geometry.hpp"

namespace fddlm {

/// Reference element families on the unit square [0,1]^2.
///
/// Local dof numbering:
///   Q1  : vertices (0,0),(1,0),(1,1),(0,1)
///   Q1B : the four Q1 vertices, then the bubble 16x(1-x)y(1-y)
///   Q2  : the four vertices, the edge midpoints (0.5,0),(1,0.5),(0.5,1),(0,0.5),
///         then the center (0.5,0.5)
///   P0  : a single constant
enum class Family { Q1, Q2, Q1B, P0 };

constexpr int num_local_dofs(Family f) {
  switch (f) {
    case Family::Q1: return 4;
    case Family::Q2: return 9;
    case Family::Q1B: return 5;
    case Family::P0: return 1;
  }
  return 0;
}

/// Polynomial degree per coordinate direction.
constexpr int degree(Family f) {
  switch (f) {
    case Family::Q1: return 1;
    case Family::Q2: return 2;
    case Family::Q1B: return 2;
    case Family::P0: return 0;
  }
  return 0;
}

std::string_view to_string(Family f);

/// Reference coordinates of the nodal dofs (bubble and P0 sit at the center).
Point2 reference_dof_point(Family f, int i);

double eval_basis(Family f, int i, Point2 ref);
Point2 eval_grad(Family f, int i, Point2 ref);

/// The biquadratic bubble, equal to 1 at the element center.
inline double bubble(Point2 p) { return 16.0 * p.x * (1.0 - p.x) * p.y * (1.0 - p.y); }

struct QuadratureRule {
  std::vector<Point2> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return points.size(); }
};

/// Gauss-Legendre nodes and weights on [0,1]. Supports 1 <= n <= 12.
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

/// Tensor Gauss rule on [0,1]^2 with n points per direction, 1 <= n <= 6.
QuadratureRule gauss_square(int n);

/// Symmetric rule on the triangle (0,0),(1,0),(0,1), exact for total degree
/// `deg` (1 <= deg <= 5). All weights positive; they sum to 1/2.
QuadratureRule gauss_triangle(int deg);

/// Collapsed (Duffy) Gauss rule on the unit triangle with n^2 points. Exact for
/// total degree 2n - 2. Used where the symmetric rules run out.
QuadratureRule conical_triangle(int n);

/// Bilinear map from [0,1]^2 onto a straight-edged quadrilateral whose
/// vertices are listed counterclockwise starting at the image of (0,0).
class CellMap {
 public:
  explicit CellMap(const std::array<Point2, 4>& vertices);

  Point2 map(Point2 ref) const;

  /// Columns are dF/dx_ref and dF/dy_ref.
  std::array<Point2, 2> jacobian(Point2 ref) const;
  double det(Point2 ref) const;

  /// J^{-T} applied to a reference gradient.
  Point2 physical_gradient(Point2 ref, Point2 ref_grad) const;

  /// Newton inversion of the bilinear map. Returns nullopt if Newton fails to
  /// converge; the result may lie outside [0,1]^2 for points outside the cell.
  std::optional<Point2> inverse(Point2 phys) const;

  bool is_affine() const { return affine_; }
  const std::array<Point2, 4>& vertices() const { return v_; }

 private:
  std::array<Point2, 4> v_;
  Point2 a_, b_, c_;  // F(s,t) = v0 + a s + b t + c s t
  bool affine_;
};

}  // namespace fddlm
