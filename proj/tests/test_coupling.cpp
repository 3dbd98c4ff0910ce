#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fddlm/coupling.hpp"

using namespace fddlm;

namespace {

std::shared_ptr<const QuadMesh> square_mesh(Point2 lo, Point2 hi, int n) {
  return std::make_shared<const QuadMesh>(build_mesh(DomainSpec::rectangle(lo, hi, n, n), 0));
}

int node_at(const QuadMesh& m, Point2 p) {
  for (std::size_t i = 0; i < m.num_nodes(); ++i)
    if (distance(m.nodes[i], p) < 1e-12) return static_cast<int>(i);
  return -1;
}

double mesh_area(const QuadMesh& m) {
  double a = 0.0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) a += signed_area(cell_polygon(m, c));
  return a;
}

}  // namespace

TEST(Coupling, AlignedCellGivesOneFragment) {
  const auto bg = square_mesh({0, 0}, {2, 2}, 2);
  const auto im = square_mesh({0, 0}, {1, 1}, 1);
  const auto t = build_intersections(*im, *bg);
  ASSERT_EQ(t.cells.size(), 1u);
  EXPECT_EQ(t.num_fragments(), 1u);
  EXPECT_NEAR(t.total_area(), 1.0, 1e-15);
}

TEST(Coupling, ShiftedCellGivesFourQuarters) {
  const auto bg = square_mesh({-0.5, -0.5}, {1.5, 1.5}, 2);
  const auto im = square_mesh({0, 0}, {1, 1}, 1);
  const auto t = build_intersections(*im, *bg);
  ASSERT_EQ(t.num_fragments(), 4u);
  for (const auto& f : t.cells[0]) {
    EXPECT_NEAR(signed_area(f.piece), 0.25, 1e-15);
    double w = 0.0;
    for (double x : f.weights) w += x;
    EXPECT_NEAR(w, 0.25, 1e-15);
  }
  for (std::size_t k = 1; k < t.cells[0].size(); ++k)
    EXPECT_LT(t.cells[0][k - 1].background_cell, t.cells[0][k].background_cell);
}

TEST(Coupling, QuarterCellEntry) {
  // Background [-0.5, 1.5]^2 with 2x2 cells, K = [0, 1]^2. On the fragment
  // [0.5, 1]^2 of the cell [0.5, 1.5]^2 the hat function of the node
  // (0.5, 0.5) integrates to (3/8)^2 = 0.140625.
  const auto bg = square_mesh({-0.5, -0.5}, {1.5, 1.5}, 2);
  const auto im = square_mesh({0, 0}, {1, 1}, 1);
  const FeSpace vh(bg, Family::Q1);
  const FeSpace lh(im, Family::P0);
  const auto t = build_intersections(*im, *bg);
  const int center = node_at(*bg, {0.5, 0.5});
  ASSERT_GE(center, 0);

  const Fragment* upper_right = nullptr;
  for (const auto& f : t.cells[0])
    if (signed_area(f.piece) > 0 && f.piece.bounds().lower.x > 0.49 && f.piece.bounds().lower.y > 0.49)
      upper_right = &f;
  ASSERT_NE(upper_right, nullptr);
  const auto dofs = vh.cell_dofs(static_cast<std::size_t>(upper_right->background_cell));
  int local = -1;
  for (int a = 0; a < 4; ++a)
    if (dofs[a] == center) local = a;
  ASSERT_GE(local, 0);
  double v = 0.0;
  for (std::size_t q = 0; q < upper_right->weights.size(); ++q)
    v += upper_right->weights[q] * eval_basis(Family::Q1, local, upper_right->background[q]);
  EXPECT_NEAR(v, 0.140625, 1e-12);

  const auto c1 = assemble_C1(t, lh, vh);
  EXPECT_NEAR(c1.coeff(0, center), 4 * 0.140625, 1e-12);
  // Corner nodes of the background only see a quarter of a cell corner.
  EXPECT_NEAR(c1.coeff(0, node_at(*bg, {-0.5, -0.5})), 0.015625, 1e-12);
  EXPECT_NEAR(c1.coeff(0, node_at(*bg, {0.5, -0.5})), 2 * 0.046875, 1e-12);
}

TEST(Coupling, RowSumsEqualCellAreaUnderRandomOffsets) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::uniform_int_distribution<int> cells(2, 5);
  for (int trial = 0; trial < 100; ++trial) {
    const Point2 shift{u(rng), u(rng)};
    const auto bg = square_mesh({-1, -1}, {2, 2}, cells(rng) + 3);
    const auto im = square_mesh(Point2{0, 0} + shift, Point2{1, 1} + shift, cells(rng));
    const auto t = build_intersections(*im, *bg);
    const FeSpace lh(im, Family::P0);
    for (Family f : {Family::Q1, Family::Q2}) {
      const FeSpace vh(bg, f);
      const auto c1 = assemble_C1(t, lh, vh);
      const Eigen::VectorXd sums = c1 * Eigen::VectorXd::Ones(c1.cols());
      for (std::size_t i = 0; i < im->num_cells(); ++i)
        EXPECT_NEAR(sums[lh.cell_dofs(i)[0]], signed_area(cell_polygon(*im, i)), 1e-10)
            << "trial " << trial;
    }
  }
}

TEST(Coupling, C1ReproducesLinearMoments) {
  // C1 applied to the interpolant of x gives the first moment of each cell.
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  const Point2 shift{u(rng), u(rng)};
  const auto bg = square_mesh({-1, -1}, {2, 2}, 7);
  const auto im = square_mesh(Point2{0, 0} + shift, Point2{1, 1} + shift, 3);
  const auto t = build_intersections(*im, *bg);
  const FeSpace vh(bg, Family::Q2), lh(im, Family::P0);
  const auto c1 = assemble_C1(t, lh, vh);
  const Eigen::VectorXd x = c1 * interpolate(vh, [](Point2 p) { return p.x * p.y; });
  for (std::size_t i = 0; i < im->num_cells(); ++i) {
    const auto b = cell_polygon(*im, i).bounds();
    const double exact = 0.25 * (b.upper.x * b.upper.x - b.lower.x * b.lower.x) *
                         (b.upper.y * b.upper.y - b.lower.y * b.lower.y);
    EXPECT_NEAR(x[lh.cell_dofs(i)[0]], exact, 1e-13);
  }
}

TEST(Coupling, C2RowSumsAndEntries) {
  const auto im = std::make_shared<const QuadMesh>(build_mesh(DomainSpec::disk({0, 0}, 1.0, 2), 1));
  const FeSpace lh(im, Family::P0);
  for (Family f : {Family::Q1, Family::Q1B, Family::Q2}) {
    const FeSpace v2(im, f);
    const auto c2 = assemble_C2(lh, v2);
    const Eigen::VectorXd ones = interpolate(v2, [](Point2) { return 1.0; });
    const Eigen::VectorXd sums = c2 * ones;
    for (std::size_t i = 0; i < im->num_cells(); ++i)
      EXPECT_NEAR(sums[lh.cell_dofs(i)[0]], signed_area(cell_polygon(*im, i)), 1e-14);
  }
  // Bubble column on the unit square: 4/9.
  const auto unit = square_mesh({0, 0}, {1, 1}, 1);
  const auto c2 = assemble_C2(FeSpace(unit, Family::P0), FeSpace(unit, Family::Q1B));
  EXPECT_NEAR(c2.coeff(0, 4), 4.0 / 9.0, 1e-14);
  for (int a = 0; a < 4; ++a) EXPECT_NEAR(c2.coeff(0, a), 0.25, 1e-15);
}

TEST(Coupling, DiskFragmentsCoverMesh) {
  const auto bg = square_mesh({-1.4, -1.4}, {1.4, 1.4}, 16);
  for (int level = 0; level < 3; ++level) {
    const auto im = build_mesh(DomainSpec::disk({0.01, -0.02}, 1.0, 4), level);
    const auto t = build_intersections(im, *bg);
    EXPECT_NEAR(t.total_area(), mesh_area(im), 1e-12);
    for (const auto& cell : t.cells)
      for (const auto& f : cell) {
        EXPECT_TRUE(is_convex_ccw(f.piece, 1e-12));
        for (const auto& r : f.background) {
          EXPECT_GE(r.x, -1e-12);
          EXPECT_LE(r.x, 1 + 1e-12);
          EXPECT_GE(r.y, -1e-12);
          EXPECT_LE(r.y, 1 + 1e-12);
        }
      }
  }
}

TEST(Coupling, ThreadCountDoesNotChangeResult) {
  const auto bg = square_mesh({-1.4, -1.4}, {1.4, 1.4}, 16);
  const auto im = std::make_shared<const QuadMesh>(build_mesh(DomainSpec::disk({0, 0}, 1.0, 4), 1));
  const FeSpace vh(bg, Family::Q1), lh(im, Family::P0);
  const auto a = assemble_C1(build_intersections(*im, *bg, 1), lh, vh);
  const auto b = assemble_C1(build_intersections(*im, *bg, 4), lh, vh);
  ASSERT_EQ(a.nonZeros(), b.nonZeros());
  EXPECT_EQ(Eigen::MatrixXd(a - b).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Coupling, ImmersedMeshOutsideBackgroundThrows) {
  const auto bg = square_mesh({0, 0}, {1, 1}, 2);
  const auto im = square_mesh({0.5, 0.5}, {1.5, 1.5}, 1);
  EXPECT_THROW(build_intersections(*im, *bg), std::runtime_error);
}

TEST(Coupling, RejectsNonP0Multiplier) {
  const auto bg = square_mesh({0, 0}, {1, 1}, 2);
  const auto t = build_intersections(*bg, *bg);
  EXPECT_THROW(assemble_C1(t, FeSpace(bg, Family::Q1), FeSpace(bg, Family::Q1)), std::invalid_argument);
  EXPECT_THROW(assemble_C2(FeSpace(bg, Family::Q1), FeSpace(bg, Family::Q1)), std::invalid_argument);
}
