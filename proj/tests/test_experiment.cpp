#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fddlm/experiment.hpp"
#include "fddlm/io.hpp"

using namespace fddlm;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("fddlm_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string error_message(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, Defaults) {
  const auto c = config_from_json(json::object());
  EXPECT_EQ(c.example, 3);
  EXPECT_EQ(c.case_id, 1);
  EXPECT_EQ(c.element, ElementChoice::elm1);
  EXPECT_EQ(c.base_cells, 16);
  EXPECT_DOUBLE_EQ(c.beta(), 1.0);
  EXPECT_DOUBLE_EQ(c.beta2(), 10.0);
}

TEST(Config, CaseCoefficients) {
  const auto c2 = config_from_json({{"case", 2}});
  EXPECT_DOUBLE_EQ(c2.beta2(), 10000.0);
  const auto c3 = config_from_json({{"case", 3}});
  EXPECT_DOUBLE_EQ(c3.beta(), 10.0);
  EXPECT_DOUBLE_EQ(c3.beta2(), 1.0);
}

TEST(Config, Errors) {
  EXPECT_EQ(error_message({{"element", "p2p1"}}),
            "unknown element 'p2p1'; valid tags are elm1, elm2, q1q1p0");
  EXPECT_EQ(error_message({{"levles", 3}}), "unknown configuration key 'levles'");
  EXPECT_NE(error_message({{"case", 4}}), "");
  EXPECT_NE(error_message({{"example", 0}}), "");
  EXPECT_NE(error_message({{"ratio", -1.0}}), "");
  EXPECT_NE(error_message({{"threads", 0}}), "");
  EXPECT_NE(error_message({{"tolerance", 0.0}}), "");
  EXPECT_NE(error_message({{"levels", "four"}}).find("malformed"), std::string::npos);
  EXPECT_NE(error_message(json::array()), "");
}

TEST(Config, JsonRoundTrip) {
  const auto c = config_from_json({{"example", 4}, {"case", 3}, {"element", "elm2"}, {"ratio", 0.5},
                                   {"levels", 5}, {"f2", 2.0}, {"tolerance", 1e-8}, {"output_dir", "x"}});
  json j = to_json(c);
  EXPECT_EQ(j["beta"], 10.0);
  EXPECT_EQ(j["tolerance"], 1e-8);
  j.erase("beta");
  j.erase("beta2");
  EXPECT_EQ(to_json(config_from_json(j)), to_json(c));
}

TEST(Geometry, RatioSelection) {
  for (int example = 1; example <= 4; ++example)
    for (double ratio : {0.5, 1.0, 2.0}) {
      ProblemConfig c;
      c.example = example;
      c.ratio = ratio;
      const auto g = make_geometry(c);
      const double q = build_mesh(g.immersed, 0).h / build_mesh(g.background, 0).h;
      EXPECT_LT(std::abs(std::log(q / ratio)), std::log(2.0))
          << "example " << example << " ratio " << ratio;
    }
}

TEST(Geometry, ImmersedInsideBackground) {
  for (int example = 1; example <= 4; ++example) {
    ProblemConfig c;
    c.example = example;
    const auto g = make_geometry(c);
    const auto bg = build_mesh(g.background, 0);
    const auto im = build_mesh(g.immersed, 1);
    EXPECT_NO_THROW(build_intersections(im, bg)) << "example " << example;
  }
}

TEST(ExactSolution, DiskInterfaceConditions) {
  for (int case_id = 1; case_id <= 3; ++case_id) {
    ProblemConfig c;
    c.case_id = case_id;
    const auto u = exact_solution(c);
    ASSERT_TRUE(u);
    for (double theta : {0.0, 0.7, 2.0, 4.5}) {
      const Point2 n{std::cos(theta), std::sin(theta)};
      EXPECT_NEAR(u->u_outer.value(n), u->u2.value(n), 1e-15);
      EXPECT_NEAR(c.beta() * dot(u->u_outer.gradient(n), n), c.beta2() * dot(u->u2.gradient(n), n), 1e-13);
    }
    // -beta lap U1 = f and -beta2 lap U2 = f2 with f = f2 = 1; the Laplacian of
    // a - b r^2 is -4b and b = -grad_x / (2x).
    const Point2 p{0.3, 0.2};
    EXPECT_NEAR(c.beta() * (-2.0 * u->u_outer.gradient(p).x / p.x), 1.0, 1e-13);
    EXPECT_NEAR(c.beta2() * (-2.0 * u->u2.gradient(p).x / p.x), 1.0, 1e-13);
  }
  ProblemConfig c;
  EXPECT_NEAR(exact_solution(c)->u_outer.value({0, 0}), 1.0, 1e-15);
  c.example = 1;
  EXPECT_FALSE(exact_solution(c));
  c.example = 3;
  c.f2 = 2.0;
  EXPECT_FALSE(exact_solution(c));
}

TEST(Rates, LeastSquares) {
  const std::vector<double> h{0.4, 0.2, 0.1, 0.05};
  std::vector<double> e;
  for (double x : h) e.push_back(3.0 * x * x);
  EXPECT_NEAR(least_squares_rate(h, e), 2.0, 1e-12);
  e[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_NEAR(least_squares_rate(h, e), 2.0, 1e-12);
  EXPECT_TRUE(std::isnan(least_squares_rate({0.4, 0.2}, {1.0, 0.5})));
  EXPECT_TRUE(std::isnan(least_squares_rate({0.4, 0.2, 0.1}, {1.0, 0.0, -1.0})));
}

TEST(Solve, CoarseDiskLevel) {
  ProblemConfig c;
  c.base_cells = 8;
  const auto s = solve_level(c, 0);
  EXPECT_LE(s.solution.residual, 1e-10);
  EXPECT_LE(s.solution.constraint_residual, 1e-9);
  // Boundary values follow the exact solution.
  const auto u = exact_solution(c);
  for (std::size_t k = 0; k < s.bc.dofs.size(); ++k)
    EXPECT_NEAR(s.solution.u[s.bc.dofs[k]], u->u_outer.value(s.vh->dof_coords()[s.bc.dofs[k]]), 1e-13);
  EXPECT_NEAR(multiplier_integral(s.solution.lambda, *s.immersed), 0.0, 1e-10);
}

TEST(Convergence, ShortRunHasRates) {
  ProblemConfig c;
  c.base_cells = 8;
  c.levels = 3;
  const auto t = run_convergence(c);
  EXPECT_TRUE(t.exact_reference);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_GT(t.rates.l2_u, 0.85);
  for (std::size_t k = 1; k < t.rows.size(); ++k) EXPECT_NEAR(t.rows[k].h, 0.5 * t.rows[k - 1].h, 1e-12);
}

TEST(Convergence, SelfReferenceProtocol) {
  ProblemConfig c;
  c.example = 1;
  c.base_cells = 4;
  c.levels = 3;
  const auto t = run_convergence(c);
  EXPECT_FALSE(t.exact_reference);
  EXPECT_EQ(t.rows.size(), 3u);
  for (const auto& r : t.rows) EXPECT_TRUE(std::isfinite(r.errors.l2_u));
}

TEST(InfSupSweep, RoutesAgree) {
  ProblemConfig c;
  c.base_cells = 8;
  const auto a = infsup_sweep(c, 3, InfSupRoute::pencil);
  const auto b = infsup_sweep(c, 3, InfSupRoute::lanczos);
  ASSERT_EQ(a.levels.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_NEAR(a.levels[k].gamma_est, b.levels[k].gamma_est, 1e-8);
    if (k > 0) EXPECT_EQ(a.levels[k].dim_lh, 4 * a.levels[k - 1].dim_lh);
  }
  EXPECT_THROW(infsup_sweep(c, 2), ConfigError);
}

TEST(Io, FormatReal) {
  EXPECT_EQ(format_real(1.0), "1.000000000000e+00");
  EXPECT_EQ(format_real(-0.140625), "-1.406250000000e-01");
  EXPECT_EQ(format_real(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_real(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Io, VtkStructure) {
  const auto m = build_mesh(DomainSpec::rectangle({0, 0}, {1, 1}, 2, 1), 0);
  const auto dir = scratch("vtk");
  Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(6, 0, 5), l(2);
  l << 7, 8;
  write_vtk(dir / "m.vtk", m, "fddlm {\"a\":1}\nnext", {{"u", u}}, {{"lambda", l}});
  const std::string s = slurp(dir / "m.vtk");
  EXPECT_EQ(s.rfind("# vtk DataFile Version 3.0\nfddlm {\"a\":1} next\nASCII\nDATASET UNSTRUCTURED_GRID\n", 0),
            0u);
  EXPECT_NE(s.find("POINTS 6 double\n"), std::string::npos);
  EXPECT_NE(s.find("CELLS 2 10\n"), std::string::npos);
  EXPECT_NE(s.find("CELL_TYPES 2\n9\n9\n"), std::string::npos);
  EXPECT_NE(s.find("POINT_DATA 6\nSCALARS u double 1\nLOOKUP_TABLE default\n0.000000000000e+00\n"),
            std::string::npos);
  EXPECT_NE(s.find("CELL_DATA 2\nSCALARS lambda double 1\n"), std::string::npos);
  EXPECT_THROW(write_vtk(dir / "bad.vtk", m, "", {{"u", l}}), std::invalid_argument);
}

TEST(Io, CsvAndJsonEmbedConfig) {
  ProblemConfig c;
  c.base_cells = 8;
  const auto r = infsup_sweep(c, 3);
  const auto dir = scratch("csv");
  write_infsup_csv(dir / "a.csv", r, c);
  write_infsup_csv(dir / "b.csv", infsup_sweep(c, 3), c);
  const std::string a = slurp(dir / "a.csv");
  EXPECT_EQ(a, slurp(dir / "b.csv"));
  std::istringstream lines(a);
  std::string first, second;
  std::getline(lines, first);
  std::getline(lines, second);
  EXPECT_EQ(first, "# config: " + to_json(c).dump());
  EXPECT_EQ(second, "level,h2,dim_V2h,dim_Lh,sigma_min,gamma_est");
  const json j = to_json(r, c);
  EXPECT_EQ(j["config"], to_json(c));
  EXPECT_EQ(j["levels"].size(), 3u);
  write_json(dir / "r.json", j);
  EXPECT_EQ(json::parse(slurp(dir / "r.json")), j);
}
