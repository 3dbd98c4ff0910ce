// Acceptance checks. One line per criterion; exit status 1 if any primary
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fddlm/experiment.hpp"
#include "fddlm/io.hpp"

using namespace fddlm;

namespace {

int failures = 0;

void report(const std::string& id, bool ok, const std::string& detail, bool primary = true) {
  std::printf("%s %-4s %s\n", ok ? "[PASS]" : "[FAIL]", id.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok && primary) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Residuals of every solve in this run, supplementary ones included.
struct Worst {
  double residual = 0.0, constraint = 0.0;
  int solves = 0, stopped = 0;
  void add(double r, double c) {
    residual = std::max(residual, r);
    constraint = std::max(constraint, c);
    ++solves;
  }
  void add(const RateTable& t) {
    for (const auto& r : t.rows) add(r.residual, r.constraint_residual);
  }
};
Worst worst;

RateTable convergence(int example, int case_id, ElementChoice e, int levels, int base = 16,
                      double tolerance = 1e-10) {
  ProblemConfig c;
  c.example = example;
  c.case_id = case_id;
  c.element = e;
  c.levels = levels;
  c.base_cells = base;
  c.ratio = 1.0;
  c.tolerance = tolerance;
  auto t = run_convergence(c);
  worst.add(t);
  return t;
}

std::string rate_line(const RateTable& t) {
  return "L2_u " + fmt("%.3f", t.rates.l2_u) + ", H1_u " + fmt("%.3f", t.rates.h1_u) + ", L2_u2 " +
         fmt("%.3f", t.rates.l2_u2);
}

bool rates_ok(const RateTable& t) {
  return t.rates.l2_u >= 0.85 && t.rates.h1_u >= 0.40 && t.rates.l2_u2 >= 0.85;
}

std::shared_ptr<const QuadMesh> square(Point2 lo, Point2 hi, int n) {
  return std::make_shared<const QuadMesh>(build_mesh(DomainSpec::rectangle(lo, hi, n, n), 0));
}

void criterion_1_5(bool& done5) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto t = convergence(3, 1, ElementChoice::elm1, 5);
  const double s = seconds_since(t0);
  report("1", rates_ok(t) && s <= 300.0,
         "Ex3 case 1 elm1, 5 levels: " + rate_line(t) + ", " + fmt("%.1f s", s));

  std::vector<double> sums;
  bool monotone = true;
  std::string seq;
  for (const auto& r : t.rows) {
    const double v = std::abs(r.lambda_integral);
    if (!sums.empty() && !(v < sums.back())) monotone = false;
    sums.push_back(v);
    seq += (seq.empty() ? "" : " ") + fmt("%.2e", v);
  }
  report("5", monotone && sums.back() < 0.05,
         "|sum lambda_i |K_i||: " + seq + (monotone ? "" : " (not monotone)"));
  done5 = true;
}

void criterion_2() {
  bool ok = true;
  std::string detail;
  for (int case_id : {1, 2}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto t = convergence(3, case_id, ElementChoice::elm2, 4);
    ok = ok && rates_ok(t);
    detail += "case " + std::to_string(case_id) + ": " + rate_line(t) + fmt(" (%.1f s)", seconds_since(t0)) +
              (case_id == 1 ? "; " : "");
  }
  report("2", ok, "Ex3 elm2, 4 levels, " + detail);
}

void criterion_3() {
  ProblemConfig c;
  std::string detail;
  bool ok = true;
  for (auto e : {ElementChoice::elm1, ElementChoice::elm2, ElementChoice::q1q1p0}) {
    c.element = e;
    const auto r = infsup_sweep(c, 5);
    std::string seq;
    for (const auto& l : r.levels) seq += (seq.empty() ? "" : " ") + fmt("%.3e", l.gamma_est);
    const double ratio = r.decay_ratio();
    const bool pass = e == ElementChoice::q1q1p0 ? (r.monotone_decreasing() && ratio < 0.5) : ratio >= 0.5;
    ok = ok && pass;
    detail += std::string(to_string(e)) + " [" + seq + "] ratio " + fmt("%.3f", ratio) +
              (pass ? "" : " (fails)") + (e == ElementChoice::q1q1p0 ? "" : "; ");
  }
  report("3", ok, "inf-sup over 5 levels: " + detail);
}

void criterion_4() {
  const auto bg = square({-0.5, -0.5}, {1.5, 1.5}, 2);
  const auto im = square({0, 0}, {1, 1}, 1);
  const FeSpace vh(bg, Family::Q1), lh(im, Family::P0);
  const auto t = build_intersections(*im, *bg);
  // Entry of the fragment [0.5,1]^2 for the hat at (0.5,0.5).
  double entry = std::nan("");
  for (const auto& f : t.cells[0]) {
    if (f.piece.bounds().lower.x < 0.49 || f.piece.bounds().lower.y < 0.49) continue;
    const auto dofs = vh.cell_dofs(static_cast<std::size_t>(f.background_cell));
    for (int a = 0; a < 4; ++a)
      if (distance(vh.dof_coords()[dofs[a]], {0.5, 0.5}) < 1e-12) {
        entry = 0.0;
        for (std::size_t q = 0; q < f.weights.size(); ++q)
          entry += f.weights[q] * eval_basis(Family::Q1, a, f.background[q]);
      }
  }
  const double entry_err = std::abs(entry - 0.140625);

  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  double row_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Point2 s{u(rng), u(rng)};
    const auto b = square({-1, -1}, {2, 2}, 7);
    const auto i = square(Point2{0, 0} + s, Point2{1, 1} + s, 3);
    const FeSpace v(b, Family::Q1), l(i, Family::P0);
    const auto c1 = assemble_C1(build_intersections(*i, *b), l, v);
    const Eigen::VectorXd sums = c1 * Eigen::VectorXd::Ones(c1.cols());
    for (std::size_t k = 0; k < i->num_cells(); ++k)
      row_err = std::max(row_err, std::abs(sums[static_cast<Eigen::Index>(k)] - cell_area(*i, k)));
  }
  report("4", entry_err <= 1e-12 && row_err <= 1e-10,
         "C1 entry error " + fmt("%.1e", entry_err) + ", row-sum error over 100 offsets " + fmt("%.1e", row_err));
}

void criterion_6() {
  report("6", worst.stopped == 0 && worst.residual <= 1e-10 && worst.constraint <= 1e-9,
         "max relative residual " + fmt("%.1e", worst.residual) + ", max ||C1u - C2u2||_inf " +
             fmt("%.1e", worst.constraint) + " over " + std::to_string(worst.solves) +
             " solves (all runs above)" +
             (worst.stopped ? ", " + std::to_string(worst.stopped) + " runs stopped by the residual check" : ""));
}

void criterion_7() {
  const auto bg = square({0, 0}, {2, 2}, 4);
  const auto im = square({0.5, 0.5}, {1.5, 1.5}, 2);
  const auto fam = families(ElementChoice::elm1);
  const FeSpace vh(bg, fam.background), v2(im, fam.immersed), lh(im, Family::P0);
  const auto t = build_intersections(*im, *bg);
  BlockSystem sys;
  sys.A1 = assemble_A1(vh, 1.0);
  sys.A2 = assemble_A2(v2, 1.0, 10.0);
  sys.C1 = assemble_C1(t, lh, vh);
  sys.C2 = assemble_C2(lh, v2);
  const auto rhs = assemble_rhs(vh, v2, 1.0, 1.0);
  sys.F1 = rhs.F1;
  sys.F2 = rhs.F2;
  sys.G = Eigen::VectorXd::Zero(sys.m());
  const auto bc = boundary_condition(vh);
  SolveOptions sparse;
  sparse.dense_threshold = 0;
  const auto sol = solve_saddle(sys, bc, sparse);
  worst.add(sol.residual, sol.constraint_residual);
  const auto reduced = apply_dirichlet(sys, bc);
  const Eigen::VectorXd x = Eigen::MatrixXd(block_matrix(reduced)).fullPivLu().solve(block_rhs(reduced));
  Eigen::VectorXd y(x.size());
  y << sol.u, sol.u2, sol.lambda;
  const double sol_err = (x - y).cwiseAbs().maxCoeff();

  // Dense pencil oracle through a Cholesky reduction.
  const auto norms = build_norm_matrices(v2, lh);
  const double h2 = im->h;
  const Eigen::MatrixXd c(sys.C2);
  const Eigen::MatrixXd d = Eigen::MatrixXd(norms.N1) * h2 * h2;
  const Eigen::MatrixXd mat = c.transpose() * d.inverse() * c;
  const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(Eigen::MatrixXd(norms.N2)).matrixL();
  const Eigen::MatrixXd a = l.triangularView<Eigen::Lower>().solve(mat);
  const Eigen::MatrixXd sym = l.triangularView<Eigen::Lower>().solve(a.transpose());
  const Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (sym + sym.transpose()), Eigen::EigenvaluesOnly)
          .eigenvalues();
  const double oracle = std::sqrt(ev[ev.size() - c.rows()]);
  const double gamma = infsup_constant(sys.C2, norms.N1, norms.N2, h2);
  report("7", sol_err <= 1e-11 && std::abs(gamma - oracle) <= 1e-8,
         "toy solution vs dense LU " + fmt("%.1e", sol_err) + ", gamma " + fmt("%.10f", gamma) + " vs oracle " +
             fmt("%.1e", std::abs(gamma - oracle)));
}

void criterion_8() {
  double err = 0.0;
  const auto rule = gauss_square(4);
  double k[4][4] = {};
  double bubble_integral = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        k[i][j] += rule.weights[q] * dot(eval_grad(Family::Q1, i, rule.points[q]), eval_grad(Family::Q1, j, rule.points[q]));
    bubble_integral += rule.weights[q] * bubble(rule.points[q]);
  }
  for (int i = 0; i < 4; ++i) {
    err = std::max(err, std::abs(k[i][i] - 2.0 / 3.0));
    err = std::max(err, std::abs(k[i][(i + 1) % 4] + 1.0 / 6.0));
    err = std::max(err, std::abs(k[i][(i + 2) % 4] + 1.0 / 3.0));
  }
  err = std::max(err, std::abs(bubble_integral - 4.0 / 9.0));
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  for (int n = 1; n <= 6; ++n) {
    const auto sq = gauss_square(n);
    for (int a = 0; a < 2 * n; ++a)
      for (int b = 0; b < 2 * n; ++b) {
        double s = 0.0;
        for (std::size_t q = 0; q < sq.size(); ++q)
          s += sq.weights[q] * std::pow(sq.points[q].x, a) * std::pow(sq.points[q].y, b);
        err = std::max(err, std::abs(s - 1.0 / ((a + 1) * (b + 1))));
      }
  }
  for (int d = 1; d <= 5; ++d) {
    const auto tr = gauss_triangle(d);
    for (int a = 0; a <= d; ++a)
      for (int b = 0; a + b <= d; ++b) {
        double s = 0.0;
        for (std::size_t q = 0; q < tr.size(); ++q)
          s += tr.weights[q] * std::pow(tr.points[q].x, a) * std::pow(tr.points[q].y, b);
        err = std::max(err, std::abs(s - fact(a) * fact(b) / fact(a + b + 2)));
      }
  }
  report("8", err <= 1e-13, "element and quadrature tables, max error " + fmt("%.1e", err));
}

void supplementary() {
  // beta2 = 10000 on the larger domains sits at the double-precision residual
  // floor; those runs use a looser solver tolerance so the rates can still be
  // reported, and criterion 6 counts their residuals.
  for (int example : {1, 2, 4})
    for (int case_id : {1, 2})
      for (auto e : {ElementChoice::elm1, ElementChoice::elm2}) {
        const auto t0 = std::chrono::steady_clock::now();
        const double tol = case_id == 2 ? 1e-8 : 1e-10;
        const std::string id = "S" + std::to_string(example);
        const std::string what = "Ex" + std::to_string(example) + " case " + std::to_string(case_id) + " " +
                                 std::string(to_string(e)) + " self-convergence" +
                                 (case_id == 2 ? " (solver tolerance 1e-8)" : "") + ": ";
        try {
          const auto t = convergence(example, case_id, e, 3, 16, tol);
          report(id, t.rates.l2_u >= 0.5 && t.rates.l2_u2 >= 0.5,
                 what + "L2_u " + fmt("%.3f", t.rates.l2_u) + ", L2_u2 " + fmt("%.3f", t.rates.l2_u2) +
                     fmt(", max residual %.1e", [&] {
                       double r = 0.0;
                       for (const auto& row : t.rows) r = std::max(r, row.residual);
                       return r;
                     }()) + fmt(" (%.1f s)", seconds_since(t0)),
                 false);
        } catch (const std::exception& ex) {
          ++worst.stopped;
          report(id, false, what + ex.what(), false);
        }
      }
  try {
    const auto t = convergence(3, 3, ElementChoice::q1q1p0, 4);
    report("S3", t.rates.h1_u2 < 0.2,
           "Ex3 case 3 q1q1p0: H1_u2 rate " + fmt("%.3f", t.rates.h1_u2) + " (expected below 0.2)", false);
  } catch (const std::exception& ex) {
    ++worst.stopped;
    report("S3", false, std::string("Ex3 case 3 q1q1p0: ") + ex.what(), false);
  }
}

}  // namespace

int main() {
  try {
    bool done5 = false;
    criterion_8();
    criterion_4();
    criterion_7();
    criterion_1_5(done5);
    criterion_2();
    criterion_3();
    supplementary();
    criterion_6();
  } catch (const std::exception& e) {
    std::printf("[FAIL] error: %s\n", e.what());
    return 1;
  }
  std::printf("%d primary criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
