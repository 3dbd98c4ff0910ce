#include "fddlm/experiment.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "fddlm/parallel.hpp"

namespace fddlm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Coefficients {
  double beta, beta2;
};

Coefficients case_coefficients(int case_id) {
  switch (case_id) {
    case 1: return {1.0, 10.0};
    case 2: return {1.0, 10000.0};
    case 3: return {10.0, 1.0};
    default: throw ConfigError("case must be 1, 2 or 3");
  }
}

}  // namespace

double ProblemConfig::beta() const { return case_coefficients(case_id).beta; }
double ProblemConfig::beta2() const { return case_coefficients(case_id).beta2; }

void ProblemConfig::validate() const {
  if (example < 1 || example > 4) throw ConfigError("example must be 1, 2, 3 or 4");
  case_coefficients(case_id);
  if (levels < 1) throw ConfigError("levels must be at least 1");
  if (level < 0) throw ConfigError("level must be nonnegative");
  if (!(ratio > 0.0) || !std::isfinite(ratio)) throw ConfigError("ratio must be positive");
  if (base_cells < 1) throw ConfigError("base_cells must be positive");
  if (threads < 1) throw ConfigError("threads must be positive");
  if (!std::isfinite(f) || !std::isfinite(f2)) throw ConfigError("f and f2 must be finite");
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) throw ConfigError("tolerance must be positive");
}

ProblemConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  static const std::set<std::string> known{"example", "case",  "element",     "levels",
                                           "level",   "ratio", "base_cells",
                                           "f",       "f2",    "threads",     "tolerance",
                                           "output_dir"};
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw ConfigError("unknown configuration key '" + key + "'");

  ProblemConfig c;
  try {
    c.example = j.value("example", c.example);
    c.case_id = j.value("case", c.case_id);
    c.levels = j.value("levels", c.levels);
    c.level = j.value("level", c.level);
    c.ratio = j.value("ratio", c.ratio);
    c.base_cells = j.value("base_cells", c.base_cells);
    c.f = j.value("f", c.f);
    c.f2 = j.value("f2", c.f2);
    c.threads = j.value("threads", c.threads);
    c.tolerance = j.value("tolerance", c.tolerance);
    c.output_dir = j.value("output_dir", c.output_dir);
    const std::string tag = j.value("element", std::string(to_string(c.element)));
    const auto e = parse_element(tag);
    if (!e) throw ConfigError("unknown element '" + tag + "'; valid tags are elm1, elm2, q1q1p0");
    c.element = *e;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("malformed configuration: ") + ex.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const ProblemConfig& c) {
  return {{"example", c.example},       {"case", c.case_id},
          {"element", to_string(c.element)}, {"levels", c.levels},
          {"level", c.level},           {"ratio", c.ratio},
          {"base_cells", c.base_cells},
          {"f", c.f},                   {"f2", c.f2},
          {"beta", c.beta()},           {"beta2", c.beta2()},
          {"threads", c.threads},       {"tolerance", c.tolerance},
          {"output_dir", c.output_dir}};
}

namespace {

DomainSpec immersed_domain(int example, int resolution) {
  switch (example) {
    case 1:
      return DomainSpec::square_patch({std::numbers::e, std::numbers::e},
                                      {1.0 + std::numbers::pi, 1.0 + std::numbers::pi},
                                      resolution);
    case 2:
      return DomainSpec::lshape({1.0, 1.0}, {3.0, 3.0}, {2.0, 2.0}, 2 * resolution);
    case 3:
      return DomainSpec::disk({0.0, 0.0}, 1.0, resolution);
    default:
      return DomainSpec::flower({0.0, 0.0}, 1.0, 0.1, 5, resolution);
  }
}

DomainSpec background_domain(int example, int cells) {
  switch (example) {
    case 1:
    case 2: return DomainSpec::rectangle({0.0, 0.0}, {6.0, 6.0}, cells, cells);
    case 3: return DomainSpec::rectangle({-1.4, -1.4}, {1.4, 1.4}, cells, cells);
    default: return DomainSpec::rectangle({-2.0, -2.0}, {3.0, 3.0}, cells, cells);
  }
}

// Level-0 mesh size of an immersed domain without building curved meshes
// more than once per resolution.
double immersed_h(int example, int resolution) {
  return build_mesh(immersed_domain(example, resolution), 0).h;
}

}  // namespace

ExperimentGeometry make_geometry(const ProblemConfig& c) {
  c.validate();
  ExperimentGeometry g;
  g.background = background_domain(c.example, c.base_cells);
  const double h = build_mesh(g.background, 0).h;
  int best = 1;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int r = 1; r <= 256; ++r) {
    const double q = immersed_h(c.example, r) / h;
    const double gap = std::abs(std::log(q / c.ratio));
    if (gap < best_gap) {
      best_gap = gap;
      best = r;
    }
    if (q < 0.5 * c.ratio) break;
  }
  g.immersed = immersed_domain(c.example, best);
  return g;
}

namespace {

// u = a - b (x^2 + y^2)
AnalyticField radial_quadratic(double a, double b) {
  return {[a, b](Point2 p) { return a - b * (p.x * p.x + p.y * p.y); },
          [b](Point2 p) { return Point2{-2.0 * b * p.x, -2.0 * b * p.y}; }};
}

}  // namespace

std::optional<ReferenceSolution> exact_solution(const ProblemConfig& c) {
  if (c.example != 3 || c.f != 1.0 || c.f2 != 1.0) return std::nullopt;
  switch (c.case_id) {
    case 1: {
      const auto u2 = radial_quadratic(31.0 / 40.0, 1.0 / 40.0);
      return ReferenceSolution{radial_quadratic(1.0, 0.25), u2, u2};
    }
    case 2: {
      const auto u2 = radial_quadratic(30001.0 / 40000.0, 1.0 / 40000.0);
      return ReferenceSolution{radial_quadratic(1.0, 0.25), u2, u2};
    }
    case 3: {
      const auto u2 = radial_quadratic(13.0 / 40.0, 10.0 / 40.0);
      return ReferenceSolution{radial_quadratic(0.1, 1.0 / 40.0), u2, u2};
    }
    default:
      return std::nullopt;
  }
}

LevelSolution solve_level(const ProblemConfig& c, int level) {
  const auto start = std::chrono::steady_clock::now();
  const auto geom = make_geometry(c);
  const auto fams = families(c.element);

  LevelSolution out;
  out.level = level;
  out.background = std::make_shared<const QuadMesh>(build_mesh(geom.background, level));
  out.immersed = std::make_shared<const QuadMesh>(build_mesh(geom.immersed, level));
  out.vh = std::make_shared<const FeSpace>(out.background, fams.background);
  out.v2 = std::make_shared<const FeSpace>(out.immersed, fams.immersed);
  out.lambda = std::make_shared<const FeSpace>(out.immersed, Family::P0);
  out.table = build_intersections(*out.immersed, *out.background, c.threads);

  auto& sys = out.system;
  sys.A1 = assemble_A1(*out.vh, c.beta());
  sys.A2 = assemble_A2(*out.v2, c.beta(), c.beta2());
  sys.C1 = assemble_C1(out.table, *out.lambda, *out.vh);
  sys.C2 = assemble_C2(*out.lambda, *out.v2);
  auto rhs = assemble_rhs(*out.vh, *out.v2, c.f, c.f2);
  sys.F1 = std::move(rhs.F1);
  sys.F2 = std::move(rhs.F2);
  sys.G = Eigen::VectorXd::Zero(sys.m());

  const auto exact = exact_solution(c);
  out.bc = boundary_condition(*out.vh, exact ? exact->u_outer.value : ScalarField{});
  SolveOptions options;
  options.tolerance = c.tolerance;
  out.solution = solve_saddle(sys, out.bc, options);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double least_squares_rate(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (std::isfinite(x[i]) && std::isfinite(y[i]) && x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  const auto n = static_cast<double>(lx.size());
  if (lx.size() < 3) return kNaN;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : kNaN;
}

namespace {

ReferenceSolution fine_reference(const LevelSolution& fine) {
  auto u = std::make_shared<FieldEvaluator>(*fine.vh, fine.solution.u);
  auto u2 = std::make_shared<FieldEvaluator>(*fine.v2, fine.solution.u2);
  AnalyticField fu{[u](Point2 p) { return u->value(p); }, [u](Point2 p) { return u->gradient(p); }};
  AnalyticField fu2{[u2](Point2 p) { return u2->value(p); },
                    [u2](Point2 p) { return u2->gradient(p); }};
  return {fu, fu, fu2};
}

}  // namespace

RateTable run_convergence(const ProblemConfig& c) {
  c.validate();
  RateTable table;
  table.config = c;
  const auto exact = exact_solution(c);
  table.exact_reference = exact.has_value();
  const int solved = exact ? c.levels : c.levels + 2;

  std::vector<LevelSolution> levels(static_cast<std::size_t>(solved));
  ProblemConfig inner = c;
  if (c.threads > 1) inner.threads = 1;
  parallel_for(levels.size(), c.threads, [&](std::size_t k) {
    levels[k] = solve_level(inner, static_cast<int>(k));
  });

  for (int k = 0; k < c.levels; ++k) {
    const auto& L = levels[k];
    RateRow row;
    row.level = k;
    row.h = L.background->h;
    row.h2 = L.immersed->h;
    row.dofs = L.vh->size() + L.v2->size() + L.lambda->size();
    row.residual = L.solution.residual;
    row.constraint_residual = L.solution.constraint_residual;
    row.lambda_integral = multiplier_integral(L.solution.lambda, *L.immersed);
    const bool has_fine = k + 2 < solved;
    if (exact) {
      row.errors = error_norms(L.solution, *L.vh, *L.v2, L.table, *exact);
    } else {
      row.errors = error_norms(L.solution, *L.vh, *L.v2, L.table, fine_reference(levels[k + 2]));
    }
    row.lambda_error = has_fine ? multiplier_error(L.solution.lambda, *L.immersed,
                                                   levels[k + 2].solution.lambda,
                                                   *levels[k + 2].immersed)
                                : kNaN;
    table.rows.push_back(row);
  }

  std::vector<double> h, l2u, h1u, l2u2, h1u2, lam;
  for (const auto& r : table.rows) {
    h.push_back(r.h);
    l2u.push_back(r.errors.l2_u);
    h1u.push_back(r.errors.h1_u);
    l2u2.push_back(r.errors.l2_u2);
    h1u2.push_back(r.errors.h1_u2);
    lam.push_back(r.lambda_error);
  }
  table.rates = {least_squares_rate(h, l2u), least_squares_rate(h, h1u),
                 least_squares_rate(h, l2u2), least_squares_rate(h, h1u2),
                 least_squares_rate(h, lam)};
  return table;
}

InfSupReport infsup_sweep(const ProblemConfig& c, int levels, InfSupRoute route) {
  c.validate();
  if (levels < 3) throw ConfigError("an inf-sup sweep needs at least 3 levels");
  InfSupReport report;
  report.element = std::string(to_string(c.element));
  const auto fams = families(c.element);
  const DomainSpec spec = make_geometry(c).immersed;
  for (int k = 0; k < levels; ++k) {
    auto mesh = std::make_shared<const QuadMesh>(build_mesh(spec, k));
    const FeSpace v2(mesh, fams.immersed);
    const FeSpace lambda(mesh, Family::P0);
    const auto C2 = assemble_C2(lambda, v2);
    const auto norms = build_norm_matrices(v2, lambda);
    InfSupRoute r = route;
    if (r == InfSupRoute::automatic)
      r = v2.size() <= 1200 ? InfSupRoute::pencil : InfSupRoute::lanczos;
    double gamma = 0.0;
    switch (r) {
      case InfSupRoute::pencil: gamma = infsup_constant(C2, norms.N1, norms.N2, mesh->h); break;
      case InfSupRoute::svd: gamma = infsup_constant_svd(C2, norms.N1, norms.N2, mesh->h); break;
      default: gamma = infsup_constant_lanczos(C2, norms.N1, norms.N2, mesh->h); break;
    }
    report.levels.push_back({k, mesh->h, v2.size(), lambda.size(), gamma * gamma, gamma});
  }
  return report;
}

}  // namespace fddlm
