#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fddlm/experiment.hpp"
#include "fddlm/io.hpp"

namespace fs = std::filesystem;
using namespace fddlm;

namespace {

struct Options {
  std::string config_path;
  std::string output;
  int threads = 0;
  bool fragments = false;
};

ProblemConfig load_config(const Options& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw ConfigError("cannot read configuration file " + o.config_path);
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("invalid JSON in ") + o.config_path + ": " + e.what());
    }
  }
  if (!o.output.empty()) j["output_dir"] = o.output;
  if (o.threads > 0) j["threads"] = o.threads;
  return config_from_json(j);
}

void cmd_solve(const ProblemConfig& c, bool fragments) {
  const auto L = solve_level(c, c.level);
  const fs::path dir = c.output_dir;
  const std::string header = "fddlm " + to_json(c).dump();
  const auto nodes = static_cast<Eigen::Index>(L.background->num_nodes());
  const auto nodes2 = static_cast<Eigen::Index>(L.immersed->num_nodes());
  write_vtk(dir / "background.vtk", *L.background, header, {{"u", L.solution.u.head(nodes)}});
  write_vtk(dir / "immersed.vtk", *L.immersed, header, {{"u2", L.solution.u2.head(nodes2)}},
            {{"lambda", L.solution.lambda}});
  if (fragments) write_fragments_vtk(dir / "fragments.vtk", L.table, header);

  nlohmann::json summary{{"config", to_json(c)},
                         {"level", c.level},
                         {"h", L.background->h},
                         {"h2", L.immersed->h},
                         {"dofs",
                          {{"V_h", L.vh->size()}, {"V_2h", L.v2->size()}, {"Lambda_h", L.lambda->size()}}},
                         {"fragments", L.table.num_fragments()},
                         {"residual", L.solution.residual},
                         {"constraint_residual", L.solution.constraint_residual},
                         {"lambda_integral", multiplier_integral(L.solution.lambda, *L.immersed)},
                         {"seconds", L.seconds}};
  if (const auto exact = exact_solution(c)) {
    const auto e = error_norms(L.solution, *L.vh, *L.v2, L.table, *exact);
    summary["errors"] = {{"l2_u", e.l2_u}, {"h1_u", e.h1_u}, {"l2_u2", e.l2_u2}, {"h1_u2", e.h1_u2}};
  }
  write_json(dir / "summary.json", summary);
  std::printf("level %d: dofs %zu + %zu + %zu, residual %.3e, constraint residual %.3e\n", c.level,
              L.vh->size(), L.v2->size(), L.lambda->size(), L.solution.residual,
              L.solution.constraint_residual);
  if (summary.contains("errors")) {
    const auto& e = summary["errors"];
    std::printf("errors: L2_u %.6e  H1_u %.6e  L2_u2 %.6e  H1_u2 %.6e\n", e["l2_u"].get<double>(),
                e["h1_u"].get<double>(), e["l2_u2"].get<double>(), e["h1_u2"].get<double>());
  }
}

void cmd_convergence(const ProblemConfig& c) {
  const auto t = run_convergence(c);
  const fs::path dir = c.output_dir;
  write_convergence_csv(dir / "convergence.csv", t);
  write_json(dir / "convergence.json", to_json(t));
  std::printf("%5s %12s %12s %12s %12s %12s %12s %12s\n", "level", "h", "L2_u", "H1_u", "L2_u2",
              "H1_u2", "lambda_err", "sum_lambda");
  for (const auto& r : t.rows)
    std::printf("%5d %12.4e %12.4e %12.4e %12.4e %12.4e %12.4e %12.4e\n", r.level, r.h,
                r.errors.l2_u, r.errors.h1_u, r.errors.l2_u2, r.errors.h1_u2, r.lambda_error,
                r.lambda_integral);
  std::printf("%5s %12s %12.3f %12.3f %12.3f %12.3f %12.3f\n", "rates", "", t.rates.l2_u,
              t.rates.h1_u, t.rates.l2_u2, t.rates.h1_u2, t.rates.lambda);
}

void cmd_infsup(const ProblemConfig& c) {
  const auto r = infsup_sweep(c, c.levels);
  const fs::path dir = c.output_dir;
  write_infsup_csv(dir / "infsup.csv", r, c);
  write_json(dir / "infsup.json", to_json(r, c));
  std::printf("%5s %12s %8s %8s %14s %14s %10s %10s\n", "level", "h2", "dim_V2h", "dim_Lh",
              "sigma_min", "gamma_est", "log10 h2", "log10 g");
  for (const auto& l : r.levels)
    std::printf("%5d %12.4e %8zu %8zu %14.6e %14.6e %10.4f %10.4f\n", l.level, l.h2, l.dim_v2h,
                l.dim_lh, l.sigma_min, l.gamma_est, std::log10(l.h2), std::log10(l.gamma_est));
  std::printf("%s: gamma finest/coarsest %.4f, %s\n", r.element.c_str(), r.decay_ratio(),
              std::string(to_string(r.verdict())).c_str());
}

void cmd_mesh_export(const ProblemConfig& c, bool fragments) {
  const auto g = make_geometry(c);
  const auto background = build_mesh(g.background, c.level);
  const auto immersed = build_mesh(g.immersed, c.level);
  const fs::path dir = c.output_dir;
  const std::string header = "fddlm " + to_json(c).dump();
  write_vtk(dir / "background_mesh.vtk", background, header);
  write_vtk(dir / "immersed_mesh.vtk", immersed, header);
  if (fragments)
    write_fragments_vtk(dir / "fragments.vtk", build_intersections(immersed, background, c.threads),
                        header);
  std::printf("background: %zu cells, h %.6e; immersed: %zu cells, h2 %.6e\n", background.num_cells(),
              background.h, immersed.num_cells(), immersed.h);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fictitious domain solver for elliptic interface problems"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration");
    sub->add_option("--output", o.output, "output directory (overrides output_dir)");
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  };
  auto* solve = app.add_subcommand("solve", "solve one level and export fields");
  auto* conv = app.add_subcommand("convergence", "refinement study with rates");
  auto* infsup = app.add_subcommand("infsup", "numerical inf-sup test");
  auto* mesh = app.add_subcommand("mesh-export", "write the meshes of an example");
  for (auto* sub : {solve, conv, infsup, mesh}) add_common(sub);
  solve->add_flag("--fragments", o.fragments, "also dump the intersection mesh");
  mesh->add_flag("--fragments", o.fragments, "also dump the intersection mesh");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto c = load_config(o);
    if (solve->parsed()) cmd_solve(c, o.fragments);
    if (conv->parsed()) cmd_convergence(c);
    if (infsup->parsed()) cmd_infsup(c);
    if (mesh->parsed()) cmd_mesh_export(c, o.fragments);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
