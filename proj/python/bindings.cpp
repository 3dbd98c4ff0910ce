#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "fddlm/experiment.hpp"
#include "fddlm/geometry.hpp"
#include "fddlm/io.hpp"

namespace py = pybind11;
using namespace fddlm;

namespace {

ProblemConfig parse(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(j);
}

using Points = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;
using Cells = Eigen::Matrix<int, Eigen::Dynamic, 4, Eigen::RowMajor>;

py::tuple mesh_arrays(const QuadMesh& m) {
  Points p(m.num_nodes(), 2);
  for (std::size_t i = 0; i < m.num_nodes(); ++i) p.row(i) << m.nodes[i].x, m.nodes[i].y;
  Cells c(m.num_cells(), 4);
  for (std::size_t i = 0; i < m.num_cells(); ++i)
    c.row(i) << m.cells[i][0], m.cells[i][1], m.cells[i][2], m.cells[i][3];
  return py::make_tuple(p, c, m.h);
}

ConvexPolygon polygon(const Points& p) {
  ConvexPolygon out;
  for (Eigen::Index i = 0; i < p.rows(); ++i) out.vertices.push_back({p(i, 0), p(i, 1)});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fictitious domain solver for elliptic interface problems";
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("resolve_config", [](const std::string& text) { return to_json(parse(text)).dump(); },
        "Validated configuration with defaults filled in, as JSON text.");

  m.def(
      "solve",
      [](const std::string& text, int level) {
        const auto c = parse(text);
        LevelSolution s;
        {
          py::gil_scoped_release release;
          s = solve_level(c, level < 0 ? c.level : level);
        }
        py::dict out;
        out["config"] = to_json(c).dump();
        out["u"] = s.solution.u;
        out["u2"] = s.solution.u2;
        out["lambda"] = s.solution.lambda;
        out["residual"] = s.solution.residual;
        out["constraint_residual"] = s.solution.constraint_residual;
        out["lambda_integral"] = multiplier_integral(s.solution.lambda, *s.immersed);
        out["h"] = s.background->h;
        out["h2"] = s.immersed->h;
        out["fragments"] = s.table.num_fragments();
        if (const auto exact = exact_solution(c)) {
          const auto e = error_norms(s.solution, *s.vh, *s.v2, s.table, *exact);
          py::dict errors;
          errors["l2_u"] = e.l2_u;
          errors["h1_u"] = e.h1_u;
          errors["l2_u2"] = e.l2_u2;
          errors["h1_u2"] = e.h1_u2;
          out["errors"] = errors;
        }
        return out;
      },
      py::arg("config"), py::arg("level") = -1);

  m.def(
      "convergence",
      [](const std::string& text) {
        const auto c = parse(text);
        py::gil_scoped_release release;
        return to_json(run_convergence(c)).dump();
      },
      py::arg("config"));

  m.def(
      "infsup",
      [](const std::string& text) {
        const auto c = parse(text);
        py::gil_scoped_release release;
        return to_json(infsup_sweep(c, c.levels), c).dump();
      },
      py::arg("config"));

  m.def(
      "meshes",
      [](const std::string& text, int level) {
        const auto c = parse(text);
        const auto g = make_geometry(c);
        const int k = level < 0 ? c.level : level;
        return py::make_tuple(mesh_arrays(build_mesh(g.background, k)),
                              mesh_arrays(build_mesh(g.immersed, k)));
      },
      py::arg("config"), py::arg("level") = -1,
      "((nodes, cells, h), (nodes, cells, h2)) of the background and immersed meshes.");

  m.def("signed_area", [](const Points& p) { return signed_area(polygon(p)); });
  m.def("clip_convex", [](const Points& subject, const Points& clip) -> py::object {
    const auto r = clip_convex(polygon(subject), polygon(clip));
    if (!r) return py::none();
    Points out(r->size(), 2);
    for (std::size_t i = 0; i < r->size(); ++i) out.row(i) << r->vertices[i].x, r->vertices[i].y;
    return py::cast(out);
  });
}
