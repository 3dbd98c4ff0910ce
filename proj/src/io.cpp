#include "fddlm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fddlm {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::string title_line(const std::string& header) {
  std::string t = header.substr(0, 255);
  for (char& ch : t)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return t;
}

void write_scalars(std::ofstream& out, const NamedField& field, std::size_t expected,
                   const char* where) {
  const auto& [name, values] = field;
  if (static_cast<std::size_t>(values.size()) != expected)
    throw std::invalid_argument(std::string("write_vtk: ") + where + " field '" + name +
                                "' has the wrong length");
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (Eigen::Index i = 0; i < values.size(); ++i) out << format_real(values[i]) << '\n';
}

}  // namespace

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", x);
  return buf;
}

void write_vtk(const std::filesystem::path& path, const QuadMesh& mesh, const std::string& header,
               const std::vector<NamedField>& point_data,
               const std::vector<NamedField>& cell_data) {
  auto out = open_output(path);
  out << "# vtk DataFile Version 3.0\n" << title_line(header) << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (const auto& p : mesh.nodes) out << format_real(p.x) << ' ' << format_real(p.y) << " 0\n";
  out << "CELLS " << mesh.num_cells() << ' ' << 5 * mesh.num_cells() << '\n';
  for (const auto& c : mesh.cells) out << "4 " << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
  out << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (std::size_t i = 0; i < mesh.num_cells(); ++i) out << "9\n";
  if (!point_data.empty()) {
    out << "POINT_DATA " << mesh.num_nodes() << '\n';
    for (const auto& f : point_data) write_scalars(out, f, mesh.num_nodes(), "point");
  }
  if (!cell_data.empty()) {
    out << "CELL_DATA " << mesh.num_cells() << '\n';
    for (const auto& f : cell_data) write_scalars(out, f, mesh.num_cells(), "cell");
  }
}

void write_fragments_vtk(const std::filesystem::path& path, const CouplingTable& table,
                         const std::string& header) {
  std::size_t npoints = 0, nfrag = 0;
  for (const auto& cell : table.cells)
    for (const auto& f : cell) {
      npoints += f.piece.size();
      ++nfrag;
    }
  auto out = open_output(path);
  out << "# vtk DataFile Version 3.0\n" << title_line(header) << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << npoints << " double\n";
  for (const auto& cell : table.cells)
    for (const auto& f : cell)
      for (const auto& p : f.piece.vertices) out << format_real(p.x) << ' ' << format_real(p.y) << " 0\n";
  out << "CELLS " << nfrag << ' ' << nfrag + npoints << '\n';
  std::size_t next = 0;
  for (const auto& cell : table.cells)
    for (const auto& f : cell) {
      out << f.piece.size();
      for (std::size_t k = 0; k < f.piece.size(); ++k) out << ' ' << next++;
      out << '\n';
    }
  out << "CELL_TYPES " << nfrag << '\n';
  for (std::size_t i = 0; i < nfrag; ++i) out << "7\n";
  out << "CELL_DATA " << nfrag << "\nSCALARS immersed_cell int 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < table.cells.size(); ++i)
    for (std::size_t k = 0; k < table.cells[i].size(); ++k) out << i << '\n';
  out << "SCALARS background_cell int 1\nLOOKUP_TABLE default\n";
  for (const auto& cell : table.cells)
    for (const auto& f : cell) out << f.background_cell << '\n';
}

namespace {

nlohmann::json real(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

}  // namespace

nlohmann::json to_json(const RateTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"level", r.level},
                    {"h", r.h},
                    {"h2", r.h2},
                    {"dofs", r.dofs},
                    {"l2_u", real(r.errors.l2_u)},
                    {"h1_u", real(r.errors.h1_u)},
                    {"l2_u2", real(r.errors.l2_u2)},
                    {"h1_u2", real(r.errors.h1_u2)},
                    {"lambda_err", real(r.lambda_error)},
                    {"lambda_integral", r.lambda_integral},
                    {"residual", r.residual},
                    {"constraint_residual", r.constraint_residual}});
  return {{"config", to_json(t.config)},
          {"reference", t.exact_reference ? "exact" : "level+2"},
          {"levels", rows},
          {"rates",
           {{"l2_u", real(t.rates.l2_u)},
            {"h1_u", real(t.rates.h1_u)},
            {"l2_u2", real(t.rates.l2_u2)},
            {"h1_u2", real(t.rates.h1_u2)},
            {"lambda_err", real(t.rates.lambda)}}}};
}

nlohmann::json to_json(const InfSupReport& r, const ProblemConfig& c) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : r.levels)
    levels.push_back({{"level", l.level},
                      {"h2", l.h2},
                      {"dim_V2h", l.dim_v2h},
                      {"dim_Lh", l.dim_lh},
                      {"sigma_min", l.sigma_min},
                      {"gamma_est", l.gamma_est}});
  return {{"config", to_json(c)},
          {"element", r.element},
          {"levels", levels},
          {"decay_ratio", r.decay_ratio()},
          {"verdict", to_string(r.verdict())}};
}

void write_convergence_csv(const std::filesystem::path& path, const RateTable& t) {
  auto out = open_output(path);
  out << "# config: " << to_json(t.config).dump() << '\n';
  out << "level,h,h2,L2_u,H1_u,L2_u2,H1_u2,lambda_err\n";
  for (const auto& r : t.rows)
    out << r.level << ',' << format_real(r.h) << ',' << format_real(r.h2) << ','
        << format_real(r.errors.l2_u) << ',' << format_real(r.errors.h1_u) << ','
        << format_real(r.errors.l2_u2) << ',' << format_real(r.errors.h1_u2) << ','
        << format_real(r.lambda_error) << '\n';
  out << "rates,," << format_real(t.rates.l2_u) << ',' << format_real(t.rates.h1_u) << ','
      << format_real(t.rates.l2_u2) << ',' << format_real(t.rates.h1_u2) << ','
      << format_real(t.rates.lambda) << '\n';
}

void write_infsup_csv(const std::filesystem::path& path, const InfSupReport& r,
                      const ProblemConfig& c) {
  auto out = open_output(path);
  out << "# config: " << to_json(c).dump() << '\n';
  out << "level,h2,dim_V2h,dim_Lh,sigma_min,gamma_est\n";
  for (const auto& l : r.levels)
    out << l.level << ',' << format_real(l.h2) << ',' << l.dim_v2h << ',' << l.dim_lh << ','
        << format_real(l.sigma_min) << ',' << format_real(l.gamma_est) << '\n';
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

}  // namespace fddlm
