#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "fddlm/coupling.hpp"
#include "fddlm/experiment.hpp"
#include "fddlm/infsup.hpp"
#include "fddlm/mesh.hpp"

namespace fddlm {

using NamedField = std::pair<std::string, Eigen::VectorXd>;

/// Legacy ASCII VTK unstructured grid (cell type 9). Point fields must have
/// one value per mesh node, cell fields one per cell. The title line holds
/// `header` (truncated to the 255 characters the format allows).
void write_vtk(const std::filesystem::path& path, const QuadMesh& mesh, const std::string& header,
               const std::vector<NamedField>& point_data = {},
               const std::vector<NamedField>& cell_data = {});

/// Fragments of a coupling table as VTK polygons, with the owning immersed and
/// background cell indices as cell data.
void write_fragments_vtk(const std::filesystem::path& path, const CouplingTable& table,
                         const std::string& header);

/// printf("%.12e") of a double; NaN and infinities as "nan", "inf", "-inf".
std::string format_real(double x);

nlohmann::json to_json(const RateTable& t);
nlohmann::json to_json(const InfSupReport& r, const ProblemConfig& c);

/// One row per level plus a final "rates" row.
void write_convergence_csv(const std::filesystem::path& path, const RateTable& t);
void write_infsup_csv(const std::filesystem::path& path, const InfSupReport& r,
                      const ProblemConfig& c);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace fddlm
