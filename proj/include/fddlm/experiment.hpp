#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fddlm/coupling.hpp"
#include "fddlm/infsup.hpp"
#include "fddlm/mesh.hpp"
#include "fddlm/space.hpp"
#include "fddlm/system.hpp"

namespace fddlm {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One experiment of the numerical study.
///
/// example: 1 square patch, 2 L-shape, 3 disk, 4 flower.
/// case_id: 1 (beta, beta2) = (1, 10), 2 (1, 10000), 3 (10, 1).
struct ProblemConfig {
  int example = 3;
  int case_id = 1;
  ElementChoice element = ElementChoice::elm1;
  int levels = 4;          // refinement levels of a convergence or inf-sup run
  int level = 2;           // level used by `solve` and `mesh-export`
  double ratio = 1.0;      // target h2 / h at level 0
  int base_cells = 16;     // background cells per side at level 0
  double f = 1.0;
  double f2 = 1.0;
  int threads = 1;
  double tolerance = 1e-10;  // relative residual accepted from the block solve
  std::string output_dir = "fddlm_out";

  double beta() const;
  double beta2() const;
  /// Throws ConfigError.
  void validate() const;
};

/// Parses a run configuration. Missing fields take the defaults above;
/// unknown keys and invalid values raise ConfigError.
ProblemConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProblemConfig& c);

struct ExperimentGeometry {
  DomainSpec background;
  DomainSpec immersed;
};

/// Domains of the chosen example. The level-0 immersed resolution is the one
/// whose mesh size ratio h2/h is closest (in log scale) to `ratio`.
ExperimentGeometry make_geometry(const ProblemConfig& c);

/// Closed-form solution of the disk example, if the configuration has one.
std::optional<ReferenceSolution> exact_solution(const ProblemConfig& c);

struct LevelSolution {
  int level = 0;
  std::shared_ptr<const QuadMesh> background;
  std::shared_ptr<const QuadMesh> immersed;
  std::shared_ptr<const FeSpace> vh, v2, lambda;
  CouplingTable table;
  BlockSystem system;
  DirichletBC bc;
  SolutionTriple solution;
  double seconds = 0.0;
};

LevelSolution solve_level(const ProblemConfig& c, int level);

struct RateRow {
  int level = 0;
  double h = 0.0;
  double h2 = 0.0;
  std::size_t dofs = 0;
  ErrorNorms errors;
  double lambda_error = 0.0;  // NaN when no finer reference is available
  double lambda_integral = 0.0;
  double residual = 0.0;
  double constraint_residual = 0.0;
};

struct Rates {
  double l2_u = 0.0, h1_u = 0.0, l2_u2 = 0.0, h1_u2 = 0.0, lambda = 0.0;
};

struct RateTable {
  ProblemConfig config;
  bool exact_reference = false;
  std::vector<RateRow> rows;
  Rates rates;  // NaN where fewer than three levels are available
};

/// Least-squares slope of log(y) against log(x), ignoring non-finite or
/// nonpositive entries. NaN with fewer than three usable points.
double least_squares_rate(const std::vector<double>& x, const std::vector<double>& y);

/// Refinement study. With an exact solution the levels 0..levels-1 are
/// compared against it; otherwise each level k is compared against level k+2.
RateTable run_convergence(const ProblemConfig& c);

/// automatic: dense pencil while dim V_2h <= 1200, Lanczos beyond.
enum class InfSupRoute { automatic, pencil, svd, lanczos };

/// Inf-sup sweep on the immersed meshes of levels 0..levels-1 (the meshes a
/// convergence run with the same configuration uses).
InfSupReport infsup_sweep(const ProblemConfig& c, int levels,
                          InfSupRoute route = InfSupRoute::automatic);

}  // namespace fddlm
