#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "singhom/fem.hpp"
#include "singhom/nonlinearity.hpp"
#include "singhom/perforation.hpp"
#include "singhom/solver.hpp"

namespace singhom {

enum class ExperimentKind { solve, comparison, uniqueness, nonuniqueness, stability, homogenization, corrector, capacity };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct MeshConfig {
  int dim = 2;  // 1: interval of length `width` with nx nodes
  double width = 1.0;
  double height = 1.0;
  int nx = 65;
  int ny = 65;
  bool operator==(const MeshConfig&) const = default;
};

struct CoefficientConfig {
  double a11 = 1.0;
  double a12 = 0.0;
  double a21 = 0.0;
  double a22 = 1.0;
  bool operator==(const CoefficientConfig&) const = default;
};

struct NonlinearityConfig {
  std::string g = "power";  // power | oscillating | eigen_trunc | table
  double gamma = 0.5;
  double lambda = 0.0;  // eigen_trunc
  double k = 1.0;       // eigen_trunc
  std::vector<double> table_s;
  std::vector<double> table_g;
  // Constant nodal data unless a file is given (paths relative to the config).
  double f = 1.0;
  double l = 0.0;
  std::string f_file;
  std::string l_file;
  std::string h_file;
  std::optional<double> lambda_mono;
  bool operator==(const NonlinearityConfig&) const = default;
};

struct SolverSettings {
  double theta = 0.5;
  double inner_tol = 1e-9;
  double inner_abs_tol = 1e-14;
  int max_inner = 5000;
  double outer_tol = 1e-6;
  double outer_abs_tol = 1e-10;
  int max_levels = 40;
  double first_level = 1.0;
  double cg_tol = 1e-12;
  bool operator==(const SolverSettings&) const = default;
};

struct SolveChecks {
  double max_energy_residual = 1e-6;
  // When set, max |u| must match within the relative tolerance.
  std::optional<double> expected_linf;
  double linf_tolerance = 1e-3;
  bool operator==(const SolveChecks&) const = default;
};

struct UniquenessConfig {
  int starts = 3;
  bool operator==(const UniquenessConfig&) const = default;
};

struct NonuniquenessConfig {
  double k = 1.0;
  std::vector<double> fractions = {0.0, 0.25, 0.5};
  double perturbation = 0.02;
  double ray_tol = 1e-4;
  double separation = 0.1;
  bool operator==(const NonuniquenessConfig&) const = default;
};

struct StabilityConfig {
  std::vector<double> levels;  // empty: doubling schedule of the reference solve
  double slack = 0.05;
  double stab_tol = 1e-5;
  bool operator==(const StabilityConfig&) const = default;
};

struct HomogenizationConfig {
  double mu = 50.0;
  std::vector<double> epsilons = {0.25, 0.125};
  std::string strategy = "resolved";
  double defect_tol = 0.25;
  bool operator==(const HomogenizationConfig&) const = default;
};

struct CapacityConfig {
  // Annulus check: R, r and h; compared with 2 pi / ln(R / r).
  double R = 1.0;
  double r = 0.1;
  double h = 0.0025;
  double tolerance = 0.02;
  // Per-cell density check when mu > 0: cell half-size epsilon, prescribed mu.
  double epsilon = 0.125;
  double mu = 0.0;
  double density_h = 1.0 / 256.0;
  double density_tolerance = 0.1;
  bool operator==(const CapacityConfig&) const = default;
};

struct RunConfig {
  ExperimentKind kind = ExperimentKind::solve;
  std::string name = "experiment";
  std::uint64_t seed = 1;
  MeshConfig mesh;
  CoefficientConfig coefficient;
  NonlinearityConfig nonlinearity;
  NonlinearityConfig nonlinearity2;  // comparison: the larger F
  SolverSettings solver;
  SolveChecks checks;
  UniquenessConfig uniqueness;
  NonuniquenessConfig nonuniqueness;
  StabilityConfig stability;
  HomogenizationConfig homogenization;
  CapacityConfig capacity;
  // Directory that relative data paths refer to; not serialized.
  std::filesystem::path base_dir;

  bool operator==(const RunConfig& o) const;
};

// Carries the offending field ("section.key") and its 1-based line (0 if unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, int line, const std::string& message);
  const std::string& field() const { return field_; }
  int line() const { return line_; }
  const std::string& message() const { return message_; }

 private:
  std::string field_;
  int line_;
  std::string message_;
};

// INI text: [section] headers and key = value lines; lists are comma separated.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& cfg);

// Throws ConfigError. parse_config already calls it; `text` (optional) is used
// to locate line numbers.
void validate_config(const RunConfig& cfg, const std::string& text = {});

MeshPtr make_mesh(const MeshConfig& m);
Coefficient make_coefficient(const CoefficientConfig& c, const Mesh& mesh);
Nonlinearity make_nonlinearity(const NonlinearityConfig& c, const MeshPtr& mesh, const std::filesystem::path& base_dir);
SolverConfig make_solver_config(const SolverSettings& s);

}  // namespace singhom
