#pragma once

// Declarative experiment files: model + grid + divisibility checks +
// witnesses in, CSV trajectories and JSON reports out. The schema is
// documented in docs/scenario_schema.md.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdiv/dynamics.hpp"
#include "qdiv/errors.hpp"
#include "qdiv/witness.hpp"

namespace qdiv {

/// Raised for anything that makes a scenario file unusable before any
/// numerics run.
class SchemaError : public Error {
 public:
  using Error::Error;
};

struct Scenario {
  std::string name;
  std::string model_name;
  nlohmann::json model_params;
  Model model;
  double t_max = 1.0;
  int steps = 2;
  std::vector<Eigen::Index> ks;
  int divisibility_restarts = 64;
  std::vector<WitnessSpec> witnesses;
  std::uint64_t seed = 0;
  double propagation_tol = 1e-10;
  std::string output_dir = "qdiv_out";
};

struct RunOverrides {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
};

/// Parses and validates; random probes are drawn here so the scenario is
/// fully determined afterwards. Throws SchemaError.
Scenario parse_scenario(const nlohmann::json& j, const RunOverrides& overrides = {});
Scenario load_scenario(const std::string& path, const RunOverrides& overrides = {});

inline constexpr int kExitOk = 0;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitNumerical = 3;

/// Runs a scenario file end to end. Returns 0 on success, 2 on a schema
/// error (nothing written), 3 on a numerical failure (outputs produced so far
/// are kept, the manifest records the failure). Progress goes to `log`.
int run_scenario(const std::string& path, const RunOverrides& overrides, std::ostream& log);

/// Human-readable catalogue of models and witness kinds.
std::string list_models();

std::string version();

}  // namespace qdiv
