// qdiv: run divisibility/witness scenarios from the command line.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qdiv/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qdiv - k-divisibility certification and non-Markovianity witnesses"};
  app.require_subcommand(0, 1);
  app.set_version_flag("--version", qdiv::version());

  std::string scenario_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  double tol = 0.0;
  auto* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  auto* out_opt = run->add_option("--out", out_dir, "output directory (overrides the scenario)");
  auto* seed_opt = run->add_option("--seed", seed, "base seed (overrides the scenario)");
  auto* tol_opt = run->add_option("--tol", tol, "propagation tolerance (overrides the scenario)")
                      ->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list-models", "list models and witness kinds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qdiv::kExitSchema;
  }

  if (*list) {
    std::cout << qdiv::list_models();
    return 0;
  }
  if (*run) {
    qdiv::RunOverrides ov;
    if (*out_opt) ov.output_dir = out_dir;
    if (*seed_opt) ov.seed = seed;
    if (*tol_opt) ov.tol = tol;
    return qdiv::run_scenario(scenario_path, ov, std::cerr);
  }
  std::cout << app.help();
  return 0;
}
