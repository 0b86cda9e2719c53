#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "qdiv/scenario.hpp"

using namespace qdiv;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = QDIV_SOURCE_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qdiv_scenario_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

int run_to(const fs::path& scenario, const fs::path& out) {
  std::ostringstream log;
  RunOverrides o;
  o.output_dir = out.string();
  return run_scenario(scenario.string(), o, log);
}

nlohmann::json minimal() {
  return nlohmann::json::parse(R"({
    "model": {"name": "amplitude_damping", "params": {"gamma": 0.5}},
    "grid": {"t_max": 1.0, "steps": 5},
    "divisibility": {"ks": [1]},
    "witnesses": [{"kind": "blp_trace_distance", "random_probes": 1}]
  })");
}

fs::path write_temp(const std::string& name, const nlohmann::json& j) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream(p) << j.dump();
  return p;
}

}  // namespace

class BundledScenario : public ::testing::TestWithParam<const char*> {};

TEST_P(BundledScenario, RunsCleanWithoutInconsistentEntries) {
  const fs::path out = scratch(GetParam());
  ASSERT_EQ(run_to(kSource / "scenarios" / (std::string(GetParam()) + ".json"), out), kExitOk);
  const nlohmann::json manifest = read_json(out / "manifest.json");
  EXPECT_EQ(manifest["status"], "ok");
  for (const auto& f : manifest["outputs"]) EXPECT_TRUE(fs::exists(out / f.get<std::string>())) << f;
  const nlohmann::json rec = read_json(out / "reconciliation.json");
  EXPECT_EQ(rec["inconsistent_count"], 0) << rec.dump(1);
  fs::remove_all(out);
}

INSTANTIATE_TEST_SUITE_P(All, BundledScenario,
                         ::testing::Values("amplitude_damping", "dephasing_sin", "eternal", "jaynes_cummings",
                                           "unitary"));

TEST(Scenario, ByteIdenticalReruns) {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  const fs::path sc = kSource / "scenarios" / "dephasing_sin.json";
  ASSERT_EQ(run_to(sc, a), kExitOk);
  ASSERT_EQ(run_to(sc, b), kExitOk);
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
    ++compared;
  }
  EXPECT_GE(compared, 4u);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Scenario, MalformedFileWritesNothing) {
  const fs::path out = scratch("malformed");
  EXPECT_EQ(run_to(kSource / "tests" / "data" / "malformed.json", out), kExitSchema);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(run_to(kSource / "tests" / "data" / "does_not_exist.json", out), kExitSchema);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Scenario, SchemaRejections) {
  EXPECT_NO_THROW(parse_scenario(minimal()));
  auto reject = [](nlohmann::json j) { EXPECT_THROW(parse_scenario(j), SchemaError) << j.dump(); };
  auto j = minimal();
  j["unexpected"] = 1;
  reject(j);
  j = minimal();
  j["model"]["name"] = "no_such_model";
  reject(j);
  j = minimal();
  j["grid"]["steps"] = 1;
  reject(j);
  j = minimal();
  j["grid"]["t_max"] = -1.0;
  reject(j);
  j = minimal();
  j["witnesses"][0]["kind"] = "bogus";
  reject(j);
  j = minimal();
  j["divisibility"]["ks"] = {0};
  reject(j);
  j = minimal();
  j["witnesses"][0] = {{"kind", "sandwiched"}, {"alpha", 0.2}, {"random_probes", 1}};
  reject(j);
  j = minimal();
  j["witnesses"][0] = {{"kind", "blp_trace_distance"}, {"states", {{{"re", {{1, 0}, {0, 0}}}}}}};
  reject(j);
}

TEST(Scenario, UnknownKeyExitsWithSchemaCode) {
  auto j = minimal();
  j["witnesses"][0]["typo"] = true;
  const fs::path out = scratch("unknown_key");
  EXPECT_EQ(run_to(write_temp("qdiv_unknown_key.json", j), out), kExitSchema);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Scenario, OverridesApply) {
  RunOverrides o;
  o.seed = 99;
  o.tol = 1e-8;
  o.output_dir = "elsewhere";
  const Scenario s = parse_scenario(minimal(), o);
  EXPECT_EQ(s.seed, 99u);
  EXPECT_DOUBLE_EQ(s.propagation_tol, 1e-8);
  EXPECT_EQ(s.output_dir, "elsewhere");
  // The seed decides the random probes.
  const Scenario t = parse_scenario(minimal(), RunOverrides{std::nullopt, 100, std::nullopt});
  EXPECT_NE(s.witnesses[0].states[0], t.witnesses[0].states[0]);
  EXPECT_EQ(parse_scenario(minimal(), o).witnesses[0].states[0], s.witnesses[0].states[0]);
}

TEST(Scenario, ListModelsNamesEverything) {
  const std::string text = list_models();
  for (const auto& m : model_catalog()) EXPECT_NE(text.find(m.name), std::string::npos) << m.name;
  for (WitnessKind k : all_witness_kinds()) EXPECT_NE(text.find(to_string(k)), std::string::npos) << to_string(k);
  EXPECT_FALSE(version().empty());
}
