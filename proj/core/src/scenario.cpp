#include "qdiv/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <Eigen/Core>

#include "qdiv/errors.hpp"
#include "qdiv/random.hpp"
#include "qdiv/sdp.hpp"

namespace qdiv {

namespace fs = std::filesystem;

namespace {

constexpr int kDefaultProbeSets = 20;

void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw SchemaError(where + ": unknown key \"" + key + "\"");
  }
}

void check_label(const std::string& label) {
  if (label.empty()) throw SchemaError("witness label must not be empty");
  for (char c : label) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '-' || c == '.';
    if (!ok) throw SchemaError("witness label \"" + label + "\" may only use [A-Za-z0-9_.-]");
  }
}

Eigen::Index model_dim(const Model& m) {
  if (const auto* g = std::get_if<GkslGenerator>(&m)) return g->dim;
  return std::get<TotalSystemModel>(m).dim_s;
}

std::vector<WitnessSpec> parse_witness(const nlohmann::json& w, std::size_t index, Eigen::Index dim,
                                       std::uint64_t seed) {
  require_keys(w,
               {"kind", "preset", "label", "alpha", "ancilla_k", "k", "p", "states", "probs", "channels", "restarts",
                "random_probes"},
               "witnesses[" + std::to_string(index) + "]");
  const std::uint64_t wseed = derive_seed(seed, 1000 + index);
  const int sets = w.value("random_probes", kDefaultProbeSets);
  if (sets < 1) throw SchemaError("random_probes must be positive");
  std::vector<WitnessSpec> out;

  if (w.contains("preset")) {
    const auto preset = w.at("preset").get<std::string>();
    if (preset != "blp_ancilla_d_plus_1") throw SchemaError("unknown witness preset \"" + preset + "\"");
    const std::string label = w.value("label", preset);
    for (int r = 0; r < sets; ++r) {
      WitnessSpec s = blp_ancilla_preset(dim, derive_seed(wseed, static_cast<std::uint64_t>(r)));
      s.label = label + "_" + std::to_string(r);
      out.push_back(std::move(s));
    }
    return out;
  }

  if (!w.contains("kind")) throw SchemaError("witness needs \"kind\" or \"preset\"");
  WitnessSpec base;
  base.kind = witness_kind_from_string(w.at("kind").get<std::string>());
  base.label = w.value("label", to_string(base.kind));
  base.alpha = w.value("alpha", 1.0);
  base.ancilla_k = w.value("ancilla_k", Eigen::Index{0});
  base.k = w.value("k", std::max<Eigen::Index>(1, base.ancilla_k));
  base.p = w.value("p", 0.5);
  base.restarts = w.value("restarts", base.restarts);
  base.seed = wseed;
  const bool explicit_probes = w.contains("states") || w.contains("channels");
  if (explicit_probes) {
    if (w.contains("random_probes")) throw SchemaError("give either explicit probes or random_probes, not both");
    for (const auto& s : w.value("states", nlohmann::json::array())) base.states.push_back(matrix_from_json(s));
    for (const auto& c : w.value("channels", nlohmann::json::array())) base.channels.push_back(map_from_json(c));
    if (w.contains("probs")) base.probs = w.at("probs").get<std::vector<double>>();
    base.validate(dim);
    out.push_back(std::move(base));
    return out;
  }
  for (int r = 0; r < sets; ++r) {
    WitnessSpec s = random_probes(base.kind, dim, base.ancilla_k, base.alpha, derive_seed(wseed, static_cast<std::uint64_t>(r)));
    s.label = base.label + "_" + std::to_string(r);
    s.p = base.p;
    if (w.contains("k")) s.k = base.k;
    if (w.contains("restarts")) s.restarts = base.restarts;
    s.validate(dim);
    out.push_back(std::move(s));
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("failed writing " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

std::string divisibility_verdict(const DivisibilityReport& rep, Eigen::Index dim) {
  const KDivisibility* full = rep.find(dim);
  Eigen::Index smallest_failing = 0;
  for (const auto& k : rep.per_k) {
    if (!k.divisible_on_grid && (smallest_failing == 0 || k.k < smallest_failing)) smallest_failing = k.k;
  }
  if (smallest_failing > 0) {
    return "not k-divisible on grid for k >= " + std::to_string(smallest_failing);
  }
  if (full != nullptr) return "CP-divisible on grid";
  return "k-divisible on grid for every checked k";
}

}  // namespace

Scenario parse_scenario(const nlohmann::json& j, const RunOverrides& overrides) {
  try {
    require_keys(j, {"name", "description", "model", "grid", "divisibility", "witnesses", "seed", "tolerances", "output"},
                 "scenario");
    Scenario sc;
    sc.name = j.value("name", std::string("scenario"));
    sc.seed = overrides.seed ? *overrides.seed : j.value("seed", std::uint64_t{0});
    sc.output_dir = overrides.output_dir ? *overrides.output_dir : j.value("output", std::string("qdiv_out"));

    if (!j.contains("model")) throw SchemaError("scenario: missing \"model\"");
    const auto& m = j.at("model");
    require_keys(m, {"name", "params"}, "model");
    sc.model_name = m.at("name").get<std::string>();
    sc.model_params = m.value("params", nlohmann::json::object());
    sc.model = model(sc.model_name, sc.model_params);
    const Eigen::Index dim = model_dim(sc.model);

    if (!j.contains("grid")) throw SchemaError("scenario: missing \"grid\"");
    const auto& g = j.at("grid");
    require_keys(g, {"t_max", "steps"}, "grid");
    sc.t_max = g.at("t_max").get<double>();
    sc.steps = g.at("steps").get<int>();
    if (!(sc.t_max > 0.0)) throw SchemaError("grid: t_max must be positive");
    if (sc.steps < 2) throw SchemaError("grid: steps must be at least 2");

    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      require_keys(t, {"propagation"}, "tolerances");
      sc.propagation_tol = t.value("propagation", sc.propagation_tol);
    }
    if (overrides.tol) sc.propagation_tol = *overrides.tol;
    if (!(sc.propagation_tol > 0.0)) throw SchemaError("tolerances: propagation must be positive");

    if (j.contains("divisibility")) {
      const auto& d = j.at("divisibility");
      require_keys(d, {"ks", "restarts"}, "divisibility");
      sc.ks = d.value("ks", std::vector<Eigen::Index>{});
      sc.divisibility_restarts = d.value("restarts", sc.divisibility_restarts);
    } else {
      for (Eigen::Index k = 1; k <= dim; ++k) sc.ks.push_back(k);
    }
    for (Eigen::Index k : sc.ks) {
      if (k < 1 || k > dim) throw SchemaError("divisibility: every k must lie in [1, " + std::to_string(dim) + "]");
    }
    if (sc.divisibility_restarts < 1) throw SchemaError("divisibility: restarts must be positive");

    std::set<std::string> labels;
    const auto witnesses = j.value("witnesses", nlohmann::json::array());
    if (!witnesses.is_array()) throw SchemaError("witnesses must be an array");
    for (std::size_t i = 0; i < witnesses.size(); ++i) {
      for (auto& s : parse_witness(witnesses[i], i, dim, sc.seed)) {
        check_label(s.label);
        if (!labels.insert(s.label).second) throw SchemaError("duplicate witness label \"" + s.label + "\"");
        sc.witnesses.push_back(std::move(s));
      }
    }
    return sc;
  } catch (const SchemaError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("scenario: ") + e.what());
  } catch (const Error& e) {
    throw SchemaError(std::string("scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path, const RunOverrides& overrides) {
  std::ifstream f(path);
  if (!f) throw SchemaError("cannot read scenario file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("scenario is not valid JSON: ") + e.what());
  }
  return parse_scenario(j, overrides);
}

int run_scenario(const std::string& path, const RunOverrides& overrides, std::ostream& log) {
  Scenario sc;
  try {
    sc = load_scenario(path, overrides);
  } catch (const SchemaError& e) {
    log << "schema error: " << e.what() << "\n";
    return kExitSchema;
  }

  const fs::path out(sc.output_dir);
  nlohmann::json seeds_used = {{"base", sc.seed}, {"divisibility", sc.seed}, {"witnesses", nlohmann::json::array()}};
  for (const auto& w : sc.witnesses) seeds_used["witnesses"].push_back({{"label", w.label}, {"seed", w.seed}});
  nlohmann::json manifest = {
      {"qdiv_version", version()},
      {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
      {"nlohmann_json_version", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
      {"scenario", {{"name", sc.name}, {"file", fs::path(path).filename().string()}}},
      {"model", {{"name", sc.model_name}, {"params", sc.model_params}}},
      {"grid", {{"t_max", sc.t_max}, {"steps", sc.steps}}},
      {"divisibility", {{"ks", sc.ks}, {"restarts", sc.divisibility_restarts}}},
      {"seeds", seeds_used},
      {"tolerances",
       {{"propagation", sc.propagation_tol},
        {"certified_negative_below", kCertifiedNegativeThreshold},
        {"monotonicity_epsilon", "1e-6 * max(1, max |value|)"},
        {"sdp_target", SdpOptions{}.target_tolerance},
        {"sdp_accept", SdpOptions{}.accept_tolerance}}},
      {"outputs", nlohmann::json::array()},
  };

  try {
    fs::create_directories(out);
  } catch (const fs::filesystem_error& e) {
    log << "cannot create output directory: " << e.what() << "\n";
    return kExitNumerical;
  }

  const auto record = [&](const std::string& file) { manifest["outputs"].push_back(file); };
  try {
    log << "propagating " << sc.model_name << " on " << sc.steps << " grid points\n";
    const DynamicalMap dm = evolve(sc.model, make_grid(sc.t_max, sc.steps), sc.propagation_tol);

    log << "divisibility checks for k in {";
    for (std::size_t i = 0; i < sc.ks.size(); ++i) log << (i ? ", " : "") << sc.ks[i];
    log << "}\n";
    const DivisibilityReport report = divisibility_report(dm, sc.ks, sc.divisibility_restarts, sc.seed);
    const std::string overall = divisibility_verdict(report, dm.dim());
    write_json(out / "divisibility.json", {{"model", sc.model_name},
                                           {"provenance", dm.provenance},
                                           {"grid", dm.grid},
                                           {"verdict", overall},
                                           {"per_k", report.to_json()}});
    record("divisibility.json");
    log << "  " << overall << "\n";

    std::vector<WitnessTrajectory> trajectories;
    for (const auto& spec : sc.witnesses) {
      trajectories.push_back(run(dm, spec));
      const std::string file = "witness_" + spec.label + ".csv";
      write_text(out / file, trajectories.back().to_csv());
      record(file);
    }
    log << "evaluated " << trajectories.size() << " witness trajectories\n";

    const Reconciliation rec = verdict(dm, trajectories, report);
    nlohmann::json rj = rec.to_json();
    rj["divisibility_verdict"] = overall;
    rj["witnesses"] = nlohmann::json::array();
    for (const auto& t : trajectories) {
      rj["witnesses"].push_back({{"label", t.spec.label},
                                 {"kind", to_string(t.spec.kind)},
                                 {"expected_direction", to_string(t.expected_direction)},
                                 {"certifying_k", t.certifying_k},
                                 {"epsilon", t.epsilon},
                                 {"violations", t.violations.size()}});
    }
    write_json(out / "reconciliation.json", rj);
    record("reconciliation.json");
    log << "reconciliation: " << rec.entries.size() << " violations, " << rec.inconsistent()
        << " inconsistent\n";
    manifest["status"] = "ok";
    write_json(out / "manifest.json", manifest);
    return kExitOk;
  } catch (const std::exception& e) {
    log << "numerical failure: " << e.what() << "\n";
    manifest["status"] = "numerical-failure";
    manifest["error"] = e.what();
    try {
      write_json(out / "manifest.json", manifest);
    } catch (const std::exception&) {
    }
    return kExitNumerical;
  }
}

std::string list_models() {
  std::ostringstream s;
  s << "models:\n";
  for (const auto& m : model_catalog()) {
    s << "  " << m.name << "\n      " << m.summary << "\n      params: " << m.params << "\n";
  }
  s << "\nrate forms: number | {\"form\":\"constant\",\"c\"} | {\"form\":\"sinusoid\",\"a\",\"omega\",\"phi\"} |"
       " {\"form\":\"neg_tanh\"} | {\"form\":\"piecewise_linear\",\"knots\":[[t,v],...]}\n";
  s << "\nwitness kinds (expected direction; k-divisibility that forces it):\n";
  const auto line = [&](const char* name, const char* dir, const char* why) {
    s << "  " << name << "  [" << dir << "]  " << why << "\n";
  };
  line("blp_trace_distance", "non-increasing", "trace distance of two probes; P-divisible (ancilla k: k-divisible)");
  line("guessing", "non-increasing", "optimal guessing probability of a probe ensemble; as above");
  line("relative_entropy", "non-increasing", "Umegaki divergence of two probes; as above");
  line("renyi", "non-increasing", "Petz-Renyi divergence; alpha in {0,1,2} as above, otherwise CP-divisible");
  line("sandwiched", "non-increasing", "sandwiched Renyi divergence; alpha = 1/2 or >= 1 as above, else CP-divisible");
  line("fidelity", "non-decreasing", "Uhlmann fidelity of two probes; as blp");
  line("h_min", "non-decreasing", "conditional min-entropy of an ancilla-system probe; Schmidt number k");
  line("q_corr", "non-increasing", "2^-Hmin quantum correlation; Schmidt number k");
  line("q_decpl", "non-decreasing", "decoupling accuracy from the max-entropy program; Schmidt number k");
  line("negativity", "non-increasing", "partial-transpose negativity; Schmidt number k");
  line("channel_distance", "non-increasing", "distinguishability of Lambda o E1, Lambda o E2 with Schmidt-k inputs");
  line("operational_fidelity", "non-decreasing", "minimal output fidelity of Lambda o E1, Lambda o E2; CP-divisible");
  s << "\npresets:\n  blp_ancilla_d_plus_1  blp with a (d+1)-dimensional ancilla, equal priors\n";
  return s.str();
}

std::string version() { return QDIV_VERSION; }

}  // namespace qdiv
