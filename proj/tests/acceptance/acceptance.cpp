// Acceptance battery: one PASS/FAIL line per criterion, nonzero exit if any
// fails. Oracles are closed forms or independent computations; nothing here
// feeds a library result back into its own check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qdiv/discrimination.hpp"
#include "qdiv/dynamics.hpp"
#include "qdiv/entropy.hpp"
#include "qdiv/scenario.hpp"
#include "qdiv/sdp.hpp"
#include "qdiv/witness.hpp"
#include "test_support.hpp"

using namespace qdiv;
using qdiv::test::diag;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a failed check; keeps the first few messages.
  void fail(const std::string& what) {
    if (pass || failures < 4) detail << (failures ? "; " : "") << what;
    pass = false;
    ++failures;
  }
  int failures = 0;
};

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << x;
  return s.str();
}

// ---------------------------------------------------------------- 1
void dpi_suite(Outcome& o) {
  int checks = 0;
  double worst = -std::numeric_limits<double>::infinity();
  auto check = [&](double before, double after, const std::string& what) {
    if (std::isinf(before)) return;
    ++checks;
    worst = std::max(worst, after - before);
    if (after > before + 1e-8) o.fail(what + " increased by " + fmt(after - before));
  };
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(s % 2);
    const CMatrix r = random_density(d, 1 + static_cast<Eigen::Index>(s % d), 1000 + 3 * s).matrix();
    const CMatrix q = random_density(d, d, 1001 + 3 * s).matrix();
    const QuantumMap phi = channels::random_cptp(d, d, 1 + static_cast<Eigen::Index>(s % 3), 1002 + 3 * s);
    const CMatrix pr = phi.apply(r);
    const CMatrix pq = phi.apply(q);
    const std::string tag = " seed " + std::to_string(s);
    check(relative_entropy(r, q).value, relative_entropy(pr, pq).value, "D" + tag);
    for (double a : {0.0, 0.5, 0.9, 1.0, 1.5, 2.0})
      check(renyi_divergence(r, q, a).value, renyi_divergence(pr, pq, a).value, "D_" + std::to_string(a) + tag);
    for (double a : {0.5, 0.9, 1.5, 3.0, 10.0})
      check(sandwiched_divergence(r, q, a).value, sandwiched_divergence(pr, pq, a).value,
            "Dt_" + std::to_string(a) + tag);

    // Positive but not completely positive: transposition followed by a channel.
    const QuantumMap pos = qdiv::test::transpose_then(phi);
    const CMatrix tr = random_density(d, d, 5000 + s).matrix();
    const CMatrix tr_out = pos.apply(tr);
    const CMatrix q_out = pos.apply(q);
    check(relative_entropy(tr, q).value, relative_entropy(tr_out, q_out).value, "D positive" + tag);
    for (double a : {0.5, 1.5, 3.0})
      check(sandwiched_divergence(tr, q, a).value, sandwiched_divergence(tr_out, q_out, a).value,
            "Dt positive" + tag);
  }
  o.detail << (o.pass ? "" : "; ") << checks << " checks, worst increase " << fmt(worst);
}

// ---------------------------------------------------------------- 2
void fidelity_identities(Outcome& o) {
  double worst_half = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(s % 2);
    const CMatrix r = random_density(d, 1 + static_cast<Eigen::Index>(s % d), 2000 + 2 * s).matrix();
    const CMatrix q = random_density(d, d, 2001 + 2 * s).matrix();
    const double err = std::abs(sandwiched_divergence(r, q, 0.5).value + 2.0 * std::log2(fidelity(r, q)));
    worst_half = std::max(worst_half, err);
    if (err > 1e-9) o.fail("D~_1/2 vs -2 log F off by " + fmt(err) + " seed " + std::to_string(s));
  }
  double worst_slack = -1.0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(s % 2);
    const CMatrix r = random_density(d, 1 + static_cast<Eigen::Index>(s % d), 3000 + 2 * s).matrix();
    const CMatrix q = random_density(d, 1 + static_cast<Eigen::Index>((s / 2) % d), 3001 + 2 * s).matrix();
    const double f = fidelity(r, q);
    const double td = 0.5 * trace_norm(CMatrix(r - q));
    const double lo = 1.0 - f - td;
    const double hi = td - std::sqrt(std::max(0.0, 1.0 - f * f));
    worst_slack = std::max({worst_slack, lo, hi});
    if (lo > 1e-9 || hi > 1e-9) o.fail("Fuchs-van de Graaf broken at seed " + std::to_string(s));
  }
  o.detail << (o.pass ? "" : "; ") << "max |D~_1/2 + 2 log F| " << fmt(worst_half) << ", max FvdG excess "
           << fmt(worst_slack);
}

// ---------------------------------------------------------------- 3
void min_entropy(Outcome& o) {
  double worst_cq = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(4000 + s);
    const double p = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(s % 2);
    const DensityOperator r1 = random_density(d, 1 + static_cast<Eigen::Index>(s % d), 4100 + 2 * s);
    const DensityOperator r2 = random_density(d, d, 4101 + 2 * s);
    const double hm = h_min(make_cq({p, 1.0 - p}, {r1, r2}));
    const double oracle = -std::log2(helstrom_guess(p, r1.matrix(), r2.matrix()));
    const double err = std::abs(hm - oracle);
    worst_cq = std::max(worst_cq, err);
    if (err > 1e-5) o.fail("cq h_min off by " + fmt(err) + " seed " + std::to_string(s));
  }
  double worst_dual = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Eigen::Index db = 1 + static_cast<Eigen::Index>(s % 2);
    const Eigen::Index dc = 2;
    Rng rng(4500 + s);
    const TripartitePure t{2, db, dc, random_unit_vector(2 * db * dc, rng)};
    const double err = std::abs(h_min(t.marginal_ab()) + h_max(t.marginal_ac()));
    worst_dual = std::max(worst_dual, err);
    if (err > 1e-5) o.fail("h_min + h_max = " + fmt(err) + " seed " + std::to_string(s));
  }
  for (Eigen::Index d : {2, 3}) {
    const double err = std::abs(h_min(max_entangled(d)) + std::log2(double(d)));
    if (err > 1e-6) o.fail("h_min(psi+) off by " + fmt(err) + " at d=" + std::to_string(d));
  }
  o.detail << (o.pass ? "" : "; ") << "max cq error " << fmt(worst_cq) << ", max duality error " << fmt(worst_dual);
}

// ---------------------------------------------------------------- 4
void discrimination_oracles(Outcome& o) {
  std::vector<DensityOperator> trine;
  for (int k = 0; k < 3; ++k) {
    const double th = 2.0 * M_PI * k / 3.0;
    trine.emplace_back(qdiv::test::proj(qdiv::test::ket({std::cos(th / 2), std::sin(th / 2)})));
  }
  const StateEnsemble ens({1.0 / 3, 1.0 / 3, 1.0 / 3}, trine);
  const double pg = p_guess(ens).value;
  if (std::abs(pg - 2.0 / 3.0) > 1e-6) o.fail("trine p_guess " + std::to_string(pg));

  double worst_dn = 0.0;
  for (double q : {0.1, 0.5, 1.0}) {
    const double dn = diamond_norm(QuantumMap::identity(2) - channels::depolarizing(2, q));
    worst_dn = std::max(worst_dn, std::abs(dn - 1.5 * q));
    if (std::abs(dn - 1.5 * q) > 1e-5) o.fail("diamond norm at q=" + std::to_string(q) + ": " + std::to_string(dn));
  }

  // The seesaw only ever reports a lower bound on the square norm.
  double worst_rel = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const QuantumMap m = channels::random_cptp(2, 2, 2, 6000 + 2 * s) - channels::random_cptp(2, 2, 2, 6001 + 2 * s);
    const double rhs = 2.0 * diamond_norm(m);
    const double lhs = square_norm(choi(m), 2, {50, s});
    const double rel = std::abs(lhs - rhs) / rhs;
    worst_rel = std::max(worst_rel, rel);
    if (rel > 1e-2) o.fail("square-norm identity off by " + fmt(rel) + " relative, seed " + std::to_string(s));
  }
  o.detail << (o.pass ? "" : "; ") << "trine " << pg << ", max diamond error " << fmt(worst_dn)
           << ", max square-norm relative error " << fmt(worst_rel);
}

// ---------------------------------------------------------------- 5
void dynamics_oracles(Outcome& o) {
  const double gamma = 0.7;
  const DynamicalMap ad = evolve(model("amplitude_damping", {{"gamma", gamma}}), make_grid(5.0, 200));
  double worst_ad = 0.0;
  for (std::size_t j = 0; j < ad.grid.size(); ++j) {
    const double pop = ad.maps[j].apply(diag({0, 1}))(1, 1).real();
    worst_ad = std::max(worst_ad, std::abs(pop - std::exp(-gamma * ad.grid[j])));
  }
  if (worst_ad > 1e-7) o.fail("amplitude damping population off by " + fmt(worst_ad));

  const DynamicalMap et = evolve(model("eternal"), make_grid(3.0, 200));
  double worst_et = 0.0;
  for (std::size_t j = 0; j < et.grid.size(); ++j) {
    const double t = et.grid[j];
    const Eigen::Vector3d l = pauli_eigenvalues(et.maps[j]);
    const Eigen::Vector3d want(std::exp(-t) * std::cosh(t), std::exp(-t) * std::cosh(t), std::exp(-2 * t));
    worst_et = std::max(worst_et, (l - want).cwiseAbs().maxCoeff());
  }
  if (worst_et > 1e-7) o.fail("eternal eigenvalues off by " + fmt(worst_et));
  o.detail << (o.pass ? "" : "; ") << "max population error " << fmt(worst_ad) << ", max eigenvalue error "
           << fmt(worst_et);
}

// ---------------------------------------------------------------- 6
void divisibility_discrimination(Outcome& o) {
  const DynamicalMap et = evolve(model("eternal"), make_grid(3.0, 200));
  const DivisibilityReport r = divisibility_report(et, {1, 2}, 64, 6);
  double k2_worst = -std::numeric_limits<double>::infinity();
  for (const auto& st : r.find(2)->steps) {
    if (st.t_from <= 0.05) continue;
    k2_worst = std::max(k2_worst, st.certificate.min_value);
    if (st.certificate.min_value >= -1e-6)
      o.fail("k=2 step " + std::to_string(st.index) + " min " + fmt(st.certificate.min_value));
  }
  double k1_min = std::numeric_limits<double>::infinity();
  for (const auto& st : r.find(1)->steps) {
    k1_min = std::min(k1_min, st.certificate.min_value);
    if (st.certificate.min_value < -1e-8)
      o.fail("k=1 step " + std::to_string(st.index) + " min " + fmt(st.certificate.min_value));
  }
  const DynamicalMap ad = evolve(model("amplitude_damping"), make_grid(3.0, 200));
  double ad_min = std::numeric_limits<double>::infinity();
  const DivisibilityReport adr = divisibility_report(ad, {2}, 64, 6);
  for (const auto& st : adr.find(2)->steps) {
    ad_min = std::min(ad_min, st.certificate.min_value);
    if (st.certificate.min_value < -1e-8)
      o.fail("amplitude damping step " + std::to_string(st.index) + " min " + fmt(st.certificate.min_value));
  }
  o.detail << (o.pass ? "" : "; ") << "eternal k=2 largest min eig (t>0.05) " << fmt(k2_worst)
           << ", eternal k=1 smallest " << fmt(k1_min) << ", amplitude damping smallest " << fmt(ad_min);
}

// ---------------------------------------------------------------- 7
void reconciliation(Outcome& o) {
  // Dephasing with rate sin t: BLP flags exactly where the rate is negative,
  // allowing one grid step of slack at each sign change.
  const int steps = 81;
  const DynamicalMap dep =
      evolve(model("dephasing", {{"rate", {{"form", "sinusoid"}, {"a", 1.0}, {"omega", 1.0}, {"phi", 0.0}}}}),
             make_grid(2 * M_PI, steps));
  WitnessSpec blp;
  blp.kind = WitnessKind::BlpTraceDistance;
  CMatrix minus = CMatrix::Constant(2, 2, -0.5);
  minus(0, 0) = minus(1, 1) = 0.5;
  blp.states = {CMatrix::Constant(2, 2, 0.5), minus};
  const WitnessTrajectory bt = run(dep, blp);
  std::set<std::size_t> flagged;
  for (const auto& v : bt.violations) flagged.insert(v.index);
  std::vector<int> sign(steps, 0);  // sign of the rate on the interval ending at j
  for (int j = 1; j < steps; ++j) sign[j] = std::sin(0.5 * (dep.grid[j - 1] + dep.grid[j])) < 0 ? -1 : 1;
  auto near_boundary = [&](int j) {
    for (int i = std::max(1, j - 1); i <= std::min(steps - 1, j + 1); ++i)
      if (sign[i] != sign[j]) return true;
    return false;
  };
  int negative_windows = 0;
  for (int j = 1; j < steps; ++j) {
    const bool want = sign[j] < 0;
    negative_windows += want;
    if (want != static_cast<bool>(flagged.count(j)) && !near_boundary(j))
      o.fail("dephasing flag mismatch at index " + std::to_string(j));
  }

  const DynamicalMap et = evolve(model("eternal"), make_grid(3.0, 61));
  std::size_t blp_flags = 0;
  for (std::uint64_t s = 0; s < 20; ++s)
    blp_flags += run(et, random_probes(WitnessKind::BlpTraceDistance, 2, 0, 1.0, 700 + s)).violations.size();
  blp_flags += run(et, blp_ancilla_preset(2, 7)).violations.size();
  if (blp_flags) o.fail(std::to_string(blp_flags) + " BLP flags on the eternal model");
  WitnessSpec sw;
  sw.kind = WitnessKind::Sandwiched;
  sw.alpha = 3.0;
  sw.ancilla_k = 2;
  sw.states = {qdiv::test::bell_diagonal(0.1, 0.6, 0.3, 0.0), qdiv::test::bell_diagonal(0.01, 0.01, 0.01, 0.97)};
  const std::size_t sw_flags = run(et, sw).violations.size();
  if (sw_flags == 0) o.fail("no ancilla-assisted sandwiched flags on the eternal model");

  std::size_t inconsistent = 0;
  std::size_t scenarios = 0;
  const fs::path root = fs::temp_directory_path() / "qdiv_acceptance";
  for (const auto& e : fs::directory_iterator(fs::path(QDIV_SOURCE_DIR) / "scenarios")) {
    if (e.path().extension() != ".json") continue;
    ++scenarios;
    RunOverrides ov;
    ov.output_dir = (root / e.path().stem()).string();
    std::ostringstream log;
    const int code = run_scenario(e.path().string(), ov, log);
    if (code != kExitOk) {
      o.fail(e.path().filename().string() + " exited " + std::to_string(code));
      continue;
    }
    std::ifstream f(fs::path(*ov.output_dir) / "reconciliation.json");
    const auto rec = nlohmann::json::parse(f);
    const std::size_t n = rec.at("inconsistent_count").get<std::size_t>();
    inconsistent += n;
    if (n) o.fail(e.path().filename().string() + " has " + std::to_string(n) + " INCONSISTENT-INVESTIGATE entries");
  }
  fs::remove_all(root);
  o.detail << (o.pass ? "" : "; ") << "dephasing " << flagged.size() << " flags vs " << negative_windows
           << " negative-rate windows, eternal BLP flags " << blp_flags << ", eternal k=2 sandwiched flags "
           << sw_flags << ", " << scenarios << " scenarios with " << inconsistent << " inconsistent";
}

// ---------------------------------------------------------------- 8
QuantumMap random_unitary_mixture(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> w(3);
  for (double& x : w) x = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
  const double total = w[0] + w[1] + w[2];
  std::vector<CMatrix> ks;
  for (double x : w) ks.push_back(std::sqrt(x / total) * haar_unitary(2, rng));
  return from_kraus(ks);
}

void unitality_law(Outcome& o) {
  int unital_count = 0;
  double smallest_strict = std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 0; s < 20; ++s) {
    // Even seeds: mixtures of unitaries (unital); odd: random channels.
    // Every third map is additionally preceded by a transposition, so
    // positive-but-not-CP maps appear in both classes.
    QuantumMap m = s % 2 == 0 ? random_unitary_mixture(7000 + s) : channels::random_cptp(2, 2, 2, 7000 + s);
    if (s % 3 == 0) m = qdiv::test::transpose_then(m);
    const bool unital = is_unital(m).unital;
    unital_count += unital;
    double largest_drop = -std::numeric_limits<double>::infinity();
    std::vector<CMatrix> inputs{CMatrix::Identity(2, 2) / 2.0};
    for (std::uint64_t r = 0; r < 100; ++r)
      inputs.push_back(random_density(2, 1 + static_cast<Eigen::Index>(r % 2), 7100 + 100 * s + r).matrix());
    for (const CMatrix& rho : inputs)
      for (double a : {0.5, 1.0, 2.0, 5.0})
        largest_drop = std::max(largest_drop, renyi_entropy(rho, a) - renyi_entropy(m.apply(rho), a));
    const std::string tag = "map " + std::to_string(s);
    if (unital && largest_drop > 1e-9) o.fail(tag + " is unital but lowers an entropy by " + fmt(largest_drop));
    if (!unital) {
      smallest_strict = std::min(smallest_strict, largest_drop);
      if (largest_drop <= 1e-6) o.fail(tag + " is non-unital but no decrease found");
    }
  }
  if (unital_count == 0 || unital_count == 20) o.fail("battery does not contain both classes");
  o.detail << (o.pass ? "" : "; ") << unital_count << " unital, " << 20 - unital_count
           << " non-unital; smallest exhibited decrease " << fmt(smallest_strict);
}

// ---------------------------------------------------------------- 9
struct KnownProgram {
  std::string name;
  SdpProblem problem;
  double optimum;
};

std::vector<KnownProgram> sdp_battery() {
  std::vector<KnownProgram> out;
  // ||h||_1 = min Tr(P + N), P - N = h.
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(s % 3);
    const CMatrix h = qdiv::test::random_hermitian(d, 8000 + s);
    SdpProblem p;
    const int bp = p.add_block(d);
    const int bn = p.add_block(d);
    p.set_objective(bp, CMatrix::Identity(d, d));
    p.set_objective(bn, CMatrix::Identity(d, d));
    for (const CMatrix& b : hermitian_basis(d)) {
      const int c = p.add_constraint((b * h).trace().real());
      p.set_coefficient(c, bp, b);
      p.set_coefficient(c, bn, -b);
    }
    // Oracle: sum of |eigenvalues| from a plain Eigen decomposition.
    const double opt = Eigen::SelfAdjointEigenSolver<CMatrix>(h).eigenvalues().cwiseAbs().sum();
    out.push_back({"trace-norm " + std::to_string(s), p, opt});
  }
  // Two-state guessing: max p Tr(r1 E1) + (1-p) Tr(r2 E2), E1 + E2 = I.
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(s % 2);
    const double pr = 0.2 + 0.06 * static_cast<double>(s);
    const CMatrix r1 = random_density(d, 1 + static_cast<Eigen::Index>(s % d), 8100 + 2 * s).matrix();
    const CMatrix r2 = random_density(d, d, 8101 + 2 * s).matrix();
    SdpProblem p;
    p.sense = SdpSense::Maximize;
    const int b1 = p.add_block(d);
    const int b2 = p.add_block(d);
    p.set_objective(b1, pr * r1);
    p.set_objective(b2, (1 - pr) * r2);
    for (const CMatrix& b : hermitian_basis(d)) {
      const int c = p.add_constraint(b.trace().real());
      p.set_coefficient(c, b1, b);
      p.set_coefficient(c, b2, b);
    }
    const CMatrix diff = pr * r1 - (1 - pr) * r2;
    const double opt = 0.5 * (1.0 + Eigen::SelfAdjointEigenSolver<CMatrix>(diff).eigenvalues().cwiseAbs().sum());
    out.push_back({"guessing " + std::to_string(s), p, opt});
  }
  // min Tr(C X), Tr X = 1, X >= 0: the smallest eigenvalue of C.
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(s % 4);
    const CMatrix c = qdiv::test::random_hermitian(d, 8200 + s);
    SdpProblem p;
    const int b = p.add_block(d);
    p.set_objective(b, c);
    const int k = p.add_constraint(1.0);
    p.set_coefficient(k, b, CMatrix::Identity(d, d));
    out.push_back({"unit-trace " + std::to_string(s), p, Eigen::SelfAdjointEigenSolver<CMatrix>(c).eigenvalues()[0]});
  }
  return out;
}

void sdp_solver(Outcome& o) {
  double worst_gap = 0.0;
  double worst_err = 0.0;
  double worst_weak = -std::numeric_limits<double>::infinity();
  const auto battery = sdp_battery();
  for (const auto& kp : battery) {
    const SdpSolution s = solve(kp.problem);
    if (!s.optimal()) {
      o.fail(kp.name + " status " + to_string(s.status));
      continue;
    }
    const double gap = std::abs(s.gap) / (1.0 + std::abs(kp.optimum));
    const double err = std::abs(s.primal_value - kp.optimum);
    // Weak duality: the dual bound must not pass the primal value.
    const double weak = kp.problem.sense == SdpSense::Minimize ? s.dual_value - s.primal_value
                                                               : s.primal_value - s.dual_value;
    worst_gap = std::max(worst_gap, gap);
    worst_err = std::max(worst_err, err);
    worst_weak = std::max(worst_weak, weak);
    if (gap > 1e-8) o.fail(kp.name + " gap " + fmt(gap));
    if (err > 1e-7) o.fail(kp.name + " value error " + fmt(err));
    if (weak > 1e-9) o.fail(kp.name + " weak duality violated by " + fmt(weak));
  }
  o.detail << (o.pass ? "" : "; ") << battery.size() << " programs, max relative gap " << fmt(worst_gap)
           << ", max value error " << fmt(worst_err) << ", max weak-duality excess " << fmt(worst_weak);
}

// ---------------------------------------------------------------- 10
void pinching_limit(Outcome& o) {
  int monotone = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const CMatrix r = random_density(2, 2, 9000 + 2 * s).matrix();
    const CMatrix q = random_density(2, 2, 9001 + 2 * s).matrix();
    const double target = sandwiched_divergence(r, q, 2.0).value;
    double prev = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (int n = 1; n <= 3; ++n) {
      const double gap = std::abs(pinched_approximation(r, q, 2.0, n) - target);
      if (gap > prev) ok = false;
      prev = gap;
    }
    monotone += ok;
  }
  if (monotone < 9) o.fail("monotone in only " + std::to_string(monotone) + "/10 cases");
  double worst_comm = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(9500 + s);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    const double a = u(rng);
    const double b = u(rng);
    const CMatrix uu = haar_unitary(2, rng);
    const CMatrix r = uu * diag({a, 1 - a}) * uu.adjoint();
    const CMatrix q = uu * diag({b, 1 - b}) * uu.adjoint();
    // Commuting pair: the classical Renyi divergence is the oracle.
    const double oracle = qdiv::test::classical_renyi({a, 1 - a}, {b, 1 - b}, 2.0);
    for (int n = 1; n <= 3; ++n) worst_comm = std::max(worst_comm, std::abs(pinched_approximation(r, q, 2.0, n) - oracle));
  }
  if (worst_comm > 1e-10) o.fail("commuting pairs off by " + fmt(worst_comm));
  o.detail << (o.pass ? "" : "; ") << "monotone in " << monotone << "/10, commuting max error " << fmt(worst_comm);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"data processing inequality suite", dpi_suite},
      {"fidelity identities", fidelity_identities},
      {"min-entropy cq identity and duality", min_entropy},
      {"discrimination oracles", discrimination_oracles},
      {"dynamics oracles", dynamics_oracles},
      {"divisibility discrimination", divisibility_discrimination},
      {"witness/divisibility reconciliation", reconciliation},
      {"unitality law", unitality_law},
      {"SDP solver battery", sdp_solver},
      {"pinching limit", pinching_limit},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail.str()
              << " (" << std::fixed << std::setprecision(1) << secs << " s)" << std::endl;
    std::cout.unsetf(std::ios::fixed);
  }
  std::cout << (failed ? "FAIL" : "PASS") << " overall: " << criteria.size() - failed << "/" << criteria.size()
            << " criteria" << std::endl;
  return failed ? 1 : 0;
}
