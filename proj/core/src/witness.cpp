#include "qdiv/witness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "qdiv/discrimination.hpp"
#include "qdiv/entropy.hpp"
#include "qdiv/errors.hpp"
#include "qdiv/random.hpp"

namespace qdiv {

namespace {

struct KindName {
  WitnessKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {WitnessKind::BlpTraceDistance, "blp_trace_distance"},
    {WitnessKind::Guessing, "guessing"},
    {WitnessKind::RelativeEntropy, "relative_entropy"},
    {WitnessKind::Renyi, "renyi"},
    {WitnessKind::Sandwiched, "sandwiched"},
    {WitnessKind::Fidelity, "fidelity"},
    {WitnessKind::HMin, "h_min"},
    {WitnessKind::QCorr, "q_corr"},
    {WitnessKind::QDecpl, "q_decpl"},
    {WitnessKind::Negativity, "negativity"},
    {WitnessKind::ChannelDistance, "channel_distance"},
    {WitnessKind::OperationalFidelity, "operational_fidelity"},
};

bool is_pair_kind(WitnessKind k) {
  return k == WitnessKind::BlpTraceDistance || k == WitnessKind::RelativeEntropy || k == WitnessKind::Renyi ||
         k == WitnessKind::Sandwiched || k == WitnessKind::Fidelity;
}

bool is_bipartite_kind(WitnessKind k) {
  return k == WitnessKind::HMin || k == WitnessKind::QCorr || k == WitnessKind::QDecpl ||
         k == WitnessKind::Negativity;
}

bool is_channel_kind(WitnessKind k) {
  return k == WitnessKind::ChannelDistance || k == WitnessKind::OperationalFidelity;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double evaluate(const WitnessSpec& spec, const QuantumMap& lambda) {
  const Eigen::Index d = lambda.dim_out();
  if (is_channel_kind(spec.kind)) {
    const QuantumMap c1 = compose(lambda, spec.channels[0]);
    const QuantumMap c2 = compose(lambda, spec.channels[1]);
    const SearchOptions opts{spec.restarts, spec.seed};
    if (spec.kind == WitnessKind::ChannelDistance) return channel_distance(c1, c2, spec.p, spec.k, opts);
    return operational_fidelity(c1, c2);
  }

  const QuantumMap evo = spec.ancilla_k > 0 ? amplify(lambda, spec.ancilla_k) : lambda;
  std::vector<CMatrix> out;
  out.reserve(spec.states.size());
  for (const auto& s : spec.states) out.push_back(hermitian_part(evo.apply(s)));

  switch (spec.kind) {
    case WitnessKind::BlpTraceDistance: return trace_norm(spec.p * out[0] - (1.0 - spec.p) * out[1]);
    case WitnessKind::RelativeEntropy: return relative_entropy(out[0], out[1]).value;
    case WitnessKind::Renyi: return renyi_divergence(out[0], out[1], spec.alpha).value;
    case WitnessKind::Sandwiched: return sandwiched_divergence(out[0], out[1], spec.alpha).value;
    case WitnessKind::Fidelity: return fidelity(out[0], out[1]);
    case WitnessKind::Guessing: {
      if (out.size() == 1) return 1.0;
      if (out.size() == 2) return helstrom_guess(spec.probs[0], out[0], out[1]);
      std::vector<DensityOperator> states;
      for (const auto& m : out) states.emplace_back(m);
      return p_guess(StateEnsemble(spec.probs, std::move(states))).value;
    }
    case WitnessKind::HMin: return h_min(BipartiteState(spec.ancilla_k, d, out[0]));
    case WitnessKind::QCorr: return q_corr(BipartiteState(spec.ancilla_k, d, out[0]));
    case WitnessKind::QDecpl: return q_decpl(BipartiteState(spec.ancilla_k, d, out[0]));
    case WitnessKind::Negativity: return negativity(BipartiteState(spec.ancilla_k, d, out[0]));
    default: break;
  }
  throw DomainError("witness: unhandled kind");
}

}  // namespace

std::string to_string(WitnessKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "unknown";
}

WitnessKind witness_kind_from_string(const std::string& name) {
  for (const auto& kn : kKindNames) {
    if (name == kn.name) return kn.kind;
  }
  throw DomainError("unknown witness kind \"" + name + "\"");
}

std::vector<WitnessKind> all_witness_kinds() {
  std::vector<WitnessKind> out;
  for (const auto& kn : kKindNames) out.push_back(kn.kind);
  return out;
}

std::string to_string(Direction d) {
  return d == Direction::NonIncreasing ? "non-increasing" : "non-decreasing";
}

Direction expected_direction(WitnessKind kind) {
  switch (kind) {
    case WitnessKind::Fidelity:
    case WitnessKind::OperationalFidelity:
    case WitnessKind::HMin:
    case WitnessKind::QDecpl:
      return Direction::NonDecreasing;
    default:
      return Direction::NonIncreasing;
  }
}

void WitnessSpec::validate(Eigen::Index dim) const {
  if (dim < 1) throw DimensionError("witness: bad map dimension");
  if (ancilla_k < 0) throw DomainError("witness: ancilla_k must be >= 0");
  if ((kind == WitnessKind::Renyi || kind == WitnessKind::Sandwiched) && !(alpha >= 0.0)) {
    throw DomainError("witness: alpha must be nonnegative");
  }
  if (kind == WitnessKind::Sandwiched && alpha < 0.5) {
    throw DomainError("witness: sandwiched witnesses need alpha >= 1/2");
  }
  if (is_channel_kind(kind)) {
    if (channels.size() != 2) throw DomainError("witness: channel kinds take exactly two channels");
    if (channels[0].dim_out() != dim || channels[1].dim_out() != dim ||
        channels[0].dim_in() != channels[1].dim_in()) {
      throw DimensionError("witness: probe channels must map into the system space with equal inputs");
    }
    if (kind == WitnessKind::ChannelDistance && (k < 1 || !(p >= 0.0 && p <= 1.0))) {
      throw DomainError("witness: channel_distance needs k >= 1 and p in [0, 1]");
    }
    if (restarts < 1) throw DomainError("witness: restarts must be positive");
    return;
  }
  if (is_bipartite_kind(kind) && ancilla_k < 1) {
    throw DomainError("witness: " + to_string(kind) + " needs ancilla_k >= 1");
  }
  const Eigen::Index n = (ancilla_k > 0 ? ancilla_k : 1) * dim;
  std::size_t expected = 0;
  if (is_pair_kind(kind)) expected = 2;
  if (is_bipartite_kind(kind)) expected = 1;
  if (kind == WitnessKind::Guessing) {
    if (states.empty() || probs.size() != states.size()) {
      throw DomainError("witness: guessing needs one prior per state");
    }
    double sum = 0.0;
    for (double q : probs) {
      if (!(q >= 0.0)) throw DomainError("witness: priors must be nonnegative");
      sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw DomainError("witness: priors must sum to 1");
  } else if (states.size() != expected) {
    throw DomainError("witness: " + to_string(kind) + " takes " + std::to_string(expected) + " state probe(s)");
  }
  if (kind == WitnessKind::BlpTraceDistance && !(p >= 0.0 && p <= 1.0)) {
    throw DomainError("witness: blp prior must lie in [0, 1]");
  }
  for (const auto& s : states) {
    if (s.rows() != n) {
      throw DimensionError("witness: probe state has dimension " + std::to_string(s.rows()) + ", expected " +
                           std::to_string(n));
    }
    DensityOperator check(s);
    (void)check;
  }
}

Eigen::Index WitnessSpec::certifying_k(Eigen::Index dim) const {
  const auto cap = [dim](Eigen::Index v) { return std::clamp<Eigen::Index>(v, 1, dim); };
  const Eigen::Index base = cap(std::max<Eigen::Index>(1, ancilla_k));
  switch (kind) {
    case WitnessKind::BlpTraceDistance:
    case WitnessKind::Guessing:
    case WitnessKind::RelativeEntropy:
    case WitnessKind::Fidelity:
      return base;
    case WitnessKind::Sandwiched:
      return (alpha == 0.5 || alpha >= 1.0) ? base : dim;
    case WitnessKind::Renyi:
      return (alpha == 0.0 || alpha == 1.0 || alpha == 2.0) ? base : dim;
    case WitnessKind::HMin:
    case WitnessKind::QCorr:
    case WitnessKind::QDecpl:
    case WitnessKind::Negativity: {
      const CMatrix& s = states.front();
      const HermEig e = eigh(s);
      const double top = e.values.maxCoeff();
      const Eigen::Index rank = (e.values.array() > support_cutoff(top)).count();
      if (rank == 1) {
        const CVector psi = e.vectors.col(e.values.size() - 1);
        return cap(schmidt_rank(psi, ancilla_k, s.rows() / ancilla_k));
      }
      return base;
    }
    case WitnessKind::ChannelDistance:
      return cap(k);
    case WitnessKind::OperationalFidelity:
      return dim;
  }
  return dim;
}

nlohmann::json WitnessSpec::to_json() const {
  nlohmann::json j = {{"kind", to_string(kind)}, {"label", label}, {"ancilla_k", ancilla_k}, {"seed", seed}};
  if (kind == WitnessKind::Renyi || kind == WitnessKind::Sandwiched) j["alpha"] = alpha;
  if (kind == WitnessKind::BlpTraceDistance || kind == WitnessKind::ChannelDistance) j["p"] = p;
  if (kind == WitnessKind::ChannelDistance) j["k"] = k;
  if (is_channel_kind(kind)) {
    j["restarts"] = restarts;
    j["channels"] = nlohmann::json::array();
    for (const auto& c : channels) j["channels"].push_back(map_to_json(c));
  } else {
    j["states"] = nlohmann::json::array();
    for (const auto& s : states) j["states"].push_back(matrix_to_json(s));
    if (kind == WitnessKind::Guessing) j["probs"] = probs;
  }
  return j;
}

std::string WitnessTrajectory::to_csv() const {
  std::vector<bool> flag(times.size(), false);
  for (const auto& v : violations) flag[v.index] = true;
  std::ostringstream out;
  out << "time,value,derivative,violation_flag\n";
  for (std::size_t j = 0; j < times.size(); ++j) {
    out << fmt(times[j]) << ',' << fmt(values[j]) << ',' << fmt(derivatives[j]) << ',' << (flag[j] ? 1 : 0)
        << '\n';
  }
  return out.str();
}

std::vector<double> grid_derivative(const std::vector<double>& times, const std::vector<double>& values) {
  if (times.size() != values.size()) throw DimensionError("derivative: times and values differ in length");
  const std::size_t n = times.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  const auto diff = [&](std::size_t a, std::size_t b) {
    if (!std::isfinite(values[a]) || !std::isfinite(values[b])) return std::numeric_limits<double>::quiet_NaN();
    return (values[b] - values[a]) / (times[b] - times[a]);
  };
  d[0] = diff(0, 1);
  d[n - 1] = diff(n - 2, n - 1);
  for (std::size_t j = 1; j + 1 < n; ++j) d[j] = diff(j - 1, j + 1);
  return d;
}

void mark_violations(WitnessTrajectory& traj) {
  traj.derivatives = grid_derivative(traj.times, traj.values);
  double scale = 1.0;
  for (double v : traj.values) {
    if (std::isfinite(v)) scale = std::max(scale, std::abs(v));
  }
  traj.epsilon = 1e-6 * scale;
  const double sign = traj.expected_direction == Direction::NonIncreasing ? 1.0 : -1.0;
  traj.violations.clear();
  for (std::size_t j = 0; j < traj.derivatives.size(); ++j) {
    const double wrong_way = sign * traj.derivatives[j];
    if (wrong_way > traj.epsilon) traj.violations.push_back({j, traj.derivatives[j]});
  }
}

WitnessTrajectory run(const DynamicalMap& dm, const WitnessSpec& spec) {
  const Eigen::Index d = dm.dim();
  spec.validate(d);
  WitnessTrajectory traj;
  traj.spec = spec;
  if (traj.spec.label.empty()) traj.spec.label = to_string(spec.kind);
  traj.times = dm.grid;
  traj.expected_direction = expected_direction(spec.kind);
  traj.certifying_k = spec.certifying_k(d);
  traj.values.resize(dm.maps.size());
  for (std::size_t j = 0; j < dm.maps.size(); ++j) {
    try {
      traj.values[j] = evaluate(spec, dm.maps[j]);
    } catch (const SolverError& e) {
      throw SolverError(std::string(e.what()) + " (witness " + traj.spec.label + ", time index " +
                            std::to_string(j) + ")",
                        e.status());
    }
  }
  mark_violations(traj);
  return traj;
}

std::vector<double> blp_sigma(const WitnessTrajectory& traj) {
  if (traj.spec.kind != WitnessKind::BlpTraceDistance) {
    throw DomainError("blp_sigma: trajectory is of kind " + to_string(traj.spec.kind));
  }
  return traj.derivatives;
}

double negativity(const BipartiteState& rho) {
  const Eigen::Index da = rho.dim_a();
  const Eigen::Index db = rho.dim_b();
  const CMatrix& m = rho.matrix();
  CMatrix pt(m.rows(), m.cols());
  for (Eigen::Index a = 0; a < da; ++a) {
    for (Eigen::Index b = 0; b < db; ++b) {
      for (Eigen::Index a2 = 0; a2 < da; ++a2) {
        for (Eigen::Index b2 = 0; b2 < db; ++b2) pt(a * db + b, a2 * db + b2) = m(a * db + b2, a2 * db + b);
      }
    }
  }
  return std::max(0.0, (trace_norm(pt) - 1.0) / 2.0);
}

WitnessSpec random_probes(WitnessKind kind, Eigen::Index dim, Eigen::Index ancilla_k, double alpha,
                          std::uint64_t seed) {
  WitnessSpec spec;
  spec.kind = kind;
  spec.label = to_string(kind);
  spec.alpha = alpha;
  spec.seed = seed;
  spec.ancilla_k = ancilla_k;
  if (is_bipartite_kind(kind) && spec.ancilla_k < 1) spec.ancilla_k = dim;
  const Eigen::Index n = (spec.ancilla_k > 0 ? spec.ancilla_k : 1) * dim;
  switch (kind) {
    case WitnessKind::BlpTraceDistance:
      spec.states = {random_pure(n, derive_seed(seed, 0)).matrix(), random_pure(n, derive_seed(seed, 1)).matrix()};
      break;
    case WitnessKind::RelativeEntropy:
    case WitnessKind::Renyi:
    case WitnessKind::Sandwiched:
    case WitnessKind::Fidelity:
      spec.states = {random_density(n, n, derive_seed(seed, 0)).matrix(),
                     random_density(n, n, derive_seed(seed, 1)).matrix()};
      break;
    case WitnessKind::Guessing:
      for (int i = 0; i < 3; ++i) spec.states.push_back(random_pure(n, derive_seed(seed, i)).matrix());
      spec.probs = {1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0};
      break;
    case WitnessKind::HMin:
    case WitnessKind::QCorr:
    case WitnessKind::QDecpl:
    case WitnessKind::Negativity:
      spec.states = {random_pure(n, derive_seed(seed, 0)).matrix()};
      break;
    case WitnessKind::ChannelDistance:
    case WitnessKind::OperationalFidelity:
      spec.channels = {channels::random_cptp(dim, dim, 2, derive_seed(seed, 0)),
                       channels::random_cptp(dim, dim, 2, derive_seed(seed, 1))};
      spec.k = std::clamp<Eigen::Index>(ancilla_k, 1, dim);
      spec.restarts = 8;
      break;
  }
  return spec;
}

WitnessSpec blp_ancilla_preset(Eigen::Index dim, std::uint64_t seed) {
  WitnessSpec spec = random_probes(WitnessKind::BlpTraceDistance, dim, dim + 1, 1.0, seed);
  spec.label = "blp_ancilla_d_plus_1";
  spec.p = 0.5;
  return spec;
}

BdReport discrete_bd_check(const std::vector<QuantumMap>& maps, const std::vector<StateEnsemble>& ensembles) {
  if (maps.empty()) throw DomainError("bd check: empty map sequence");
  const Eigen::Index d = maps.front().dim_in();
  const QuantumMap id = QuantumMap::identity(d);
  if (maps.front().dim_out() != d || (maps.front().superop() - id.superop()).cwiseAbs().maxCoeff() > 1e-9) {
    throw DomainError("bd check: the sequence must start with the identity");
  }
  std::vector<QuantumMap> amplified;
  for (const auto& m : maps) {
    if (m.dim_in() != d || m.dim_out() != d) throw DimensionError("bd check: maps must act on one space");
    amplified.push_back(amplify(m, d));
  }
  BdReport report;
  for (std::size_t e = 0; e < ensembles.size(); ++e) {
    const StateEnsemble& ens = ensembles[e];
    if (ens.dim() != d * d) throw DimensionError("bd check: ensemble states must live on H (x) H");
    std::vector<double> row;
    for (const auto& amp : amplified) {
      std::vector<DensityOperator> out;
      for (const auto& s : ens.states) out.emplace_back(hermitian_part(amp.apply(s.matrix())));
      if (out.size() == 1) {
        row.push_back(1.0);
      } else if (out.size() == 2) {
        row.push_back(helstrom_guess(ens.probs[0], out[0].matrix(), out[1].matrix()));
      } else {
        row.push_back(p_guess(StateEnsemble(ens.probs, std::move(out))).value);
      }
    }
    for (std::size_t later = 1; later < row.size(); ++later) {
      for (std::size_t earlier = 0; earlier < later; ++earlier) {
        const double inc = row[later] - row[earlier];
        if (inc > 1e-7) report.violations.push_back({e, later, earlier, inc});
      }
    }
    report.values.push_back(std::move(row));
  }
  return report;
}

std::vector<StateEnsemble> random_bd_ensembles(Eigen::Index dim, int count, int size, std::uint64_t seed) {
  if (count < 0 || size < 1) throw DomainError("random ensembles: need count >= 0 and size >= 1");
  std::vector<StateEnsemble> out;
  for (int c = 0; c < count; ++c) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(c));
    Rng rng(s);
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> probs(static_cast<std::size_t>(size));
    for (double& q : probs) q = expo(rng);
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (double& q : probs) q /= total;
    // Make the sum exact for the ensemble validator.
    probs.back() = 1.0 - std::accumulate(probs.begin(), probs.end() - 1, 0.0);
    std::vector<DensityOperator> states;
    for (int i = 0; i < size; ++i) {
      states.push_back(DensityOperator::pure(random_unit_vector(dim * dim, rng)));
    }
    out.emplace_back(std::move(probs), std::move(states));
  }
  return out;
}

std::string to_string(ReconcileStatus s) {
  switch (s) {
    case ReconcileStatus::Consistent: return "CONSISTENT";
    case ReconcileStatus::InconsistentInvestigate: return "INCONSISTENT-INVESTIGATE";
    case ReconcileStatus::Unchecked: return "UNCHECKED";
  }
  return "UNCHECKED";
}

std::size_t Reconciliation::inconsistent() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const ReconcileEntry& e) {
    return e.status == ReconcileStatus::InconsistentInvestigate;
  }));
}

nlohmann::json Reconciliation::to_json() const {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& k : per_k) {
    const bool bad = std::any_of(entries.begin(), entries.end(), [&](const ReconcileEntry& e) {
      return e.certifying_k == k.k && e.status == ReconcileStatus::InconsistentInvestigate;
    });
    table.push_back({{"k", k.k},
                     {"divisibility", k.divisible_on_grid ? "k-divisible on grid" : "not k-divisible on grid"},
                     {"certified_negative_steps", k.certified_negative_steps},
                     {"witness_violations", k.witness_violations},
                     {"status", bad ? "INCONSISTENT-INVESTIGATE" : "CONSISTENT"}});
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : entries) {
    rows.push_back({{"witness", e.label},
                    {"index", e.index},
                    {"time", e.time},
                    {"derivative", e.derivative},
                    {"certifying_k", e.certifying_k},
                    {"status", to_string(e.status)},
                    {"confirming_step", e.confirming_step},
                    {"confirming_k", e.confirming_k}});
  }
  return {{"consistent", inconsistent() == 0},
          {"inconsistent_count", inconsistent()},
          {"per_k", table},
          {"violations", rows}};
}

Reconciliation verdict(const DynamicalMap& dm, const std::vector<WitnessTrajectory>& trajectories,
                       const DivisibilityReport& report) {
  const std::size_t n = dm.grid.size();
  for (const auto& t : trajectories) {
    if (t.times != dm.grid) throw DomainError("verdict: trajectory " + t.spec.label + " uses a different grid");
  }
  for (const auto& k : report.per_k) {
    if (k.steps.size() + 1 != n) throw DomainError("verdict: divisibility report uses a different grid");
  }
  Reconciliation rec;
  for (const auto& k : report.per_k) {
    rec.per_k.push_back({k.k, k.divisible_on_grid, k.certified_negative_steps, 0});
  }
  if (n < 2) return rec;
  const std::size_t last_step = n - 2;
  for (const auto& t : trajectories) {
    for (const auto& v : t.violations) {
      ReconcileEntry e;
      e.label = t.spec.label;
      e.index = v.index;
      e.time = t.times[v.index];
      e.derivative = v.derivative;
      e.certifying_k = t.certifying_k;
      const std::size_t lo = v.index == 0 ? 0 : std::min(v.index - 1, last_step);
      const std::size_t hi = std::min(v.index, last_step);
      // Negativity at k' <= certifying_k confirms the violation; only a
      // clean check at k' >= certifying_k contradicts it.
      bool checked = false;
      for (const auto& k : report.per_k) {
        if (k.k >= t.certifying_k) checked = true;
        if (k.k > t.certifying_k) continue;
        for (std::size_t s = lo; s <= hi; ++s) {
          if (k.steps[s].certificate.verdict == PositivityVerdict::CertifiedNegative &&
              (e.status != ReconcileStatus::Consistent || k.k < e.confirming_k)) {
            e.status = ReconcileStatus::Consistent;
            e.confirming_step = static_cast<long>(s);
            e.confirming_k = k.k;
            break;
          }
        }
      }
      if (e.status != ReconcileStatus::Consistent) {
        e.status = checked ? ReconcileStatus::InconsistentInvestigate : ReconcileStatus::Unchecked;
      }
      for (auto& k : rec.per_k) {
        if (k.k == t.certifying_k) ++k.witness_violations;
      }
      rec.entries.push_back(std::move(e));
    }
  }
  return rec;
}

}  // namespace qdiv
