#pragma once

// Witness trajectories along a dynamical map.
//
// A witness is a scalar functional of the evolved probes that cannot move in
// the "wrong" direction while the dynamics is k-divisible for a specific k
// (its certifying k). Violations on the grid are therefore evidence against
// k-divisibility; a clean trajectory proves nothing.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdiv/dynamics.hpp"
#include "qdiv/maps.hpp"
#include "qdiv/quantum.hpp"

namespace qdiv {

enum class WitnessKind {
  BlpTraceDistance,
  Guessing,
  RelativeEntropy,
  Renyi,
  Sandwiched,
  Fidelity,
  HMin,
  QCorr,
  QDecpl,
  Negativity,
  ChannelDistance,
  OperationalFidelity,
};

std::string to_string(WitnessKind kind);
WitnessKind witness_kind_from_string(const std::string& name);
std::vector<WitnessKind> all_witness_kinds();

enum class Direction { NonIncreasing, NonDecreasing };
std::string to_string(Direction d);
Direction expected_direction(WitnessKind kind);

/// One witness with one fixed set of probes.
///
/// Probe layout by kind:
///   blp_trace_distance, relative_entropy, renyi, sandwiched, fidelity:
///     two states; blp uses the weights (p, 1 - p).
///   guessing: states with probs.
///   h_min, q_corr, q_decpl, negativity: one state on C^k (x) H, k = ancilla_k.
///   channel_distance, operational_fidelity: two channels E_i into H,
///     evaluated as Lambda_t o E_i.
/// With ancilla_k > 0 state probes live on C^k (x) H (ancilla first) and
/// evolve under id_k (x) Lambda_t.
struct WitnessSpec {
  WitnessKind kind = WitnessKind::BlpTraceDistance;
  std::string label;
  double alpha = 1.0;
  Eigen::Index ancilla_k = 0;
  Eigen::Index k = 1;  // channel_distance input Schmidt bound
  double p = 0.5;      // prior of the first probe (blp, channel_distance)
  std::vector<CMatrix> states;
  std::vector<double> probs;
  std::vector<QuantumMap> channels;
  int restarts = 16;  // channel kinds only
  std::uint64_t seed = 0;

  /// Throws DimensionError/DomainError when the probes do not fit a map on
  /// C^dim.
  void validate(Eigen::Index dim) const;

  /// Largest k such that k-divisibility already forces monotonicity, capped
  /// at dim. A violation is evidence that some step is not certifying_k-positive.
  Eigen::Index certifying_k(Eigen::Index dim) const;

  nlohmann::json to_json() const;
};

struct Violation {
  std::size_t index = 0;
  double derivative = 0.0;
};

struct WitnessTrajectory {
  WitnessSpec spec;
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> derivatives;
  std::vector<Violation> violations;
  Direction expected_direction = Direction::NonIncreasing;
  Eigen::Index certifying_k = 1;
  double epsilon = 0.0;

  /// time,value,derivative,violation_flag
  std::string to_csv() const;
};

/// Central differences inside the grid, one-sided at the ends.
std::vector<double> grid_derivative(const std::vector<double>& times, const std::vector<double>& values);

/// Derivatives and violations for given values; eps = 1e-6 max(1, max |v|).
void mark_violations(WitnessTrajectory& traj);

WitnessTrajectory run(const DynamicalMap& dm, const WitnessSpec& spec);

/// d/dt of the BLP trace distance.
std::vector<double> blp_sigma(const WitnessTrajectory& traj);

/// (||rho^{T_B}||_1 - 1) / 2.
double negativity(const BipartiteState& rho);

/// Random probes for a kind on C^dim; seeds are derived from `seed`.
WitnessSpec random_probes(WitnessKind kind, Eigen::Index dim, Eigen::Index ancilla_k, double alpha,
                          std::uint64_t seed);

/// BLP with a (d+1)-dimensional ancilla and equal priors; monotone for every
/// probe pair exactly when the dynamics is CP-divisible.
WitnessSpec blp_ancilla_preset(Eigen::Index dim, std::uint64_t seed);

struct BdViolation {
  std::size_t ensemble = 0;
  std::size_t later = 0;
  std::size_t earlier = 0;
  double increase = 0.0;
};

struct BdReport {
  std::vector<std::vector<double>> values;  // [ensemble][step]
  std::vector<BdViolation> violations;
};

/// Guessing probabilities of {p_i, [id (x) Lambda_k](rho_i)} for a discrete
/// sequence Lambda_0 = id, Lambda_1, ...; any later step beating an earlier
/// one by more than 1e-7 certifies the sequence is not CP-divisible.
BdReport discrete_bd_check(const std::vector<QuantumMap>& maps, const std::vector<StateEnsemble>& ensembles);

/// `count` ensembles of `size` Haar-random pure states on C^dim (x) C^dim
/// with Dirichlet-like random priors.
std::vector<StateEnsemble> random_bd_ensembles(Eigen::Index dim, int count, int size, std::uint64_t seed);

enum class ReconcileStatus { Consistent, InconsistentInvestigate, Unchecked };
std::string to_string(ReconcileStatus s);

struct ReconcileEntry {
  std::string label;
  std::size_t index = 0;
  double time = 0.0;
  double derivative = 0.0;
  Eigen::Index certifying_k = 1;
  ReconcileStatus status = ReconcileStatus::Unchecked;
  long confirming_step = -1;  // grid step with a certified-negative check
  Eigen::Index confirming_k = 0;
};

struct KSummary {
  Eigen::Index k = 1;
  bool divisible_on_grid = true;
  std::size_t certified_negative_steps = 0;
  std::size_t witness_violations = 0;  // violations certified at this k
};

struct Reconciliation {
  std::vector<KSummary> per_k;
  std::vector<ReconcileEntry> entries;

  std::size_t inconsistent() const;
  nlohmann::json to_json() const;
};

/// A violation is CONSISTENT when an adjacent grid step is certified negative
/// for some k' <= its certifying k, INCONSISTENT-INVESTIGATE otherwise if some
/// k' >= its certifying k was checked (and looked nonnegative there), and
/// UNCHECKED when no such k' was checked.
/// Certified-negative steps without violations are always consistent.
Reconciliation verdict(const DynamicalMap& dm, const std::vector<WitnessTrajectory>& trajectories,
                       const DivisibilityReport& report);

}  // namespace qdiv
