#pragma once

// State and channel discrimination.
//
// Quantities defined by a nonconvex outer maximization (over inputs, or over
// the B_1/B_2 operators of the square norm) are computed by multistart local
// ascent and are lower bounds ("best found"). The SDP-based values
// (p_guess, diamond_norm) carry a matching dual certificate.

#include <cstdint>
#include <vector>

#include "qdiv/linalg.hpp"
#include "qdiv/maps.hpp"
#include "qdiv/quantum.hpp"

namespace qdiv {

/// p1 rho1 - p2 rho2 with p2 = 1 - p1.
CMatrix helstrom_matrix(double p1, const CMatrix& rho1, const CMatrix& rho2);

/// (1 + ||p1 rho1 - p2 rho2||_1) / 2.
double helstrom_guess(double p1, const CMatrix& rho1, const CMatrix& rho2);

struct GuessResult {
  double value = 0.0;
  Povm povm;
};

/// max over POVMs of sum_i p_i Tr(E_i rho_i), by SDP.
GuessResult p_guess(const StateEnsemble& ens);

struct ChannelEnsemble {
  std::vector<double> probs;
  std::vector<QuantumMap> maps;

  ChannelEnsemble(std::vector<double> p, std::vector<QuantumMap> m);
};

struct SearchOptions {
  int restarts = 64;
  std::uint64_t seed = 0;
};

/// Guessing probability of the channel ensemble with inputs on C^k (x) H
/// (ancilla first), so every input has Schmidt number at most k. Ascent
/// alternates the optimal measurement for the current input with the best
/// input for the current measurement.
double p_guess_channels(const ChannelEnsemble& ens, Eigen::Index k, const SearchOptions& opts = {});

/// D_k^p(e1, e2) = max over inputs on C^k (x) H of
/// || (id_k (x) ((1-p) e1 - p e2))(psi) ||_1.
double channel_distance(const QuantumMap& e1, const QuantumMap& e2, double p, Eigen::Index k,
                        const SearchOptions& opts = {});

/// Diamond norm of a Hermiticity-preserving map (Watrous SDP on the Choi
/// matrix).
double diamond_norm(const QuantumMap& m);

struct CbNormCheck {
  /// Best ||(id (x) m^#)(X)||_inf found over unitary X.
  double cb_value = 0.0;
  double diamond = 0.0;
  double residual = 0.0;
};
CbNormCheck cb_norm_check(const QuantumMap& m, const SearchOptions& opts = {});

/// sup ||(I_A (x) B1) X (I_A (x) B2)||_1 over ||B1||_2 = ||B2||_2 = sqrt(d_B),
/// B being the second tensor factor of dimension dim_b.
double square_norm(const CMatrix& x, Eigen::Index dim_b, const SearchOptions& opts = {});

/// inf over pure psi on H (x) H of F((id (x) e1)(psi), (id (x) e2)(psi))
/// (root fidelity). Exact: solved as a convex program over the input
/// marginal. CP inputs required.
double operational_fidelity(const QuantumMap& e1, const QuantumMap& e2);

/// The same infimum searched directly over pure inputs by multistart BFGS;
/// an upper bound, only as accurate as the optimizer near the cusp of the
/// square root. Kept as an independent cross-check.
double operational_fidelity_search(const QuantumMap& e1, const QuantumMap& e2, const SearchOptions& opts = {});

}  // namespace qdiv
