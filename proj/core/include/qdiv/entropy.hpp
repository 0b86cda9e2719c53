#pragma once

// Divergences and entropies, all in bits.
//
// Divergence evaluators take positive operators: the second argument may be
// unnormalized (I_A (x) sigma_B), and the first is normalized by its trace.
// Support conventions:
//   alpha >= 1 (and the relative entropy): +inf unless supp rho lies in
//     supp sigma;
//   alpha < 1: finite unless the defining trace vanishes.

#include <cstdint>
#include <limits>

#include "qdiv/linalg.hpp"
#include "qdiv/quantum.hpp"

namespace qdiv {

struct DivergenceValue {
  double value = 0.0;
  bool support_violated = false;

  static DivergenceValue infinite() {
    return {std::numeric_limits<double>::infinity(), true};
  }
  bool is_infinite() const noexcept { return support_violated; }
};

inline constexpr double kInfiniteAlpha = std::numeric_limits<double>::infinity();

DivergenceValue relative_entropy(const CMatrix& rho, const CMatrix& sigma);

/// Petz family (1/(a-1)) log Tr[rho^a sigma^(1-a)]; a in [0, inf), with the
/// closed limits at a = 0 (-log Tr Pi_rho sigma) and a = 1.
DivergenceValue renyi_divergence(const CMatrix& rho, const CMatrix& sigma, double alpha);

/// (1/(1-a)) log Tr rho^a; a = 1 is the von Neumann entropy and a = inf
/// the min-entropy -log lambda_max.
double renyi_entropy(const CMatrix& rho, double alpha);
double von_neumann_entropy(const CMatrix& rho);

/// Sandwiched family (1/(a-1)) log Tr[(sigma^g rho sigma^g)^a], g = (1-a)/2a;
/// a in (0, inf]. a = 1 is the relative entropy, a = inf the max-divergence.
DivergenceValue sandwiched_divergence(const CMatrix& rho, const CMatrix& sigma, double alpha);

/// (1/n) D_a(P(rho^{(x)n}) || sigma^{(x)n}) with P the pinching by
/// sigma^{(x)n}. Requires dim^n <= 64.
double pinched_approximation(const CMatrix& rho, const CMatrix& sigma, double alpha, int n);

/// ||sqrt(rho) sqrt(sigma)||_1.
double fidelity(const CMatrix& rho, const CMatrix& sigma);

/// S(AB) - S(B).
double conditional_entropy(const BipartiteState& rho);

struct SigmaSearchOptions {
  int restarts = 16;
  std::uint64_t seed = 0;
};

/// -min over states sigma_B of D(rho_AB || I_A (x) sigma_B), found numerically.
double conditional_entropy_variational(const BipartiteState& rho, const SigmaSearchOptions& opts = {});

/// -min over states sigma_B of sandwiched D_a(rho_AB || I_A (x) sigma_B),
/// a >= 1/2. a = 1 uses the closed form, a = inf delegates to h_min.
double conditional_renyi(const BipartiteState& rho, double alpha, const SigmaSearchOptions& opts = {});

struct MinEntropyResult {
  double value = 0.0;
  /// Optimal dual variable: Tr sigma_B = 2^{-H_min} and I (x) sigma_B >= rho.
  CMatrix sigma_b;
};

/// 2^{-H_min} = min { Tr sigma_B : I_A (x) sigma_B >= rho_AB } by SDP.
MinEntropyResult h_min_detail(const BipartiteState& rho);
double h_min(const BipartiteState& rho);

/// H_min as max over states sigma_B of
/// -log || (I (x) sigma^{-1/2}) rho (I (x) sigma^{-1/2}) ||_inf, found by a
/// smoothed (log-sum-exp) descent with continuation. Cross-check for h_min.
double h_min_direct(const BipartiteState& rho, const SigmaSearchOptions& opts = {});

/// H_max = log max { F(rho_AB, I_A (x) sigma_B)^2 : sigma_B >= 0, Tr sigma_B <= 1 }
/// by SDP on a purification of rho.
double h_max(const BipartiteState& rho);

/// 2^{-H_min}: d_A times the best squared fidelity with the maximally
/// entangled state reachable by a channel on B.
double q_corr(const BipartiteState& rho);

/// Lower bound on q_corr by alternating ascent over Stinespring isometries of
/// the channel on B. Requires dim_a <= dim_b.
double q_corr_seesaw(const BipartiteState& rho, int restarts = 16, std::uint64_t seed = 0);

/// d_A max over states sigma_B of F(rho_AB, I_A/d_A (x) sigma_B)^2, by SDP.
double q_decpl(const BipartiteState& rho);

}  // namespace qdiv
