#include "qdiv/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "qdiv/errors.hpp"
#include "qdiv/optimize.hpp"
#include "qdiv/random.hpp"
#include "qdiv/sdp.hpp"

namespace qdiv {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

// Eigenvalues at or below this fraction of the largest are treated as
// numerically zero when raised to a power; this sits just above the
// rounding noise of a dense eigensolver.
constexpr double kPowerCutoff = 1e-14;

// Relative weight of rho outside supp sigma that still counts as contained.
constexpr double kSupportLeak = 1e-9;

double checked_trace(const CMatrix& rho, const char* what) {
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) throw DomainError(std::string(what) + ": first argument has non-positive trace");
  return tr;
}

void require_same_dim(const CMatrix& a, const CMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": operands differ in dimension");
  }
}

bool in_support(double lambda, double lmax) { return lambda > support_cutoff(lmax); }

// Weight of rho outside the support of sigma relative to Tr rho.
double support_leak(const CMatrix& rho, const HermEig& sig, double tr) {
  const double lmax = sig.values.maxCoeff();
  double leak = 0.0;
  for (Eigen::Index k = 0; k < sig.values.size(); ++k) {
    if (in_support(sig.values[k], lmax)) continue;
    const CVector v = sig.vectors.col(k);
    leak += (v.adjoint() * rho * v)(0, 0).real();
  }
  return leak / tr;
}

// sum_i max(s_i, 0)^alpha over the numerically nonzero eigenvalues.
double power_trace(const RVector& s, double alpha) {
  const double smax = s.size() > 0 ? s.maxCoeff() : 0.0;
  double q = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > kPowerCutoff * smax && s[i] > 0.0) q += std::pow(s[i], alpha);
  }
  return q;
}

CMatrix support_power(const HermEig& eig, double g) {
  return spectral_fn(eig, [g](double x) { return std::pow(x, g); }, true);
}

// x -> max(x, 0)^g on the whole spectrum. For g > 0 no support cut is
// applied: dropping an eigenvalue of size eps would shift the result by
// eps^g, far above the rounding noise it is meant to suppress.
// m^g on the support of m; rounding-level eigenvalues would otherwise leak
// in as ~1e-8 terms once raised to a fractional power.
CMatrix clamped_power(const CMatrix& m, double g) {
  const HermEig e = eigh(m);
  const double lmax = e.values.maxCoeff();
  RVector f(e.values.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = in_support(e.values[i], lmax) ? std::pow(e.values[i], g) : 0.0;
  return e.vectors * f.asDiagonal() * e.vectors.adjoint();
}

// Tr[(sigma^g rho sigma^g)^alpha] for alpha < 1 as sum_i s_i^(2 alpha) over
// the singular values of rho^(1/2) sigma^g; the singular values are
// accurate to rounding even where the eigenvalues of the sandwich are tiny.
double sandwiched_trace_below_one(const CMatrix& rho, const CMatrix& sigma, double alpha) {
  const double g = (1.0 - alpha) / (2.0 * alpha);
  const CMatrix x = clamped_power(rho, 0.5) * clamped_power(sigma, g);
  const RVector sv = Eigen::JacobiSVD<CMatrix>(x).singularValues();
  double q = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > 0.0) q += std::pow(sv[i], 2.0 * alpha);
  }
  return q;
}

RVector eigenvalues(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

DivergenceValue relative_entropy(const CMatrix& rho, const CMatrix& sigma) {
  require_same_dim(rho, sigma, "relative_entropy");
  const double tr = checked_trace(rho, "relative_entropy");
  const HermEig er = eigh(rho);
  const HermEig es = eigh(sigma);
  if (support_leak(rho, es, tr) > kSupportLeak) return DivergenceValue::infinite();

  const double rmax = er.values.maxCoeff();
  double plogp = 0.0;
  for (Eigen::Index i = 0; i < er.values.size(); ++i) {
    const double l = er.values[i];
    if (in_support(l, rmax)) plogp += l * std::log(l);
  }
  const double smax = es.values.maxCoeff();
  double cross = 0.0;
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    const double m = es.values[k];
    if (!in_support(m, smax)) continue;
    const CVector v = es.vectors.col(k);
    cross += std::log(m) * (v.adjoint() * rho * v)(0, 0).real();
  }
  return {(plogp - cross) / tr / kLn2, false};
}

DivergenceValue renyi_divergence(const CMatrix& rho, const CMatrix& sigma, double alpha) {
  require_same_dim(rho, sigma, "renyi_divergence");
  if (!(alpha >= 0.0) || std::isinf(alpha)) throw DomainError("renyi_divergence: alpha must lie in [0, inf)");
  if (alpha == 1.0) return relative_entropy(rho, sigma);
  const double tr = checked_trace(rho, "renyi_divergence");
  const HermEig er = eigh(rho);
  const HermEig es = eigh(sigma);
  if (alpha > 1.0 && support_leak(rho, es, tr) > kSupportLeak) return DivergenceValue::infinite();

  // Tr[rho^a sigma^(1-a)] = sum_ik l_i^a m_k^(1-a) |<v_i|w_k>|^2.
  const double rmax = er.values.maxCoeff();
  const double smax = es.values.maxCoeff();
  const CMatrix overlap = er.vectors.adjoint() * es.vectors;
  double q = 0.0;
  for (Eigen::Index i = 0; i < er.values.size(); ++i) {
    const double l = er.values[i];
    if (!in_support(l, rmax)) continue;
    const double la = alpha == 0.0 ? 1.0 : std::pow(l, alpha);
    for (Eigen::Index k = 0; k < es.values.size(); ++k) {
      const double m = es.values[k];
      if (!in_support(m, smax)) continue;
      q += la * std::pow(m, 1.0 - alpha) * std::norm(overlap(i, k));
    }
  }
  if (!(q > 0.0)) return DivergenceValue::infinite();
  return {std::log2(q / tr) / (alpha - 1.0), false};
}

double renyi_entropy(const CMatrix& rho, double alpha) {
  if (!(alpha >= 0.0)) throw DomainError("renyi_entropy: alpha must be nonnegative");
  const double tr = checked_trace(rho, "renyi_entropy");
  const RVector l = eigenvalues(rho) / tr;
  const double lmax = l.maxCoeff();
  if (std::isinf(alpha)) return -std::log2(lmax);
  double acc = 0.0;
  if (alpha == 1.0) {
    for (Eigen::Index i = 0; i < l.size(); ++i) {
      if (in_support(l[i], lmax)) acc -= l[i] * std::log2(l[i]);
    }
    return acc;
  }
  for (Eigen::Index i = 0; i < l.size(); ++i) {
    if (in_support(l[i], lmax)) acc += alpha == 0.0 ? 1.0 : std::pow(l[i], alpha);
  }
  return std::log2(acc) / (1.0 - alpha);
}

double von_neumann_entropy(const CMatrix& rho) { return renyi_entropy(rho, 1.0); }

DivergenceValue sandwiched_divergence(const CMatrix& rho, const CMatrix& sigma, double alpha) {
  require_same_dim(rho, sigma, "sandwiched_divergence");
  if (!(alpha > 0.0)) throw DomainError("sandwiched_divergence: alpha must be positive");
  if (alpha == 1.0) return relative_entropy(rho, sigma);
  const double tr = checked_trace(rho, "sandwiched_divergence");
  const HermEig es = eigh(sigma);
  if (alpha > 1.0 && support_leak(rho, es, tr) > kSupportLeak) return DivergenceValue::infinite();

  if (std::isinf(alpha)) {
    const CMatrix s = support_power(es, -0.5);
    return {std::log2(eigenvalues(s * rho * s).maxCoeff() / tr), false};
  }
  double q = 0.0;
  if (alpha < 1.0) {
    q = sandwiched_trace_below_one(rho, sigma, alpha);
  } else {
    const CMatrix s = support_power(es, (1.0 - alpha) / (2.0 * alpha));
    q = power_trace(eigenvalues(s * rho * s), alpha);
  }
  if (!(q > 0.0)) return DivergenceValue::infinite();
  return {std::log2(q / tr) / (alpha - 1.0), false};
}

double pinched_approximation(const CMatrix& rho, const CMatrix& sigma, double alpha, int n) {
  require_same_dim(rho, sigma, "pinched_approximation");
  if (n < 1) throw DomainError("pinched_approximation: n must be positive");
  Eigen::Index dim = 1;
  for (int i = 0; i < n; ++i) dim *= rho.rows();
  if (dim > 64) throw DimensionError("pinched_approximation: dim^n exceeds 64");
  CMatrix rn = rho;
  CMatrix sn = sigma;
  for (int i = 1; i < n; ++i) {
    rn = kron(rn, rho);
    sn = kron(sn, sigma);
  }
  const DivergenceValue d = renyi_divergence(pinch(sn, rn), sn, alpha);
  return d.value / static_cast<double>(n);
}

double fidelity(const CMatrix& rho, const CMatrix& sigma) {
  require_same_dim(rho, sigma, "fidelity");
  return sandwiched_trace_below_one(rho, sigma, 0.5);
}

double conditional_entropy(const BipartiteState& rho) {
  return von_neumann_entropy(rho.matrix()) -
         von_neumann_entropy(partial_trace(rho, Subsystem::A).matrix());
}

namespace {

// Normalized sigma = G G^dagger / Tr from 2 d^2 real parameters.
CMatrix sigma_from_params(const RVector& x, Eigen::Index d) {
  CMatrix g(d, d);
  for (Eigen::Index i = 0; i < d * d; ++i) g.data()[i] = Complex(x[2 * i], x[2 * i + 1]);
  CMatrix s = g * g.adjoint();
  const double tr = s.trace().real();
  return s / tr;
}

RVector params_from_sigma(const CMatrix& sigma) {
  const CMatrix g = spectral_fn(sigma, [](double v) { return std::sqrt(std::max(v, 0.0)); });
  RVector x(2 * g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    x[2 * i] = g.data()[i].real();
    x[2 * i + 1] = g.data()[i].imag();
  }
  return x;
}

// Minimum over states sigma_B of f(I_A (x) sigma_B). Restart 0 starts at a
// full-rank mixture of rho_B; the others at Ginibre points.
double minimize_over_sigma(const BipartiteState& rho, const std::function<double(const CMatrix&)>& f,
                           const SigmaSearchOptions& opts, bool accept_first) {
  const Eigen::Index da = rho.dim_a();
  const Eigen::Index db = rho.dim_b();
  const CMatrix id_a = CMatrix::Identity(da, da);
  const Objective obj = [&](const RVector& x) {
    const CMatrix s = sigma_from_params(x, db);
    if (!s.allFinite()) return std::numeric_limits<double>::infinity();
    return f(kron(id_a, s));
  };
  const CMatrix rho_b = partial_trace(rho, Subsystem::A).matrix();
  double best = std::numeric_limits<double>::infinity();
  const int restarts = std::max(1, opts.restarts);
  for (int r = 0; r < restarts; ++r) {
    RVector x0;
    if (r == 0) {
      x0 = params_from_sigma(0.9 * rho_b + 0.1 * CMatrix::Identity(db, db) / static_cast<double>(db));
    } else {
      Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(r)));
      const CMatrix g = ginibre(db, db, rng);
      x0 = params_from_sigma(g * g.adjoint() / (g * g.adjoint()).trace().real());
    }
    const MinimizeResult res = minimize_bfgs(obj, x0);
    best = std::min(best, res.value);
    if (accept_first && res.converged && std::isfinite(res.value)) break;
  }
  return best;
}

}  // namespace

double conditional_entropy_variational(const BipartiteState& rho, const SigmaSearchOptions& opts) {
  const CMatrix& m = rho.matrix();
  const double best = minimize_over_sigma(
      rho, [&](const CMatrix& tau) { return relative_entropy(m, tau).value; }, opts, false);
  return -best;
}

double conditional_renyi(const BipartiteState& rho, double alpha, const SigmaSearchOptions& opts) {
  if (!(alpha >= 0.5)) throw DomainError("conditional_renyi: alpha must be at least 1/2");
  if (alpha == 1.0) return conditional_entropy(rho);
  if (std::isinf(alpha)) return h_min(rho);
  const CMatrix& m = rho.matrix();
  const double best = minimize_over_sigma(
      rho, [&](const CMatrix& tau) { return sandwiched_divergence(m, tau, alpha).value; }, opts,
      alpha > 1.0);
  return -best;
}

MinEntropyResult h_min_detail(const BipartiteState& rho) {
  const Eigen::Index da = rho.dim_a();
  const Eigen::Index db = rho.dim_b();
  SdpProblem p;
  p.sense = SdpSense::Maximize;
  const int blk = p.add_block(da * db);
  p.set_objective(blk, rho.matrix());
  const std::vector<CMatrix> basis = hermitian_basis(db);
  const CMatrix id_a = CMatrix::Identity(da, da);
  for (const auto& e : basis) {
    const int row = p.add_constraint(e.trace().real());
    p.set_coefficient(row, blk, kron(id_a, e));
  }
  const SdpSolution s = solve_or_throw(p, "h_min");
  MinEntropyResult r;
  r.value = -std::log2(s.primal_value);
  r.sigma_b = CMatrix::Zero(db, db);
  for (std::size_t m = 0; m < basis.size(); ++m) r.sigma_b += s.y[static_cast<Eigen::Index>(m)] * basis[m];
  return r;
}

double h_min(const BipartiteState& rho) { return h_min_detail(rho).value; }

double h_min_direct(const BipartiteState& rho, const SigmaSearchOptions& opts) {
  const CMatrix& m = rho.matrix();
  const Eigen::Index da = rho.dim_a();
  const Eigen::Index db = rho.dim_b();
  const CMatrix id_a = CMatrix::Identity(da, da);

  // log2 of the spectrum of (I (x) sigma^-1/2) rho (I (x) sigma^-1/2), or
  // empty when rho leaves the support of I (x) sigma.
  auto log_spectrum = [&](const RVector& x, std::vector<double>& out) {
    out.clear();
    const CMatrix s = sigma_from_params(x, db);
    if (!s.allFinite()) return false;
    const HermEig es = eigh(kron(id_a, s));
    if (support_leak(m, es, 1.0) > kSupportLeak) return false;
    const CMatrix w = support_power(es, -0.5);
    const RVector l = eigenvalues(w * m * w);
    const double lmax = l.maxCoeff();
    for (Eigen::Index i = 0; i < l.size(); ++i) {
      if (l[i] > kPowerCutoff * lmax && l[i] > 0.0) out.push_back(std::log2(l[i]));
    }
    return !out.empty();
  };

  const CMatrix rho_b = partial_trace(rho, Subsystem::A).matrix();
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> buf;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    RVector x;
    if (r == 0) {
      x = params_from_sigma(0.9 * rho_b + 0.1 * CMatrix::Identity(db, db) / static_cast<double>(db));
    } else {
      Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(r)));
      const CMatrix g = ginibre(db, db, rng);
      x = params_from_sigma(g * g.adjoint() / (g * g.adjoint()).trace().real());
    }
    // Smoothed max: (1/p) log2 sum 2^(p l_i), tightened geometrically.
    for (double pw = 4.0; pw <= 1.1e5; pw *= 4.0) {
      const Objective smooth = [&](const RVector& v) {
        if (!log_spectrum(v, buf)) return std::numeric_limits<double>::infinity();
        const double top = *std::max_element(buf.begin(), buf.end());
        double acc = 0.0;
        for (double l : buf) acc += std::exp2(pw * (l - top));
        return top + std::log2(acc) / pw;
      };
      x = minimize_bfgs(smooth, x).x;
    }
    if (log_spectrum(x, buf)) best = std::min(best, *std::max_element(buf.begin(), buf.end()));
  }
  return -best;
}

namespace {

// max F(rho, I_A (x) sigma_B) over sigma_B >= 0 with Tr sigma_B <= 1
// (subnormalized) or = 1. Uses rho = R R^dagger and
// F = max Re Tr X s.t. [[I, X], [X^dagger, R^dagger (I (x) sigma) R]] >= 0.
double max_fidelity_with_product(const BipartiteState& rho, bool subnormalized, const char* what) {
  const Eigen::Index da = rho.dim_a();
  const Eigen::Index db = rho.dim_b();
  const Eigen::Index n = da * db;
  const HermEig eig = eigh(rho.matrix());
  const double lmax = eig.values.maxCoeff();
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (in_support(eig.values[i], lmax)) cols.push_back(i);
  }
  const auto r = static_cast<Eigen::Index>(cols.size());
  CMatrix fac(n, r);
  for (Eigen::Index c = 0; c < r; ++c) {
    const Eigen::Index i = cols[static_cast<std::size_t>(c)];
    fac.col(c) = std::sqrt(eig.values[i]) * eig.vectors.col(i);
  }

  SdpProblem p;
  p.sense = SdpSense::Maximize;
  const int big = p.add_block(2 * r);
  const int sig = p.add_block(db);
  const int slack = subnormalized ? p.add_block(1) : -1;
  CMatrix c = CMatrix::Zero(2 * r, 2 * r);
  c.topRightCorner(r, r) = 0.5 * CMatrix::Identity(r, r);
  c.bottomLeftCorner(r, r) = 0.5 * CMatrix::Identity(r, r);
  p.set_objective(big, c);

  const Eigen::Index dims[2] = {da, db};
  const Eigen::Index keep_b = 1;
  for (const auto& e : hermitian_basis(r)) {
    CMatrix top = CMatrix::Zero(2 * r, 2 * r);
    top.topLeftCorner(r, r) = e;
    const int row_p = p.add_constraint(e.trace().real());
    p.set_coefficient(row_p, big, top);

    CMatrix bottom = CMatrix::Zero(2 * r, 2 * r);
    bottom.bottomRightCorner(r, r) = e;
    const int row_q = p.add_constraint(0.0);
    p.set_coefficient(row_q, big, bottom);
    const CMatrix lifted = fac * e * fac.adjoint();
    p.set_coefficient(row_q, sig, -partial_trace(lifted, dims, std::span(&keep_b, 1)));
  }
  const int row_t = p.add_constraint(1.0);
  p.set_coefficient(row_t, sig, CMatrix::Identity(db, db));
  if (subnormalized) p.set_coefficient(row_t, slack, CMatrix::Identity(1, 1));

  return solve_or_throw(p, what).primal_value;
}

}  // namespace

double h_max(const BipartiteState& rho) {
  const double f = max_fidelity_with_product(rho, true, "h_max");
  return 2.0 * std::log2(f);
}

double q_corr(const BipartiteState& rho) { return std::exp2(-h_min(rho)); }

double q_decpl(const BipartiteState& rho) {
  const double f = max_fidelity_with_product(rho, false, "q_decpl");
  // d_A F(rho, I/d_A (x) sigma)^2 = F(rho, I (x) sigma)^2.
  return f * f;
}

double q_corr_seesaw(const BipartiteState& rho, int restarts, std::uint64_t seed) {
  const Eigen::Index da = rho.dim_a();
  const Eigen::Index db = rho.dim_b();
  if (da > db) throw DomainError("q_corr_seesaw: requires dim_a <= dim_b");
  const Eigen::Index de = da * db;
  const CMatrix& m = rho.matrix();

  // Channel B -> A' as V : B -> A' (x) E, rows ordered a' * de + e. The
  // objective d_A <psi+| (id (x) Lambda)(rho) |psi+> equals
  // sum_e sum_{a,a2} V_{a2,e} rho_{a2,a} V_{a,e}^dagger with V_{a,e} the row
  // (a, e) of V and rho_{a2,a} the (a2, a) block of rho; it is a convex
  // quadratic in V, so V <- polar(gradient) never decreases it.
  auto gradient = [&](const CMatrix& v) {
    CMatrix g = CMatrix::Zero(da * de, db);
    for (Eigen::Index a = 0; a < da; ++a) {
      for (Eigen::Index a2 = 0; a2 < da; ++a2) {
        const CMatrix block = m.block(a2 * db, a * db, db, db);
        for (Eigen::Index e = 0; e < de; ++e) g.row(a * de + e) += v.row(a2 * de + e) * block;
      }
    }
    return g;
  };
  auto value = [&](const CMatrix& v, const CMatrix& g) { return (g * v.adjoint()).trace().real(); };

  double best = 0.0;
  for (int r = 0; r < std::max(1, restarts); ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    CMatrix v = polar_unitary(ginibre(da * de, db, rng));
    CMatrix g = gradient(v);
    double f = value(v, g);
    for (int it = 0; it < 2000; ++it) {
      v = polar_unitary(g);
      g = gradient(v);
      const double next = value(v, g);
      const bool done = next - f < 1e-14 * (1.0 + std::abs(f));
      f = std::max(f, next);
      if (done) break;
    }
    best = std::max(best, f);
  }
  return best;
}

}  // namespace qdiv
