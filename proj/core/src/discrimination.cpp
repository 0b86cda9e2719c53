#include "qdiv/discrimination.hpp"

#include <cmath>
#include <limits>

#include "qdiv/entropy.hpp"
#include "qdiv/errors.hpp"
#include "qdiv/optimize.hpp"
#include "qdiv/random.hpp"
#include "qdiv/sdp.hpp"

namespace qdiv {

CMatrix helstrom_matrix(double p1, const CMatrix& rho1, const CMatrix& rho2) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw DomainError("helstrom: p1 must lie in [0,1]");
  if (rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols()) {
    throw DimensionError("helstrom: states differ in dimension");
  }
  return p1 * rho1 - (1.0 - p1) * rho2;
}

double helstrom_guess(double p1, const CMatrix& rho1, const CMatrix& rho2) {
  return 0.5 * (1.0 + trace_norm(hermitian_part(helstrom_matrix(p1, rho1, rho2))));
}

GuessResult p_guess(const StateEnsemble& ens) {
  const Eigen::Index d = ens.dim();
  if (ens.size() == 1) return {1.0, Povm({CMatrix::Identity(d, d)})};
  SdpProblem p;
  p.sense = SdpSense::Maximize;
  std::vector<int> blocks;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const int b = p.add_block(d);
    p.set_objective(b, ens.probs[i] * ens.states[i].matrix());
    blocks.push_back(b);
  }
  for (const auto& e : hermitian_basis(d)) {
    const int row = p.add_constraint(e.trace().real());
    for (int b : blocks) p.set_coefficient(row, b, e);
  }
  const SdpSolution s = solve_or_throw(p, "p_guess");
  return {s.primal_value, Povm(s.x)};
}

ChannelEnsemble::ChannelEnsemble(std::vector<double> p, std::vector<QuantumMap> m)
    : probs(std::move(p)), maps(std::move(m)) {
  if (probs.empty() || probs.size() != maps.size()) {
    throw DimensionError("ChannelEnsemble: need matching, non-empty probs and maps");
  }
  double total = 0.0;
  for (double q : probs) {
    if (!(q >= 0.0)) throw DomainError("ChannelEnsemble: negative probability");
    total += q;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("ChannelEnsemble: probabilities must sum to 1");
  for (const auto& mp : maps) {
    if (mp.dim_in() != maps.front().dim_in() || mp.dim_out() != maps.front().dim_out()) {
      throw DimensionError("ChannelEnsemble: maps differ in dimension");
    }
  }
}

namespace {

CVector top_eigenvector(const CMatrix& h) {
  const HermEig e = eigh(h);
  return e.vectors.col(e.values.size() - 1);
}

CVector random_input(Eigen::Index dim, std::uint64_t seed, int restart) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
  return random_unit_vector(dim, rng);
}

CMatrix projector(const CVector& v) { return v * v.adjoint(); }

// Optimal measurement and its value for the current output ensemble.
std::pair<double, std::vector<CMatrix>> best_measurement(const std::vector<double>& probs,
                                                         const std::vector<CMatrix>& outs) {
  const Eigen::Index d = outs.front().rows();
  if (outs.size() == 2) {
    // Helstrom: project onto the nonnegative part of p1 rho1 - p2 rho2.
    const HermEig e = eigh(probs[0] * outs[0] - probs[1] * outs[1]);
    CMatrix m1 = CMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (e.values[i] >= 0.0) m1 += projector(e.vectors.col(i));
    }
    const double value = 0.5 * (1.0 + e.values.cwiseAbs().sum());
    return {value, {m1, CMatrix::Identity(d, d) - m1}};
  }
  std::vector<DensityOperator> states;
  for (const auto& o : outs) states.emplace_back(hermitian_part(o));
  GuessResult g = p_guess(StateEnsemble(probs, states));
  return {g.value, g.povm.elements};
}

}  // namespace

double p_guess_channels(const ChannelEnsemble& ens, Eigen::Index k, const SearchOptions& opts) {
  const Eigen::Index d = ens.maps.front().dim_in();
  if (k < 1 || k > d) throw DomainError("p_guess_channels: k must lie in [1, d]");
  std::vector<QuantumMap> amp;
  std::vector<QuantumMap> amp_adj;
  for (const auto& m : ens.maps) {
    amp.push_back(amplify(m, k));
    amp_adj.push_back(adjoint(amp.back()));
  }
  if (ens.maps.size() == 1) return 1.0;

  double best = 0.0;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    CVector psi = random_input(k * d, opts.seed, r);
    double value = -1.0;
    for (int it = 0; it < 500; ++it) {
      std::vector<CMatrix> outs;
      for (const auto& m : amp) outs.push_back(m.apply(projector(psi)));
      auto [v, povm] = best_measurement(ens.probs, outs);
      const bool done = v - value < 1e-12;
      value = std::max(value, v);
      if (done) break;
      CMatrix h = CMatrix::Zero(k * d, k * d);
      for (std::size_t i = 0; i < amp.size(); ++i) h += ens.probs[i] * amp_adj[i].apply(povm[i]);
      psi = top_eigenvector(hermitian_part(h));
    }
    best = std::max(best, value);
  }
  return best;
}

double channel_distance(const QuantumMap& e1, const QuantumMap& e2, double p, Eigen::Index k,
                        const SearchOptions& opts) {
  const Eigen::Index d = e1.dim_in();
  if (k < 1 || k > d) throw DomainError("channel_distance: k must lie in [1, d]");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("channel_distance: p must lie in [0,1]");
  const QuantumMap delta = amplify((1.0 - p) * e1 - p * e2, k);
  const QuantumMap delta_adj = adjoint(delta);

  double best = 0.0;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    CVector psi = random_input(k * d, opts.seed, r);
    double value = -1.0;
    for (int it = 0; it < 1000; ++it) {
      const HermEig e = eigh(delta.apply(projector(psi)));
      const double v = e.values.cwiseAbs().sum();
      const bool done = v - value < 1e-13 * (1.0 + v);
      value = std::max(value, v);
      if (done) break;
      // ||X||_1 = max over Hermitian unitaries M of Tr(M X).
      const RVector sgn = e.values.unaryExpr([](double x) { return x >= 0.0 ? 1.0 : -1.0; });
      const CMatrix m = e.vectors * sgn.cast<Complex>().asDiagonal() * e.vectors.adjoint();
      psi = top_eigenvector(hermitian_part(delta_adj.apply(m)));
    }
    best = std::max(best, value);
  }
  return best;
}

double diamond_norm(const QuantumMap& m) {
  const Eigen::Index din = m.dim_in();
  const Eigen::Index dout = m.dim_out();
  const Eigen::Index n = din * dout;
  const CMatrix j = choi(m);

  // max Re Tr(J^dagger X) s.t. [[I (x) rho0, X], [X^dagger, I (x) rho1]] >= 0,
  // rho0, rho1 states on the input space (output factor first).
  SdpProblem p;
  p.sense = SdpSense::Maximize;
  const int w = p.add_block(2 * n);
  const int r0 = p.add_block(din);
  const int r1 = p.add_block(din);
  CMatrix c = CMatrix::Zero(2 * n, 2 * n);
  c.topRightCorner(n, n) = 0.5 * j;
  c.bottomLeftCorner(n, n) = 0.5 * j.adjoint();
  p.set_objective(w, c);

  const Eigen::Index dims[2] = {dout, din};
  const Eigen::Index keep_in = 1;
  for (const auto& e : hermitian_basis(n)) {
    const CMatrix reduced = partial_trace(e, dims, std::span(&keep_in, 1));
    CMatrix top = CMatrix::Zero(2 * n, 2 * n);
    top.topLeftCorner(n, n) = e;
    const int a = p.add_constraint(0.0);
    p.set_coefficient(a, w, top);
    p.set_coefficient(a, r0, -reduced);
    CMatrix bottom = CMatrix::Zero(2 * n, 2 * n);
    bottom.bottomRightCorner(n, n) = e;
    const int b = p.add_constraint(0.0);
    p.set_coefficient(b, w, bottom);
    p.set_coefficient(b, r1, -reduced);
  }
  const int t0 = p.add_constraint(1.0);
  p.set_coefficient(t0, r0, CMatrix::Identity(din, din));
  const int t1 = p.add_constraint(1.0);
  p.set_coefficient(t1, r1, CMatrix::Identity(din, din));

  return solve_or_throw(p, "diamond_norm").primal_value;
}

CbNormCheck cb_norm_check(const QuantumMap& m, const SearchOptions& opts) {
  const Eigen::Index din = m.dim_in();
  // ||id (x) m^#||_inf = max over unit u, v of ||(id (x) m)(|u><v|)||_1; the
  // ascent alternates the polar unitary of that output with the top
  // singular pair of (id (x) m^#)(unitary).
  const QuantumMap amp = amplify(m, din);
  const QuantumMap amp_adj = adjoint(amp);
  CbNormCheck out;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(r)));
    CVector u = random_unit_vector(din * din, rng);
    CVector v = random_unit_vector(din * din, rng);
    double value = -1.0;
    for (int it = 0; it < 1000; ++it) {
      const CMatrix z = amp.apply(u * v.adjoint());
      const CMatrix x = polar_unitary(z);
      Eigen::JacobiSVD<CMatrix> svd(amp_adj.apply(x), Eigen::ComputeFullU | Eigen::ComputeFullV);
      const double s = svd.singularValues()[0];
      const bool done = s - value < 1e-13 * (1.0 + s);
      value = std::max(value, s);
      u = svd.matrixU().col(0);
      v = svd.matrixV().col(0);
      if (done) break;
    }
    out.cb_value = std::max(out.cb_value, value);
  }
  out.diamond = diamond_norm(m);
  out.residual = std::abs(out.cb_value - out.diamond);
  return out;
}

double square_norm(const CMatrix& x, Eigen::Index dim_b, const SearchOptions& opts) {
  require_square(x, "square_norm");
  if (dim_b < 1 || x.rows() % dim_b != 0) throw DimensionError("square_norm: dim_b must divide the dimension");
  const Eigen::Index dim_a = x.rows() / dim_b;
  const Eigen::Index dims[2] = {dim_a, dim_b};
  const Eigen::Index keep_b = 1;
  const CMatrix id_a = CMatrix::Identity(dim_a, dim_a);
  const double radius = std::sqrt(static_cast<double>(dim_b));
  auto trace_a = [&](const CMatrix& m) { return partial_trace(m, dims, std::span(&keep_b, 1)); };
  auto normalize = [&](const CMatrix& g) -> CMatrix {
    const double n = g.norm();
    if (!(n > 0.0)) return CMatrix::Identity(dim_b, dim_b);
    return radius * g.adjoint() / n;
  };

  double best = 0.0;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(r)));
    CMatrix b1 = ginibre(dim_b, dim_b, rng);
    CMatrix b2 = ginibre(dim_b, dim_b, rng);
    b1 *= radius / b1.norm();
    b2 *= radius / b2.norm();
    double value = -1.0;
    for (int it = 0; it < 2000; ++it) {
      const CMatrix y = kron(id_a, b1) * x * kron(id_a, b2);
      Eigen::JacobiSVD<CMatrix> svd(y);
      const double v = svd.singularValues().sum();
      const bool done = v - value < 1e-13 * (1.0 + v);
      value = std::max(value, v);
      if (done) break;
      // ||Y||_1 = max over unitaries U of Re Tr(U Y).
      const CMatrix u = polar_unitary(y).adjoint();
      b1 = normalize(trace_a(x * kron(id_a, b2) * u));
      b2 = normalize(trace_a(u * kron(id_a, b1) * x));
    }
    best = std::max(best, value);
  }
  return best;
}

double operational_fidelity(const QuantumMap& e1, const QuantumMap& e2) {
  const Eigen::Index d = e1.dim_in();
  if (e2.dim_in() != d || e2.dim_out() != e1.dim_out()) {
    throw DimensionError("operational_fidelity: channels differ in dimension");
  }
  // Uhlmann with Stinespring isometries V_i = sum_e K^i_e (x) |e>: the
  // fidelity of the outputs for an input with marginal rho is ||L(rho)||_1,
  // L(rho)_{ef} = Tr(rho K1_f^dagger K2_e). The minimum over rho of a trace
  // norm of a linear image is the SDP
  //   min (Tr P + Tr Q) / 2  s.t.  [[P, Y], [Y^dagger, Q]] >= 0, Y = L(rho), Tr rho = 1.
  const std::vector<CMatrix> k1 = kraus(e1);
  const std::vector<CMatrix> k2 = kraus(e2);
  const auto n2 = static_cast<Eigen::Index>(k2.size());
  const auto n1 = static_cast<Eigen::Index>(k1.size());
  if (n1 == 0 || n2 == 0) return 0.0;
  const Eigen::Index n = n1 + n2;
  SdpProblem p;
  p.sense = SdpSense::Minimize;
  const int z = p.add_block(n);
  const int r = p.add_block(d);
  p.set_objective(z, 0.5 * CMatrix::Identity(n, n));
  const Complex i(0.0, 1.0);
  for (Eigen::Index e = 0; e < n2; ++e) {
    for (Eigen::Index f = 0; f < n1; ++f) {
      const CMatrix m = k1[static_cast<std::size_t>(f)].adjoint() * k2[static_cast<std::size_t>(e)];
      CMatrix re = CMatrix::Zero(n, n);
      re(e, n2 + f) = 0.5;
      re(n2 + f, e) = 0.5;
      const int a = p.add_constraint(0.0);
      p.set_coefficient(a, z, re);
      p.set_coefficient(a, r, -0.5 * (m + m.adjoint()));
      CMatrix im = CMatrix::Zero(n, n);
      im(e, n2 + f) = 0.5 * i;
      im(n2 + f, e) = -0.5 * i;
      const int b = p.add_constraint(0.0);
      p.set_coefficient(b, z, im);
      p.set_coefficient(b, r, (m - m.adjoint()) / (2.0 * i));
    }
  }
  const int t = p.add_constraint(1.0);
  p.set_coefficient(t, r, CMatrix::Identity(d, d));
  return std::clamp(solve_or_throw(p, "operational_fidelity").primal_value, 0.0, 1.0);
}

double operational_fidelity_search(const QuantumMap& e1, const QuantumMap& e2, const SearchOptions& opts) {
  const Eigen::Index d = e1.dim_in();
  if (e2.dim_in() != d || e2.dim_out() != e1.dim_out()) {
    throw DimensionError("operational_fidelity: channels differ in dimension");
  }
  const QuantumMap a1 = amplify(e1, d);
  const QuantumMap a2 = amplify(e2, d);
  const Eigen::Index n = d * d;
  const Objective f = [&](const RVector& x) {
    CVector psi(n);
    for (Eigen::Index i = 0; i < n; ++i) psi[i] = Complex(x[2 * i], x[2 * i + 1]);
    const double norm = psi.norm();
    if (!(norm > 0.0)) return std::numeric_limits<double>::infinity();
    psi /= norm;
    const CMatrix rho = projector(psi);
    return fidelity(a1.apply(rho), a2.apply(rho));
  };
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    const CVector psi = random_input(n, opts.seed, r);
    RVector x(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x[2 * i] = psi[i].real();
      x[2 * i + 1] = psi[i].imag();
    }
    best = std::min(best, minimize_bfgs(f, x).value);
  }
  return best;
}

}  // namespace qdiv
