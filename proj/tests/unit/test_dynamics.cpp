#include <cmath>

#include <gtest/gtest.h>

#include "qdiv/dynamics.hpp"
#include "qdiv/errors.hpp"
#include "test_support.hpp"

using namespace qdiv;
using qdiv::test::diag;
using qdiv::test::max_abs_diff;

namespace {

double max_map_diff(const QuantumMap& a, const QuantumMap& b) { return max_abs_diff(a.superop(), b.superop()); }

GkslGenerator as_gksl(const Model& m) { return std::get<GkslGenerator>(m); }

CMatrix coherent_plus() {
  CMatrix m = CMatrix::Constant(2, 2, 0.5);
  return m;
}

}  // namespace

TEST(RateFunction, Forms) {
  EXPECT_DOUBLE_EQ(RateFunction::constant(2.5)(7.0), 2.5);
  EXPECT_NEAR(RateFunction::sinusoid(2.0, 3.0, 0.5)(1.0), 2.0 * std::sin(3.5), 1e-15);
  EXPECT_NEAR(RateFunction::neg_tanh()(0.7), -std::tanh(0.7), 1e-15);
  const RateFunction pl = RateFunction::piecewise_linear({{0.0, 1.0}, {2.0, 3.0}});
  EXPECT_DOUBLE_EQ(pl(-1.0), 1.0);
  EXPECT_DOUBLE_EQ(pl(1.0), 2.0);
  EXPECT_DOUBLE_EQ(pl(5.0), 3.0);
  EXPECT_TRUE(RateFunction::constant(1).is_constant());
  EXPECT_FALSE(pl.is_constant());
}

TEST(RateFunction, JsonRoundTrip) {
  for (const RateFunction& r : {RateFunction::constant(0.3), RateFunction::sinusoid(1, 2, 3), RateFunction::neg_tanh(),
                                RateFunction::piecewise_linear({{0, 0}, {1, 2}, {3, -1}})}) {
    const RateFunction back = RateFunction::from_json(nlohmann::json::parse(r.to_json().dump()));
    for (double t : {0.0, 0.4, 1.7, 4.0}) EXPECT_EQ(back(t), r(t));
  }
  EXPECT_DOUBLE_EQ(RateFunction::from_json(1.25)(3.0), 1.25);
  EXPECT_THROW(RateFunction::from_json(nlohmann::json{{"form", "nope"}}), Error);
}

TEST(Grid, EquallySpacedInclusive) {
  const auto g = make_grid(2.0, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g.front(), 0.0);
  EXPECT_DOUBLE_EQ(g[1], 0.5);
  EXPECT_DOUBLE_EQ(g.back(), 2.0);
}

TEST(Generator, TraceAnnihilating) {
  for (const char* name : {"amplitude_damping", "dephasing", "eternal"}) {
    const GkslGenerator g = as_gksl(model(name));
    const CMatrix l = g.superop(0.8);
    // Tr(L(X)) = vec(I)^dagger L vec(X) = 0 for all X.
    const CVector vi = vec(CMatrix::Identity(2, 2));
    EXPECT_LE((vi.adjoint() * l).cwiseAbs().maxCoeff(), 1e-12) << name;
  }
}

TEST(Propagate, ZeroGeneratorIsIdentity) {
  GkslGenerator g;
  g.dim = 3;
  g.h_eff = CMatrix::Zero(3, 3);
  const DynamicalMap dm = propagate(g, make_grid(2.0, 5));
  for (const auto& m : dm.maps) EXPECT_LE(max_map_diff(m, QuantumMap::identity(3)), 1e-14);
}

TEST(Propagate, HamiltonianFlowIsIsospectral) {
  const DynamicalMap dm = propagate(as_gksl(model("unitary", {{"omega", 1.3}})), make_grid(3.0, 7));
  const RVector ref = eigh(choi(dm.maps[0])).values;
  for (const auto& m : dm.maps) {
    EXPECT_LE((eigh(choi(m)).values - ref).cwiseAbs().maxCoeff(), 1e-10);
  }
  // H = omega/2 sigma_x: Lambda_t = conjugation by exp(-i omega t sigma_x / 2).
  const double t = dm.grid[3];
  CMatrix u(2, 2);
  u << std::cos(1.3 * t / 2), Complex(0, -std::sin(1.3 * t / 2)), Complex(0, -std::sin(1.3 * t / 2)),
      std::cos(1.3 * t / 2);
  EXPECT_LE(max_map_diff(dm.maps[3], channels::unitary(u)), 1e-10);
}

TEST(Propagate, AmplitudeDampingPopulation) {
  const double gamma = 0.7;
  const DynamicalMap dm = propagate(as_gksl(model("amplitude_damping", {{"gamma", gamma}})), make_grid(1.0, 11));
  for (std::size_t j = 0; j < dm.grid.size(); ++j) {
    const CMatrix out = dm.maps[j].apply(diag({0, 1}));
    EXPECT_NEAR(out(1, 1).real(), std::exp(-gamma * dm.grid[j]), 1e-7);
  }
  EXPECT_LE(max_map_diff(dm.maps.back(), channels::amplitude_damping(1.0 - std::exp(-gamma))), 1e-9);
}

TEST(Propagate, IntegratorMatchesExactExponential) {
  // Same generator, but a piecewise-linear constant forces the RK4 path.
  GkslGenerator exact = as_gksl(model("pauli", {{"rates", {0.4, 0.9, 0.2}}}));
  GkslGenerator rk = exact;
  for (auto& r : rk.rates) r = RateFunction::piecewise_linear({{0.0, r(0.0)}, {10.0, r(0.0)}});
  ASSERT_TRUE(exact.is_constant());
  ASSERT_FALSE(rk.is_constant());
  const auto grid = make_grid(2.0, 9);
  const DynamicalMap a = propagate(exact, grid);
  const DynamicalMap b = propagate(rk, grid, 1e-10);
  for (std::size_t j = 0; j < grid.size(); ++j) EXPECT_LE(max_map_diff(a.maps[j], b.maps[j]), 1e-8);
}

TEST(Propagate, DephasingSinusoidClosedForm) {
  const Model m = model("dephasing", {{"rate", {{"form", "sinusoid"}, {"a", 1.0}, {"omega", 1.0}, {"phi", 0.0}}}});
  const DynamicalMap dm = propagate(as_gksl(m), make_grid(2 * M_PI, 33));
  for (std::size_t j = 0; j < dm.grid.size(); ++j) {
    const double t = dm.grid[j];
    const CMatrix out = dm.maps[j].apply(coherent_plus());
    EXPECT_NEAR(out(0, 1).real(), 0.5 * std::exp(-2.0 * (1.0 - std::cos(t))), 1e-8);
    EXPECT_NEAR(out(0, 0).real(), 0.5, 1e-12);
  }
}

TEST(Propagate, TracePreservingAndCptpForPositiveRates) {
  // A negative rate still preserves the trace.
  const DynamicalMap dm = propagate(as_gksl(model("pauli", {{"rates", {1.0, 0.3, {{"form", "neg_tanh"}}}}})),
                                    make_grid(1.5, 16));
  for (const auto& q : dm.maps) EXPECT_LE(is_cptp(q).tp_residual, 1e-8);
  const Model pos = model("pauli", {{"rates", {0.2, {{"form", "sinusoid"}, {"a", 0.5}, {"omega", 2.0}, {"phi", 0.0}}, 0.8}}});
  for (const auto& q : propagate(as_gksl(pos), make_grid(1.5, 16)).maps) {
    const CptpReport r = is_cptp(q);
    EXPECT_LE(r.tp_residual, 1e-8);
    EXPECT_GE(r.min_choi_eig, -1e-7);
  }
}

TEST(Propagate, SemigroupConsistency) {
  const GkslGenerator g = as_gksl(model("pauli", {{"rates", {0.5, 0.25, 1.0}}}));
  const auto grid = make_grid(2.0, 9);
  const DynamicalMap dm = propagate(g, grid);
  for (std::size_t s = 0; s < grid.size(); ++s)
    for (std::size_t t = 0; s + t < grid.size(); ++t)
      EXPECT_LE(max_map_diff(compose(dm.maps[s], dm.maps[t]), dm.maps[s + t]), 1e-7);
}

TEST(Propagate, RejectsBadInput) {
  GkslGenerator g = as_gksl(model("dephasing"));
  EXPECT_THROW(propagate(g, {0.0, 1.0}, 0.0), DomainError);
  EXPECT_THROW(propagate(g, {0.5, 1.0}), DomainError);
  g.h_eff(0, 1) = 1.0;
  EXPECT_THROW(propagate(g, {0.0, 1.0}), DomainError);
}

TEST(Model, EternalPauliEigenvalues) {
  const DynamicalMap dm = evolve(model("eternal"), make_grid(3.0, 13));
  for (std::size_t j = 0; j < dm.grid.size(); ++j) {
    const double t = dm.grid[j];
    const Eigen::Vector3d l = pauli_eigenvalues(dm.maps[j]);
    EXPECT_NEAR(l[0], std::exp(-t) * std::cosh(t), 1e-8);
    EXPECT_NEAR(l[1], std::exp(-t) * std::cosh(t), 1e-8);
    EXPECT_NEAR(l[2], std::exp(-2 * t), 1e-8);
  }
}

TEST(Model, AmplitudeDampingFixedPoint) {
  // Coherences decay at gamma / 2, so e^-20 remains at t = 40.
  const DynamicalMap dm = evolve(model("amplitude_damping", {{"gamma", 1.0}}), {0.0, 40.0});
  EXPECT_LE(max_map_diff(dm.maps.back(), channels::replacer(2, diag({1, 0}))), 1e-8);
}

TEST(Model, UnknownAndInvalid) {
  EXPECT_THROW(model("no_such_model"), DomainError);
  EXPECT_THROW(model("amplitude_damping", {{"gamma", -1.0}}), DomainError);
  EXPECT_THROW(model("pauli", {{"rates", {1.0, 2.0}}}), DomainError);
  EXPECT_FALSE(model_catalog().empty());
}

TEST(Reduce, DecoupledIsUnitaryOnSystem) {
  TotalSystemModel m;
  m.dim_s = 2;
  m.dim_e = 3;
  const CMatrix hs = qdiv::test::random_hermitian(2, 4);
  m.h_total = kron(hs, CMatrix::Identity(3, 3));
  m.env_state = random_density(3, 3, 5).matrix();
  const DynamicalMap dm = reduce(m, make_grid(2.0, 5));
  EXPECT_LE(max_map_diff(dm.maps[0], QuantumMap::identity(2)), 1e-12);
  for (std::size_t j = 0; j < dm.grid.size(); ++j) {
    const HermEig e = eigh(hs);
    CMatrix ut = CMatrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i)
      ut += std::exp(Complex(0, -e.values[i] * dm.grid[j])) * e.vectors.col(i) * e.vectors.col(i).adjoint();
    EXPECT_LE(max_map_diff(dm.maps[j], channels::unitary(ut)), 1e-10);
  }
}

TEST(Reduce, ExchangeModelIsPeriodicAndCptp) {
  const double g = 1.0;
  const DynamicalMap dm = evolve(model("jaynes_cummings_toy", {{"coupling", g}}), make_grid(2 * M_PI, 17));
  for (std::size_t j = 0; j < dm.grid.size(); ++j) {
    const CptpReport r = is_cptp(dm.maps[j]);
    EXPECT_TRUE(r.cp && r.tp);
    // Excited population cos^2(g t).
    EXPECT_NEAR(dm.maps[j].apply(diag({0, 1}))(1, 1).real(), std::pow(std::cos(g * dm.grid[j]), 2), 1e-10);
  }
  EXPECT_LE(max_map_diff(dm.maps.back(), QuantumMap::identity(2)), 1e-10);
  // Quarter period: complete decay.
  EXPECT_LE(max_map_diff(dm.maps[4], channels::replacer(2, diag({1, 0}))), 1e-10);
}

TEST(Intermediate, Basics) {
  const DynamicalMap dm = evolve(model("eternal"), make_grid(2.0, 9));
  EXPECT_LE(max_map_diff(intermediate(dm, 3, 3), QuantumMap::identity(2)), 1e-10);
  for (std::size_t s = 0; s + 1 < dm.grid.size(); ++s) {
    const QuantumMap v = intermediate(dm, s + 1, s);
    EXPECT_LE(is_cptp(v).tp_residual, 1e-8);
    EXPECT_LE(max_map_diff(compose(v, dm.maps[s]), dm.maps[s + 1]), 1e-7);
    // Eigenvalue ratios of consecutive maps lie in (0, 1].
    const Eigen::Vector3d l = pauli_eigenvalues(v);
    for (int i = 0; i < 3; ++i) {
      EXPECT_GT(l[i], 0.0);
      EXPECT_LE(l[i], 1.0 + 1e-10);
    }
  }
  const DynamicalMap u = evolve(model("unitary"), make_grid(2.0, 5));
  const QuantumMap vu = intermediate(u, 4, 1);
  EXPECT_LE(max_map_diff(vu, u.maps[3]), 1e-10);
}

TEST(Intermediate, NonInvertibleThrows) {
  const DynamicalMap dm = evolve(model("jaynes_cummings_toy"), make_grid(M_PI, 5));
  // t = pi/2 is a complete decay, not invertible.
  EXPECT_THROW(intermediate(dm, 3, 2), NonInvertibleError);
}

TEST(Divisibility, AmplitudeDampingIsCpDivisible) {
  const DynamicalMap dm = evolve(model("amplitude_damping"), make_grid(3.0, 13));
  const DivisibilityReport r = divisibility_report(dm, {1, 2}, 16, 3);
  for (const auto& kd : r.per_k) {
    EXPECT_TRUE(kd.divisible_on_grid);
    for (const auto& st : kd.steps) EXPECT_GE(st.certificate.min_value, -1e-8);
  }
}

TEST(Divisibility, EternalIsPButNotCpDivisible) {
  const DynamicalMap dm = evolve(model("eternal"), make_grid(3.0, 16));
  const DivisibilityReport r = divisibility_report(dm, {1, 2}, 32, 1);
  const KDivisibility* k1 = r.find(1);
  const KDivisibility* k2 = r.find(2);
  ASSERT_TRUE(k1 && k2);
  EXPECT_TRUE(k1->divisible_on_grid);
  for (const auto& st : k1->steps) EXPECT_EQ(st.certificate.verdict, PositivityVerdict::HeuristicallyNonnegative);
  EXPECT_FALSE(k2->divisible_on_grid);
  for (const auto& st : k2->steps) {
    if (st.t_from > 0.0)
      EXPECT_EQ(st.certificate.verdict, PositivityVerdict::CertifiedNegative) << "step " << st.index;
    else
      EXPECT_EQ(st.certificate.verdict, PositivityVerdict::HeuristicallyNonnegative);
  }
  EXPECT_EQ(k2->certified_negative_steps, k2->steps.size() - 1);
}

TEST(Divisibility, DephasingSinusoidNegativeWindows) {
  const Model m = model("dephasing", {{"rate", {{"form", "sinusoid"}, {"a", 1.0}, {"omega", 1.0}, {"phi", 0.0}}}});
  const DynamicalMap dm = evolve(m, make_grid(2 * M_PI, 41));
  const DivisibilityReport r = divisibility_report(dm, {1, 2}, 16, 0);
  for (const auto& kd : r.per_k) {
    for (const auto& st : kd.steps) {
      // Integrated rate over the step is negative exactly when t_from >= pi.
      const bool negative = st.t_from >= M_PI - 1e-12;
      EXPECT_EQ(st.certificate.verdict == PositivityVerdict::CertifiedNegative, negative)
          << "k " << kd.k << " step " << st.index;
    }
  }
}

TEST(Divisibility, UnitaryFamilyDivisibleForAllK) {
  const DynamicalMap dm = evolve(model("unitary"), make_grid(2.0, 6));
  const DivisibilityReport r = divisibility_report(dm, {1, 2}, 8, 0);
  for (const auto& kd : r.per_k) EXPECT_TRUE(kd.divisible_on_grid);
}

TEST(Divisibility, DeterministicAndSerializable) {
  const DynamicalMap dm = evolve(model("eternal"), make_grid(1.0, 5));
  const nlohmann::json a = divisibility_report(dm, {1, 2}, 8, 9).to_json();
  const nlohmann::json b = divisibility_report(dm, {1, 2}, 8, 9).to_json();
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(a.dump(), nlohmann::json::parse(a.dump()).dump());
}
