#include <gtest/gtest.h>

#include <random>

#include "polariton/vqe.hpp"
#include "test_util.hpp"

using namespace polariton;

namespace {
NoiseModel no_noise() { return NoiseModel::ideal(); }

NoiseModel depolarizing_only(double p2) {
  NoiseModel n = NoiseModel::ideal();
  n.p2 = p2;
  return n;
}

struct Tapered {
  EncodedProblem p = make_problem(PointSpec{0.735, 2.0, {0.1, 0, 0}}, EncodingPlan{});
  Ansatz a = build_ansatz(p);
  std::vector<double> theta = vqe_exact(p.hamiltonian, a).x;
};
const Tapered& tapered() {
  static const Tapered t;
  return t;
}
}  // namespace

TEST(Noise, Validation) {
  NoiseModel n;
  n.p2 = 1.5;
  EXPECT_THROW(n.validate(), std::invalid_argument);
  n = NoiseModel{};
  n.readout_flip = -0.1;
  EXPECT_THROW(n.validate(), std::invalid_argument);
  EXPECT_NO_THROW(NoiseModel{}.validate());
}

TEST(Evolve, NoiselessMatchesStatevector) {
  const auto& t = tapered();
  const Circuit c = t.a.circuit.bind(t.theta);
  const CVector psi = simulate_state(c).amplitudes();
  const CMatrix proj = psi * psi.adjoint();
  EXPECT_LT((evolve(c, no_noise()).matrix() - proj).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Evolve, SingleCnotDepolarizing) {
  const double p = 0.2;
  Circuit c(2);
  c.cnot(0, 1);
  CMatrix want = 0.25 * p * CMatrix::Identity(4, 4);
  want(0, 0) += 1 - p;
  EXPECT_LT((evolve(c, depolarizing_only(p)).matrix() - want).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Evolve, AmplitudeDampingDecaysExcitation) {
  NoiseModel n = NoiseModel::ideal();
  n.gamma_ad = 0.1;
  Circuit c(1);
  c.x(0);
  const CMatrix rho = evolve(c, n).matrix();
  EXPECT_NEAR(rho(1, 1).real(), 0.9, 1e-14);
  EXPECT_NEAR(rho(0, 0).real(), 0.1, 1e-14);
}

TEST(Evolve, FoldedDecayLaw) {
  const auto& t = tapered();
  const double p2 = 0.01;
  const Circuit c = t.a.circuit.bind(t.theta);
  const double ncnot = double(c.count(GateKind::CNOT));
  const double e_exact = expectation(t.p.hamiltonian, simulate_state(c));
  const double id = t.p.hamiltonian.coefficient("II").real();
  for (int m : {1, 3, 5, 51, 101, 201}) {
    const double e = expectation(t.p.hamiltonian, evolve(fold_cnots(c, m), depolarizing_only(p2)));
    const double want = id + (e_exact - id) * std::exp(ncnot * m * std::log(1 - p2));
    EXPECT_NEAR((e - id) / (want - id), 1.0, 1e-8) << m;
  }
}

TEST(Evolve, DepolarizingRaisesEnergy) {
  const auto& t = tapered();
  const Circuit c = t.a.circuit.bind(t.theta);
  const double e0 = expectation(t.p.hamiltonian, simulate_state(c));
  double last = e0;
  for (double p2 : {0.001, 0.01, 0.05, 0.2}) {
    const double e = expectation(t.p.hamiltonian, evolve(c, depolarizing_only(p2)));
    EXPECT_GT(e, last);
    last = e;
  }
}

TEST(Evolve, IdentityObservable) {
  const auto& t = tapered();
  const auto rho = evolve(t.a.circuit.bind(t.theta), NoiseModel{});
  EXPECT_NEAR(expectation(PauliSum::identity(2), rho), 1.0, 1e-14);
  EXPECT_GT(rho.min_eigenvalue(), -1e-12);
}

TEST(Sampling, IdealReadoutIsDeterministic) {
  const auto rho = DensityMatrix::from_state(StateVector::basis(2, 0));
  const auto r = measure_basis(rho, PauliKey{}, no_noise(), 1000, 1);
  EXPECT_EQ(r.counts[0], 1000u);
  EXPECT_EQ(r.shots, 1000u);
}

TEST(Sampling, SymmetricReadoutFlipRate) {
  const auto rho = DensityMatrix::from_state(StateVector::basis(2, 0));
  NoiseModel n = NoiseModel::ideal();
  n.readout_flip = 0.01;
  const auto r = measure_basis(rho, PauliKey{}, n, 20000, 99);
  const double p = 0.99 * 0.99, frac = double(r.counts[0]) / 20000.0;
  EXPECT_NEAR(frac, p, 3 * std::sqrt(p * (1 - p) / 20000.0));
  std::uint64_t total = 0;
  for (auto c : r.counts) total += c;
  EXPECT_EQ(total, 20000u);
}

TEST(Sampling, ReproducibleSeeds) {
  const std::vector<double> probs = {0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(sample_counts(probs, 5000, 17).counts, sample_counts(probs, 5000, 17).counts);
  EXPECT_NE(sample_counts(probs, 5000, 17).counts, sample_counts(probs, 5000, 18).counts);
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
}

TEST(Sampling, ShotEstimateConsistentWithExact) {
  const auto& t = tapered();
  const auto rho = evolve(t.a.circuit.bind(t.theta), depolarizing_only(0.01));
  const double exact = expectation(t.p.hamiltonian, rho);
  const NoisyEstimator est(t.p.hamiltonian, depolarizing_only(0.01), std::nullopt, 20000);
  std::vector<double> v;
  for (std::uint64_t s = 0; s < 100; ++s) v.push_back(est.measure(rho, derive_seed(5, {s})).raw);
  const auto st = stage_stats(v);
  EXPECT_NEAR(st.mean, exact, 5 * st.rmse / std::sqrt(100.0));
  EXPECT_GT(st.rmse, 0.0);
}

TEST(Grouping, QubitwiseGroupsCoverAllTerms) {
  const auto& h = tapered().p.hamiltonian;
  double constant = 0;
  const auto groups = group_qubitwise(h, &constant);
  std::size_t n = 0;
  for (const auto& g : groups) {
    n += g.terms.size();
    for (const auto& [k, c] : g.terms) EXPECT_TRUE(qubitwise_compatible(k, g.basis));
  }
  EXPECT_EQ(n + 1, h.size());
  EXPECT_NEAR(constant, h.coefficient("II").real(), 1e-15);
}
