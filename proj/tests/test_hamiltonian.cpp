#include <gtest/gtest.h>

#include <algorithm>

#include "polariton/exact.hpp"
#include "polariton/hamiltonian.hpp"
#include "test_util.hpp"

using namespace polariton;

namespace {
constexpr double kFci = -1.1294788119;

IntegralSet h2(double r = 0.735) { return compute_sto3g_h2(h2_geometry(r)).integrals; }

EncodingPlan plan_of(FermionMapping f, TaperMode t, BosonEncoding b = BosonEncoding::single_qubit, bool flip = false) {
  EncodingPlan p;
  p.fermion_mapping = f;
  p.taper = t;
  p.boson_encoding = b;
  p.sign_flip_reference = flip;
  return p;
}

Eigen::VectorXd eigenvalues(const PauliSum& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(to_dense_matrix(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}
}  // namespace

TEST(FermionMapping, JordanWignerCreator) {
  const LinearEncoding jw(FermionMapping::jordan_wigner, 4);
  PauliSum want(4);
  want.add_term(PauliString::from_label("XIII"), 0.5);
  want.add_term(PauliString::from_label("YIII"), cplx(0, -0.5));
  EXPECT_TRUE(approx_equal(jw.creator(0, 4), want, 1e-15));
}

TEST(FermionMapping, JordanWignerNumber) {
  MixedOperator n(4);
  n.add(1.0, {cr(2), an(2)});
  PauliSum want = PauliSum::identity(4, 0.5);
  want.add_term(PauliString::from_label("IIZI"), -0.5);
  EncodingPlan p = plan_of(FermionMapping::jordan_wigner, TaperMode::none);
  const QubitMapper m(h2(), cavity_from_ev(2.0, {0.1, 0, 0}), p);
  const PauliSum got = m.map_untapered(n);
  ASSERT_EQ(got.n_qubits(), 5u);
  PauliSum want5 = PauliSum::identity(5, 0.5);
  want5.add_term(PauliString::from_label("IIZII"), -0.5);
  EXPECT_TRUE(approx_equal(got, want5, 1e-15));
}

TEST(FermionMapping, AnticommutationBothMappings) {
  for (auto f : {FermionMapping::jordan_wigner, FermionMapping::bravyi_kitaev}) {
    const LinearEncoding enc(f, 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        const PauliSum ac = enc.annihilator(i, 4) * enc.creator(j, 4) + enc.creator(j, 4) * enc.annihilator(i, 4);
        const PauliSum want = i == j ? PauliSum::identity(4) : PauliSum(4);
        EXPECT_TRUE(approx_equal(ac, want, 1e-14)) << i << "," << j;
        const PauliSum aa = enc.annihilator(i, 4) * enc.annihilator(j, 4) + enc.annihilator(j, 4) * enc.annihilator(i, 4);
        EXPECT_TRUE(approx_equal(aa, PauliSum(4), 1e-14));
      }
  }
}

TEST(FermionMapping, JwAndBkSpectraAgree) {
  const auto ints = h2();
  const auto cav = cavity_from_ev(2.0, {0.1, 0, 0});
  const auto op = build_pauli_fierz(ints, cav);
  const QubitMapper jw(ints, cav, plan_of(FermionMapping::jordan_wigner, TaperMode::none));
  EncodingPlan bk_plan = plan_of(FermionMapping::bravyi_kitaev, TaperMode::none);
  bk_plan.spin_reduction = false;
  const QubitMapper bk(ints, cav, bk_plan);
  const auto a = eigenvalues(jw.map_untapered(op)), b = eigenvalues(bk.map_untapered(op));
  ASSERT_EQ(a.size(), b.size());
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BosonEncoding, SingleQubitNumber) {
  const BosonRegister reg{BosonEncoding::single_qubit, 1, 0};
  PauliSum want = PauliSum::identity(1, 0.5);
  want.add_term(PauliString::from_label("Z"), -0.5);
  EXPECT_TRUE(approx_equal(reg.number(1), want, 1e-15));
  const auto ev = eigenvalues(reg.number(1));
  EXPECT_NEAR(ev(0), 0.0, 1e-15);
  EXPECT_NEAR(ev(1), 1.0, 1e-15);
}

TEST(BosonEncoding, UnaryLadderOnPhysicalSubspace) {
  const BosonRegister reg{BosonEncoding::unary, 2, 0};
  ASSERT_EQ(reg.n_qubits(), 3u);
  const CMatrix bd = to_dense_matrix(reg.creator(3));
  for (int n = 0; n <= 2; ++n)
    for (int m = 0; m <= 2; ++m) {
      const double want = (n == m + 1) ? std::sqrt(double(n)) : 0.0;
      EXPECT_NEAR(std::abs(bd(reg.fock_bits(n), reg.fock_bits(m)) - want), 0.0, 1e-14) << n << "," << m;
    }
  const CMatrix num = to_dense_matrix(reg.number(3));
  for (int n = 0; n <= 2; ++n) EXPECT_NEAR(num(reg.fock_bits(n), reg.fock_bits(n)).real(), n, 1e-14);
}

TEST(BosonEncoding, SingleQubitNeedsCutoffOne) {
  const BosonRegister reg{BosonEncoding::single_qubit, 2, 0};
  EXPECT_THROW(reg.validate(), std::invalid_argument);
}

TEST(PauliFierz, ZeroCouplingHasNoCrossTerms) {
  const auto cav = cavity_from_ev(2.0, Eigen::Vector3d::Zero());
  const QubitMapper m(h2(), cav, plan_of(FermionMapping::jordan_wigner, TaperMode::none));
  const PauliSum h = m.map_untapered(build_pauli_fierz(h2(), cav));
  const std::uint64_t photon = 1ULL << 4;
  for (const auto& [key, c] : h.terms()) {
    if (!(key.support() & photon)) continue;
    EXPECT_EQ(key.x & photon, 0u);
    EXPECT_EQ(key.support(), photon) << "photon qubit entangled with electrons";
    EXPECT_NEAR(c.real(), -0.5 * cav.omega, 1e-14);
  }
}

TEST(PauliFierz, HermitianDenseMatrix) {
  for (double lx : {0.0, 0.05, 0.2}) {
    const auto p = encode_problem(h2(1.1), cavity_from_ev(2.0, {lx, 0.03, 0}), plan_of(FermionMapping::jordan_wigner, TaperMode::none));
    const CMatrix m = to_dense_matrix(p.hamiltonian);
    EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(PauliFierz, MissingDipoleComponentRejected) {
  auto ints = h2();
  ints.has_dip[1] = false;
  EXPECT_NO_THROW(build_pauli_fierz(ints, cavity_from_ev(2.0, {0.1, 0, 0})));
  EXPECT_THROW(build_pauli_fierz(ints, cavity_from_ev(2.0, {0.1, 0.1, 0})), std::invalid_argument);
}

TEST(PauliFierz, GroundEnergyAtReferencePoint) {
  const auto p = encode_problem(h2(), cavity_from_ev(2.0, {0.1, 0, 0}), EncodingPlan{});
  ASSERT_EQ(p.n_qubits(), 2u);
  EXPECT_NEAR(eigenvalues(p.hamiltonian)(0), -1.1295, 5e-4);
  EXPECT_NEAR(fci_solve(p).energy, kFci, 1e-9);
}

TEST(Tapering, QubitCounts) {
  const auto ints = h2();
  const auto cav = cavity_from_ev(2.0, {0.1, 0, 0});
  EXPECT_EQ(QubitMapper(ints, cav, plan_of(FermionMapping::jordan_wigner, TaperMode::none)).n_qubits(), 5u);
  EXPECT_EQ(QubitMapper(ints, cav, plan_of(FermionMapping::bravyi_kitaev, TaperMode::none)).n_qubits(), 3u);
  EXPECT_EQ(QubitMapper(ints, cav, plan_of(FermionMapping::bravyi_kitaev, TaperMode::parity)).n_qubits(), 2u);
}

TEST(Tapering, ReferenceSignFlip) {
  PauliSum h(2);
  h.add_term(PauliString::from_label("ZZ"), 0.3);
  h.add_term(PauliString::from_label("ZI"), 0.7);
  h.add_term(PauliString::from_label("XX"), 0.2);
  const PauliSum f = flip_reference_signs(h, 0b11);
  EXPECT_EQ(f.coefficient("ZZ"), cplx(0.3));
  EXPECT_EQ(f.coefficient("ZI"), cplx(-0.7));
  EXPECT_EQ(f.coefficient("XX"), cplx(0.2));
}

TEST(Tapering, ReferenceEnergyPreserved) {
  const auto ints = h2();
  const auto cav = cavity_from_ev(2.0, {0.1, 0, 0});
  for (bool flip : {false, true}) {
    const auto p = encode_problem(ints, cav, plan_of(FermionMapping::bravyi_kitaev, TaperMode::parity, BosonEncoding::single_qubit, flip));
    const auto ref = StateVector::basis(p.n_qubits(), p.mapper.frame_reference_bits());
    EXPECT_NEAR(expectation(p.hamiltonian, ref), p.reference.energy, 1e-10);
    if (flip) EXPECT_EQ(p.mapper.frame_reference_bits(), 0u);
  }
  const auto jw = encode_problem(ints, cav, plan_of(FermionMapping::jordan_wigner, TaperMode::none));
  EXPECT_NEAR(expectation(jw.hamiltonian, StateVector::basis(5, jw.mapper.frame_reference_bits())),
              jw.reference.energy, 1e-10);
  EXPECT_NEAR(jw.reference.energy, -1.1068565449, 1e-8);
}

TEST(Tapering, NonCommutingTermRejected) {
  PauliSum h(2);
  h.add_term(PauliString::from_label("XI"), 1.0);
  h.add_term(PauliString::from_label("ZI"), 1.0);
  const auto steps = plan_tapering({{"z0", PauliSum(PauliString::from_label("ZI"), 1.0)}}, 2, 0);
  EXPECT_THROW(apply_tapering(h, steps), std::runtime_error);
}

TEST(Tapering, PhotonNumberIsParityOfTwoQubits) {
  const auto p = encode_problem(h2(), cavity_from_ev(2.0, {0.1, 0, 0}), EncodingPlan{});
  PauliSum want = PauliSum::identity(2, 0.5);
  want.add_term(PauliString::from_label("ZZ"), -0.5);
  EXPECT_TRUE(approx_equal(p.photon_number, want, 1e-12));
}

TEST(Fci, AllEncodingsAgree) {
  const auto ints = h2();
  const auto cav = cavity_from_ev(2.0, {0.1, 0, 0});
  for (auto f : {FermionMapping::jordan_wigner, FermionMapping::bravyi_kitaev})
    for (auto t : {TaperMode::none, TaperMode::parity})
      for (auto b : {BosonEncoding::single_qubit, BosonEncoding::unary})
        for (bool flip : {false, true}) {
          const auto plan = plan_of(f, t, b, flip);
          const auto sol = fci_solve(encode_problem(ints, cav, plan));
          EXPECT_NEAR(sol.energy, kFci, 1e-9) << describe(plan);
          EXPECT_NEAR(sol.photon_number, 4.314e-4, 1e-6) << describe(plan);
          EXPECT_LT(sol.residual, 1e-10);
        }
}

TEST(Fci, ZeroCouplingHasNoPhotons) {
  const auto sol = fci_solve(encode_problem(h2(), cavity_from_ev(2.0, Eigen::Vector3d::Zero()), EncodingPlan{}));
  EXPECT_EQ(sol.photon_number, 0.0);
}

TEST(Fci, ToyOneOrbitalSystem) {
  IntegralSet I;
  I.n_spatial = 1;
  I.h = Eigen::MatrixXd::Constant(1, 1, -1.0);
  I.g = ERITensor(1);
  I.g.set_symmetric(0, 0, 0, 0, 0.5);
  for (auto& d : I.dip) d = Eigen::MatrixXd::Zero(1, 1);
  I.occupied = {0};
  const auto p = encode_problem(I, cavity_from_ev(2.0, Eigen::Vector3d::Zero()),
                                plan_of(FermionMapping::jordan_wigner, TaperMode::none));
  EXPECT_EQ(p.n_qubits(), 3u);
  EXPECT_NEAR(fci_solve(p).energy, -1.5, 1e-12);
}
