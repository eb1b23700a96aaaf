#include <gtest/gtest.h>

#include <sstream>

#include "polariton/chem.hpp"

using namespace polariton;

namespace {
const MolecularSystem& h2_eq() {
  static const MolecularSystem sys = compute_sto3g_h2(h2_geometry(0.735));
  return sys;
}
}  // namespace

TEST(Scf, RestrictedHfEnergyAtEquilibrium) {
  // STO-3G H2 reference value at 0.735 A
  EXPECT_NEAR(h2_eq().scf.energy, -1.1169989991, 1e-7);
  EXPECT_LT(h2_eq().scf.orbital_gradient, 1e-6);
}

TEST(Scf, HomonuclearDipoleDiagonalVanishes) {
  const auto& I = h2_eq().integrals;
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(I.dip[k](0, 0), 0.0, 1e-12);
    EXPECT_NEAR(I.dip[k](1, 1), 0.0, 1e-12);
  }
  EXPECT_GT(std::abs(I.dip[0](0, 1)), 0.1);  // bond along x
  EXPECT_NEAR(I.dip[1](0, 1), 0.0, 1e-12);
}

TEST(Scf, EriSymmetry) {
  for (double r : {0.5, 0.735, 1.4, 2.5})
    EXPECT_LT(compute_sto3g_h2(h2_geometry(r)).integrals.g.max_symmetry_violation(), 1e-10);
}

TEST(Geometry, RejectsBadInput) {
  EXPECT_THROW(compute_sto3g_h2(h2_geometry(0.0)), std::invalid_argument);
  EXPECT_THROW(cavity_from_ev(-1.0, Eigen::Vector3d::Zero()), std::invalid_argument);
  EXPECT_THROW(cavity_from_ev(2.0, Eigen::Vector3d::Zero(), 0), std::invalid_argument);
}

TEST(QedHf, ZeroCouplingIsPlainHf) {
  const auto ref = qed_hf_reference(h2_eq().integrals, cavity_from_ev(2.0, Eigen::Vector3d::Zero()));
  EXPECT_NEAR(ref.energy, h2_eq().scf.energy, 1e-10);
  EXPECT_NEAR(ref.dse_energy, 0.0, 1e-15);
}

TEST(QedHf, CenteredMoleculeHasZeroDipole) {
  const auto ref = qed_hf_reference(h2_eq().integrals, cavity_from_ev(2.0, {0.1, 0, 0}));
  EXPECT_LT(ref.d_expectation.norm(), 1e-10);
  EXPECT_GT(ref.dse_energy, 0.0);
}

TEST(IntegralFile, RoundTrip) {
  const auto cav = cavity_from_ev(2.0, {0.1, 0.02, 0});
  std::stringstream ss;
  save_integrals(ss, h2_eq().integrals, cav);
  const auto [I, c] = load_integrals(ss);
  const auto& J = h2_eq().integrals;
  EXPECT_EQ(I.n_spatial, J.n_spatial);
  EXPECT_LT((I.h - J.h).cwiseAbs().maxCoeff(), 1e-14);
  for (int k = 0; k < 3; ++k) EXPECT_LT((I.dip[k] - J.dip[k]).cwiseAbs().maxCoeff(), 1e-14);
  ASSERT_TRUE(I.quad.has_value());
  for (int k = 0; k < 6; ++k) EXPECT_LT(((*I.quad)[k] - (*J.quad)[k]).cwiseAbs().maxCoeff(), 1e-14);
  for (std::size_t p = 0; p < 2; ++p)
    for (std::size_t q = 0; q < 2; ++q)
      for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t s = 0; s < 2; ++s) EXPECT_NEAR(I.g(p, q, r, s), J.g(p, q, r, s), 1e-14);
  EXPECT_EQ(I.e_nuc, J.e_nuc);
  EXPECT_EQ(c.omega, cav.omega);
  EXPECT_EQ(c.lambda, cav.lambda);
  EXPECT_EQ(I.occupied, J.occupied);
}

TEST(IntegralFile, AsymmetricMatrixRejected) {
  std::stringstream ss;
  ss << "[meta]\nn_spatial 2\n[h]\n0 0 -1\n0 1 0.1\n1 0 0.2\n1 1 -0.5\n";
  EXPECT_THROW(load_integrals(ss), std::runtime_error);
}

TEST(IntegralFile, MissingFileThrows) {
  EXPECT_THROW(load_integrals(std::string("/nonexistent/ints.txt")), std::runtime_error);
}

TEST(IntegralSet, OneOrbitalToyValidates) {
  IntegralSet I;
  I.n_spatial = 1;
  I.h = Eigen::MatrixXd::Constant(1, 1, -1.0);
  I.g = ERITensor(1);
  I.g.set_symmetric(0, 0, 0, 0, 0.5);
  for (auto& d : I.dip) d = Eigen::MatrixXd::Zero(1, 1);
  I.occupied = {0};
  EXPECT_NO_THROW(I.validate());
  const auto ref = qed_hf_reference(I, cavity_from_ev(2.0, {0.1, 0, 0}));
  EXPECT_NEAR(ref.energy, -1.5, 1e-14);
}
