#include <gtest/gtest.h>

#include <sstream>

#include "polariton/config.hpp"

using namespace polariton;

namespace {
ExperimentConfig parse(const std::string& s) {
  std::istringstream is(s);
  return parse_config(is);
}
}  // namespace

TEST(Config, EmptyGivesDefaults) {
  const auto c = parse("");
  EXPECT_EQ(c.point.r_angstrom, 0.735);
  EXPECT_EQ(c.vqe.shots, 20000u);
  EXPECT_EQ(c.plan.fermion_mapping, FermionMapping::bravyi_kitaev);
  EXPECT_EQ(c.r_grid().size(), 10u);
  EXPECT_DOUBLE_EQ(c.r_grid().back(), 2.0);
}

TEST(Config, AllSections) {
  const auto c = parse(
      "[molecule]\nR_angstrom = 0.9\nR_min = 0.6\nR_max = 1.2\nR_points = 4\n"
      "[cavity]\nomega_ev = 20\nlambda_x = 0.2\nlambda_x_list = 0, 0.1 ,0.2\n"
      "[encoding]\nmapping = jw\ntaper = none\nsign_flip = true\nboson = unary\n"
      "[noise]\np2 = 0.02\ngamma_ad = 0\n"
      "[vqe]\nshots = 1000\nrepeats = 3\nzne_factors = 1,3,5\nmitigation = readout, zne\n"
      "[output]\ncsv = out.csv\nseed = 42\n");
  EXPECT_EQ(c.point.r_angstrom, 0.9);
  const std::vector<double> want = {0.6, 0.8, 1.0, 1.2};
  ASSERT_EQ(c.r_grid().size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(c.r_grid()[i], want[i], 1e-12);
  EXPECT_EQ(c.point.omega_ev, 20.0);
  EXPECT_EQ(c.point.lambda.x(), 0.2);
  EXPECT_EQ(c.lambda_x_list, (std::vector<double>{0, 0.1, 0.2}));
  EXPECT_EQ(c.plan.fermion_mapping, FermionMapping::jordan_wigner);
  EXPECT_EQ(c.plan.taper, TaperMode::none);
  EXPECT_TRUE(c.plan.sign_flip_reference);
  EXPECT_EQ(c.plan.boson_encoding, BosonEncoding::unary);
  EXPECT_EQ(c.noise.p2, 0.02);
  EXPECT_EQ(c.noise.gamma_ad, 0.0);
  EXPECT_EQ(c.vqe.shots, 1000u);
  EXPECT_EQ(c.vqe.n_repeats, 3);
  EXPECT_EQ(c.vqe.zne_factors, (std::vector<int>{1, 3, 5}));
  EXPECT_TRUE(c.vqe.mitigation.readout && c.vqe.mitigation.zne);
  EXPECT_FALSE(c.vqe.mitigation.rs || c.vqe.mitigation.rzne);
  EXPECT_EQ(c.csv_path, "out.csv");
  EXPECT_EQ(c.vqe.seed, 42u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse("[molecule]\nbond = 1\n"), std::invalid_argument);
  EXPECT_THROW(parse("[nonsense]\na = 1\n"), std::invalid_argument);
  EXPECT_THROW(parse("[noise]\np2 = lots\n"), std::invalid_argument);
  EXPECT_THROW(parse("[noise]\np2 = 2\n"), std::invalid_argument);
  EXPECT_THROW(parse("[vqe]\nshots = 1.5\n"), std::invalid_argument);
  EXPECT_THROW(parse("[vqe]\nmitigation = rzne\n"), std::invalid_argument);
  EXPECT_THROW(parse("[encoding]\nmapping = parity\n"), std::invalid_argument);
  EXPECT_THROW(parse("[cavity]\nn_photon_max = 2\n"), std::invalid_argument);
  EXPECT_THROW(parse("[molecule]\nbasis = 6-31g\n"), std::invalid_argument);
  EXPECT_THROW(load_config("/nonexistent.ini"), std::runtime_error);
}

TEST(Config, UnaryAllowsHigherCutoff) {
  const auto c = parse("[cavity]\nn_photon_max = 2\n[encoding]\nboson = unary\n");
  EXPECT_EQ(c.point.n_photon_max, 2);
}
