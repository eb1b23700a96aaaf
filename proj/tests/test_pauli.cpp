#include <gtest/gtest.h>

#include <random>

#include "polariton/pauli.hpp"
#include "test_util.hpp"

using namespace polariton;
using testutil::label_matrix;

TEST(PauliString, XTimesZIsMinusIY) {
  const auto p = PauliString::from_label("XI") * PauliString::from_label("ZI");
  EXPECT_EQ(p.label(), "YI");
  EXPECT_EQ(p.phase_factor(), cplx(0, -1));
}

TEST(PauliString, SquareIsIdentity) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    const auto p = PauliString::from_label(testutil::random_label(rng, 6));
    const auto q = p * p;
    EXPECT_EQ(q.label(), "IIIIII");
    EXPECT_EQ(q.phase(), 0);
  }
}

TEST(PauliString, ProductMatchesKronOracle) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 40; ++t) {
    const auto la = testutil::random_label(rng, 5), lb = testutil::random_label(rng, 5);
    const auto p = PauliString::from_label(la) * PauliString::from_label(lb);
    const CMatrix expect = label_matrix(la) * label_matrix(lb);
    const CMatrix got = p.phase_factor() * label_matrix(p.label());
    EXPECT_LT((expect - got).cwiseAbs().maxCoeff(), 1e-14) << la << " * " << lb;
    const bool comm = (expect - label_matrix(lb) * label_matrix(la)).cwiseAbs().maxCoeff() < 1e-12;
    EXPECT_EQ(comm, PauliString::from_label(la).commutes_with(PauliString::from_label(lb)));
  }
}

TEST(PauliString, BadLabelThrows) {
  EXPECT_THROW(PauliString::from_label("XQ"), std::invalid_argument);
  EXPECT_THROW(PauliString::single(2, 2, 'X'), std::out_of_range);
}

TEST(PauliSum, Cancellation) {
  PauliSum s(1);
  s.add_term(PauliString::from_label("X"), 1.0);
  s.add_term(PauliString::from_label("X"), -1.0);
  EXPECT_TRUE(s.empty());
}

TEST(PauliSum, AddDistinctTerms) {
  const PauliSum s = PauliSum(PauliString::from_label("Z"), 0.5) + PauliSum::identity(1, 0.5);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.coefficient("Z"), cplx(0.5));
  EXPECT_EQ(s.coefficient("I"), cplx(0.5));
}

TEST(PauliSum, MismatchedSizesThrow) {
  EXPECT_THROW(PauliSum::identity(2) + PauliSum::identity(3), std::invalid_argument);
}

TEST(PauliSum, ProductMatchesDense) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int t = 0; t < 10; ++t) {
    PauliSum a(4), b(4);
    for (int k = 0; k < 6; ++k) {
      a.add_term(PauliString::from_label(testutil::random_label(rng, 4)), cplx(g(rng), g(rng)));
      b.add_term(PauliString::from_label(testutil::random_label(rng, 4)), cplx(g(rng), g(rng)));
    }
    const CMatrix d = to_dense_matrix(a * b) - to_dense_matrix(a) * to_dense_matrix(b);
    EXPECT_LT(d.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((to_dense_matrix(a.adjoint()) - to_dense_matrix(a).adjoint()).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(DenseMatrix, IdentityAndZZ) {
  const CMatrix id = to_dense_matrix(PauliSum::identity(2, 0.7));
  EXPECT_LT((id - 0.7 * CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
  const CMatrix zz = to_dense_matrix(PauliSum(PauliString::from_label("ZZ"), 1.0));
  Eigen::VectorXcd diag(4);
  diag << 1, -1, -1, 1;
  EXPECT_LT((zz - CMatrix(diag.asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DenseMatrix, MatchesKronAndStaysHermitian) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  PauliSum h(5);
  CMatrix oracle = CMatrix::Zero(32, 32);
  for (int k = 0; k < 12; ++k) {
    const auto l = testutil::random_label(rng, 5);
    const double c = g(rng);
    h.add_term(PauliString::from_label(l), c);
    oracle += c * label_matrix(l);
  }
  const CMatrix m = to_dense_matrix(h);
  EXPECT_LT((m - oracle).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_TRUE(h.is_hermitian());
}

TEST(DenseMatrix, RefusesLargeRegisters) {
  EXPECT_THROW(to_dense_matrix(PauliSum::identity(13)), std::length_error);
}

TEST(Expectation, BasisStates) {
  EXPECT_DOUBLE_EQ(expectation(PauliSum(PauliString::from_label("ZZ"), 1.0), StateVector::basis(2, 0)), 1.0);
  EXPECT_DOUBLE_EQ(expectation(PauliSum(PauliString::from_label("X"), 1.0), StateVector::basis(1, 0)), 0.0);
  EXPECT_DOUBLE_EQ(expectation(PauliSum(PauliString::from_label("ZI"), 1.0), StateVector::basis(2, 1)), -1.0);
}

TEST(Expectation, TermwiseEqualsTrace) {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> g;
  for (std::size_t n = 1; n <= 6; ++n) {
    for (int t = 0; t < 5; ++t) {
      PauliSum h(n);
      for (int k = 0; k < 8; ++k) h.add_term(PauliString::from_label(testutil::random_label(rng, n)), g(rng));
      const CMatrix rho = testutil::random_density(rng, n);
      const double want = (to_dense_matrix(h) * rho).trace().real();
      EXPECT_NEAR(expectation(h, DensityMatrix(rho)), want, 1e-10);
    }
  }
}

TEST(Expectation, NonHermitianRejected) {
  PauliSum a(1);
  a.add_term(PauliString::from_label("X"), cplx(0, 1));
  EXPECT_THROW(expectation(a, StateVector::basis(1, 0)), std::invalid_argument);
}

TEST(TextFormat, RoundTrip) {
  PauliSum s(3);
  s.add_term(PauliString::from_label("XYZ"), cplx(0.25, -1.5));
  s.add_term(PauliString::from_label("III"), -0.125);
  const auto back = from_text(to_text(s));
  EXPECT_TRUE(approx_equal(s, back, 0.0));
  EXPECT_EQ(to_text(s).find("-0 "), std::string::npos);
  EXPECT_THROW(from_text("1 0 XQ\n"), std::runtime_error);
}
