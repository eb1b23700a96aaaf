#pragma once

#include <complex>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "polariton/pauli.hpp"

namespace testutil {

using polariton::CMatrix;
using polariton::cplx;

inline Eigen::Matrix2cd pauli2(char op) {
  const cplx i(0, 1);
  Eigen::Matrix2cd m;
  switch (op) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m << 1, 0, 0, 1;
  }
  return m;
}

// Kronecker product with qubit 0 as the least significant index bit.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CMatrix label_matrix(const std::string& label) {
  CMatrix m = CMatrix::Identity(1, 1);
  for (char c : label) m = kron(pauli2(c), m);
  return m;
}

inline std::string random_label(std::mt19937_64& rng, std::size_t n) {
  static const char ops[] = "IXYZ";
  std::string s(n, 'I');
  for (auto& c : s) c = ops[rng() % 4];
  return s;
}

inline CMatrix random_density(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  const Eigen::Index d = Eigen::Index{1} << n;
  CMatrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  CMatrix rho = a * a.adjoint();
  rho /= rho.trace();
  return 0.5 * (rho + rho.adjoint());
}

}  // namespace testutil
