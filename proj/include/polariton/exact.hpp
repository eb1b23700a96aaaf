#pragma once

#include <bit>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "polariton/hamiltonian.hpp"
#include "polariton/pauli.hpp"

namespace polariton {

struct FciSolution {
  double energy = 0;
  CVector vector;  // full 2^n amplitudes
  double photon_number = 0;
  double residual = 0;
  std::size_t sector_dim = 0;
};

/// Value of a diagonal Pauli sum on a basis state.
inline double diagonal_value(const PauliSum& op, std::uint64_t k) {
  double v = 0;
  for (const auto& [key, c] : op.terms()) {
    if (!key.is_diagonal()) throw std::invalid_argument("diagonal_value: operator is not diagonal");
    v += c.real() * ((std::popcount(key.z & k) & 1) ? -1.0 : 1.0);
  }
  return v;
}

/// Basis states satisfying every constraint.
inline std::vector<std::uint64_t> sector_basis(std::size_t n_qubits,
                                               const std::vector<SectorConstraint>& constraints) {
  std::vector<std::uint64_t> keep;
  const std::uint64_t dim = 1ULL << n_qubits;
  for (std::uint64_t k = 0; k < dim; ++k) {
    bool ok = true;
    for (const auto& c : constraints)
      if (std::abs(diagonal_value(c.op, k) - c.value) > 1e-9) {
        ok = false;
        break;
      }
    if (ok) keep.push_back(k);
  }
  return keep;
}

/// Lowest eigenpair of `h` restricted to the sector fixed by `constraints`.
inline FciSolution fci_solve(const PauliSum& h, const PauliSum& number_op,
                             const std::vector<SectorConstraint>& constraints = {}) {
  if (h.n_qubits() > kMaxDenseQubits) throw std::length_error("fci_solve: too many qubits for dense solve");
  if (!h.is_hermitian()) throw std::invalid_argument("fci_solve: Hamiltonian is not Hermitian");
  const std::size_t n = h.n_qubits();
  const auto basis = sector_basis(n, constraints);
  if (basis.empty()) throw std::runtime_error("fci_solve: empty symmetry sector");

  const CMatrix full = to_dense_matrix(h);
  const auto m = static_cast<Eigen::Index>(basis.size());
  CMatrix sub(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = full(basis[i], basis[j]);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sub);
  if (es.info() != Eigen::Success) throw std::runtime_error("fci_solve: eigensolver failed");

  FciSolution out;
  out.energy = es.eigenvalues()(0);
  out.sector_dim = basis.size();
  out.vector = CVector::Zero(full.rows());
  for (Eigen::Index i = 0; i < m; ++i) out.vector(basis[i]) = es.eigenvectors()(i, 0);
  out.residual = (full * out.vector - out.energy * out.vector).norm();
  out.photon_number = expectation(number_op, StateVector(out.vector, 1e-9));
  return out;
}

inline FciSolution fci_solve(const EncodedProblem& p) {
  return fci_solve(p.hamiltonian, p.photon_number, p.constraints);
}

}  // namespace polariton
