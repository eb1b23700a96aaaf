#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "polariton/circuit.hpp"
#include "polariton/pauli.hpp"

namespace polariton {

inline constexpr std::size_t kMaxSimQubits = 10;

/// Per-qubit readout confusion: rows = true state, columns = reported.
using Confusion = std::array<std::array<double, 2>, 2>;

inline Confusion symmetric_confusion(double flip) { return {{{1 - flip, flip}, {flip, 1 - flip}}}; }

struct NoiseModel {
  double p1 = 0.0005;       // single-qubit depolarizing per gate
  double p2 = 0.01;         // two-qubit depolarizing per CNOT
  double gamma_ad = 0.0005; // amplitude damping per single-qubit gate
  double readout_flip = 0.01;
  std::vector<Confusion> readout;  // per-qubit override; empty -> symmetric readout_flip

  static NoiseModel ideal() { return {0, 0, 0, 0, {}}; }

  Confusion confusion(std::size_t q) const {
    if (q < readout.size()) return readout[q];
    return symmetric_confusion(readout_flip);
  }

  bool has_readout_error(std::size_t n_qubits) const {
    for (std::size_t q = 0; q < n_qubits; ++q) {
      const auto c = confusion(q);
      if (c[0][1] != 0.0 || c[1][0] != 0.0) return true;
    }
    return false;
  }

  void validate() const {
    auto prob = [](double p, const char* what) {
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string("NoiseModel: ") + what + " outside [0,1]");
    };
    prob(p1, "p1");
    prob(p2, "p2");
    prob(gamma_ad, "gamma_ad");
    prob(readout_flip, "readout flip");
    for (const auto& c : readout)
      for (const auto& row : c) {
        prob(row[0], "confusion entry");
        prob(row[1], "confusion entry");
        if (std::abs(row[0] + row[1] - 1.0) > 1e-12) throw std::invalid_argument("NoiseModel: confusion row does not sum to 1");
      }
  }
};

// --- density-matrix channels ------------------------------------------------------

namespace detail {

using Mat2 = std::array<std::array<cplx, 2>, 2>;

inline Mat2 gate_matrix(const Gate& g) {
  const double r = 1.0 / std::sqrt(2.0);
  const cplx i{0, 1};
  switch (g.kind) {
    case GateKind::X: return {{{0, 1}, {1, 0}}};
    case GateKind::H: return {{{r, r}, {r, -r}}};
    case GateKind::S: return {{{1, 0}, {0, i}}};
    case GateKind::Sdg: return {{{1, 0}, {0, -i}}};
    case GateKind::RZ: return {{{std::exp(-i * (g.angle / 2)), 0}, {0, std::exp(i * (g.angle / 2))}}};
    default: throw std::logic_error("gate_matrix: not a single-qubit gate");
  }
}

inline void apply_1q(CMatrix& rho, std::size_t q, const Mat2& u) {
  const Eigen::Index dim = rho.rows();
  const Eigen::Index bit = Eigen::Index{1} << q;
  // rho <- U rho
  for (Eigen::Index c = 0; c < dim; ++c)
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (i & bit) continue;
      const cplx a = rho(i, c), b = rho(i | bit, c);
      rho(i, c) = u[0][0] * a + u[0][1] * b;
      rho(i | bit, c) = u[1][0] * a + u[1][1] * b;
    }
  // rho <- rho U^dagger
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (j & bit) continue;
    for (Eigen::Index rr = 0; rr < dim; ++rr) {
      const cplx a = rho(rr, j), b = rho(rr, j | bit);
      rho(rr, j) = a * std::conj(u[0][0]) + b * std::conj(u[0][1]);
      rho(rr, j | bit) = a * std::conj(u[1][0]) + b * std::conj(u[1][1]);
    }
  }
}

inline void apply_cnot(CMatrix& rho, std::size_t c, std::size_t t) {
  const Eigen::Index dim = rho.rows();
  const Eigen::Index cb = Eigen::Index{1} << c, tb = Eigen::Index{1} << t;
  auto perm = [&](Eigen::Index k) { return (k & cb) ? (k ^ tb) : k; };
  CMatrix out(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) out(perm(i), perm(j)) = rho(i, j);
  rho.swap(out);
}

/// rho <- (1-p) rho + p * (I/2^k) (x) Tr_mask(rho), mask over k qubits.
inline void depolarize(CMatrix& rho, std::uint64_t mask, double p) {
  if (p == 0.0) return;
  const Eigen::Index dim = rho.rows();
  const auto m = static_cast<Eigen::Index>(mask);
  const double norm = 1.0 / static_cast<double>(1ULL << std::popcount(mask));
  CMatrix out = (1.0 - p) * rho;
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) {
      if ((i & m) != (j & m)) continue;
      cplx tr = 0;
      // sum over the traced bits: enumerate submasks of m
      for (Eigen::Index s = m;; s = (s - 1) & m) {
        tr += rho((i & ~m) | s, (j & ~m) | s);
        if (s == 0) break;
      }
      out(i, j) += p * norm * tr;
    }
  rho.swap(out);
}

inline void amplitude_damp(CMatrix& rho, std::size_t q, double gamma) {
  if (gamma == 0.0) return;
  const Eigen::Index dim = rho.rows();
  const Eigen::Index bit = Eigen::Index{1} << q;
  const double s = std::sqrt(1.0 - gamma);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) {
      const bool a = i & bit, b = j & bit;
      if (!a && !b) rho(i, j) += gamma * rho(i | bit, j | bit);
      else if (a && b) rho(i, j) *= 1.0 - gamma;
      else rho(i, j) *= s;
    }
}

}  // namespace detail

/// Density-matrix evolution of a bound circuit from |0...0>: each gate is
/// followed by its noise channel.
inline DensityMatrix evolve(const Circuit& c, const NoiseModel& noise) {
  noise.validate();
  if (c.n_qubits() > kMaxSimQubits) throw std::length_error("evolve: too many qubits");
  if (!c.is_bound()) throw std::invalid_argument("evolve: circuit has unbound parameters");
  const Eigen::Index dim = Eigen::Index{1} << c.n_qubits();
  CMatrix rho = CMatrix::Zero(dim, dim);
  rho(0, 0) = 1.0;
  for (const auto& g : c.gates()) {
    if (g.kind == GateKind::CNOT) {
      detail::apply_cnot(rho, g.q0, g.q1);
      detail::depolarize(rho, (1ULL << g.q0) | (1ULL << g.q1), noise.p2);
    } else {
      detail::apply_1q(rho, g.q0, detail::gate_matrix(g));
      detail::depolarize(rho, 1ULL << g.q0, noise.p1);
      detail::amplitude_damp(rho, g.q0, noise.gamma_ad);
    }
  }
  return DensityMatrix(std::move(rho), 1e-9);
}

/// Noiseless statevector of a bound circuit from |0...0>.
inline StateVector simulate_state(const Circuit& c) {
  if (!c.is_bound()) throw std::invalid_argument("simulate_state: circuit has unbound parameters");
  if (c.n_qubits() > 20) throw std::length_error("simulate_state: too many qubits");
  const Eigen::Index dim = Eigen::Index{1} << c.n_qubits();
  CVector psi = CVector::Zero(dim);
  psi(0) = 1.0;
  for (const auto& g : c.gates()) {
    if (g.kind == GateKind::CNOT) {
      const Eigen::Index cb = Eigen::Index{1} << g.q0, tb = Eigen::Index{1} << g.q1;
      for (Eigen::Index k = 0; k < dim; ++k)
        if ((k & cb) && !(k & tb)) std::swap(psi(k), psi(k | tb));
      continue;
    }
    const auto u = detail::gate_matrix(g);
    const Eigen::Index bit = Eigen::Index{1} << g.q0;
    for (Eigen::Index k = 0; k < dim; ++k) {
      if (k & bit) continue;
      const cplx a = psi(k), b = psi(k | bit);
      psi(k) = u[0][0] * a + u[0][1] * b;
      psi(k | bit) = u[1][0] * a + u[1][1] * b;
    }
  }
  return StateVector(std::move(psi), 1e-9);
}

// --- measurement ------------------------------------------------------------------

/// Terms measurable in one product basis. `basis` holds the per-qubit Pauli
/// (I where unused); terms keep their coefficients.
struct MeasurementGroup {
  PauliKey basis;
  std::vector<std::pair<PauliKey, double>> terms;
};

inline bool qubitwise_compatible(const PauliKey& a, const PauliKey& b) {
  const std::uint64_t both = a.support() & b.support();
  return ((a.x ^ b.x) & both) == 0 && ((a.z ^ b.z) & both) == 0;
}

/// Greedy qubit-wise commuting grouping in sorted term order. The identity
/// term is returned separately via `constant`.
inline std::vector<MeasurementGroup> group_qubitwise(const PauliSum& obs, double* constant = nullptr) {
  if (!obs.is_hermitian()) throw std::invalid_argument("group_qubitwise: observable is not Hermitian");
  std::vector<MeasurementGroup> groups;
  double id = 0;
  for (const auto& [key, c] : obs.terms()) {
    if (key.support() == 0) {
      id += c.real();
      continue;
    }
    bool placed = false;
    for (auto& g : groups)
      if (qubitwise_compatible(g.basis, key)) {
        g.basis.x |= key.x;
        g.basis.z |= key.z;
        g.terms.emplace_back(key, c.real());
        placed = true;
        break;
      }
    if (!placed) groups.push_back({key, {{key, c.real()}}});
  }
  if (constant) *constant = id;
  return groups;
}

/// Outcome probabilities of a product-basis measurement (ideal basis change).
inline std::vector<double> basis_probabilities(const DensityMatrix& rho, const PauliKey& basis) {
  CMatrix m = rho.matrix();
  const std::size_t n = rho.n_qubits();
  for (std::size_t q = 0; q < n; ++q) {
    if (!((basis.x >> q) & 1ULL)) continue;
    if ((basis.z >> q) & 1ULL) detail::apply_1q(m, q, detail::gate_matrix({GateKind::Sdg, q}));
    detail::apply_1q(m, q, detail::gate_matrix({GateKind::H, q}));
  }
  std::vector<double> p(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index k = 0; k < m.rows(); ++k) p[static_cast<std::size_t>(k)] = std::max(0.0, m(k, k).real());
  return p;
}

/// Applies per-qubit confusion matrices to a distribution.
inline std::vector<double> apply_confusion(std::vector<double> p, const std::vector<Confusion>& conf) {
  for (std::size_t q = 0; q < conf.size(); ++q) {
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (k & bit) continue;
      const double a = p[k], b = p[k | bit];
      p[k] = a * conf[q][0][0] + b * conf[q][1][0];
      p[k | bit] = a * conf[q][0][1] + b * conf[q][1][1];
    }
  }
  return p;
}

inline std::vector<Confusion> confusion_matrices(const NoiseModel& noise, std::size_t n_qubits) {
  std::vector<Confusion> out;
  for (std::size_t q = 0; q < n_qubits; ++q) out.push_back(noise.confusion(q));
  return out;
}

struct ShotResult {
  std::vector<std::uint64_t> counts;  // indexed by outcome bits (qubit q = bit q)
  std::uint64_t shots = 0;

  std::vector<double> frequencies() const {
    std::vector<double> f(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) f[k] = double(counts[k]) / double(shots);
    return f;
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for a sub-stream identified by a list of integers.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> ids) {
  std::uint64_t s = splitmix64(base);
  for (auto id : ids) s = splitmix64(s ^ splitmix64(id + 0x632BE59BD9B4E019ULL));
  return s;
}

/// Multinomial draw via sequential binomials.
inline ShotResult sample_counts(const std::vector<double>& probs, std::uint64_t shots, std::uint64_t seed) {
  if (shots == 0) throw std::invalid_argument("sample_counts: shots must be >= 1");
  std::mt19937_64 rng(seed);
  ShotResult r{std::vector<std::uint64_t>(probs.size(), 0), shots};
  double remaining_p = 0;
  for (double p : probs) remaining_p += p;
  std::uint64_t left = shots;
  for (std::size_t k = 0; k < probs.size() && left > 0; ++k) {
    if (k + 1 == probs.size() || remaining_p <= 0) {
      r.counts[k] = left;
      break;
    }
    const double q = std::clamp(probs[k] / remaining_p, 0.0, 1.0);
    std::binomial_distribution<std::uint64_t> bin(left, q);
    r.counts[k] = bin(rng);
    left -= r.counts[k];
    remaining_p -= probs[k];
  }
  return r;
}

/// Samples a product-basis measurement of rho including readout errors.
inline ShotResult measure_basis(const DensityMatrix& rho, const PauliKey& basis, const NoiseModel& noise,
                                std::uint64_t shots, std::uint64_t seed) {
  auto p = apply_confusion(basis_probabilities(rho, basis), confusion_matrices(noise, rho.n_qubits()));
  return sample_counts(p, shots, seed);
}

/// <Z_mask> under a (quasi-)distribution.
inline double parity_expectation(const std::vector<double>& dist, std::uint64_t zmask) {
  double v = 0;
  for (std::size_t k = 0; k < dist.size(); ++k) v += (std::popcount(zmask & k) & 1) ? -dist[k] : dist[k];
  return v;
}

/// Measured qubits of a term in its group basis: every qubit it touches.
inline std::uint64_t term_mask(const PauliKey& key) { return key.support(); }

inline double exact_expectation(const PauliSum& obs, const DensityMatrix& rho) { return expectation(obs, rho); }

}  // namespace polariton
