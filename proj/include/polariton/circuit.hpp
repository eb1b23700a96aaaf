#pragma once

#include <bit>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "polariton/hamiltonian.hpp"
#include "polariton/operators.hpp"
#include "polariton/pauli.hpp"

namespace polariton {

enum class GateKind { X, H, S, Sdg, RZ, CNOT };

inline const char* to_string(GateKind k) {
  switch (k) {
    case GateKind::X: return "X";
    case GateKind::H: return "H";
    case GateKind::S: return "S";
    case GateKind::Sdg: return "SDG";
    case GateKind::RZ: return "RZ";
    case GateKind::CNOT: return "CNOT";
  }
  return "?";
}

inline constexpr std::size_t kNoQubit = static_cast<std::size_t>(-1);

/// RZ(phi) = exp(-i phi Z / 2) with phi = angle + scale * params[param].
struct Gate {
  GateKind kind = GateKind::X;
  std::size_t q0 = 0;
  std::size_t q1 = kNoQubit;  // CNOT target
  int param = -1;
  double scale = 0;
  double angle = 0;

  bool is_two_qubit() const { return kind == GateKind::CNOT; }
};

class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(std::size_t n_qubits) : n_(n_qubits) {}

  std::size_t n_qubits() const { return n_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<std::string>& params() const { return params_; }
  std::size_t n_params() const { return params_.size(); }

  int add_param(std::string name) {
    params_.push_back(std::move(name));
    return static_cast<int>(params_.size()) - 1;
  }

  void add(Gate g) {
    check(g.q0);
    if (g.kind == GateKind::CNOT) {
      check(g.q1);
      if (g.q0 == g.q1) throw std::invalid_argument("Circuit: CNOT control equals target");
    } else if (g.q1 != kNoQubit) {
      throw std::invalid_argument("Circuit: single-qubit gate with two operands");
    }
    if (g.param >= static_cast<int>(params_.size()))
      throw std::invalid_argument("Circuit: unknown parameter slot");
    if (g.param >= 0 && g.kind != GateKind::RZ) throw std::invalid_argument("Circuit: only RZ takes parameters");
    gates_.push_back(g);
  }
  void x(std::size_t q) { add({GateKind::X, q}); }
  void h(std::size_t q) { add({GateKind::H, q}); }
  void s(std::size_t q) { add({GateKind::S, q}); }
  void sdg(std::size_t q) { add({GateKind::Sdg, q}); }
  void cnot(std::size_t c, std::size_t t) { add({GateKind::CNOT, c, t}); }
  void rz(std::size_t q, double angle) { add({GateKind::RZ, q, kNoQubit, -1, 0, angle}); }
  void rz(std::size_t q, int param, double scale) { add({GateKind::RZ, q, kNoQubit, param, scale, 0}); }

  /// Numeric copy with every parameter substituted.
  Circuit bind(const std::vector<double>& values) const {
    if (values.size() != params_.size()) throw std::invalid_argument("Circuit::bind: wrong parameter count");
    Circuit out(n_);
    for (Gate g : gates_) {
      if (g.param >= 0) {
        g.angle += g.scale * values[static_cast<std::size_t>(g.param)];
        g.param = -1;
        g.scale = 0;
      }
      out.gates_.push_back(g);
    }
    return out;
  }

  bool is_bound() const {
    for (const auto& g : gates_)
      if (g.param >= 0) return false;
    return true;
  }

  std::size_t count(GateKind k) const {
    std::size_t c = 0;
    for (const auto& g : gates_) c += g.kind == k;
    return c;
  }

  /// One gate per line: "KIND q[,q] [param]".
  std::string dump() const {
    std::ostringstream os;
    for (const auto& g : gates_) {
      os << to_string(g.kind) << ' ' << g.q0;
      if (g.q1 != kNoQubit) os << ',' << g.q1;
      if (g.kind == GateKind::RZ) {
        char buf[64];
        if (g.param >= 0) std::snprintf(buf, sizeof buf, " %.17g*%s", g.scale, params_[g.param].c_str());
        else std::snprintf(buf, sizeof buf, " %.17g", g.angle);
        os << buf;
      }
      os << '\n';
    }
    return os.str();
  }

 private:
  void check(std::size_t q) const {
    if (q >= n_) throw std::out_of_range("Circuit: qubit index out of range");
  }
  std::size_t n_ = 0;
  std::vector<Gate> gates_;
  std::vector<std::string> params_;
};

/// Replaces every CNOT by m copies (m odd).
inline Circuit fold_cnots(const Circuit& c, int m) {
  if (m < 1 || m % 2 == 0) throw std::invalid_argument("fold_cnots: noise factor must be odd and >= 1");
  Circuit out(c.n_qubits());
  for (const auto& name : c.params()) out.add_param(name);
  for (const auto& g : c.gates()) {
    const int reps = g.kind == GateKind::CNOT ? m : 1;
    for (int r = 0; r < reps; ++r) out.add(g);
  }
  return out;
}

struct Resources {
  std::size_t qubits = 0;
  std::size_t cnots = 0;
  std::size_t params = 0;
  std::size_t gates = 0;
};

inline Resources count_resources(const Circuit& c) {
  return {c.n_qubits(), c.count(GateKind::CNOT), c.n_params(), c.gates().size()};
}

// --- PUCC generator pool ---------------------------------------------------------

enum class ExcitationClass { single, photon, mixed_single, dbl, mixed_double };

inline const char* to_string(ExcitationClass c) {
  switch (c) {
    case ExcitationClass::single: return "single";
    case ExcitationClass::photon: return "photon";
    case ExcitationClass::mixed_single: return "mixed_single";
    case ExcitationClass::dbl: return "double";
    case ExcitationClass::mixed_double: return "mixed_double";
  }
  return "?";
}

struct PoolGenerator {
  std::string label;
  ExcitationClass cls;
  MixedOperator excitation;  // T - T^dagger
  PauliSum generator;        // mapped, anti-Hermitian
};

struct GeneratorPool {
  std::size_t n_qubits = 0;
  std::vector<PoolGenerator> generators;  // in ansatz order
  std::vector<std::string> dropped;       // excitations outside the tapered sector
};

/// Single Trotter step order: singles, photon, mixed singles, doubles, mixed doubles.
inline GeneratorPool build_pucc_pool(const IntegralSet& ints, const QubitMapper& mapper) {
  const std::size_t n = ints.n_spatial;
  if (mapper.n_modes() != 2 * n) throw std::invalid_argument("build_pucc_pool: plan/integral mismatch");
  std::vector<std::size_t> occ = ints.occupied, virt;
  for (std::size_t p = 0; p < n; ++p)
    if (std::find(occ.begin(), occ.end(), p) == occ.end()) virt.push_back(p);

  struct Candidate {
    std::string label;
    ExcitationClass cls;
    MixedOperator t;
  };
  std::vector<Candidate> singles, doubles;
  for (auto i : occ)
    for (auto a : virt) {
      MixedOperator t(2 * n);
      for (int s = 0; s < 2; ++s) t.add(1.0, {cr(spin_orbital(a, s, n)), an(spin_orbital(i, s, n))});
      singles.push_back({std::to_string(i) + "->" + std::to_string(a), ExcitationClass::single, t});
    }
  // spin-orbital doubles I<J -> A<B with conserved S_z
  std::vector<std::size_t> so_occ, so_virt;
  for (int s = 0; s < 2; ++s) {
    for (auto i : occ) so_occ.push_back(spin_orbital(i, s, n));
    for (auto a : virt) so_virt.push_back(spin_orbital(a, s, n));
  }
  auto spin = [&](std::size_t P) { return P / n; };
  for (std::size_t x = 0; x < so_occ.size(); ++x)
    for (std::size_t y = x + 1; y < so_occ.size(); ++y)
      for (std::size_t u = 0; u < so_virt.size(); ++u)
        for (std::size_t v = u + 1; v < so_virt.size(); ++v) {
          const auto I = so_occ[x], J = so_occ[y], A = so_virt[u], B = so_virt[v];
          if (spin(I) + spin(J) != spin(A) + spin(B)) continue;
          MixedOperator t(2 * n);
          t.add(1.0, {cr(A), cr(B), an(J), an(I)});
          doubles.push_back({std::to_string(I) + "," + std::to_string(J) + "->" + std::to_string(A) +
                                 "," + std::to_string(B),
                             ExcitationClass::dbl, t});
        }
  auto with_photon = [](const MixedOperator& t) {
    MixedOperator out(t.n_modes());
    for (const auto& term : t.terms()) out.add(term.coeff, term.fermions, {true});
    return out;
  };

  std::vector<Candidate> all;
  all.insert(all.end(), singles.begin(), singles.end());
  {
    MixedOperator t(2 * n);
    t.add(1.0, {}, {true});
    all.push_back({"b+", ExcitationClass::photon, t});
  }
  for (const auto& c : singles) all.push_back({c.label + " b+", ExcitationClass::mixed_single, with_photon(c.t)});
  all.insert(all.end(), doubles.begin(), doubles.end());
  for (const auto& c : doubles) all.push_back({c.label + " b+", ExcitationClass::mixed_double, with_photon(c.t)});

  GeneratorPool pool;
  pool.n_qubits = mapper.n_qubits();
  for (auto& c : all) {
    MixedOperator g = c.t - c.t.adjoint();
    auto mapped = mapper.try_map(g);
    if (!mapped || mapped->empty()) {
      pool.dropped.push_back(c.label);
      continue;
    }
    if (!mapped->is_anti_hermitian()) throw std::logic_error("build_pucc_pool: generator is not anti-Hermitian");
    pool.generators.push_back({c.label, c.cls, std::move(g), std::move(*mapped)});
  }
  return pool;
}

// --- synthesis -------------------------------------------------------------------

/// Rewrites each string of an anti-Hermitian generator into a canonical
/// representative with the same action on the basis state `reference`:
/// Z factors off the flip support are absorbed as signs, and the X/Y
/// pattern keeps one Y (on the highest flipped qubit) when the Y count is
/// odd. Strings that coincide afterwards are merged.
inline PauliSum merge_reference_equivalent(const PauliSum& g, std::uint64_t reference) {
  PauliSum out(g.n_qubits(), g.drop_tolerance());
  for (const auto& [key, c] : g.terms()) {
    if (key.x == 0) continue;  // diagonal: only a phase on the reference
    PauliKey canon{key.x, 0};
    if (std::popcount(key.x & key.z) & 1) canon.z = 1ULL << (63 - std::countl_zero(key.x));
    out.add_term(canon, c * pauli_amplitude(key, reference) / pauli_amplitude(canon, reference));
  }
  return out;
}

struct SynthesisOptions {
  bool merge_reference_equivalent = true;
  bool prepare_reference = true;  // X gates on the frame reference bits
};

/// Appends exp(i * scale * theta * P) (or a fixed angle when param < 0):
/// basis change, CNOT staircase, RZ, inverse.
inline void append_pauli_rotation(Circuit& c, const PauliKey& key, int param, double scale) {
  std::vector<std::size_t> qs;
  for (std::size_t q = 0; q < c.n_qubits(); ++q)
    if (((key.x | key.z) >> q) & 1ULL) qs.push_back(q);
  if (qs.empty()) return;  // global phase
  auto op = [&](std::size_t q) {
    const bool x = (key.x >> q) & 1ULL, z = (key.z >> q) & 1ULL;
    return x ? (z ? 'Y' : 'X') : 'Z';
  };
  for (auto q : qs) {
    if (op(q) == 'X') c.h(q);
    else if (op(q) == 'Y') {
      c.sdg(q);
      c.h(q);
    }
  }
  for (std::size_t k = 0; k + 1 < qs.size(); ++k) c.cnot(qs[k], qs[k + 1]);
  // exp(i a Z) = RZ(-2a)
  if (param >= 0) c.rz(qs.back(), param, -2.0 * scale);
  else c.rz(qs.back(), -2.0 * scale);
  for (std::size_t k = qs.size() - 1; k-- > 0;) c.cnot(qs[k], qs[k + 1]);
  for (auto q : qs) {
    if (op(q) == 'X') c.h(q);
    else if (op(q) == 'Y') {
      c.h(q);
      c.s(q);
    }
  }
}

/// Generators actually exponentiated by synthesize(), one per parameter.
inline std::vector<PauliSum> synthesis_generators(const GeneratorPool& pool, std::uint64_t reference,
                                                  const SynthesisOptions& opt = {}) {
  std::vector<PauliSum> out;
  for (const auto& g : pool.generators)
    out.push_back(opt.merge_reference_equivalent ? merge_reference_equivalent(g.generator, reference)
                                                 : g.generator);
  return out;
}

/// U(theta) = prod_k exp(theta_k G_k) with the pool order read as an operator
/// product, so the last generator acts first on the reference.
inline Circuit synthesize(const GeneratorPool& pool, std::uint64_t reference,
                          const SynthesisOptions& opt = {}) {
  if (pool.generators.empty()) throw std::invalid_argument("synthesize: empty pool");
  Circuit c(pool.n_qubits);
  if (opt.prepare_reference)
    for (std::size_t q = 0; q < pool.n_qubits; ++q)
      if ((reference >> q) & 1ULL) c.x(q);
  for (const auto& g : pool.generators) c.add_param("theta_" + std::string(to_string(g.cls)) + "[" + g.label + "]");
  const auto gens = synthesis_generators(pool, reference, opt);
  for (std::size_t k = gens.size(); k-- > 0;) {
    if (!gens[k].is_anti_hermitian()) throw std::invalid_argument("synthesize: generator is not anti-Hermitian");
    for (const auto& [key, coeff] : gens[k].terms())
      append_pauli_rotation(c, key, static_cast<int>(k), coeff.imag());
  }
  return c;
}

inline Circuit synthesize(const GeneratorPool& pool, const QubitMapper& mapper,
                          const SynthesisOptions& opt = {}) {
  return synthesize(pool, mapper.frame_reference_bits(), opt);
}

}  // namespace polariton
