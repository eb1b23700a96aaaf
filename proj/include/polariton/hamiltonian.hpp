#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "polariton/chem.hpp"
#include "polariton/operators.hpp"
#include "polariton/pauli.hpp"

namespace polariton {

// Spin orbitals are stored in blocks: modes 0..n-1 are alpha, n..2n-1 beta.
inline std::size_t spin_orbital(std::size_t p, int spin, std::size_t n_spatial) {
  return p + static_cast<std::size_t>(spin) * n_spatial;
}

/// Pauli-Fierz Hamiltonian in the coherent-state (QED-HF) frame:
///   H = sum h a+a + 1/4 sum gbar a+a+aa + w b+b
///       - sqrt(w/2) (l.dd)(b+ + b) + 1/2 (l.dd)^2,   dd = d - <d>.
/// The self-energy is expanded with the second-moment integrals as the
/// one-electron piece. e_nuc and the scalar DSE piece go to constant().
inline MixedOperator build_pauli_fierz(const IntegralSet& ints, const CavityParams& cav) {
  ints.validate();
  cav.validate();
  for (int k = 0; k < 3; ++k)
    if (cav.lambda[k] != 0.0 && !ints.has_dip[k])
      throw std::invalid_argument("build_pauli_fierz: dipole integrals missing for a coupled axis");

  const std::size_t n = ints.n_spatial;
  MixedOperator op(2 * n);
  op.add_constant(ints.e_nuc);

  auto one_body = [&](const Eigen::MatrixXd& m, double scale, std::vector<bool> bosons) {
    for (int s = 0; s < 2; ++s)
      for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q) {
          const double v = scale * m(p, q);
          if (std::abs(v) < 1e-15) continue;
          op.add(v, {cr(spin_orbital(p, s, n)), an(spin_orbital(q, s, n))}, bosons);
        }
  };

  one_body(ints.h, 1.0, {});

  // 1/4 sum_PQRS (<PQ|RS> - <PQ|SR>) a+_P a+_Q a_S a_R
  const std::size_t m = 2 * n;
  auto phys = [&](std::size_t P, std::size_t Q, std::size_t R, std::size_t S) {
    if (P / n != R / n || Q / n != S / n) return 0.0;
    return ints.g(P % n, R % n, Q % n, S % n);
  };
  for (std::size_t P = 0; P < m; ++P)
    for (std::size_t Q = 0; Q < m; ++Q) {
      if (P == Q) continue;
      for (std::size_t R = 0; R < m; ++R)
        for (std::size_t S = 0; S < m; ++S) {
          if (R == S) continue;
          const double a = phys(P, Q, R, S) - phys(P, Q, S, R);
          if (std::abs(a) < 1e-15) continue;
          op.add(0.25 * a, {cr(P), cr(Q), an(S), an(R)});
        }
    }

  op.add(cav.omega, {}, {true, false});

  if (cav.lambda.isZero(0.0)) return op;

  const QedHfReference ref = qed_hf_reference(ints, cav);
  const Eigen::MatrixXd ld = coupled_dipole(ints, cav.lambda);
  const double mean = cav.lambda.dot(ref.d_expectation - ints.d_nuc);  // l.<d_e>
  const double g = std::sqrt(cav.omega / 2.0);

  // bilinear coupling
  one_body(ld, -g, {true});
  one_body(ld, -g, {false});
  op.add(g * mean, {}, {true});
  op.add(g * mean, {}, {false});

  // dipole self-energy
  one_body(coupled_second_moment(ints, cav.lambda), 0.5, {});
  one_body(ld, -mean, {});
  for (int s = 0; s < 2; ++s)
    for (int t = 0; t < 2; ++t)
      for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q) {
          if (std::abs(ld(p, q)) < 1e-15) continue;
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t u = 0; u < n; ++u) {
              const double v = 0.5 * ld(p, q) * ld(r, u);
              if (std::abs(v) < 1e-15) continue;
              const std::size_t P = spin_orbital(p, s, n), R = spin_orbital(r, t, n);
              if (P == R) continue;
              op.add(v, {cr(P), cr(R), an(spin_orbital(u, t, n)), an(spin_orbital(q, s, n))});
            }
        }
  op.add_constant(0.5 * mean * mean);
  return op;
}

/// Inversion labels (0/1) of the spatial orbitals: orbitals coupled by a
/// nonzero dipole element get opposite labels. Orbitals with no dipole
/// coupling are labelled 0.
inline std::vector<int> orbital_parity_labels(const IntegralSet& ints, double tol = 1e-10) {
  const std::size_t n = ints.n_spatial;
  std::vector<int> label(n, -1);
  auto coupled = [&](std::size_t p, std::size_t q) {
    for (const auto& d : ints.dip)
      if (std::abs(d(p, q)) > tol) return true;
    return false;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (label[root] >= 0) continue;
    label[root] = 0;
    std::queue<std::size_t> todo;
    todo.push(root);
    while (!todo.empty()) {
      const std::size_t p = todo.front();
      todo.pop();
      for (std::size_t q = 0; q < n; ++q) {
        if (q == p || !coupled(p, q)) continue;
        if (label[q] < 0) {
          label[q] = 1 - label[p];
          todo.push(q);
        } else if (label[q] == label[p]) {
          throw std::runtime_error("orbital_parity_labels: dipole couplings admit no inversion labelling");
        }
      }
    }
  }
  return label;
}

// --- Z2 tapering -----------------------------------------------------------

/// One tapering step: Clifford U = (X_q + S)/sqrt(2) for a Z-type generator
/// S (with sign), then X_q is fixed to `eigenvalue` and qubit q dropped.
struct TaperStep {
  std::string name;
  std::size_t n_qubits = 0;  // before the step
  PauliKey generator;        // Z-type
  double sign = 1.0;
  std::size_t qubit = 0;
  int eigenvalue = 1;
};

namespace detail {

inline std::uint64_t remove_bit(std::uint64_t m, std::size_t q) {
  const std::uint64_t low = m & ((1ULL << q) - 1ULL);
  return low | ((m >> (q + 1)) << q);
}

/// Applies one step. Non-commuting terms above `tol` raise; smaller ones are dropped.
inline PauliSum taper_step(const PauliSum& h, const TaperStep& st, double tol = 1e-10) {
  if (h.n_qubits() != st.n_qubits) throw std::invalid_argument("taper: qubit count mismatch");
  const std::size_t n = st.n_qubits;
  const PauliString s(n, st.generator);
  const PauliString xq = PauliString::single(n, st.qubit, 'X');
  PauliSum out(n - 1, h.drop_tolerance());
  for (const auto& [key, c] : h.terms()) {
    PauliString p(n, key);
    if (!p.commutes_with(s)) {
      if (std::abs(c) > tol)
        throw std::runtime_error("taper: operator breaks the " + st.name + " symmetry");
      continue;
    }
    cplx coeff = c;
    if ((key.z >> st.qubit) & 1ULL) {
      p = p * xq * s;
      coeff *= -st.sign;
    }
    PauliKey k = p.key();
    coeff *= p.phase_factor();
    if ((k.x >> st.qubit) & 1ULL) {
      coeff *= static_cast<double>(st.eigenvalue);
      k.x &= ~(1ULL << st.qubit);
    }
    out.add_term(PauliKey{remove_bit(k.x, st.qubit), remove_bit(k.z, st.qubit)}, coeff);
  }
  return out;
}

}  // namespace detail

/// Builds steps for Z-type generators in order. Each generator is carried
/// through the earlier steps; its sector is read off the reference bits
/// (or must match `requested` when nonzero). The removed qubit is the
/// highest one the generator touches.
struct NamedGenerator {
  std::string name;
  PauliSum op;  // single Z-type term with coefficient +-1
  int requested = 0;
};

inline std::vector<TaperStep> plan_tapering(std::vector<NamedGenerator> gens, std::size_t n_qubits,
                                            std::uint64_t reference) {
  std::vector<TaperStep> steps;
  std::size_t n = n_qubits;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    PauliSum g = gens[i].op;
    for (const auto& st : steps) g = detail::taper_step(g, st);
    if (g.size() != 1) throw std::logic_error("plan_tapering: generator became trivial or composite");
    const auto& [key, c] = *g.terms().begin();
    if (!key.is_diagonal() || key.z == 0 || std::abs(std::abs(c) - 1.0) > 1e-12 ||
        std::abs(c.imag()) > 1e-12)
      throw std::logic_error("plan_tapering: generator is not a signed Z-string");
    TaperStep st;
    st.name = gens[i].name;
    st.n_qubits = n;
    st.generator = key;
    st.sign = c.real() > 0 ? 1.0 : -1.0;
    st.qubit = static_cast<std::size_t>(63 - std::countl_zero(key.z));
    const int ref_eig = static_cast<int>(st.sign) * ((std::popcount(key.z & reference) & 1) ? -1 : 1);
    if (gens[i].requested != 0 && gens[i].requested != ref_eig)
      throw std::runtime_error("plan_tapering: reference is not in the requested " + st.name +
                               " sector");
    st.eigenvalue = ref_eig;
    steps.push_back(st);
    reference = detail::remove_bit(reference, st.qubit);
    --n;
  }
  return steps;
}

inline PauliSum apply_tapering(PauliSum h, const std::vector<TaperStep>& steps) {
  for (const auto& st : steps) h = detail::taper_step(h, st);
  return h;
}

inline std::uint64_t taper_bits(std::uint64_t bits, const std::vector<TaperStep>& steps) {
  for (const auto& st : steps) bits = detail::remove_bit(bits, st.qubit);
  return bits;
}

/// Conjugation by X on every set bit of `reference`: each term picks up
/// (-1)^{#Z + #Y on flipped qubits}.
inline PauliSum flip_reference_signs(const PauliSum& h, std::uint64_t reference) {
  PauliSum out(h.n_qubits(), h.drop_tolerance());
  for (const auto& [key, c] : h.terms())
    out.add_term(key, (std::popcount(key.z & reference) & 1) ? -c : c);
  return out;
}

// --- encoding plan -----------------------------------------------------------

enum class TaperMode { none, parity };

struct EncodingPlan {
  FermionMapping fermion_mapping = FermionMapping::bravyi_kitaev;
  BosonEncoding boson_encoding = BosonEncoding::single_qubit;
  TaperMode taper = TaperMode::parity;
  bool sign_flip_reference = false;
  /// Number/spin-parity reduction; defaults to on for Bravyi-Kitaev.
  std::optional<bool> spin_reduction;
  /// Requested parity sector (0 = the reference's sector).
  int tapered_sector = 0;

  // Filled in by QubitMapper.
  std::uint64_t reference_bits = 0;  // in the final (tapered, unflipped) frame
  std::size_t n_qubits = 0;

  bool uses_spin_reduction() const {
    return spin_reduction.value_or(fermion_mapping == FermionMapping::bravyi_kitaev);
  }
};

inline std::string describe(const EncodingPlan& p) {
  std::string s = to_string(p.fermion_mapping);
  if (p.uses_spin_reduction() && p.fermion_mapping == FermionMapping::jordan_wigner) s += "+reduce";
  s += p.taper == TaperMode::parity ? "+taper" : "";
  s += std::string("/") + to_string(p.boson_encoding);
  if (p.sign_flip_reference) s += "/flip";
  return s;
}

struct SectorConstraint {
  std::string name;
  PauliSum op;  // diagonal
  double value = 0;
};

/// Maps operators of one molecular problem to qubits under a fixed plan:
/// fermion mapping, photon register, symmetry reductions, reference flip.
class QubitMapper {
 public:
  QubitMapper(const IntegralSet& ints, const CavityParams& cav, EncodingPlan plan)
      : plan_(plan),
        n_spatial_(ints.n_spatial),
        n_occ_(ints.occupied.size()),
        enc_(plan.fermion_mapping, 2 * ints.n_spatial) {
    cav.validate();
    reg_ = {plan.boson_encoding, cav.n_photon_max, 2 * n_spatial_};
    reg_.validate();
    n_full_ = 2 * n_spatial_ + reg_.n_qubits();
    if (n_full_ > kMaxQubits - 1) throw std::invalid_argument("QubitMapper: too many qubits");

    std::uint64_t occ = 0;
    for (auto i : ints.occupied) occ |= (1ULL << i) | (1ULL << (i + n_spatial_));
    occupation_ = occ;
    full_reference_ = enc_.encode_occupation(occ) | reg_.fock_bits(0);

    labels_ = orbital_parity_labels(ints);
    std::vector<std::size_t> odd, alpha, all;
    for (std::size_t p = 0; p < n_spatial_; ++p) {
      alpha.push_back(p);
      all.push_back(p);
      all.push_back(p + n_spatial_);
      if (labels_[p]) {
        odd.push_back(p);
        odd.push_back(p + n_spatial_);
      }
    }
    parity_key_ = PauliKey{0, enc_.set_parity_mask(odd) | reg_.parity_mask()};

    std::vector<NamedGenerator> gens;
    auto zgen = [&](std::string name, std::uint64_t z, int req = 0) {
      if (z == 0) return;
      gens.push_back({std::move(name), PauliSum(PauliString(n_full_, {0, z})), req});
    };
    if (plan_.uses_spin_reduction()) {
      zgen("electron-number parity", enc_.set_parity_mask(all));
      zgen("alpha-number parity", enc_.set_parity_mask(alpha));
    }
    if (plan_.taper == TaperMode::parity) zgen("electron-photon parity", parity_key_.z, plan_.tapered_sector);
    steps_ = plan_tapering(std::move(gens), n_full_, full_reference_);

    plan_.n_qubits = n_full_ - steps_.size();
    plan_.reference_bits = taper_bits(full_reference_, steps_);
    if (plan_.taper == TaperMode::parity) plan_.tapered_sector = steps_.back().eigenvalue;
  }

  const EncodingPlan& plan() const { return plan_; }
  std::size_t n_qubits() const { return plan_.n_qubits; }
  std::size_t n_full_qubits() const { return n_full_; }
  std::size_t n_modes() const { return 2 * n_spatial_; }
  const LinearEncoding& fermion_encoding() const { return enc_; }
  const BosonRegister& photon_register() const { return reg_; }
  const std::vector<TaperStep>& taper_steps() const { return steps_; }
  const std::vector<int>& orbital_labels() const { return labels_; }
  std::uint64_t occupation() const { return occupation_; }
  std::uint64_t full_reference_bits() const { return full_reference_; }

  /// Bits of the reference in the frame of mapped operators (0 when flipped).
  std::uint64_t frame_reference_bits() const {
    return plan_.sign_flip_reference ? 0ULL : plan_.reference_bits;
  }

  /// Mapped total parity on the untapered register.
  PauliSum parity_operator() const { return PauliSum(PauliString(n_full_, parity_key_)); }

  /// Untapered mapping of an operator (fermions then photons).
  PauliSum map_untapered(const MixedOperator& op, std::vector<std::string>* warnings = nullptr) const {
    return encode_bosons(map_fermions(op, enc_, n_full_), reg_, warnings);
  }

  /// Reduces an untapered Pauli operator to the working frame.
  PauliSum reduce(const PauliSum& full) const {
    PauliSum h = apply_tapering(full, steps_);
    if (plan_.sign_flip_reference) h = flip_reference_signs(h, plan_.reference_bits);
    return h;
  }

  PauliSum map(const MixedOperator& op, std::vector<std::string>* warnings = nullptr) const {
    return reduce(map_untapered(op, warnings));
  }

  /// As map(), but returns nothing when the operator does not commute with
  /// the reduced symmetries (it cannot be represented in the sector).
  std::optional<PauliSum> try_map(const MixedOperator& op) const {
    try {
      return map(op);
    } catch (const std::runtime_error&) {
      return std::nullopt;
    }
  }

  PauliSum photon_number() const { return reduce(reg_.number(n_full_)); }

  /// Diagonal constraints that select the physical sector of the reference.
  std::vector<SectorConstraint> sector_constraints() const {
    std::vector<SectorConstraint> out;
    auto number = [&](std::size_t first, std::size_t count) {
      MixedOperator n_op(2 * n_spatial_);
      for (std::size_t p = first; p < first + count; ++p) n_op.add(1.0, {cr(p), an(p)});
      return map_untapered(n_op);
    };
    auto add = [&](std::string name, const PauliSum& full) {
      PauliSum op = reduce(full);
      double v = 0;
      for (const auto& [key, c] : op.terms()) {
        if (!key.is_diagonal()) throw std::logic_error("sector constraint is not diagonal");
        v += c.real() * ((std::popcount(key.z & frame_reference_bits()) & 1) ? -1.0 : 1.0);
      }
      out.push_back({std::move(name), std::move(op), v});
    };
    add("N_alpha", number(0, n_spatial_));
    add("N_beta", number(n_spatial_, n_spatial_));
    if (reg_.encoding == BosonEncoding::unary) add("photon one-hot", reg_.occupancy(n_full_));
    if (plan_.taper == TaperMode::none) add("parity", parity_operator());
    return out;
  }

 private:
  EncodingPlan plan_;
  std::size_t n_spatial_, n_occ_;
  LinearEncoding enc_;
  BosonRegister reg_;
  std::size_t n_full_ = 0;
  std::uint64_t occupation_ = 0, full_reference_ = 0;
  std::vector<int> labels_;
  PauliKey parity_key_;
  std::vector<TaperStep> steps_;
};

/// Standalone tapering of an untapered Hamiltonian by the electron-photon
/// parity of `mapper`'s problem. Returns the reduced operator and the plan
/// with the sector filled in.
inline std::pair<PauliSum, EncodingPlan> taper_parity(const PauliSum& h, const QubitMapper& mapper) {
  if (h.n_qubits() != mapper.n_full_qubits())
    throw std::invalid_argument("taper_parity: operator must act on the untapered register");
  if (mapper.plan().taper != TaperMode::parity)
    throw std::invalid_argument("taper_parity: plan has tapering disabled");
  return {apply_tapering(h, mapper.taper_steps()), mapper.plan()};
}

/// Fully mapped Hamiltonian and observables for one geometry and cavity.
struct EncodedProblem {
  IntegralSet integrals;
  CavityParams cavity;
  QubitMapper mapper;
  MixedOperator fermionic;
  PauliSum hamiltonian;
  PauliSum photon_number;
  std::vector<SectorConstraint> constraints;
  QedHfReference reference;
  std::vector<std::string> warnings;

  std::size_t n_qubits() const { return mapper.n_qubits(); }
};

inline EncodedProblem encode_problem(const IntegralSet& ints, const CavityParams& cav,
                                     const EncodingPlan& plan) {
  QubitMapper mapper(ints, cav, plan);
  MixedOperator op = build_pauli_fierz(ints, cav);
  std::vector<std::string> warnings;
  PauliSum full = mapper.map_untapered(op, &warnings);
  for (const auto& [key, c] : full.terms())
    if (std::abs(c.imag()) > 1e-10) throw std::logic_error("encode_problem: complex Hamiltonian coefficient");
  if (!full.commutes_with(mapper.parity_operator().terms().begin()->first))
    throw std::runtime_error("encode_problem: Hamiltonian breaks electron-photon parity");
  PauliSum h = mapper.reduce(full);
  PauliSum n_ph = mapper.photon_number();
  auto constraints = mapper.sector_constraints();
  return {ints,         cav, std::move(mapper), std::move(op), std::move(h), std::move(n_ph),
          std::move(constraints), qed_hf_reference(ints, cav), std::move(warnings)};
}

}  // namespace polariton
