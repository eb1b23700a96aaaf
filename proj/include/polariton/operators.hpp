#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "polariton/pauli.hpp"

namespace polariton {

struct FermionOp {
  std::size_t mode = 0;
  bool dagger = false;
  friend bool operator==(const FermionOp&, const FermionOp&) = default;
};

/// Product of ladder operators: fermions (left to right) times bosons (left
/// to right; true = creation).
struct MixedTerm {
  cplx coeff = 1.0;
  std::vector<FermionOp> fermions;
  std::vector<bool> bosons;
};

/// Normal-ordered fermion/boson operator plus a separately tracked scalar.
class MixedOperator {
 public:
  MixedOperator() = default;
  explicit MixedOperator(std::size_t n_modes) : n_modes_(n_modes) {}

  std::size_t n_modes() const { return n_modes_; }
  const std::vector<MixedTerm>& terms() const { return terms_; }
  double constant() const { return constant_; }

  void add_constant(double c) { constant_ += c; }

  void add(cplx coeff, std::vector<FermionOp> fermions, std::vector<bool> bosons = {}) {
    if (coeff == cplx{}) return;
    for (const auto& f : fermions)
      if (f.mode >= n_modes_) throw std::out_of_range("MixedOperator: mode index out of range");
    terms_.push_back({coeff, std::move(fermions), std::move(bosons)});
  }

  /// Conjugate transpose (reverses operator order, flips daggers).
  MixedOperator adjoint() const {
    MixedOperator out(n_modes_);
    out.constant_ = constant_;
    for (const auto& t : terms_) {
      MixedTerm a{std::conj(t.coeff), {t.fermions.rbegin(), t.fermions.rend()},
                  {t.bosons.rbegin(), t.bosons.rend()}};
      for (auto& f : a.fermions) f.dagger = !f.dagger;
      for (std::size_t i = 0; i < a.bosons.size(); ++i) a.bosons[i] = !a.bosons[i];
      out.terms_.push_back(std::move(a));
    }
    return out;
  }

  MixedOperator& operator+=(const MixedOperator& o) {
    if (o.n_modes_ != n_modes_) throw std::invalid_argument("MixedOperator: mode count mismatch");
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    constant_ += o.constant_;
    return *this;
  }
  MixedOperator& operator*=(cplx s) {
    for (auto& t : terms_) t.coeff *= s;
    constant_ *= s.real();
    return *this;
  }
  friend MixedOperator operator+(MixedOperator a, const MixedOperator& b) { return a += b; }
  friend MixedOperator operator-(MixedOperator a, MixedOperator b) { return a += (b *= -1.0); }

 private:
  std::size_t n_modes_ = 0;
  std::vector<MixedTerm> terms_;
  double constant_ = 0;
};

inline FermionOp cr(std::size_t p) { return {p, true}; }
inline FermionOp an(std::size_t p) { return {p, false}; }

// --- fermion encodings -----------------------------------------------------------

enum class FermionMapping { jordan_wigner, bravyi_kitaev };

inline const char* to_string(FermionMapping m) {
  return m == FermionMapping::jordan_wigner ? "jw" : "bk";
}

/// Linear binary encoding: qubit bits b = beta * n over GF(2).
class LinearEncoding {
 public:
  LinearEncoding(FermionMapping kind, std::size_t n_modes) : kind_(kind), n_(n_modes) {
    if (n_modes == 0 || n_modes > 63) throw std::invalid_argument("LinearEncoding: bad mode count");
    beta_cols_.assign(n_, 0);
    if (kind == FermionMapping::jordan_wigner) {
      for (std::size_t j = 0; j < n_; ++j) beta_cols_[j] = 1ULL << j;
    } else {
      // Top-left n x n block of the 2^k Bravyi-Kitaev matrix; qubit i stores
      // the parity of modes (i & (i + 1)) .. i.
      for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t lo = i & (i + 1);
        for (std::size_t j = lo; j <= i; ++j) beta_cols_[j] |= 1ULL << i;
      }
    }
    invert();
  }

  FermionMapping kind() const { return kind_; }
  std::size_t n_modes() const { return n_; }

  /// Qubits flipped by a ladder operator on mode j.
  std::uint64_t update_mask(std::size_t j) const { return beta_cols_.at(j); }
  /// Z-string whose eigenvalue is (-1)^{n_j}.
  std::uint64_t occupation_mask(std::size_t j) const { return inv_rows_.at(j); }
  /// Z-string whose eigenvalue is (-1)^{sum_{k<j} n_k}.
  std::uint64_t parity_mask(std::size_t j) const {
    std::uint64_t m = 0;
    for (std::size_t k = 0; k < j; ++k) m ^= inv_rows_[k];
    return m;
  }
  /// Z-string for the parity of an arbitrary mode set.
  std::uint64_t set_parity_mask(const std::vector<std::size_t>& modes) const {
    std::uint64_t m = 0;
    for (auto k : modes) m ^= inv_rows_.at(k);
    return m;
  }

  std::uint64_t encode_occupation(std::uint64_t occ) const {
    std::uint64_t bits = 0;
    for (std::size_t j = 0; j < n_; ++j)
      if ((occ >> j) & 1ULL) bits ^= beta_cols_[j];
    return bits;
  }

  /// a_j acting on n_qubits (>= n_modes) qubits:
  /// a_j = X_{update} Z_{parity} (I - Z_{occupation}) / 2.
  PauliSum annihilator(std::size_t j, std::size_t n_qubits) const {
    if (j >= n_) throw std::out_of_range("LinearEncoding: mode index out of range");
    const PauliString flip(n_qubits, {update_mask(j), 0});
    const PauliString sign(n_qubits, {0, parity_mask(j)});
    const PauliString occ(n_qubits, {0, occupation_mask(j)});
    PauliSum proj = PauliSum::identity(n_qubits, 0.5);
    proj.add_term(occ, -0.5);
    return PauliSum(flip * sign) * proj;
  }
  PauliSum creator(std::size_t j, std::size_t n_qubits) const {
    return annihilator(j, n_qubits).adjoint();
  }

 private:
  void invert() {
    // rows of beta over GF(2), then Gauss-Jordan
    std::vector<std::uint64_t> rows(n_, 0), inv(n_, 0);
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t i = 0; i < n_; ++i)
        if ((beta_cols_[j] >> i) & 1ULL) rows[i] |= 1ULL << j;
    for (std::size_t i = 0; i < n_; ++i) inv[i] = 1ULL << i;
    for (std::size_t c = 0; c < n_; ++c) {
      std::size_t piv = c;
      while (piv < n_ && !((rows[piv] >> c) & 1ULL)) ++piv;
      if (piv == n_) throw std::logic_error("LinearEncoding: singular encoding matrix");
      std::swap(rows[c], rows[piv]);
      std::swap(inv[c], inv[piv]);
      for (std::size_t r = 0; r < n_; ++r)
        if (r != c && ((rows[r] >> c) & 1ULL)) {
          rows[r] ^= rows[c];
          inv[r] ^= inv[c];
        }
    }
    inv_rows_ = std::move(inv);
  }

  FermionMapping kind_;
  std::size_t n_;
  std::vector<std::uint64_t> beta_cols_;
  std::vector<std::uint64_t> inv_rows_;
};

// --- boson encodings -------------------------------------------------------

enum class BosonEncoding { single_qubit, unary };

inline const char* to_string(BosonEncoding b) {
  return b == BosonEncoding::single_qubit ? "single" : "unary";
}

/// Photon register layout: `offset` is the first photon qubit.
struct BosonRegister {
  BosonEncoding encoding = BosonEncoding::single_qubit;
  int cutoff = 1;
  std::size_t offset = 0;

  std::size_t n_qubits() const {
    return encoding == BosonEncoding::single_qubit ? 1 : static_cast<std::size_t>(cutoff) + 1;
  }

  void validate() const {
    if (cutoff < 1) throw std::invalid_argument("BosonRegister: cutoff must be >= 1");
    if (encoding == BosonEncoding::single_qubit && cutoff != 1)
      throw std::invalid_argument("single-qubit boson encoding requires n_photon_max = 1");
  }

  /// Computational bits of the Fock state |n>.
  std::uint64_t fock_bits(int n) const {
    if (n < 0 || n > cutoff) throw std::out_of_range("BosonRegister: photon number beyond cutoff");
    if (encoding == BosonEncoding::single_qubit) return static_cast<std::uint64_t>(n) << offset;
    return 1ULL << (offset + static_cast<std::size_t>(n));
  }

  PauliSum creator(std::size_t n_total) const {
    validate();
    PauliSum out(n_total);
    if (encoding == BosonEncoding::single_qubit) {
      out.add_term(PauliString::single(n_total, offset, 'X'), 0.5);
      out.add_term(PauliString::single(n_total, offset, 'Y'), cplx(0, -0.5));
      return out;
    }
    // sum_j sqrt(j+1) sigma+^j sigma-^{j+1}, sigma+- = (X +- iY)/2
    for (int j = 0; j < cutoff; ++j) {
      const std::size_t qa = offset + static_cast<std::size_t>(j), qb = qa + 1;
      PauliSum lower(n_total), raise(n_total);
      lower.add_term(PauliString::single(n_total, qa, 'X'), 0.5);
      lower.add_term(PauliString::single(n_total, qa, 'Y'), cplx(0, 0.5));
      raise.add_term(PauliString::single(n_total, qb, 'X'), 0.5);
      raise.add_term(PauliString::single(n_total, qb, 'Y'), cplx(0, -0.5));
      out += (lower * raise) * std::sqrt(double(j + 1));
    }
    return out;
  }
  PauliSum annihilator(std::size_t n_total) const { return creator(n_total).adjoint(); }

  /// b^dagger b mapped directly: sum_j j (I - Z_j)/2 on the unary register.
  PauliSum number(std::size_t n_total) const {
    validate();
    PauliSum out(n_total);
    if (encoding == BosonEncoding::single_qubit) {
      out.add_term(PauliKey{}, 0.5);
      out.add_term(PauliString::single(n_total, offset, 'Z'), -0.5);
      return out;
    }
    for (int j = 1; j <= cutoff; ++j) {
      out.add_term(PauliKey{}, 0.5 * j);
      out.add_term(PauliString::single(n_total, offset + static_cast<std::size_t>(j), 'Z'), -0.5 * j);
    }
    return out;
  }

  /// Pauli Z-string equal to exp(-i pi b^dagger b) on the valid register states.
  std::uint64_t parity_mask() const {
    if (encoding == BosonEncoding::single_qubit) return 1ULL << offset;
    std::uint64_t m = 0;
    for (int j = 1; j <= cutoff; j += 2) m |= 1ULL << (offset + static_cast<std::size_t>(j));
    return m;
  }

  /// Diagonal occupancy count of the one-hot register (1 on valid states).
  PauliSum occupancy(std::size_t n_total) const {
    PauliSum out(n_total);
    for (int j = 0; j <= cutoff; ++j) {
      out.add_term(PauliKey{}, 0.5);
      out.add_term(PauliString::single(n_total, offset + static_cast<std::size_t>(j), 'Z'), -0.5);
    }
    return out;
  }
};

/// Fermion-mapped operator with its boson factors still symbolic.
struct FermionMappedTerm {
  PauliSum fermion_part;
  std::vector<bool> bosons;
};

/// Replaces fermionic ladder operators by Pauli sums; terms sharing the same
/// boson string are merged. `n_qubits` leaves room for the photon register.
inline std::vector<FermionMappedTerm> map_fermions(const MixedOperator& op,
                                                    const LinearEncoding& enc,
                                                    std::size_t n_qubits) {
  if (op.n_modes() != enc.n_modes())
    throw std::invalid_argument("map_fermions: operator/encoding mode mismatch");
  std::vector<PauliSum> ann, cre;
  for (std::size_t j = 0; j < enc.n_modes(); ++j) {
    ann.push_back(enc.annihilator(j, n_qubits));
    cre.push_back(ann.back().adjoint());
  }
  std::vector<FermionMappedTerm> out;
  for (const auto& t : op.terms()) {
    PauliSum acc = PauliSum::identity(n_qubits, t.coeff);
    for (const auto& f : t.fermions) acc = acc * (f.dagger ? cre[f.mode] : ann[f.mode]);
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const FermionMappedTerm& m) { return m.bosons == t.bosons; });
    if (it == out.end()) out.push_back({std::move(acc), t.bosons});
    else it->fermion_part += acc;
  }
  if (op.constant() != 0.0) {
    auto it = std::find_if(out.begin(), out.end(),
                           [](const FermionMappedTerm& m) { return m.bosons.empty(); });
    if (it == out.end()) out.push_back({PauliSum::identity(n_qubits, op.constant()), {}});
    else it->fermion_part += PauliSum::identity(n_qubits, op.constant());
  }
  return out;
}

inline std::vector<FermionMappedTerm> map_fermions_jw(const MixedOperator& op, std::size_t n_qubits) {
  return map_fermions(op, LinearEncoding(FermionMapping::jordan_wigner, op.n_modes()), n_qubits);
}
inline std::vector<FermionMappedTerm> map_fermions_bk(const MixedOperator& op, std::size_t n_qubits) {
  return map_fermions(op, LinearEncoding(FermionMapping::bravyi_kitaev, op.n_modes()), n_qubits);
}

/// Substitutes the photon register for the boson factors. A bare b^dagger b
/// pair uses the direct number-operator map; longer strings are products of
/// mapped ladder operators and are flagged when they exceed the cutoff.
inline PauliSum encode_bosons(const std::vector<FermionMappedTerm>& terms, const BosonRegister& reg,
                              std::vector<std::string>* warnings = nullptr) {
  reg.validate();
  if (terms.empty()) throw std::invalid_argument("encode_bosons: empty operator");
  const std::size_t n = terms.front().fermion_part.n_qubits();
  if (reg.offset + reg.n_qubits() > n) throw std::invalid_argument("encode_bosons: register overflow");
  const PauliSum bd = reg.creator(n), b = reg.annihilator(n);
  PauliSum out(n);
  for (const auto& t : terms) {
    if (t.bosons.size() == 2 && t.bosons[0] && !t.bosons[1]) {
      out += t.fermion_part * reg.number(n);
      continue;
    }
    int net = 0, peak = 0;
    for (auto it = t.bosons.rbegin(); it != t.bosons.rend(); ++it) {
      net += *it ? 1 : -1;
      peak = std::max(peak, net);
    }
    if (peak > reg.cutoff && warnings)
      warnings->push_back("boson string exceeds photon cutoff " + std::to_string(reg.cutoff) +
                          "; truncated");
    PauliSum factor = PauliSum::identity(n);
    for (bool c : t.bosons) factor = factor * (c ? bd : b);
    out += t.fermion_part * factor;
  }
  return out;
}

}  // namespace polariton
