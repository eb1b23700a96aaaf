#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace polariton {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr std::size_t kMaxQubits = 64;
inline constexpr std::size_t kMaxDenseQubits = 12;
inline constexpr double kDefaultDropTolerance = 1e-12;

/// Symplectic key of a Hermitian Pauli string: bit q of `x` / `z` holds the
/// X / Z component on qubit q, so Y on q sets both.
struct PauliKey {
  std::uint64_t x = 0;
  std::uint64_t z = 0;

  friend auto operator<=>(const PauliKey&, const PauliKey&) = default;

  std::uint64_t support() const { return x | z; }
  int weight() const { return std::popcount(support()); }
  bool is_diagonal() const { return x == 0; }
};

/// Pauli string with a unit phase i^phase in front of the Hermitian product.
class PauliString {
 public:
  PauliString() = default;
  PauliString(std::size_t n_qubits, PauliKey key, int phase = 0)
      : n_(n_qubits), key_(key), phase_(phase & 3) {
    if (n_ > kMaxQubits) throw std::invalid_argument("PauliString: too many qubits");
    const std::uint64_t mask = n_ == 64 ? ~0ULL : ((1ULL << n_) - 1);
    if ((key.x | key.z) & ~mask)
      throw std::invalid_argument("PauliString: mask bits beyond n_qubits");
  }

  static PauliString identity(std::size_t n) { return {n, {}}; }

  /// Single-qubit Pauli `op` in {'I','X','Y','Z'} on `qubit`.
  static PauliString single(std::size_t n, std::size_t qubit, char op) {
    if (qubit >= n) throw std::out_of_range("PauliString::single: qubit out of range");
    PauliKey k;
    const std::uint64_t bit = 1ULL << qubit;
    switch (op) {
      case 'I': break;
      case 'X': k.x = bit; break;
      case 'Y': k.x = bit; k.z = bit; break;
      case 'Z': k.z = bit; break;
      default: throw std::invalid_argument("PauliString::single: bad label");
    }
    return {n, k};
  }

  /// Parses a label such as "XIZY" (qubit 0 leftmost).
  static PauliString from_label(std::string_view label) {
    PauliString out = identity(label.size());
    for (std::size_t q = 0; q < label.size(); ++q) {
      out = out * single(label.size(), q, label[q]);
    }
    return out;
  }

  std::size_t n_qubits() const { return n_; }
  const PauliKey& key() const { return key_; }
  int phase() const { return phase_; }
  cplx phase_factor() const {
    static const cplx table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return table[phase_];
  }

  char op(std::size_t q) const {
    const bool xb = (key_.x >> q) & 1ULL, zb = (key_.z >> q) & 1ULL;
    return xb ? (zb ? 'Y' : 'X') : (zb ? 'Z' : 'I');
  }

  std::string label() const {
    std::string s(n_, 'I');
    for (std::size_t q = 0; q < n_; ++q) s[q] = op(q);
    return s;
  }

  bool commutes_with(const PauliString& o) const { return symplectic_product(key_, o.key_) == 0; }

  /// 0 if the two strings commute, 1 if they anticommute.
  static int symplectic_product(const PauliKey& a, const PauliKey& b) {
    return (std::popcount(a.x & b.z) + std::popcount(a.z & b.x)) & 1;
  }

  /// Exponent k such that sigma(a) * sigma(b) = i^k sigma(a xor b) for the
  /// Hermitian strings with keys a and b.
  static int product_phase(const PauliKey& a, const PauliKey& b) {
    const std::uint64_t xa = a.x & ~a.z, ya = a.x & a.z, za = ~a.x & a.z;
    const std::uint64_t xb = b.x & ~b.z, yb = b.x & b.z, zb = ~b.x & b.z;
    const int k = std::popcount(xa & yb) - std::popcount(xa & zb) + std::popcount(ya & zb) -
                  std::popcount(ya & xb) + std::popcount(za & xb) - std::popcount(za & yb);
    return ((k % 4) + 4) % 4;
  }

  friend PauliString operator*(const PauliString& a, const PauliString& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("PauliString multiply: size mismatch");
    const int ph = a.phase_ + b.phase_ + product_phase(a.key_, b.key_);
    return {a.n_, {a.key_.x ^ b.key_.x, a.key_.z ^ b.key_.z}, ph};
  }

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  std::size_t n_ = 0;
  PauliKey key_{};
  int phase_ = 0;
};

/// Phase of sigma(key) acting on computational basis state |k>:
/// sigma|k> = amplitude * |k xor x>.
inline cplx pauli_amplitude(const PauliKey& key, std::uint64_t k) {
  static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const int y = std::popcount(key.x & key.z);
  const int sign = std::popcount(key.z & k) & 1;
  return ipow[(y + 2 * sign) & 3];
}

/// Weighted sum of Pauli strings keyed by their symplectic masks.
class PauliSum {
 public:
  using TermMap = std::map<PauliKey, cplx>;

  PauliSum() = default;
  explicit PauliSum(std::size_t n_qubits, double drop_tol = kDefaultDropTolerance)
      : n_(n_qubits), tol_(drop_tol) {
    if (n_ > kMaxQubits) throw std::invalid_argument("PauliSum: too many qubits");
  }
  PauliSum(const PauliString& s, cplx coeff = 1.0) : PauliSum(s.n_qubits()) {
    add_term(s, coeff);
  }

  static PauliSum identity(std::size_t n, cplx c = 1.0) {
    PauliSum out(n);
    out.add_term(PauliKey{}, c);
    return out;
  }

  std::size_t n_qubits() const { return n_; }
  double drop_tolerance() const { return tol_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  cplx coefficient(const PauliKey& k) const {
    auto it = terms_.find(k);
    return it == terms_.end() ? cplx{} : it->second;
  }
  cplx coefficient(std::string_view label) const {
    return coefficient(PauliString::from_label(label).key());
  }

  void add_term(const PauliKey& k, cplx c) {
    auto [it, inserted] = terms_.try_emplace(k, c);
    if (!inserted) it->second += c;
    if (std::abs(it->second) < tol_) terms_.erase(it);
  }
  /// Folds the string's phase into the coefficient.
  void add_term(const PauliString& s, cplx c) {
    if (s.n_qubits() != n_) throw std::invalid_argument("PauliSum::add_term: size mismatch");
    add_term(s.key(), c * s.phase_factor());
  }

  PauliSum& operator+=(const PauliSum& o) {
    check_size(o, "add");
    for (const auto& [k, c] : o.terms_) add_term(k, c);
    return *this;
  }
  PauliSum& operator-=(const PauliSum& o) {
    check_size(o, "subtract");
    for (const auto& [k, c] : o.terms_) add_term(k, -c);
    return *this;
  }
  PauliSum& operator*=(cplx s) {
    TermMap next;
    for (const auto& [k, c] : terms_)
      if (std::abs(c * s) >= tol_) next.emplace(k, c * s);
    terms_ = std::move(next);
    return *this;
  }

  friend PauliSum operator+(PauliSum a, const PauliSum& b) { return a += b; }
  friend PauliSum operator-(PauliSum a, const PauliSum& b) { return a -= b; }
  friend PauliSum operator*(PauliSum a, cplx s) { return a *= s; }
  friend PauliSum operator*(cplx s, PauliSum a) { return a *= s; }

  friend PauliSum operator*(const PauliSum& a, const PauliSum& b) {
    a.check_size(b, "multiply");
    PauliSum out(a.n_, std::min(a.tol_, b.tol_));
    for (const auto& [ka, ca] : a.terms_)
      for (const auto& [kb, cb] : b.terms_) {
        PauliString p = PauliString(a.n_, ka) * PauliString(b.n_, kb);
        out.add_term(p, ca * cb);
      }
    return out;
  }

  PauliSum adjoint() const {
    PauliSum out(n_, tol_);
    for (const auto& [k, c] : terms_) out.terms_.emplace(k, std::conj(c));
    return out;
  }

  /// Removes terms with |c| < tol and returns the removed part.
  PauliSum prune(double tol) {
    PauliSum removed(n_, 0.0);
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (std::abs(it->second) < tol) {
        removed.terms_.emplace(it->first, it->second);
        it = terms_.erase(it);
      } else {
        ++it;
      }
    }
    return removed;
  }

  bool is_hermitian(double tol = 1e-10) const {
    for (const auto& [k, c] : terms_)
      if (std::abs(c.imag()) > tol) return false;
    return true;
  }
  bool is_anti_hermitian(double tol = 1e-10) const {
    for (const auto& [k, c] : terms_)
      if (std::abs(c.real()) > tol) return false;
    return true;
  }

  /// Term-by-term commutation with a single Pauli string.
  bool commutes_with(const PauliKey& s) const {
    for (const auto& [k, c] : terms_)
      if (PauliString::symplectic_product(k, s)) return false;
    return true;
  }

  double max_abs_coefficient() const {
    double m = 0;
    for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  friend bool approx_equal(const PauliSum& a, const PauliSum& b, double tol) {
    if (a.n_ != b.n_) return false;
    PauliSum d = a - b;
    return d.max_abs_coefficient() <= tol;
  }

 private:
  void check_size(const PauliSum& o, const char* what) const {
    if (o.n_ != n_)
      throw std::invalid_argument(std::string("PauliSum ") + what + ": size mismatch");
  }

  std::size_t n_ = 0;
  double tol_ = kDefaultDropTolerance;
  TermMap terms_;
};

/// Exact 2^n x 2^n matrix of a Pauli sum.
inline CMatrix to_dense_matrix(const PauliSum& obs) {
  if (obs.n_qubits() > kMaxDenseQubits)
    throw std::length_error("to_dense_matrix: more than 12 qubits");
  const std::size_t dim = std::size_t{1} << obs.n_qubits();
  CMatrix m = CMatrix::Zero(dim, dim);
  for (const auto& [key, c] : obs.terms())
    for (std::uint64_t k = 0; k < dim; ++k) m(k ^ key.x, k) += c * pauli_amplitude(key, k);
  return m;
}

// --- dense states ---------------------------------------------------------

class StateVector {
 public:
  explicit StateVector(CVector amps, double tol = 1e-12) : amps_(std::move(amps)) {
    const auto n = amps_.size();
    if (n == 0 || (n & (n - 1))) throw std::invalid_argument("StateVector: dimension not 2^n");
    if (std::abs(amps_.norm() - 1.0) > tol) throw std::invalid_argument("StateVector: not normalized");
    n_qubits_ = static_cast<std::size_t>(std::countr_zero(static_cast<std::uint64_t>(n)));
  }
  static StateVector basis(std::size_t n_qubits, std::uint64_t bits) {
    CVector v = CVector::Zero(std::int64_t{1} << n_qubits);
    v(static_cast<Eigen::Index>(bits)) = 1.0;
    return StateVector(std::move(v));
  }

  std::size_t n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const CVector& amplitudes() const { return amps_; }

 private:
  CVector amps_;
  std::size_t n_qubits_ = 0;
};

class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix rho, double tol = 1e-10) : rho_(std::move(rho)) {
    const auto n = rho_.rows();
    if (n == 0 || n != rho_.cols() || (n & (n - 1)))
      throw std::invalid_argument("DensityMatrix: dimension not 2^n square");
    if (std::abs(rho_.trace() - cplx(1.0)) > tol)
      throw std::invalid_argument("DensityMatrix: trace differs from 1");
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > tol)
      throw std::invalid_argument("DensityMatrix: not Hermitian");
    n_qubits_ = static_cast<std::size_t>(std::countr_zero(static_cast<std::uint64_t>(n)));
  }
  static DensityMatrix from_state(const StateVector& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
  }

  std::size_t n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(rho_.rows()); }
  const CMatrix& matrix() const { return rho_; }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  }

 private:
  CMatrix rho_;
  std::size_t n_qubits_ = 0;
};

namespace detail {
inline double checked_real(cplx v, const char* where) {
  if (std::abs(v.imag()) > 1e-10)
    throw std::runtime_error(std::string(where) + ": imaginary expectation residue");
  return v.real();
}
inline void require_hermitian(const PauliSum& obs) {
  if (!obs.is_hermitian()) throw std::invalid_argument("expectation: observable is not Hermitian");
}
}  // namespace detail

inline cplx term_expectation(const PauliKey& key, const CVector& psi) {
  cplx acc{};
  for (Eigen::Index k = 0; k < psi.size(); ++k) {
    const auto uk = static_cast<std::uint64_t>(k);
    acc += std::conj(psi(static_cast<Eigen::Index>(uk ^ key.x))) * pauli_amplitude(key, uk) * psi(k);
  }
  return acc;
}

/// Tr(rho sigma) = sum_k rho[k][k^x] * amplitude(k).
inline cplx term_expectation(const PauliKey& key, const CMatrix& rho) {
  cplx acc{};
  for (Eigen::Index k = 0; k < rho.rows(); ++k) {
    const auto uk = static_cast<std::uint64_t>(k);
    acc += rho(k, static_cast<Eigen::Index>(uk ^ key.x)) * pauli_amplitude(key, uk);
  }
  return acc;
}

inline double expectation(const PauliSum& obs, const StateVector& psi) {
  detail::require_hermitian(obs);
  if (obs.n_qubits() != psi.n_qubits()) throw std::invalid_argument("expectation: dim mismatch");
  cplx acc{};
  for (const auto& [key, c] : obs.terms()) acc += c * term_expectation(key, psi.amplitudes());
  return detail::checked_real(acc, "expectation");
}

inline double expectation(const PauliSum& obs, const DensityMatrix& rho) {
  detail::require_hermitian(obs);
  if (obs.n_qubits() != rho.n_qubits()) throw std::invalid_argument("expectation: dim mismatch");
  cplx acc{};
  for (const auto& [key, c] : obs.terms()) acc += c * term_expectation(key, rho.matrix());
  return detail::checked_real(acc, "expectation");
}

// --- text format ------------------------------------------------------------
// One term per line: "coeff_real coeff_imag LABEL", qubit 0 leftmost.

inline void write_pauli_sum(std::ostream& os, const PauliSum& s) {
  char buf[64];
  for (const auto& [key, c] : s.terms()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g ", c.real() + 0.0, c.imag() + 0.0);  // no "-0"
    os << buf << PauliString(s.n_qubits(), key).label() << '\n';
  }
}

inline std::string to_text(const PauliSum& s) {
  std::ostringstream os;
  write_pauli_sum(os, s);
  return os.str();
}

/// Inverse of write_pauli_sum. `n_qubits` is needed only for empty input.
inline PauliSum read_pauli_sum(std::istream& is, std::size_t n_qubits = 0) {
  std::vector<std::pair<PauliString, cplx>> terms;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    double re, im;
    std::string label;
    if (!(ls >> re >> im >> label))
      throw std::runtime_error("read_pauli_sum: malformed line " + std::to_string(lineno));
    if (label.find_first_not_of("IXYZ") != std::string::npos)
      throw std::runtime_error("read_pauli_sum: bad label on line " + std::to_string(lineno));
    terms.emplace_back(PauliString::from_label(label), cplx(re, im));
  }
  if (!terms.empty()) n_qubits = terms.front().first.n_qubits();
  PauliSum out(n_qubits, 0.0);
  for (const auto& [p, c] : terms) {
    if (p.n_qubits() != n_qubits)
      throw std::runtime_error("read_pauli_sum: inconsistent label lengths");
    out.add_term(p, c);
  }
  return out;
}

inline PauliSum from_text(const std::string& text, std::size_t n_qubits = 0) {
  std::istringstream is(text);
  return read_pauli_sum(is, n_qubits);
}

}  // namespace polariton
