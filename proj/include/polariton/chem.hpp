#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace polariton {

inline constexpr double kBohrPerAngstrom = 1.8897259886;
inline constexpr double kEvPerHartree = 27.211386245988;

inline double angstrom_to_bohr(double a) { return a * kBohrPerAngstrom; }
inline double ev_to_hartree(double ev) { return ev / kEvPerHartree; }

struct Atom {
  int charge = 1;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // Bohr
};

struct Geometry {
  std::vector<Atom> atoms;

  void validate() const {
    if (atoms.empty()) throw std::invalid_argument("Geometry: no atoms");
    for (const auto& a : atoms)
      if (!a.position.allFinite()) throw std::invalid_argument("Geometry: non-finite position");
  }
};

/// H2 centred at the origin with the bond along x.
inline Geometry h2_geometry(double bond_angstrom) {
  const double half = 0.5 * angstrom_to_bohr(bond_angstrom);
  return Geometry{{Atom{1, {-half, 0, 0}}, Atom{1, {half, 0, 0}}}};
}

/// Real four-index tensor with 8-fold permutational symmetry, chemists'
/// order (pq|rs).
class ERITensor {
 public:
  ERITensor() = default;
  explicit ERITensor(std::size_t n) : n_(n), data_(n * n * n * n, 0.0) {}

  std::size_t n() const { return n_; }
  double operator()(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const {
    return data_[((p * n_ + q) * n_ + r) * n_ + s];
  }
  double& at(std::size_t p, std::size_t q, std::size_t r, std::size_t s) {
    return data_[((p * n_ + q) * n_ + r) * n_ + s];
  }
  /// Writes all eight permutational images.
  void set_symmetric(std::size_t p, std::size_t q, std::size_t r, std::size_t s, double v) {
    for (auto [a, b, c, d] : images(p, q, r, s)) at(a, b, c, d) = v;
  }

  static std::array<std::array<std::size_t, 4>, 8> images(std::size_t p, std::size_t q,
                                                          std::size_t r, std::size_t s) {
    return {{{p, q, r, s}, {q, p, r, s}, {p, q, s, r}, {q, p, s, r},
             {r, s, p, q}, {s, r, p, q}, {r, s, q, p}, {s, r, q, p}}};
  }

  double max_symmetry_violation() const {
    double worst = 0;
    for (std::size_t p = 0; p < n_; ++p)
      for (std::size_t q = 0; q < n_; ++q)
        for (std::size_t r = 0; r < n_; ++r)
          for (std::size_t s = 0; s < n_; ++s)
            for (auto [a, b, c, d] : images(p, q, r, s))
              worst = std::max(worst, std::abs((*this)(p, q, r, s) - (*this)(a, b, c, d)));
    return worst;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Cartesian index pairs of the stored second-moment components.
inline constexpr std::array<std::array<int, 2>, 6> kQuadComponents = {
    {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}}};

/// Molecular-orbital integrals. `dip` carries the electron charge
/// (d_pq = -<p|r|q>); `quad` holds the plain second moments <p|r_a r_b|q>.
struct IntegralSet {
  std::size_t n_spatial = 0;
  Eigen::MatrixXd h;
  ERITensor g;
  std::array<Eigen::MatrixXd, 3> dip;
  std::array<bool, 3> has_dip = {true, true, true};  // false: section absent from file
  std::optional<std::array<Eigen::MatrixXd, 6>> quad;
  double e_nuc = 0;
  Eigen::Vector3d d_nuc = Eigen::Vector3d::Zero();
  std::vector<double> mo_energies;
  std::vector<std::size_t> occupied;  // doubly occupied spatial orbitals

  std::size_t n_electrons() const { return 2 * occupied.size(); }

  void validate(double tol = 1e-10) const {
    const auto n = static_cast<Eigen::Index>(n_spatial);
    if (n_spatial == 0) throw std::invalid_argument("IntegralSet: no orbitals");
    if (h.rows() != n || h.cols() != n) throw std::invalid_argument("IntegralSet: h shape");
    if ((h - h.transpose()).cwiseAbs().maxCoeff() > tol)
      throw std::invalid_argument("IntegralSet: h is not symmetric");
    if (g.n() != n_spatial) throw std::invalid_argument("IntegralSet: g shape");
    if (g.max_symmetry_violation() > tol)
      throw std::invalid_argument("IntegralSet: g lacks 8-fold symmetry");
    for (const auto& d : dip) {
      if (d.rows() != n || d.cols() != n) throw std::invalid_argument("IntegralSet: dipole shape");
      if ((d - d.transpose()).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("IntegralSet: dipole matrix is not symmetric");
    }
    if (quad)
      for (const auto& m : *quad) {
        if (m.rows() != n || m.cols() != n) throw std::invalid_argument("IntegralSet: quad shape");
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol)
          throw std::invalid_argument("IntegralSet: second-moment matrix is not symmetric");
      }
    for (auto i : occupied)
      if (i >= n_spatial) throw std::invalid_argument("IntegralSet: occupation out of range");
  }
};

struct CavityParams {
  double omega = 0;  // Hartree
  Eigen::Vector3d lambda = Eigen::Vector3d::Zero();
  int n_photon_max = 1;

  void validate() const {
    if (!(omega > 0)) throw std::invalid_argument("CavityParams: omega must be positive");
    if (n_photon_max < 1) throw std::invalid_argument("CavityParams: n_photon_max must be >= 1");
    if (!lambda.allFinite()) throw std::invalid_argument("CavityParams: non-finite coupling");
  }
};

inline CavityParams cavity_from_ev(double omega_ev, Eigen::Vector3d lambda, int n_photon_max = 1) {
  CavityParams c{ev_to_hartree(omega_ev), lambda, n_photon_max};
  c.validate();
  return c;
}

// --- s-type Gaussian integrals ---------------------------------------------

namespace detail {

/// Boys function F0(t); series below 1e-10 removes the 0/0 at t = 0.
inline double boys_f0(double t) {
  if (t < 1e-10) return 1.0 - t / 3.0;
  const double st = std::sqrt(t);
  return 0.5 * std::sqrt(std::numbers::pi / t) * std::erf(st);
}

struct Primitive {
  double exponent;
  double coefficient;  // contraction coefficient times normalisation
};

struct SShell {
  Eigen::Vector3d center;
  std::vector<Primitive> prims;
};

inline std::vector<Primitive> sto3g_hydrogen() {
  constexpr double a[3] = {3.42525091, 0.62391373, 0.16885540};
  constexpr double d[3] = {0.15432897, 0.53532814, 0.44463454};
  std::vector<Primitive> out;
  for (int k = 0; k < 3; ++k)
    out.push_back({a[k], d[k] * std::pow(2.0 * a[k] / std::numbers::pi, 0.75)});
  return out;
}

struct PairData {
  double p, mu, k_ab;
  Eigen::Vector3d P;
};

inline PairData pair(double a, const Eigen::Vector3d& A, double b, const Eigen::Vector3d& B) {
  const double p = a + b, mu = a * b / p;
  return {p, mu, std::exp(-mu * (A - B).squaredNorm()), (a * A + b * B) / p};
}

template <typename F>
double contract2(const SShell& s1, const SShell& s2, F&& f) {
  double acc = 0;
  for (const auto& pa : s1.prims)
    for (const auto& pb : s2.prims)
      acc += pa.coefficient * pb.coefficient *
             f(pa.exponent, pb.exponent, pair(pa.exponent, s1.center, pb.exponent, s2.center));
  return acc;
}

inline double prim_overlap(const PairData& pd) {
  return std::pow(std::numbers::pi / pd.p, 1.5) * pd.k_ab;
}

}  // namespace detail

/// Atomic-orbital integrals over s-type contracted shells.
struct AOIntegrals {
  Eigen::MatrixXd S, T, V;
  ERITensor eri;
  std::array<Eigen::MatrixXd, 3> r;       // <a|r_k|b>
  std::array<Eigen::MatrixXd, 6> rr;      // <a|r_i r_j|b>, kQuadComponents order
};

inline AOIntegrals compute_ao_integrals(const std::vector<detail::SShell>& shells,
                                        const Geometry& geom) {
  using namespace detail;
  const auto n = static_cast<Eigen::Index>(shells.size());
  AOIntegrals ao;
  ao.S = ao.T = ao.V = Eigen::MatrixXd::Zero(n, n);
  for (auto& m : ao.r) m = Eigen::MatrixXd::Zero(n, n);
  for (auto& m : ao.rr) m = Eigen::MatrixXd::Zero(n, n);
  ao.eri = ERITensor(shells.size());
  const double pi = std::numbers::pi;

  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& A = shells[i].center;
      const auto& B = shells[j].center;
      ao.S(i, j) = contract2(shells[i], shells[j],
                             [](double, double, const PairData& pd) { return prim_overlap(pd); });
      ao.T(i, j) = contract2(shells[i], shells[j], [&](double, double, const PairData& pd) {
        const double r2 = (A - B).squaredNorm();
        return pd.mu * (3.0 - 2.0 * pd.mu * r2) * prim_overlap(pd);
      });
      ao.V(i, j) = contract2(shells[i], shells[j], [&](double, double, const PairData& pd) {
        double v = 0;
        for (const auto& atom : geom.atoms)
          v -= 2.0 * pi / pd.p * atom.charge * pd.k_ab *
               boys_f0(pd.p * (pd.P - atom.position).squaredNorm());
        return v;
      });
      for (int k = 0; k < 3; ++k)
        ao.r[k](i, j) = contract2(shells[i], shells[j], [&](double, double, const PairData& pd) {
          return prim_overlap(pd) * pd.P[k];
        });
      for (std::size_t c = 0; c < kQuadComponents.size(); ++c) {
        const auto [u, v] = kQuadComponents[c];
        ao.rr[c](i, j) = contract2(shells[i], shells[j], [&](double, double, const PairData& pd) {
          const double delta = u == v ? 0.5 / pd.p : 0.0;
          return prim_overlap(pd) * (pd.P[u] * pd.P[v] + delta);
        });
      }
    }

  for (std::size_t a = 0; a < shells.size(); ++a)
    for (std::size_t b = 0; b <= a; ++b)
      for (std::size_t c = 0; c < shells.size(); ++c)
        for (std::size_t d = 0; d <= c; ++d) {
          if (a * (a + 1) / 2 + b < c * (c + 1) / 2 + d) continue;
          double acc = 0;
          for (const auto& pa : shells[a].prims)
            for (const auto& pb : shells[b].prims) {
              const auto ab = pair(pa.exponent, shells[a].center, pb.exponent, shells[b].center);
              for (const auto& pc : shells[c].prims)
                for (const auto& pd : shells[d].prims) {
                  const auto cd = pair(pc.exponent, shells[c].center, pd.exponent, shells[d].center);
                  const double pq = ab.p + cd.p;
                  const double val = 2.0 * std::pow(pi, 2.5) / (ab.p * cd.p * std::sqrt(pq)) *
                                     ab.k_ab * cd.k_ab *
                                     boys_f0(ab.p * cd.p / pq * (ab.P - cd.P).squaredNorm());
                  acc += pa.coefficient * pb.coefficient * pc.coefficient * pd.coefficient * val;
                }
            }
          ao.eri.set_symmetric(a, b, c, d, acc);
        }
  return ao;
}

// --- restricted Hartree-Fock --------------------------------------------------

struct ScfOptions {
  double energy_tol = 1e-10;
  double density_rms_tol = 1e-8;
  int max_cycles = 200;
};

struct ScfResult {
  double energy = 0;  // total, including nuclear repulsion
  Eigen::MatrixXd coefficients;
  Eigen::VectorXd orbital_energies;
  Eigen::MatrixXd density;  // closed-shell D = 2 C_occ C_occ^T
  std::vector<double> energy_history;
  double orbital_gradient = 0;
  int cycles = 0;
};

inline double nuclear_repulsion(const Geometry& geom) {
  double e = 0;
  for (std::size_t i = 0; i < geom.atoms.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double r = (geom.atoms[i].position - geom.atoms[j].position).norm();
      if (r < 1e-8) throw std::invalid_argument("coincident nuclei");
      e += geom.atoms[i].charge * geom.atoms[j].charge / r;
    }
  return e;
}

namespace detail {
inline Eigen::MatrixXd fock(const Eigen::MatrixXd& hcore, const ERITensor& eri,
                            const Eigen::MatrixXd& D) {
  const auto n = hcore.rows();
  Eigen::MatrixXd F = hcore;
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index v = 0; v < n; ++v)
      for (Eigen::Index l = 0; l < n; ++l)
        for (Eigen::Index s = 0; s < n; ++s)
          F(m, v) += D(l, s) * (eri(m, v, l, s) - 0.5 * eri(m, l, v, s));
  return F;
}

/// Makes the largest-magnitude entry of every column positive.
inline void fix_mo_signs(Eigen::MatrixXd& C) {
  for (Eigen::Index k = 0; k < C.cols(); ++k) {
    Eigen::Index imax = 0;
    C.col(k).cwiseAbs().maxCoeff(&imax);
    if (C(imax, k) < 0) C.col(k) *= -1.0;
  }
}
}  // namespace detail

inline ScfResult run_rhf(const AOIntegrals& ao, double e_nuc, std::size_t n_occ,
                         const ScfOptions& opt = {}) {
  const Eigen::MatrixXd hcore = ao.T + ao.V;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  auto diagonalize = [&](const Eigen::MatrixXd& F, ScfResult& r) {
    solver.compute(F, ao.S);
    r.coefficients = solver.eigenvectors();
    detail::fix_mo_signs(r.coefficients);
    r.orbital_energies = solver.eigenvalues();
    const auto Cocc = r.coefficients.leftCols(static_cast<Eigen::Index>(n_occ));
    r.density = 2.0 * Cocc * Cocc.transpose();
  };

  ScfResult r;
  diagonalize(hcore, r);
  double e_prev = 0;
  for (int cycle = 1; cycle <= opt.max_cycles; ++cycle) {
    const Eigen::MatrixXd F = detail::fock(hcore, ao.eri, r.density);
    const double e = 0.5 * (r.density.cwiseProduct(hcore + F)).sum() + e_nuc;
    r.energy_history.push_back(e);
    const Eigen::MatrixXd D_old = r.density;
    diagonalize(F, r);
    const double rms = std::sqrt((r.density - D_old).squaredNorm() / double(D_old.size()));
    r.cycles = cycle;
    if (cycle > 1 && std::abs(e - e_prev) < opt.energy_tol && rms < opt.density_rms_tol) {
      const Eigen::MatrixXd Fc = detail::fock(hcore, ao.eri, r.density);
      r.energy = 0.5 * (r.density.cwiseProduct(hcore + Fc)).sum() + e_nuc;
      r.orbital_gradient = (Fc * r.density * ao.S - ao.S * r.density * Fc).norm();
      return r;
    }
    e_prev = e;
  }
  throw std::runtime_error("RHF did not converge in " + std::to_string(opt.max_cycles) +
                           " cycles");
}

inline Eigen::MatrixXd transform_one_body(const Eigen::MatrixXd& ao, const Eigen::MatrixXd& C) {
  return C.transpose() * ao * C;
}

inline ERITensor transform_two_body(const ERITensor& ao, const Eigen::MatrixXd& C) {
  const std::size_t n = ao.n();
  ERITensor t1(n), t2(n);
  // four quarter transformations
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = 0; s < n; ++s) {
          double acc = 0;
          for (std::size_t p = 0; p < n; ++p) acc += C(p, i) * ao(p, q, r, s);
          t1.at(i, q, r, s) = acc;
        }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = 0; s < n; ++s) {
          double acc = 0;
          for (std::size_t q = 0; q < n; ++q) acc += C(q, j) * t1(i, q, r, s);
          t2.at(i, j, r, s) = acc;
        }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t s = 0; s < n; ++s) {
          double acc = 0;
          for (std::size_t r = 0; r < n; ++r) acc += C(r, k) * t2(i, j, r, s);
          t1.at(i, j, k, s) = acc;
        }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
          double acc = 0;
          for (std::size_t s = 0; s < n; ++s) acc += C(s, l) * t1(i, j, k, s);
          t2.at(i, j, k, l) = acc;
        }
  return t2;
}

struct MolecularSystem {
  IntegralSet integrals;
  ScfResult scf;
};

/// STO-3G H2: AO integrals, restricted HF, and the MO-basis integral set.
inline MolecularSystem compute_sto3g_h2(const Geometry& geom, const ScfOptions& opt = {}) {
  geom.validate();
  if (geom.atoms.size() != 2 || geom.atoms[0].charge != 1 || geom.atoms[1].charge != 1)
    throw std::invalid_argument("compute_sto3g_h2: expected exactly two hydrogen atoms");
  const double e_nuc = nuclear_repulsion(geom);

  std::vector<detail::SShell> shells;
  for (const auto& a : geom.atoms) shells.push_back({a.position, detail::sto3g_hydrogen()});
  const AOIntegrals ao = compute_ao_integrals(shells, geom);

  MolecularSystem sys;
  sys.scf = run_rhf(ao, e_nuc, 1, opt);
  const auto& C = sys.scf.coefficients;

  IntegralSet& I = sys.integrals;
  I.n_spatial = shells.size();
  I.h = transform_one_body(ao.T + ao.V, C);
  I.g = transform_two_body(ao.eri, C);
  for (int k = 0; k < 3; ++k) I.dip[k] = -transform_one_body(ao.r[k], C);
  std::array<Eigen::MatrixXd, 6> quad;
  for (std::size_t c = 0; c < quad.size(); ++c) quad[c] = transform_one_body(ao.rr[c], C);
  I.quad = quad;
  I.e_nuc = e_nuc;
  for (const auto& a : geom.atoms) I.d_nuc += a.charge * a.position;
  I.mo_energies.assign(sys.scf.orbital_energies.data(),
                       sys.scf.orbital_energies.data() + sys.scf.orbital_energies.size());
  I.occupied = {0};
  return sys;
}

// --- QED-HF reference -----------------------------------------------------------

/// lambda . d as an MO matrix.
inline Eigen::MatrixXd coupled_dipole(const IntegralSet& ints, const Eigen::Vector3d& lambda) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ints.h.rows(), ints.h.cols());
  for (int k = 0; k < 3; ++k)
    if (lambda[k] != 0.0) m += lambda[k] * ints.dip[k];
  return m;
}

/// One-electron matrix of (lambda . r)^2. Uses the second moments when
/// available, otherwise the in-basis product (lambda.d)^2.
inline Eigen::MatrixXd coupled_second_moment(const IntegralSet& ints,
                                             const Eigen::Vector3d& lambda) {
  if (!ints.quad) {
    const Eigen::MatrixXd ld = coupled_dipole(ints, lambda);
    return ld * ld;
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ints.h.rows(), ints.h.cols());
  for (std::size_t c = 0; c < kQuadComponents.size(); ++c) {
    const auto [u, v] = kQuadComponents[c];
    const double w = lambda[u] * lambda[v] * (u == v ? 1.0 : 2.0);
    if (w != 0.0) m += w * (*ints.quad)[c];
  }
  return m;
}

struct QedHfReference {
  double energy = 0;       // <0e 0ph| H |0e 0ph>
  double hf_energy = 0;    // plain restricted HF part
  double dse_energy = 0;   // mean-field dipole self-energy
  Eigen::Vector3d d_expectation = Eigen::Vector3d::Zero();
};

inline QedHfReference qed_hf_reference(const IntegralSet& ints, const CavityParams& cav) {
  ints.validate();
  cav.validate();
  QedHfReference ref;
  double e = ints.e_nuc;
  for (auto i : ints.occupied) {
    e += 2.0 * ints.h(i, i);
    for (auto j : ints.occupied) e += 2.0 * ints.g(i, i, j, j) - ints.g(i, j, j, i);
  }
  ref.hf_energy = e;

  Eigen::Vector3d d_el = Eigen::Vector3d::Zero();
  for (int k = 0; k < 3; ++k)
    for (auto i : ints.occupied) d_el[k] += 2.0 * ints.dip[k](i, i);
  ref.d_expectation = ints.d_nuc + d_el;

  // <(l.dd)^2>/2 = 1/2 [sum_i Q_ii - sum_ij(same spin) (l.d)_ij^2]
  const Eigen::MatrixXd q = coupled_second_moment(ints, cav.lambda);
  const Eigen::MatrixXd ld = coupled_dipole(ints, cav.lambda);
  double dse = 0;
  for (auto i : ints.occupied) {
    dse += 2.0 * q(i, i);
    for (auto j : ints.occupied) dse -= 2.0 * ld(i, j) * ld(i, j);
  }
  ref.dse_energy = 0.5 * dse;
  ref.energy = ref.hf_energy + ref.dse_energy;
  return ref;
}

// --- integral file ----------------------------------------------------------------

namespace detail {
inline const char* kDipSections[3] = {"dip_x", "dip_y", "dip_z"};
inline const char* kQuadSections[6] = {"quad_xx", "quad_yy", "quad_zz",
                                        "quad_xy", "quad_xz", "quad_yz"};

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_matrix(std::ostream& os, const char* name, const Eigen::MatrixXd& m) {
  os << '[' << name << "]\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i; j < m.cols(); ++j)
      os << i << ' ' << j << ' ' << fmt17(m(i, j)) << '\n';
}
}  // namespace detail

inline void save_integrals(std::ostream& os, const IntegralSet& ints, const CavityParams& cav) {
  using detail::fmt17;
  os << "# polaritonic integral file\n[meta]\n";
  os << "n_spatial " << ints.n_spatial << "\nordering chemist\nunits hartree_bohr\n";
  detail::write_matrix(os, "h", ints.h);
  os << "[g]\n";
  const std::size_t n = ints.n_spatial;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q <= p; ++q)
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = 0; s <= r; ++s) {
          if (p * (p + 1) / 2 + q < r * (r + 1) / 2 + s) continue;
          os << p << ' ' << q << ' ' << r << ' ' << s << ' ' << fmt17(ints.g(p, q, r, s)) << '\n';
        }
  for (int k = 0; k < 3; ++k) detail::write_matrix(os, detail::kDipSections[k], ints.dip[k]);
  if (ints.quad)
    for (int c = 0; c < 6; ++c) detail::write_matrix(os, detail::kQuadSections[c], (*ints.quad)[c]);
  os << "[scalars]\ne_nuc " << fmt17(ints.e_nuc) << "\nd_nuc " << fmt17(ints.d_nuc[0]) << ' '
     << fmt17(ints.d_nuc[1]) << ' ' << fmt17(ints.d_nuc[2]) << "\nmo_energies";
  for (double e : ints.mo_energies) os << ' ' << fmt17(e);
  os << "\noccupation";
  for (auto i : ints.occupied) os << ' ' << i;
  os << "\n[cavity]\nomega_hartree " << fmt17(cav.omega) << "\nlambda_x " << fmt17(cav.lambda[0])
     << "\nlambda_y " << fmt17(cav.lambda[1]) << "\nlambda_z " << fmt17(cav.lambda[2])
     << "\nn_photon_max " << cav.n_photon_max << '\n';
}

inline void save_integrals(const std::string& path, const IntegralSet& ints,
                           const CavityParams& cav) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_integrals: cannot open " + path);
  save_integrals(os, ints, cav);
}

class IntegralParseError : public std::runtime_error {
 public:
  IntegralParseError(int line, const std::string& what)
      : std::runtime_error("integral file line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

inline std::pair<IntegralSet, CavityParams> load_integrals(std::istream& is) {
  IntegralSet ints;
  CavityParams cav;
  std::string section, line;
  int lineno = 0;
  bool have_quad = false;
  std::array<Eigen::MatrixXd, 6> quad;
  std::map<std::string, bool> seen;
  constexpr double kConflictTol = 1e-10;

  auto need_n = [&](int ln) {
    if (ints.n_spatial == 0) throw IntegralParseError(ln, "[meta] n_spatial must come first");
  };
  auto set_sym = [&](Eigen::MatrixXd& m, std::istringstream& ls, int ln) {
    need_n(ln);
    long i, j;
    double v;
    if (!(ls >> i >> j >> v)) throw IntegralParseError(ln, "expected 'i j value'");
    const long n = static_cast<long>(ints.n_spatial);
    if (i < 0 || j < 0 || i >= n || j >= n) throw IntegralParseError(ln, "index out of range");
    for (auto [a, b] : {std::pair{i, j}, std::pair{j, i}}) {
      double& slot = m(a, b);
      if (!std::isnan(slot) && std::abs(slot - v) > kConflictTol)
        throw IntegralParseError(ln, "asymmetric matrix element (" + std::to_string(i) + "," +
                                         std::to_string(j) + ")");
      slot = v;
    }
  };
  auto nan_matrix = [&] {
    const auto n = static_cast<Eigen::Index>(ints.n_spatial);
    return Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  };

  std::vector<char> g_set;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string::npos) throw IntegralParseError(lineno, "unterminated section");
      section = line.substr(first + 1, close - first - 1);
      static const std::vector<std::string> known = {
          "meta",  "h",       "g",       "dip_x",   "dip_y",   "dip_z",   "quad_xx",
          "quad_yy", "quad_zz", "quad_xy", "quad_xz", "quad_yz", "scalars", "cavity"};
      if (std::find(known.begin(), known.end(), section) == known.end())
        throw IntegralParseError(lineno, "unknown section [" + section + "]");
      if (section != "meta") need_n(lineno);
      seen[section] = true;
      if (section.rfind("quad_", 0) == 0) have_quad = true;
      continue;
    }
    std::istringstream ls(line);
    if (section.empty()) throw IntegralParseError(lineno, "data outside of any section");
    if (section == "meta") {
      std::string key, val;
      if (!(ls >> key >> val)) throw IntegralParseError(lineno, "expected 'key value'");
      if (key == "n_spatial") {
        const long n = std::stol(val);
        if (n <= 0) throw IntegralParseError(lineno, "n_spatial must be positive");
        ints.n_spatial = static_cast<std::size_t>(n);
        const auto ni = static_cast<Eigen::Index>(n);
        ints.h = Eigen::MatrixXd::Constant(ni, ni, std::numeric_limits<double>::quiet_NaN());
        for (auto& d : ints.dip) d = nan_matrix();
        for (auto& q : quad) q = nan_matrix();
        ints.g = ERITensor(ints.n_spatial);
        g_set.assign(ints.n_spatial * ints.n_spatial * ints.n_spatial * ints.n_spatial, 0);
      } else if (key == "ordering") {
        if (val != "chemist") throw IntegralParseError(lineno, "only chemist ordering supported");
      } else if (key == "units") {
        if (val != "hartree_bohr") throw IntegralParseError(lineno, "units must be hartree_bohr");
      } else {
        throw IntegralParseError(lineno, "unknown meta field '" + key + "'");
      }
    } else if (section == "h") {
      set_sym(ints.h, ls, lineno);
    } else if (section.rfind("dip_", 0) == 0) {
      set_sym(ints.dip[section[4] - 'x'], ls, lineno);
    } else if (section.rfind("quad_", 0) == 0) {
      int c = 0;
      while (detail::kQuadSections[c] != section) ++c;
      set_sym(quad[c], ls, lineno);
    } else if (section == "g") {
      long p, q, r, s;
      double v;
      if (!(ls >> p >> q >> r >> s >> v)) throw IntegralParseError(lineno, "expected 'p q r s value'");
      const long n = static_cast<long>(ints.n_spatial);
      for (long x : {p, q, r, s})
        if (x < 0 || x >= n) throw IntegralParseError(lineno, "index out of range");
      const std::size_t N = ints.n_spatial;
      for (auto [a, b, c, d] : ERITensor::images(p, q, r, s)) {
        const std::size_t flat = ((a * N + b) * N + c) * N + d;
        if (g_set[flat] && std::abs(ints.g(a, b, c, d) - v) > kConflictTol)
          throw IntegralParseError(lineno, "two-electron element violates 8-fold symmetry");
        ints.g.at(a, b, c, d) = v;
        g_set[flat] = 1;
      }
    } else if (section == "scalars") {
      std::string key;
      ls >> key;
      if (key == "e_nuc") {
        if (!(ls >> ints.e_nuc)) throw IntegralParseError(lineno, "bad e_nuc");
      } else if (key == "d_nuc") {
        if (!(ls >> ints.d_nuc[0] >> ints.d_nuc[1] >> ints.d_nuc[2]))
          throw IntegralParseError(lineno, "bad d_nuc");
      } else if (key == "mo_energies") {
        double e;
        while (ls >> e) ints.mo_energies.push_back(e);
      } else if (key == "occupation") {
        long i;
        while (ls >> i) {
          if (i < 0 || i >= static_cast<long>(ints.n_spatial))
            throw IntegralParseError(lineno, "occupied orbital out of range");
          ints.occupied.push_back(static_cast<std::size_t>(i));
        }
      } else {
        throw IntegralParseError(lineno, "unknown scalar '" + key + "'");
      }
    } else if (section == "cavity") {
      std::string key;
      double v;
      if (!(ls >> key >> v)) throw IntegralParseError(lineno, "expected 'key value'");
      if (key == "omega_hartree") cav.omega = v;
      else if (key == "lambda_x") cav.lambda[0] = v;
      else if (key == "lambda_y") cav.lambda[1] = v;
      else if (key == "lambda_z") cav.lambda[2] = v;
      else if (key == "n_photon_max") cav.n_photon_max = static_cast<int>(v);
      else throw IntegralParseError(lineno, "unknown cavity field '" + key + "'");
    }
  }

  for (const char* s : {"meta", "h", "g", "scalars", "cavity"})
    if (!seen.count(s)) throw IntegralParseError(lineno, std::string("missing section [") + s + "]");
  if (ints.h.hasNaN()) throw IntegralParseError(lineno, "[h] incomplete");
  for (auto f : g_set)
    if (!f) throw IntegralParseError(lineno, "[g] incomplete");
  for (int k = 0; k < 3; ++k) {
    if (!seen.count(detail::kDipSections[k])) {
      ints.dip[k].setZero();
      ints.has_dip[k] = false;
    } else if (ints.dip[k].hasNaN()) throw IntegralParseError(lineno, "dipole section incomplete");
  }
  if (have_quad) {
    for (int c = 0; c < 6; ++c) {
      if (!seen.count(detail::kQuadSections[c])) quad[c].setZero();
      else if (quad[c].hasNaN()) throw IntegralParseError(lineno, "second-moment section incomplete");
    }
    ints.quad = quad;
  }
  if (ints.occupied.empty()) throw IntegralParseError(lineno, "no occupied orbitals given");
  try {
    ints.validate();
    cav.validate();
  } catch (const std::invalid_argument& e) {
    throw IntegralParseError(lineno, e.what());
  }
  return {std::move(ints), cav};
}

inline std::pair<IntegralSet, CavityParams> load_integrals(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_integrals: cannot open " + path);
  return load_integrals(is);
}

}  // namespace polariton
