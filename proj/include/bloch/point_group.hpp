#pragma once
// The octahedral point group O_h (order 48, signed permutation matrices), its
// action on plane waves e^{i(K + m.k).x} via (g f)(x) = f(g^T x), and the
// abelian symmetry subgroups used to block-diagonalize Bloch Hamiltonians at
// high-symmetry quasi-momenta.
//
// A subgroup G0 <= O_h is admissible at K when it is abelian, its orbit of K
// is exactly the multiplicity class [K], and the action on [K] is free
// (|G0| = |[K]|). Each such G0 is presented by generators g_1..g_l of orders
// n_1..n_l with exponent tuples j in J = prod {0..n_i-1} (zero-based here),
// element table g^j = prod g_i^{j_i}, and momentum offsets m(j) defined by
// g^j K = K + m(j).k. Characters omega in U = prod U_{n_i} label the isotypic
// sectors; the sector eigenvectors are
//   phi_omega = |G0|^{-1/2} sum_j omega^j e^{i (g^{-j} K).x}.

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

#include "bloch/lattice.hpp"

namespace bloch {

// An element of O_h: an integer signed-permutation matrix, validated on
// construction (each row and column holds exactly one entry from {-1,+1},
// M^T M = I in exact integer arithmetic).
struct GroupElement {
  Eigen::Matrix3i mat = Eigen::Matrix3i::Identity();

  GroupElement() = default;
  explicit GroupElement(const Eigen::Matrix3i& m);

  GroupElement operator*(const GroupElement& other) const;
  GroupElement inverse() const;  // = transpose for orthogonal integer matrices
  GroupElement pow(int n) const;
  int order() const;

  Eigen::Matrix3d dmat() const { return mat.cast<double>(); }
  Eigen::Vector3d apply(const Eigen::Vector3d& x) const { return dmat() * x; }

  bool operator==(const GroupElement& other) const { return mat == other.mat; }
  bool operator<(const GroupElement& other) const;  // lexicographic on entries
  std::string str() const;
};

// Named elements. r cycles the axes e1->e2->e3->e1, s swaps x,y and flips z,
// f is the inversion -I; f1,f2,f3 flip one axis, f12 etc. flip two; s0 is the
// order-4 rotoreflection [[0,1,0],[-1,0,0],[0,0,-1]].
GroupElement octa_r();
GroupElement octa_s();
GroupElement octa_f();
GroupElement axis_flip(int axis);               // axis in {0,1,2}
GroupElement double_flip(int axis_a, int axis_b);
GroupElement octa_s0();

// The full group as the closure of {r, s, f}; exactly 48 elements, cached,
// in deterministic (lexicographic) order.
const std::vector<GroupElement>& octahedral_group();

// True when g maps the lattice onto itself, i.e. g*B = B*N for an integer
// matrix N (entries integral to tol).
bool verify_lattice_invariance(const GroupElement& g, const Lattice& lat, double tol = 1e-12);

// Root of unity exp(2*pi*i*p/q), kept as a reduced rational angle so products
// and equality tests stay exact; complex values appear only via value().
struct RootOfUnity {
  long p = 0;
  long q = 1;

  static RootOfUnity unit(long p, long q);  // normalizes to 0 <= p < q, reduced
  RootOfUnity operator*(const RootOfUnity& o) const;
  RootOfUnity pow(long n) const;
  RootOfUnity conj() const;
  std::complex<double> value() const;
  bool is_one() const { return p == 0; }
  bool operator==(const RootOfUnity& o) const { return p == o.p && q == o.q; }
  std::string str() const;
};

// A character of G0: one root of unity per generator.
struct SectorLabel {
  std::vector<RootOfUnity> omega;

  // omega^j for an exponent tuple j (rational-angle arithmetic throughout).
  RootOfUnity char_at(const std::vector<int>& j) const;
  std::complex<double> at(const std::vector<int>& j) const { return char_at(j).value(); }
  bool operator==(const SectorLabel& o) const { return omega == o.omega; }
  std::string str() const;
};

// An admissible abelian subgroup at K with all derived tables precomputed.
// `exponents` enumerates J row-major with the last generator index fastest;
// `elements`, `m_table` and the character table are aligned with it.
struct AdmissibleSubgroup {
  Lattice lattice;
  ReciprocalBasis recip;
  Eigen::Vector3d K = Eigen::Vector3d::Zero();
  std::vector<GroupElement> generators;
  std::vector<int> orders;
  std::vector<std::vector<int>> exponents;
  std::vector<GroupElement> elements;
  std::vector<Eigen::Vector3i> m_table;  // m(j): g^j K = K + m(j).k
  std::vector<SectorLabel> sectors;      // all of U, enumerated like J

  int order() const { return static_cast<int>(elements.size()); }
  // Index of an element in `elements`; -1 if absent.
  int element_index(const GroupElement& g) const;
  int sector_index(const SectorLabel& s) const;
};

// Admissible subgroup with explicit generators; verifies admissibility and
// throws std::invalid_argument naming the failed condition ("not abelian",
// "orbit does not equal the multiplicity class", "action on the class is not
// free", "generator exponents do not enumerate the subgroup").
AdmissibleSubgroup admissible_subgroup(const Lattice& lat, const Eigen::Vector3d& K,
                                       const std::vector<GroupElement>& generators);

// Preset generators at the named points (sc R: <f1,f2,f3>; bcc P: <f13,f23>;
// bcc H: <r,f>; fcc W: <s0>). For other (lattice, K) pairs, searches closures
// of element subsets of size <= 3 in deterministic order and returns the
// smallest admissible subgroup; throws std::runtime_error if none exists.
AdmissibleSubgroup admissible_subgroup(const Lattice& lat, const Eigen::Vector3d& K);

// Solves g K = K + m.k for integer m. Throws std::invalid_argument
// ("A3 violated: image of K is not K + dual vector") when no integer solution
// exists.
Eigen::Vector3i momentum_offset(const GroupElement& g, const Eigen::Vector3d& K,
                                const ReciprocalBasis& recip);

// Action on plane-wave indices: the index m' with g(K + m.k) = K + m'.k.
// Throws std::runtime_error("not K-invariant") when the image leaves K + dual.
Eigen::Vector3i act_on_planewave(const GroupElement& g, const Eigen::Vector3i& m,
                                 const Eigen::Vector3d& K, const ReciprocalBasis& recip);

// All elements of O_h that fix K modulo the dual lattice (the subgroup for
// which act_on_planewave is total).
std::vector<GroupElement> k_invariant_elements(const Eigen::Vector3d& K,
                                               const ReciprocalBasis& recip);

// Plane-wave coefficients of the sector eigenvector phi_omega: pairs
// (m, coefficient) with m the dual coordinates of g^{-j}K - K and coefficient
// omega^j / sqrt(|G0|), in J order.
std::vector<std::pair<Eigen::Vector3i, std::complex<double>>> symmetry_eigenvector(
    const AdmissibleSubgroup& sub, const SectorLabel& sector);

// Sector bookkeeping under conjugation: for h normalizing G0 and phi in the
// omega sector, h.phi lies in the sector omega'(g_i) = omega(h^-1 g_i h).
// Throws std::invalid_argument if h does not normalize G0.
SectorLabel mapped_sector(const AdmissibleSubgroup& sub, const SectorLabel& sector,
                          const GroupElement& h);

}  // namespace bloch
