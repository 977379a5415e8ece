#include "bloch/point_group.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bloch {

namespace {

constexpr double kPi = std::numbers::pi;

void validate_signed_permutation(const Eigen::Matrix3i& m) {
  for (int i = 0; i < 3; ++i) {
    int row_nonzero = 0, col_nonzero = 0;
    for (int j = 0; j < 3; ++j) {
      const int a = m(i, j), b = m(j, i);
      if (a < -1 || a > 1 || b < -1 || b > 1)
        throw std::invalid_argument("group element entries must lie in {-1,0,1}");
      row_nonzero += (a != 0);
      col_nonzero += (b != 0);
    }
    if (row_nonzero != 1 || col_nonzero != 1)
      throw std::invalid_argument("group element must be a signed permutation matrix");
  }
  if (m.transpose() * m != Eigen::Matrix3i::Identity())
    throw std::invalid_argument("group element must be orthogonal");
}

long gcd_long(long a, long b) { return std::gcd(a, b); }

}  // namespace

GroupElement::GroupElement(const Eigen::Matrix3i& m) : mat(m) { validate_signed_permutation(m); }

GroupElement GroupElement::operator*(const GroupElement& other) const {
  GroupElement out;
  out.mat = mat * other.mat;
  return out;
}

GroupElement GroupElement::inverse() const {
  GroupElement out;
  out.mat = mat.transpose();
  return out;
}

GroupElement GroupElement::pow(int n) const {
  GroupElement out;
  if (n < 0) return inverse().pow(-n);
  for (int i = 0; i < n; ++i) out.mat = out.mat * mat;
  return out;
}

int GroupElement::order() const {
  GroupElement acc = *this;
  for (int n = 1; n <= 48; ++n) {
    if (acc.mat == Eigen::Matrix3i::Identity()) return n;
    acc.mat = acc.mat * mat;
  }
  throw std::logic_error("element order exceeds group order");
}

bool GroupElement::operator<(const GroupElement& other) const {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (mat(i, j) != other.mat(i, j)) return mat(i, j) < other.mat(i, j);
    }
  return false;
}

std::string GroupElement::str() const {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < 3; ++i) {
    os << "[" << mat(i, 0) << "," << mat(i, 1) << "," << mat(i, 2) << "]";
    if (i < 2) os << ",";
  }
  os << "]";
  return os.str();
}

GroupElement octa_r() {
  Eigen::Matrix3i m;
  m << 0, 0, 1,
       1, 0, 0,
       0, 1, 0;
  return GroupElement(m);
}

GroupElement octa_s() {
  Eigen::Matrix3i m;
  m << 0, 1, 0,
       1, 0, 0,
       0, 0, -1;
  return GroupElement(m);
}

GroupElement octa_f() { return GroupElement(Eigen::Matrix3i(-Eigen::Matrix3i::Identity())); }

GroupElement axis_flip(int axis) {
  if (axis < 0 || axis > 2) throw std::invalid_argument("axis must be 0, 1 or 2");
  Eigen::Matrix3i m = Eigen::Matrix3i::Identity();
  m(axis, axis) = -1;
  return GroupElement(m);
}

GroupElement double_flip(int axis_a, int axis_b) {
  if (axis_a == axis_b) throw std::invalid_argument("double_flip needs two distinct axes");
  Eigen::Matrix3i m = Eigen::Matrix3i::Identity();
  m(axis_a, axis_a) = -1;
  m(axis_b, axis_b) = -1;
  return GroupElement(m);
}

GroupElement octa_s0() {
  Eigen::Matrix3i m;
  m << 0, 1, 0,
       -1, 0, 0,
       0, 0, -1;
  return GroupElement(m);
}

const std::vector<GroupElement>& octahedral_group() {
  static const std::vector<GroupElement> group = [] {
    std::set<GroupElement> closure;
    std::vector<GroupElement> frontier = {GroupElement(), octa_r(), octa_s(), octa_f()};
    for (const GroupElement& g : frontier) closure.insert(g);
    while (!frontier.empty()) {
      std::vector<GroupElement> next;
      for (const GroupElement& a : frontier)
        for (const GroupElement& g : {octa_r(), octa_s(), octa_f()}) {
          GroupElement b = a * g;
          if (closure.insert(b).second) next.push_back(b);
        }
      frontier = std::move(next);
    }
    std::vector<GroupElement> out(closure.begin(), closure.end());
    if (out.size() != 48) throw std::logic_error("octahedral closure is not of order 48");
    return out;
  }();
  return group;
}

bool verify_lattice_invariance(const GroupElement& g, const Lattice& lat, double tol) {
  // g preserves the lattice iff B^-1 g B is an integer matrix.
  const Eigen::Matrix3d n = lat.basis.inverse() * g.dmat() * lat.basis;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (std::abs(n(i, j) - std::round(n(i, j))) > tol) return false;
  return true;
}

RootOfUnity RootOfUnity::unit(long p, long q) {
  if (q <= 0) throw std::invalid_argument("root of unity needs a positive order");
  p %= q;
  if (p < 0) p += q;
  const long g = gcd_long(p == 0 ? q : p, q);
  RootOfUnity r;
  r.p = p / g;
  r.q = q / g;
  if (r.p == 0) r.q = 1;
  return r;
}

RootOfUnity RootOfUnity::operator*(const RootOfUnity& o) const {
  const long l = std::lcm(q, o.q);
  return unit(p * (l / q) + o.p * (l / o.q), l);
}

RootOfUnity RootOfUnity::pow(long n) const {
  long pn = p * (n % q);
  return unit(pn, q);
}

RootOfUnity RootOfUnity::conj() const { return unit(-p, q); }

std::complex<double> RootOfUnity::value() const {
  // Exact values for the angles that actually occur keep downstream
  // cancellation tests crisp.
  if (q == 1) return {1.0, 0.0};
  if (q == 2) return {-1.0, 0.0};
  if (q == 4 && p == 1) return {0.0, 1.0};
  if (q == 4 && p == 3) return {0.0, -1.0};
  const double angle = 2.0 * kPi * static_cast<double>(p) / static_cast<double>(q);
  return {std::cos(angle), std::sin(angle)};
}

std::string RootOfUnity::str() const {
  if (q == 1) return "1";
  if (q == 2) return "-1";
  if (q == 4 && p == 1) return "i";
  if (q == 4 && p == 3) return "-i";
  return "e(" + std::to_string(p) + "/" + std::to_string(q) + ")";
}

RootOfUnity SectorLabel::char_at(const std::vector<int>& j) const {
  if (j.size() != omega.size()) throw std::invalid_argument("exponent tuple rank mismatch");
  RootOfUnity acc;
  for (size_t i = 0; i < omega.size(); ++i) acc = acc * omega[i].pow(j[i]);
  return acc;
}

std::string SectorLabel::str() const {
  std::string s = "(";
  for (size_t i = 0; i < omega.size(); ++i) {
    if (i) s += ",";
    s += omega[i].str();
  }
  return s + ")";
}

int AdmissibleSubgroup::element_index(const GroupElement& g) const {
  for (size_t i = 0; i < elements.size(); ++i)
    if (elements[i] == g) return static_cast<int>(i);
  return -1;
}

int AdmissibleSubgroup::sector_index(const SectorLabel& s) const {
  for (size_t i = 0; i < sectors.size(); ++i)
    if (sectors[i] == s) return static_cast<int>(i);
  return -1;
}

namespace {

std::vector<std::vector<int>> exponent_tuples(const std::vector<int>& orders) {
  std::vector<std::vector<int>> tuples = {{}};
  for (int n : orders) {
    std::vector<std::vector<int>> next;
    for (const auto& t : tuples)
      for (int v = 0; v < n; ++v) {
        auto u = t;
        u.push_back(v);
        next.push_back(std::move(u));
      }
    tuples = std::move(next);
  }
  return tuples;
}

bool same_point(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double tol = 1e-9) {
  return (a - b).lpNorm<Eigen::Infinity>() <= tol;
}

}  // namespace

AdmissibleSubgroup admissible_subgroup(const Lattice& lat, const Eigen::Vector3d& K,
                                       const std::vector<GroupElement>& generators) {
  if (generators.empty()) throw std::invalid_argument("admissible subgroup needs generators");
  AdmissibleSubgroup sub;
  sub.lattice = lat;
  sub.recip = dual_basis(lat);
  sub.K = K;
  sub.generators = generators;
  for (const GroupElement& g : generators) sub.orders.push_back(g.order());

  for (size_t a = 0; a < generators.size(); ++a)
    for (size_t b = a + 1; b < generators.size(); ++b)
      if (!(generators[a] * generators[b] == generators[b] * generators[a]))
        throw std::invalid_argument("admissibility failed: not abelian");

  sub.exponents = exponent_tuples(sub.orders);
  for (const auto& j : sub.exponents) {
    GroupElement g;
    for (size_t i = 0; i < generators.size(); ++i) g = g * generators[i].pow(j[i]);
    sub.elements.push_back(g);
  }
  for (size_t a = 0; a < sub.elements.size(); ++a)
    for (size_t b = a + 1; b < sub.elements.size(); ++b)
      if (sub.elements[a] == sub.elements[b])
        throw std::invalid_argument(
            "admissibility failed: generator exponents do not enumerate the subgroup");

  // Orbit of K must be the full multiplicity class, visited freely.
  const MomentumClass cls = k_class(K, sub.recip);
  if (static_cast<int>(sub.elements.size()) != cls.size())
    throw std::invalid_argument("admissibility failed: |G0| differs from |[K]|");
  std::vector<bool> hit(cls.members.size(), false);
  for (const GroupElement& g : sub.elements) {
    const Eigen::Vector3d image = g.apply(K);
    bool matched = false;
    for (size_t i = 0; i < cls.members.size(); ++i) {
      if (same_point(image, cls.members[i])) {
        if (hit[i]) throw std::invalid_argument("admissibility failed: action on the class is not free");
        hit[i] = true;
        matched = true;
        break;
      }
    }
    if (!matched)
      throw std::invalid_argument("admissibility failed: orbit does not equal the multiplicity class");
  }

  for (const GroupElement& g : sub.elements) sub.m_table.push_back(momentum_offset(g, K, sub.recip));

  // Characters: one root of unity per generator, enumerated like J.
  for (const auto& p : sub.exponents) {
    SectorLabel s;
    for (size_t i = 0; i < sub.orders.size(); ++i)
      s.omega.push_back(RootOfUnity::unit(p[i], sub.orders[i]));
    sub.sectors.push_back(std::move(s));
  }
  return sub;
}

AdmissibleSubgroup admissible_subgroup(const Lattice& lat, const Eigen::Vector3d& K) {
  const auto matches = [&K](double x, double y, double z) {
    return same_point(K, Eigen::Vector3d(x, y, z));
  };
  switch (lat.name) {
    case LatticeName::SimpleCubic:
      if (matches(kPi, kPi, kPi))
        return admissible_subgroup(lat, K, {axis_flip(0), axis_flip(1), axis_flip(2)});
      break;
    case LatticeName::BodyCenteredCubic:
      if (matches(kPi, kPi, kPi))
        return admissible_subgroup(lat, K, {double_flip(0, 2), double_flip(1, 2)});
      if (matches(0.0, 0.0, 2.0 * kPi)) return admissible_subgroup(lat, K, {octa_r(), octa_f()});
      break;
    case LatticeName::FaceCenteredCubic:
      if (matches(0.0, 2.0 * kPi, kPi)) return admissible_subgroup(lat, K, {octa_s0()});
      break;
    case LatticeName::Custom:
      break;
  }

  // Deterministic search: generator subsets of size 1..3 drawn, in
  // lexicographic order, from the elements that preserve the lattice and move
  // K within its own class; the first admissible candidate wins (every
  // admissible subgroup has the same order |[K]|).
  const ReciprocalBasis recip = dual_basis(lat);
  const size_t class_size = static_cast<size_t>(k_class(K, recip).size());
  std::vector<GroupElement> pool;
  Eigen::Vector3i scratch;
  for (const GroupElement& g : octahedral_group()) {
    if (g == GroupElement()) continue;
    if (!verify_lattice_invariance(g, lat)) continue;
    if (recip.try_coords(g.apply(K) - K, scratch)) pool.push_back(g);
  }
  const int n = static_cast<int>(pool.size());
  auto try_generators = [&](const std::vector<GroupElement>& gens)
      -> std::optional<AdmissibleSubgroup> {
    size_t product = 1;
    for (const GroupElement& g : gens) product *= static_cast<size_t>(g.order());
    if (product != class_size) return std::nullopt;
    try {
      return admissible_subgroup(lat, K, gens);
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  };
  for (int a = 0; a < n; ++a)
    if (auto s = try_generators({pool[a]})) return *s;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (auto s = try_generators({pool[a], pool[b]})) return *s;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c)
        if (auto s = try_generators({pool[a], pool[b], pool[c]})) return *s;
  throw std::runtime_error("no admissible subgroup found at this K");
}

Eigen::Vector3i momentum_offset(const GroupElement& g, const Eigen::Vector3d& K,
                                const ReciprocalBasis& recip) {
  Eigen::Vector3i m;
  if (!recip.try_coords(g.apply(K) - K, m))
    throw std::invalid_argument("A3 violated: image of K is not K + dual vector");
  return m;
}

Eigen::Vector3i act_on_planewave(const GroupElement& g, const Eigen::Vector3i& m,
                                 const Eigen::Vector3d& K, const ReciprocalBasis& recip) {
  Eigen::Vector3i out;
  if (!recip.try_coords(g.apply(K + recip.vector(m)) - K, out))
    throw std::runtime_error("not K-invariant");
  return out;
}

std::vector<GroupElement> k_invariant_elements(const Eigen::Vector3d& K,
                                               const ReciprocalBasis& recip) {
  std::vector<GroupElement> out;
  Eigen::Vector3i m;
  for (const GroupElement& g : octahedral_group())
    if (recip.try_coords(g.apply(K) - K, m)) out.push_back(g);
  return out;
}

std::vector<std::pair<Eigen::Vector3i, std::complex<double>>> symmetry_eigenvector(
    const AdmissibleSubgroup& sub, const SectorLabel& sector) {
  std::vector<std::pair<Eigen::Vector3i, std::complex<double>>> coeffs;
  const double norm = 1.0 / std::sqrt(static_cast<double>(sub.order()));
  for (size_t idx = 0; idx < sub.exponents.size(); ++idx) {
    const GroupElement ginv = sub.elements[idx].inverse();
    const Eigen::Vector3i m = momentum_offset(ginv, sub.K, sub.recip);
    coeffs.emplace_back(m, sector.at(sub.exponents[idx]) * norm);
  }
  return coeffs;
}

SectorLabel mapped_sector(const AdmissibleSubgroup& sub, const SectorLabel& sector,
                          const GroupElement& h) {
  SectorLabel out;
  const GroupElement hinv = h.inverse();
  for (const GroupElement& gen : sub.generators) {
    const GroupElement conj = hinv * gen * h;
    const int idx = sub.element_index(conj);
    if (idx < 0) throw std::invalid_argument("element does not normalize the subgroup");
    out.omega.push_back(sector.char_at(sub.exponents[idx]));
  }
  return out;
}

}  // namespace bloch
