#include "bloch/potential.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bloch/point_group.hpp"

namespace bloch {

namespace {

bool int_lex_less(const Eigen::Vector3i& a, const Eigen::Vector3i& b) {
  for (int i = 0; i < 3; ++i)
    if (a(i) != b(i)) return a(i) < b(i);
  return false;
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double symmetric_uniform(std::mt19937_64& rng, double amplitude) {
  return amplitude * (2.0 * unit_uniform(rng) - 1.0);
}

}  // namespace

std::vector<Eigen::Vector3i> orbit(const Eigen::Vector3i& m, const ReciprocalBasis& recip) {
  std::set<CoeffKey> seen;
  const Eigen::Vector3d q = recip.vector(m);
  for (const GroupElement& g : octahedral_group()) {
    Eigen::Vector3i image;
    if (!recip.try_coords(g.apply(q), image))
      throw std::invalid_argument("group does not preserve dual lattice");
    seen.insert(coeff_key(image));
  }
  std::vector<Eigen::Vector3i> out;
  for (const CoeffKey& k : seen) out.emplace_back(k[0], k[1], k[2]);
  std::sort(out.begin(), out.end(), int_lex_less);
  return out;
}

double InvariantPotential::coeff(const Eigen::Vector3i& m) const {
  auto it = coeffs.find(coeff_key(m));
  return it == coeffs.end() ? 0.0 : it->second;
}

double InvariantPotential::operator()(const Eigen::Vector3d& x) const {
  // With a symmetric real expansion the imaginary parts cancel pairwise.
  double v = 0.0;
  for (const auto& [key, value] : coeffs) {
    const Eigen::Vector3i m(key[0], key[1], key[2]);
    v += value * std::cos(recip.vector(m).dot(x));
  }
  return v;
}

std::vector<Eigen::Vector3i> InvariantPotential::orbit_reps() const {
  std::set<CoeffKey> reps;
  for (const auto& [key, value] : coeffs) {
    (void)value;
    const std::vector<Eigen::Vector3i> orb = orbit(Eigen::Vector3i(key[0], key[1], key[2]), recip);
    reps.insert(coeff_key(orb.front()));
  }
  std::vector<Eigen::Vector3i> out;
  for (const CoeffKey& k : reps) out.emplace_back(k[0], k[1], k[2]);
  std::sort(out.begin(), out.end(), int_lex_less);
  return out;
}

double InvariantPotential::sum_abs_coeff() const {
  double s = 0.0;
  for (const auto& [key, value] : coeffs) {
    (void)key;
    s += std::abs(value);
  }
  return s;
}

InvariantPotential from_orbits(const Lattice& lat, const std::map<CoeffKey, double>& rep_values) {
  InvariantPotential pot;
  pot.lattice = lat;
  pot.recip = dual_basis(lat);
  for (const auto& [key, value] : rep_values) {
    for (const Eigen::Vector3i& member : orbit(Eigen::Vector3i(key[0], key[1], key[2]), pot.recip)) {
      auto [it, inserted] = pot.coeffs.emplace(coeff_key(member), value);
      if (!inserted && std::abs(it->second - value) > 1e-12) {
        std::ostringstream os;
        os << "conflicting values on the orbit of (" << member(0) << "," << member(1) << ","
           << member(2) << "): " << it->second << " vs " << value;
        throw std::invalid_argument(os.str());
      }
    }
  }
  std::erase_if(pot.coeffs, [](const auto& kv) { return kv.second == 0.0; });
  return pot;
}

InvariantPotential symmetrize(const Lattice& lat, const std::map<CoeffKey, double>& raw) {
  InvariantPotential pot;
  pot.lattice = lat;
  pot.recip = dual_basis(lat);
  const std::vector<GroupElement>& group = octahedral_group();
  // New coefficient at g.m picks up (1/|G|) V_m from every g.
  for (const auto& [key, value] : raw) {
    const Eigen::Vector3d q = pot.recip.vector(Eigen::Vector3i(key[0], key[1], key[2]));
    for (const GroupElement& g : group) {
      Eigen::Vector3i image;
      if (!pot.recip.try_coords(g.apply(q), image))
        throw std::invalid_argument("group does not preserve dual lattice");
      pot.coeffs[coeff_key(image)] += value / static_cast<double>(group.size());
    }
  }
  std::erase_if(pot.coeffs, [](const auto& kv) { return std::abs(kv.second) < 1e-15; });
  return pot;
}

InvariantPotential random_invariant(std::uint64_t seed, const Lattice& lat, int n_orbits,
                                    double amplitude) {
  if (n_orbits < 0) throw std::invalid_argument("n_orbits must be nonnegative");
  const ReciprocalBasis recip = dual_basis(lat);

  // Enumerate whole orbits of dual vectors in growing balls until n_orbits of
  // them are available; orbits preserve |q|, so every ball holds whole orbits.
  struct Orbit {
    double norm2;
    Eigen::Vector3i rep;
    std::vector<Eigen::Vector3i> members;
  };
  std::vector<Orbit> orbits;
  double min_norm = recip.basis.colwise().norm().minCoeff();
  double radius = 2.0 * min_norm;
  while (true) {
    orbits.clear();
    std::set<CoeffKey> assigned;
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(recip.basis);
    const double sigma_min = svd.singularValues()(2);
    const int bound = static_cast<int>(std::ceil(radius / sigma_min)) + 1;
    std::vector<Eigen::Vector3i> inside;
    for (int a = -bound; a <= bound; ++a)
      for (int b = -bound; b <= bound; ++b)
        for (int c = -bound; c <= bound; ++c) {
          if (a == 0 && b == 0 && c == 0) continue;
          const Eigen::Vector3i m(a, b, c);
          if (recip.vector(m).norm() <= radius) inside.push_back(m);
        }
    std::sort(inside.begin(), inside.end(), int_lex_less);
    for (const Eigen::Vector3i& m : inside) {
      if (assigned.count(coeff_key(m))) continue;
      Orbit o;
      o.members = orbit(m, recip);
      o.rep = o.members.front();
      o.norm2 = recip.vector(o.rep).squaredNorm();
      for (const Eigen::Vector3i& mm : o.members) assigned.insert(coeff_key(mm));
      orbits.push_back(std::move(o));
    }
    if (static_cast<int>(orbits.size()) >= n_orbits) break;
    radius *= 1.5;
  }
  std::sort(orbits.begin(), orbits.end(), [](const Orbit& a, const Orbit& b) {
    if (std::abs(a.norm2 - b.norm2) > 1e-9) return a.norm2 < b.norm2;
    return int_lex_less(a.rep, b.rep);
  });
  orbits.resize(n_orbits);

  InvariantPotential pot;
  pot.lattice = lat;
  pot.recip = recip;
  pot.has_seed = true;
  pot.seed = seed;
  pot.n_orbits = n_orbits;
  pot.amplitude = amplitude;
  std::mt19937_64 rng(seed);
  const double v0 = symmetric_uniform(rng, amplitude);
  if (v0 != 0.0) pot.coeffs[{0, 0, 0}] = v0;
  for (const Orbit& o : orbits) {
    const double v = symmetric_uniform(rng, amplitude);
    if (v == 0.0) continue;
    for (const Eigen::Vector3i& m : o.members) pot.coeffs[coeff_key(m)] = v;
  }
  return pot;
}

}  // namespace bloch
