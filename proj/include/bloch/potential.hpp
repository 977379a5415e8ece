#pragma once

// Octahedrally invariant trigonometric potentials on a Bravais lattice:
// finite Fourier expansions V(x) = sum_m V_m exp(i q_m . x) with real, even,
// fully symmetric coefficient sets, so that V is real-valued and invariant
// under the signed coordinate permutations.

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "bloch/lattice.hpp"

namespace bloch {

using CoeffKey = std::array<int, 3>;

inline CoeffKey coeff_key(const Eigen::Vector3i& m) { return {m(0), m(1), m(2)}; }

// Orbit of the dual vector with integer coordinates m under the full
// octahedral group, as lexicographically sorted unique integer triples.
// Throws std::invalid_argument if some group element maps q_m off the dual
// lattice (the group does not preserve it).
std::vector<Eigen::Vector3i> orbit(const Eigen::Vector3i& m, const ReciprocalBasis& recip);

struct InvariantPotential {
  Lattice lattice;
  ReciprocalBasis recip;
  // Full symmetric expansion, one entry per nonzero coefficient.
  std::map<CoeffKey, double> coeffs;

  // Provenance of random draws, kept so output files stay reproducible.
  bool has_seed = false;
  std::uint64_t seed = 0;
  int n_orbits = 0;
  double amplitude = 0.0;

  double coeff(const Eigen::Vector3i& m) const;
  double operator()(const Eigen::Vector3d& x) const;

  // Lexicographically smallest member of each orbit present in the expansion.
  std::vector<Eigen::Vector3i> orbit_reps() const;

  double sum_abs_coeff() const;
};

// Builds the invariant potential taking the given value on the whole orbit of
// each listed representative (later entries of the same orbit must agree).
InvariantPotential from_orbits(const Lattice& lat,
                               const std::map<CoeffKey, double>& rep_values);

// Orbit-average projection of an arbitrary real expansion onto the invariant
// ones; idempotent, kills odd parts.
InvariantPotential symmetrize(const Lattice& lat, const std::map<CoeffKey, double>& raw);

// Deterministic random invariant potential: the constant term is drawn first,
// then one uniform value per orbit, with orbits ordered by (|q|^2, lex rep).
// All values are uniform on [-amplitude, amplitude] via the top-53-bit map
// u = (x >> 11) * 2^-53 of std::mt19937_64.
InvariantPotential random_invariant(std::uint64_t seed, const Lattice& lat, int n_orbits,
                                    double amplitude);

}  // namespace bloch
