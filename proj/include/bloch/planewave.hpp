#pragma once

// Plane-wave discretization of H_z = -Laplacian + z V on L^2_{K+kappa}:
// basis waves exp(i (K + m.k) . x), the kinetic part diagonal with entries
// |K + kappa + m.k|^2, the potential coupling indices through V_{m - m'}.
// At kappa = 0 the commuting symmetry subgroup splits the matrix into
// character sectors.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "bloch/lattice.hpp"
#include "bloch/point_group.hpp"
#include "bloch/potential.hpp"

namespace bloch {

struct PlaneWaveBasis {
  Lattice lattice;
  ReciprocalBasis recip;
  Eigen::Vector3d K;
  Eigen::Vector3d kappa;
  double cutoff = 0.0;
  std::vector<Eigen::Vector3i> indices;  // lexicographically sorted

  int size() const { return static_cast<int>(indices.size()); }
  int find(const Eigen::Vector3i& m) const;             // -1 when absent
  Eigen::Vector3d momentum(int i) const;                // K + kappa + m_i . k
};

// Enumerates m with |K + m.k|^2 <= cutoff (kappa never affects selection, so
// bases at nearby kappa agree index-for-index), then closes the set under the
// K-invariant octahedral elements to guard against boundary ties. A cutoff
// <= 0 requests the default 10 |K|^2. Throws when the cutoff excludes m = 0
// or the basis would exceed 20000 waves.
PlaneWaveBasis build_basis(const Lattice& lat, const Eigen::Vector3d& K,
                           const Eigen::Vector3d& kappa = Eigen::Vector3d::Zero(),
                           double cutoff = 0.0);

struct HamiltonianMatrix {
  PlaneWaveBasis basis;
  double z = 0.0;
  Eigen::MatrixXcd H;
};

HamiltonianMatrix build_hamiltonian(const PlaneWaveBasis& basis, const InvariantPotential& pot,
                                    double z);

struct EigenSystem {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXcd vectors; // columns, orthonormal
  double hnorm = 0.0;       // Frobenius norm of the input matrix
};

// Self-adjoint solve with a residual check |H V - V D| <= 1e-8 |H|_F and an
// orthonormality check on V.
EigenSystem eigensolve(const HamiltonianMatrix& ham);
EigenSystem eigensolve_matrix(const Eigen::MatrixXcd& H);

struct SectorBasis {
  SectorLabel sector;
  Eigen::MatrixXcd Q;  // orthonormal columns spanning the character sector
  int dim() const { return static_cast<int>(Q.cols()); }
};

// Orthonormal basis of the omega-sector, from the character projector
// P = (1/|G0|) sum_j conj(omega^j) [g^j]. Throws when the sector is empty at
// this cutoff.
SectorBasis sector_basis(const PlaneWaveBasis& basis, const AdmissibleSubgroup& sub,
                         const SectorLabel& sector);

// Permutation action of a K-invariant element on the basis: wave m goes to
// wave sigma(m) with K + sigma(m).k = g (K + m.k).
Eigen::MatrixXcd planewave_action(const GroupElement& g, const PlaneWaveBasis& basis);

struct SectorSpectrum {
  SectorLabel sector;
  int dim = 0;
  Eigen::VectorXd evals;
  Eigen::MatrixXcd evecs_pw;  // eigenvectors lifted to plane-wave coordinates
};

// Restriction of H to one sector; requires kappa = 0.
SectorSpectrum sector_restrict(const HamiltonianMatrix& ham, const AdmissibleSubgroup& sub,
                               const SectorLabel& sector);
SectorSpectrum sector_restrict(const HamiltonianMatrix& ham, const SectorBasis& sb);

struct Cluster {
  int lo = 0;                // first eigenvalue index in the cluster
  int hi = 0;                // one past the last
  double mean = 0.0;
  int multiplicity() const { return hi - lo; }
};

// Groups an ascending eigenvalue list into clusters separated by gaps larger
// than the threshold.
std::vector<Cluster> cluster_eigenvalues(const Eigen::VectorXd& evals, double gap_threshold);

inline double default_gap_threshold(double hnorm) {
  return std::max(1e-7, 1e-6 * hnorm);
}

struct DispersionResult {
  std::vector<Eigen::Vector3d> path;
  Eigen::MatrixXd bands;  // row = path point, column = band
};

// Lowest n_bands eigenvalues along a path of momenta, each with its own basis
// at K = p, kappa = 0. A cutoff <= 0 requests 10 max_p |p|^2.
DispersionResult dispersion_scan(const Lattice& lat, const InvariantPotential& pot, double z,
                                 const std::vector<Eigen::Vector3d>& path, int n_bands,
                                 double cutoff = 0.0, int threads = 1);

}  // namespace bloch
