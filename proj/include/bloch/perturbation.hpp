#pragma once

// Perturbation theory at a Brillouin-zone vertex: first-order sector slopes
// of the degenerate |K|^2 level, the induced splitting pattern, orthonormal
// bases of the surviving degenerate clusters at z > 0, gradient matrix
// elements between cluster states, and the classification of the effective
// dispersion (quadratic touching, valley, or three-fold conical point).

#include <array>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bloch/errors.hpp"
#include "bloch/planewave.hpp"
#include "bloch/point_group.hpp"
#include "bloch/potential.hpp"

namespace bloch {

// d/dz at z=0 of the sector eigenvalue branch through |K|^2:
// sum_j omega^j V_{m(j)}. The imaginary part must cancel for an invariant
// potential; a residue beyond 1e-12 (1 + sum |V|) throws.
double first_order_slope(const InvariantPotential& pot, const AdmissibleSubgroup& sub,
                         const SectorLabel& sector);

struct SlopeGroup {
  double slope = 0.0;        // group mean
  std::vector<int> sectors;  // indices into sub.sectors
};

struct SplittingTable {
  std::vector<double> slopes;     // aligned with sub.sectors
  std::vector<SlopeGroup> groups; // ascending slope
  std::vector<int> pattern() const;
};

SplittingTable splitting_table(const InvariantPotential& pot, const AdmissibleSubgroup& sub,
                               double tol = 1e-9);

// Whether the potential separates the slopes exactly as the vertex allows:
// at the named vertices the reference partition of sectors is known, and a
// generic potential must realize it with a margin.
struct GenericityReport {
  bool pass = false;
  bool has_reference = false;
  std::vector<std::vector<int>> expected;  // partitions as sector index lists
  std::vector<std::vector<int>> observed;
  double min_margin = 0.0;  // smallest slope distance between distinct groups
  std::string note;
};

GenericityReport genericity_check(const InvariantPotential& pot, const AdmissibleSubgroup& sub);

// Central finite difference of the sector eigenvalue nearest |K|^2, with a
// step-halving agreement guard (relative 1e-2, else throws
// "finite-difference unstable").
double numeric_slope(const InvariantPotential& pot, const AdmissibleSubgroup& sub,
                     const SectorLabel& sector, double h = 1e-4, double cutoff = 0.0);

// Orthonormal eigenbasis of one degenerate cluster at z > 0, one column per
// sector of the slope group, phases fixed by one of three conventions:
//   "generic"           largest-|coefficient| entry real positive
//                       (ties to the smallest basis index);
//   "rotation-triple"   three-fold clusters whose sectors are cycled by the
//                       coordinate rotation r: phi_2 = r phi_1, phi_3 = r phi_2;
//   "conjugation-pair"  two-fold clusters with conjugate characters:
//                       phi_2 = T phi_1, T the antiunitary f -> conj(f(-x)).
struct ClusterBasis {
  std::vector<SectorLabel> sectors;  // per column
  Eigen::VectorXd evals;             // per column
  Eigen::MatrixXcd vectors;          // plane-wave coordinates, orthonormal
  PlaneWaveBasis basis;
  double z = 0.0;
  double mu = 0.0;             // cluster mean
  double cluster_width = 0.0;
  double gap = 0.0;            // distance to the nearest outside eigenvalue
  std::string tag;             // convention used
};

// Locates the cluster of the full spectrum nearest the first-order
// prediction |K|^2 + z * slope and verifies its multiplicity equals the
// slope-group size (throws AnomalyError otherwise).
ClusterBasis degenerate_cluster_basis(const InvariantPotential& pot, const AdmissibleSubgroup& sub,
                                      double z, const std::vector<int>& group_sectors,
                                      double cutoff = 0.0);

// Gradient matrix elements G[a](j,l) = <phi_j, d_a phi_l>; each component is
// exactified to its anti-Hermitian part after a 1e-10 (1 + |K|) check.
struct GradientTable {
  Eigen::Vector3d K;
  std::array<Eigen::MatrixXcd, 3> G;
  Eigen::Vector3cd entry(int j, int l) const;
  double max_norm() const;  // max over all (j,l) of |G_{jl}|_2
};

GradientTable gradient_elements(const ClusterBasis& cb);

// First-order effective matrix M(kappa)_{jl} = -2i kappa . G_{jl} (Hermitian).
Eigen::MatrixXcd effective_matrix(const GradientTable& gt, const Eigen::Vector3d& kappa);

enum class SingularityType { Quadratic, Valley, Weyl3, Unclassified };

std::string to_string(SingularityType t);

struct Classification {
  SingularityType type = SingularityType::Unclassified;
  int multiplicity = 0;
  std::complex<double> alpha{0.0, 0.0};  // valley / three-fold coupling
  double velocity = 0.0;                 // valley: 2 |alpha|
  int axis = -1;                         // valley axis, -1 otherwise
  double max_gradient_norm = 0.0;
  double polynomial_rel_err = 0.0;       // three-fold characteristic check
  double im_alpha_cubed = 0.0;
  std::string detail;
};

// Conservative classification: a label is only assigned when its defining
// structure holds within tolerance; anything else stays Unclassified.
Classification classify(const ClusterBasis& cb, const GradientTable& gt);

// Largest relative error of mu^3 - 4|a|^2 |k|^2 mu + 16 Im(a^3) k1 k2 k3
// against the eigenvalues of M(kappa), over the given kappa list.
double weyl_polynomial_error(const GradientTable& gt, std::complex<double> alpha,
                             const std::vector<Eigen::Vector3d>& kappas);

// Deterministic unit directions from the Halton sequence in bases 2 and 3
// (theta = acos(1 - 2u), phi = 2 pi v), starting at index `start`.
std::vector<Eigen::Vector3d> halton_directions(int count, int start = 1);

// Empirical order of accuracy of the effective model: for every direction
// and magnitude |kappa| = |K| 10^{-3 + 0.375 i}, compare the full cluster
// eigenvalues near mu against mu + eig(M(kappa)); every surviving evaluation
// contributes one (log |kappa|, log residual) sample to the least-squares
// exponent. Evaluations whose window capture fails are excluded and counted;
// the per-magnitude worst residuals are kept as diagnostics.
struct FitPoint {
  double magnitude = 0.0;
  double worst_residual = 0.0;
  int directions_used = 0;
  bool excluded = false;  // no direction kept the cluster isolated
};

struct FitReport {
  double exponent = 0.0;
  std::vector<FitPoint> points;
  int excluded_evaluations = 0;  // (direction, magnitude) pairs dropped
};

FitReport validate_effective(const InvariantPotential& pot, const ClusterBasis& cb,
                             int directions = 20, int magnitudes = 5);

}  // namespace bloch
