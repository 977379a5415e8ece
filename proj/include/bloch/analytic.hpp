#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace bloch {

/// Monic polynomial a_0 + a_1 x + ... + a_{n-1} x^{n-1} + x^n over the complex
/// numbers.  Only the lower coefficients are stored; the leading 1 is implicit.
struct MonicPolynomial {
  Eigen::VectorXcd lower;

  int degree() const { return static_cast<int>(lower.size()); }

  /// Full ascending coefficient vector a_0..a_{n-1}, 1 (size degree()+1).
  Eigen::VectorXcd full() const;

  std::complex<double> eval(std::complex<double> x) const;

  static MonicPolynomial from_roots(const std::vector<std::complex<double>>& roots);
};

/// Derivative d/dx of a polynomial given by its full ascending coefficient
/// vector; the result drops one degree (derivative of a constant is the empty
/// vector).
Eigen::VectorXcd poly_derivative(const Eigen::VectorXcd& full);

/// Matrix of the linear map (Q_1..Q_m) -> sum_j A_j Q_j from the product of
/// the coefficient spaces of degree < n - deg A_j into polynomials of degree
/// < n, where n is the total degree sum.  Its rank equals n - deg gcd(A_j).
struct SylvesterBlock {
  std::vector<Eigen::VectorXcd> sources;  ///< full coefficient vectors
  int total_degree = 0;                   ///< n = sum of source degrees
  Eigen::MatrixXcd matrix;                ///< n rows, sum_j (n - deg A_j) columns
};

/// Assemble the generalized Sylvester block of two or more nonzero
/// polynomials, each given by its full ascending coefficient vector.
SylvesterBlock generalized_sylvester(const std::vector<Eigen::VectorXcd>& polys);

/// Number of singular values above rel_tol times the largest one.
/// rel_tol must lie in (0, 1e-3]; an all-zero or empty matrix has rank 0.
int numeric_rank(const Eigen::MatrixXcd& m, double rel_tol);

/// Root-multiplicity census of a monic polynomial: d[j] is the degree of
/// gcd(A, A', ..., A^(j)) (so d[0] = deg A), and rho[j-1] counts the roots of
/// multiplicity exactly j.  Sum of j * rho[j-1] equals the degree.
struct MultiplicityProfile {
  std::vector<int> d;
  std::vector<int> rho;
};

/// Compute the multiplicity profile through Sylvester-block ranks of the
/// derivative chain.  The rank of every block is certified by sweeping the
/// relative tolerance over 1e-8..1e-12; disagreement raises
/// "ill-conditioned profile".
MultiplicityProfile multiplicity_profile(const MonicPolynomial& a);

/// Extract the unique root (of the stated multiplicity) of A inside the circle
/// |x - center| = radius via the residue integral
///   (1 / 2 pi i m) * contour integral of x A'(x)/A(x) dx,
/// evaluated by trapezoid quadrature with node doubling from 256 until the
/// value moves by less than 1e-10.  The winding number of A along the contour
/// must equal the requested multiplicity, and |A| must exceed 1e-12 on the
/// contour nodes.  When several roots are enclosed the integral returns their
/// multiplicity-weighted centroid, so the winding check is what certifies the
/// "single root" reading of the result.
std::complex<double> residue_root(const MonicPolynomial& a, std::complex<double> center,
                                  double radius, int multiplicity);

/// Spectral (Riesz) projector of a square complex matrix onto the invariant
/// subspace for the eigenvalues inside the circle |x - center| = radius:
///   -(1 / 2 pi i) * contour integral of (T - x)^{-1} dx.
/// Node-doubling trapezoid quadrature; every eigenvalue must keep a distance
/// of at least 1e-8 from the contour ("contour grazes spectrum" otherwise).
Eigen::MatrixXcd riesz_projector(const Eigen::MatrixXcd& t, std::complex<double> center,
                                 double radius);

struct BranchPoint {
  double z = 0.0;
  double eigenvalue = 0.0;
  int multiplicity = 0;
};

struct Branch {
  int id = 0;
  int first_sample = 0;  ///< index into BranchTrace::grid of the first point
  std::vector<BranchPoint> points;
};

struct BranchAnomaly {
  double z = 0.0;          ///< located event position
  double resolution = 0.0; ///< half-width of the interval the event was pinned to
  std::string kind;        ///< "multiplicity change" or "crossing"
  std::string detail;
};

struct BranchTrace {
  std::vector<double> grid;
  std::vector<Branch> branches;
  std::vector<BranchAnomaly> anomalies;
};

/// Track the eigenvalue clusters of a Hermitian family z -> T(z) inside the
/// window [window_lo, window_hi] across an increasing sample grid.
///
/// Adjacent samples are linked by matching clusters of equal multiplicity,
/// using the first-order prediction mu + Tr(pi (T(z') - T(z)) pi)/m to pick
/// partners and the Kato criterion ||pi - pi'|| < 1 to certify continuity.
/// When a link cannot be certified the interval is bisected up to eight
/// times; a persistent failure is recorded as a "multiplicity change" anomaly
/// and the chains are reseeded on the far side.  Transversal crossings of
/// tracked branches between samples are located by sign-change bisection and
/// reported as "crossing" anomalies.  Events that coincide within the
/// refinement resolution are merged.
///
/// gap_threshold separates clusters; 0 selects max(1e-7, 1e-6 * ||T||_F)
/// per sample.
BranchTrace continue_branch(const std::function<Eigen::MatrixXcd(double)>& family,
                            const std::vector<double>& grid, double window_lo,
                            double window_hi, double gap_threshold = 0.0);

}  // namespace bloch
