#pragma once
// Real-space lattices, their duals, Brillouin zones (Voronoi cells of the dual
// lattice about the origin), and Laplacian multiplicity classes
//   [K] = { k' in K + Lambda* : |k'| = |K| }.
// The class size equals the multiplicity of |K|^2 as an eigenvalue of the
// Laplacian acting on the quasiperiodic space attached to K, which is what ties
// the polytope combinatorics below to band degeneracies.

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace bloch {

enum class LatticeName { SimpleCubic, BodyCenteredCubic, FaceCenteredCubic, Custom };

std::string to_string(LatticeName name);

// A rank-3 lattice given by its primitive vectors (columns of `basis`).
// The named constructors produce the three cubic lattices with the
// conventional unit-cube normalization:
//   sc : e1, e2, e3
//   bcc: (1,0,0), (0,1,0), (1/2,1/2,1/2)
//   fcc: (1/2,1/2,0), (-1/2,1/2,0), (0,-1/2,1/2)
struct Lattice {
  Eigen::Matrix3d basis = Eigen::Matrix3d::Identity();
  LatticeName name = LatticeName::Custom;

  static Lattice simple_cubic();
  static Lattice body_centered_cubic();
  static Lattice face_centered_cubic();
  static Lattice custom(const Eigen::Matrix3d& basis);
  // Accepts "sc", "bcc", "fcc" (case-insensitive); throws std::invalid_argument otherwise.
  static Lattice from_name(std::string_view name);
};

// Dual basis with the convention k_i . v_j = 2*pi*delta_ij. Columns of `basis`
// are k1,k2,k3; `inv` caches basis^-1 for integer-coordinate extraction.
struct ReciprocalBasis {
  Eigen::Matrix3d basis = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d inv = Eigen::Matrix3d::Identity();

  // The dual-lattice vector with integer coordinates m.
  Eigen::Vector3d vector(const Eigen::Vector3i& m) const { return basis * m.cast<double>(); }

  // Integer coordinates of q if q lies on the dual lattice (within tol of an
  // integer triple); returns false otherwise.
  bool try_coords(const Eigen::Vector3d& q, Eigen::Vector3i& out, double tol = 1e-9) const;
  // As above but throwing std::invalid_argument when q is off-lattice.
  Eigen::Vector3i coords(const Eigen::Vector3d& q, double tol = 1e-9) const;
};

// Computes the dual basis. Throws std::invalid_argument("degenerate lattice")
// when |det| < 1e-12.
ReciprocalBasis dual_basis(const Lattice& lat);

// One inequality x . g <= offset with offset = |g|^2/2: the perpendicular
// bisector constraint of the dual-lattice point g against the origin.
struct Halfspace {
  Eigen::Vector3d g;
  double offset = 0.0;
};

// First Brillouin zone as an H/V-polytope. `halfspaces` holds exactly the
// active facets in canonical (lexicographic-by-g) order; `faces[i]` lists the
// vertex indices lying on halfspaces[i] (ascending). Vertices are deduplicated
// at 1e-8 and sorted lexicographically, so equal inputs rebuild byte-identical
// zones.
struct BrillouinZone {
  ReciprocalBasis recip;
  std::vector<Halfspace> halfspaces;
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::vector<int>> faces;

  bool contains(const Eigen::Vector3d& x, double tol = 1e-9) const;
};

// Builds the Voronoi cell of the dual lattice about the origin from dual
// vectors of norm <= shell_radius (shell_radius <= 0 selects an automatic
// shell). The result is certified by re-deriving the facet set at twice the
// radius; a mismatch throws std::runtime_error("insufficient shell").
BrillouinZone brillouin_zone(const ReciprocalBasis& recip, double shell_radius = 0.0);

// The multiplicity class [K]: all k' = K + m.k on the dual-shifted sphere
// |k'| = |K| (within 1e-9). `offsets[i]` are the integer dual coordinates of
// members[i] - K; members are sorted lexicographically and always include K.
struct MomentumClass {
  Eigen::Vector3d K = Eigen::Vector3d::Zero();
  std::vector<Eigen::Vector3i> offsets;
  std::vector<Eigen::Vector3d> members;

  int size() const { return static_cast<int>(members.size()); }
  // Members as columns of a 3 x n matrix, in the stored order.
  Eigen::Matrix3Xd member_matrix() const;
};

MomentumClass k_class(const Eigen::Vector3d& K, const ReciprocalBasis& recip, double tol = 1e-9);

// Indices into bz.halfspaces of the facets whose planes pass through K
// (|K.g - offset| <= tol). Throws std::invalid_argument if K is outside the
// closed cell. An interior K yields an empty list. When K lies on m facet
// planes, |[K]| >= m + 1, with equality characterizations at m = 0 (interior,
// class = {K}) and m = 1 (facet interior, class size exactly 2).
std::vector<int> faces_containing(const Eigen::Vector3d& K, const BrillouinZone& bz,
                                  double tol = 1e-9);

// Checks that K is a vertex of bz and that every member of [K] is again a
// vertex (vertex classes are unions of vertices). Throws std::runtime_error
// naming the offending member on failure.
void verify_vertex_class(const Eigen::Vector3d& K, const BrillouinZone& bz);

// High-symmetry points used throughout: label plus position.
//   sc : R = (pi,pi,pi)
//   bcc: P = (pi,pi,pi), H = (0,0,2*pi)
//   fcc: W = (0,2*pi,pi)
struct NamedPoint {
  std::string label;
  Eigen::Vector3d K;
};

const std::vector<NamedPoint>& named_points(LatticeName name);
// Resolves a label like "R"/"P"/"H"/"W" for the given lattice; throws
// std::invalid_argument for unknown labels.
Eigen::Vector3d named_point(LatticeName name, std::string_view label);

}  // namespace bloch
