#include "bloch/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace bloch {

namespace {

constexpr double kPi = std::numbers::pi;

bool lex_less(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double tol) {
  for (int i = 0; i < 3; ++i) {
    if (a[i] < b[i] - tol) return true;
    if (a[i] > b[i] + tol) return false;
  }
  return false;
}

// Integer triples m with |basis * m| <= radius, origin excluded.
std::vector<Eigen::Vector3i> dual_shell(const ReciprocalBasis& recip, double radius) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(recip.basis);
  const double sigma_min = svd.singularValues()(2);
  if (sigma_min <= 0.0) throw std::invalid_argument("degenerate lattice");
  const int bound = static_cast<int>(std::ceil(radius / sigma_min)) + 1;
  std::vector<Eigen::Vector3i> shell;
  for (int a = -bound; a <= bound; ++a)
    for (int b = -bound; b <= bound; ++b)
      for (int c = -bound; c <= bound; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        const Eigen::Vector3i m(a, b, c);
        if (recip.vector(m).norm() <= radius + 1e-12) shell.push_back(m);
      }
  return shell;
}

// Facet test: g carries a genuine (two-dimensional) Voronoi facet iff its
// midpoint g/2 satisfies every other shell constraint strictly -- the facet,
// when it has positive area, is centrally symmetric about g/2, which then
// lies in its relative interior. Ties (g/2 on another bisector) mean the
// plane touches the cell only in an edge or a vertex.
std::vector<Eigen::Vector3d> active_facets(const ReciprocalBasis& recip, double radius) {
  std::vector<Eigen::Vector3d> gs;
  std::vector<Eigen::Vector3i> shell = dual_shell(recip, radius);
  std::vector<Eigen::Vector3d> vecs(shell.size());
  for (size_t i = 0; i < shell.size(); ++i) vecs[i] = recip.vector(shell[i]);
  for (size_t i = 0; i < vecs.size(); ++i) {
    const Eigen::Vector3d x = 0.5 * vecs[i];
    bool inside = true;
    for (size_t j = 0; j < vecs.size() && inside; ++j) {
      if (j == i) continue;
      if (x.dot(vecs[j]) > 0.5 * vecs[j].squaredNorm() - 1e-9) inside = false;
    }
    if (inside) gs.push_back(vecs[i]);
  }
  std::sort(gs.begin(), gs.end(),
            [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return lex_less(a, b, 1e-9); });
  return gs;
}

}  // namespace

std::string to_string(LatticeName name) {
  switch (name) {
    case LatticeName::SimpleCubic: return "sc";
    case LatticeName::BodyCenteredCubic: return "bcc";
    case LatticeName::FaceCenteredCubic: return "fcc";
    case LatticeName::Custom: return "custom";
  }
  return "custom";
}

Lattice Lattice::simple_cubic() {
  Lattice lat;
  lat.basis = Eigen::Matrix3d::Identity();
  lat.name = LatticeName::SimpleCubic;
  return lat;
}

Lattice Lattice::body_centered_cubic() {
  Lattice lat;
  lat.basis << 1.0, 0.0, 0.5,
               0.0, 1.0, 0.5,
               0.0, 0.0, 0.5;
  lat.name = LatticeName::BodyCenteredCubic;
  return lat;
}

Lattice Lattice::face_centered_cubic() {
  Lattice lat;
  lat.basis << 0.5, -0.5,  0.0,
               0.5,  0.5, -0.5,
               0.0,  0.0,  0.5;
  lat.name = LatticeName::FaceCenteredCubic;
  return lat;
}

Lattice Lattice::custom(const Eigen::Matrix3d& basis) {
  Lattice lat;
  lat.basis = basis;
  lat.name = LatticeName::Custom;
  return lat;
}

Lattice Lattice::from_name(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "sc") return simple_cubic();
  if (s == "bcc") return body_centered_cubic();
  if (s == "fcc") return face_centered_cubic();
  throw std::invalid_argument("unknown lattice name: " + s);
}

bool ReciprocalBasis::try_coords(const Eigen::Vector3d& q, Eigen::Vector3i& out, double tol) const {
  const Eigen::Vector3d m = inv * q;
  for (int i = 0; i < 3; ++i) {
    const double r = std::round(m[i]);
    if (std::abs(m[i] - r) > tol) return false;
    out[i] = static_cast<int>(r);
  }
  return true;
}

Eigen::Vector3i ReciprocalBasis::coords(const Eigen::Vector3d& q, double tol) const {
  Eigen::Vector3i out;
  if (!try_coords(q, out, tol)) throw std::invalid_argument("vector is not on the dual lattice");
  return out;
}

ReciprocalBasis dual_basis(const Lattice& lat) {
  const double det = lat.basis.determinant();
  if (std::abs(det) < 1e-12) throw std::invalid_argument("degenerate lattice");
  ReciprocalBasis recip;
  // k_i . v_j = 2*pi*delta_ij  <=>  K^T B = 2*pi*I, i.e. K = 2*pi*B^-T.
  recip.basis = 2.0 * kPi * lat.basis.inverse().transpose();
  recip.inv = recip.basis.inverse();
  return recip;
}

bool BrillouinZone::contains(const Eigen::Vector3d& x, double tol) const {
  for (const Halfspace& h : halfspaces)
    if (x.dot(h.g) > h.offset + tol) return false;
  return true;
}

BrillouinZone brillouin_zone(const ReciprocalBasis& recip, double shell_radius) {
  double radius = shell_radius;
  if (radius <= 0.0) {
    double maxk = 0.0;
    for (int i = 0; i < 3; ++i) maxk = std::max(maxk, recip.basis.col(i).norm());
    radius = 2.2 * maxk;
  }

  // Facet certification: doubling the enumeration shell may only discard
  // spurious facets, never add new ones, so equality of the two facet sets
  // certifies the shell was large enough.
  const std::vector<Eigen::Vector3d> facets = active_facets(recip, radius);
  const std::vector<Eigen::Vector3d> facets2 = active_facets(recip, 2.0 * radius);
  bool same = facets.size() == facets2.size();
  for (size_t i = 0; same && i < facets.size(); ++i)
    same = (facets[i] - facets2[i]).norm() <= 1e-9;
  if (!same) throw std::runtime_error("insufficient shell");

  BrillouinZone bz;
  bz.recip = recip;
  for (const Eigen::Vector3d& g : facets) bz.halfspaces.push_back({g, 0.5 * g.squaredNorm()});

  // Vertices: intersections of facet-plane triples that satisfy every facet
  // constraint, deduplicated at 1e-8 after a lexicographic sort.
  const int nf = static_cast<int>(facets.size());
  std::vector<Eigen::Vector3d> verts;
  for (int i = 0; i < nf; ++i)
    for (int j = i + 1; j < nf; ++j)
      for (int k = j + 1; k < nf; ++k) {
        Eigen::Matrix3d A;
        A.row(0) = facets[i].transpose();
        A.row(1) = facets[j].transpose();
        A.row(2) = facets[k].transpose();
        if (std::abs(A.determinant()) < 1e-9) continue;
        Eigen::Vector3d rhs(bz.halfspaces[i].offset, bz.halfspaces[j].offset,
                            bz.halfspaces[k].offset);
        Eigen::Vector3d x = A.partialPivLu().solve(rhs);
        if (bz.contains(x, 1e-9)) verts.push_back(x);
      }
  std::sort(verts.begin(), verts.end(),
            [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return lex_less(a, b, 1e-8); });
  for (const Eigen::Vector3d& v : verts) {
    if (bz.vertices.empty() || (bz.vertices.back() - v).lpNorm<Eigen::Infinity>() > 1e-8)
      bz.vertices.push_back(v);
  }

  // Faces: vertex incidence per facet plane. Every genuine facet of a
  // 3-polytope carries at least three vertices; anything thinner would mean
  // the facet test above let a spurious plane through.
  bz.faces.resize(bz.halfspaces.size());
  for (size_t f = 0; f < bz.halfspaces.size(); ++f) {
    for (size_t v = 0; v < bz.vertices.size(); ++v) {
      if (std::abs(bz.vertices[v].dot(bz.halfspaces[f].g) - bz.halfspaces[f].offset) <= 1e-9)
        bz.faces[f].push_back(static_cast<int>(v));
    }
    if (bz.faces[f].size() < 3) throw std::runtime_error("degenerate face in Brillouin zone");
  }

  // The Voronoi cell of a lattice is centrally symmetric; check it once here
  // so downstream code may rely on it.
  for (const Eigen::Vector3d& v : bz.vertices) {
    bool found = false;
    for (const Eigen::Vector3d& w : bz.vertices)
      if ((v + w).lpNorm<Eigen::Infinity>() <= 1e-8) { found = true; break; }
    if (!found) throw std::runtime_error("Brillouin zone is not centrally symmetric");
  }
  return bz;
}

Eigen::Matrix3Xd MomentumClass::member_matrix() const {
  Eigen::Matrix3Xd m(3, members.size());
  for (size_t i = 0; i < members.size(); ++i) m.col(i) = members[i];
  return m;
}

MomentumClass k_class(const Eigen::Vector3d& K, const ReciprocalBasis& recip, double tol) {
  MomentumClass cls;
  cls.K = K;
  const double norm = K.norm();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(recip.basis);
  const double sigma_min = svd.singularValues()(2);
  if (sigma_min <= 0.0) throw std::invalid_argument("degenerate lattice");
  // Any member satisfies |m.k| <= 2|K|; enumerate the corresponding box.
  const int bound = static_cast<int>(std::ceil(2.0 * norm / sigma_min)) + 1;
  struct Entry { Eigen::Vector3d v; Eigen::Vector3i m; };
  std::vector<Entry> hits;
  for (int a = -bound; a <= bound; ++a)
    for (int b = -bound; b <= bound; ++b)
      for (int c = -bound; c <= bound; ++c) {
        const Eigen::Vector3i m(a, b, c);
        const Eigen::Vector3d kprime = K + recip.vector(m);
        if (std::abs(kprime.norm() - norm) <= tol) hits.push_back({kprime, m});
      }
  std::sort(hits.begin(), hits.end(),
            [](const Entry& a, const Entry& b) { return lex_less(a.v, b.v, 1e-12); });
  for (const Entry& e : hits) {
    cls.members.push_back(e.v);
    cls.offsets.push_back(e.m);
  }
  return cls;
}

std::vector<int> faces_containing(const Eigen::Vector3d& K, const BrillouinZone& bz, double tol) {
  if (!bz.contains(K, tol)) throw std::invalid_argument("K is outside the closed Brillouin zone");
  std::vector<int> active;
  for (size_t f = 0; f < bz.halfspaces.size(); ++f)
    if (std::abs(K.dot(bz.halfspaces[f].g) - bz.halfspaces[f].offset) <= tol)
      active.push_back(static_cast<int>(f));
  return active;
}

void verify_vertex_class(const Eigen::Vector3d& K, const BrillouinZone& bz) {
  auto is_vertex = [&](const Eigen::Vector3d& x) {
    for (const Eigen::Vector3d& v : bz.vertices)
      if ((v - x).lpNorm<Eigen::Infinity>() <= 1e-8) return true;
    return false;
  };
  if (!is_vertex(K)) throw std::runtime_error("K is not a vertex of the Brillouin zone");
  const MomentumClass cls = k_class(K, bz.recip);
  for (const Eigen::Vector3d& member : cls.members) {
    if (!is_vertex(member)) {
      throw std::runtime_error("class member (" + std::to_string(member.x()) + ", " +
                               std::to_string(member.y()) + ", " + std::to_string(member.z()) +
                               ") is not a vertex of the Brillouin zone");
    }
  }
}

const std::vector<NamedPoint>& named_points(LatticeName name) {
  static const std::vector<NamedPoint> sc = {{"R", {kPi, kPi, kPi}}};
  static const std::vector<NamedPoint> bcc = {{"P", {kPi, kPi, kPi}}, {"H", {0.0, 0.0, 2.0 * kPi}}};
  static const std::vector<NamedPoint> fcc = {{"W", {0.0, 2.0 * kPi, kPi}}};
  static const std::vector<NamedPoint> none = {};
  switch (name) {
    case LatticeName::SimpleCubic: return sc;
    case LatticeName::BodyCenteredCubic: return bcc;
    case LatticeName::FaceCenteredCubic: return fcc;
    case LatticeName::Custom: return none;
  }
  return none;
}

Eigen::Vector3d named_point(LatticeName name, std::string_view label) {
  for (const NamedPoint& p : named_points(name))
    if (p.label == label) return p.K;
  throw std::invalid_argument("unknown K-point label '" + std::string(label) + "' for lattice " +
                              to_string(name));
}

}  // namespace bloch
