#include "bloch/planewave.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "bloch/lattice.hpp"
#include "bloch/point_group.hpp"
#include "bloch/potential.hpp"
#include "doctest.h"

using bloch::HamiltonianMatrix;
using bloch::InvariantPotential;
using bloch::Lattice;
using bloch::PlaneWaveBasis;

namespace {

const double kPi = std::acos(-1.0);

// Quadrature oracle for <phi_i, (-Laplace + zV) phi_j> on one primitive cell:
// a uniform N^3 grid in fractional coordinates integrates trigonometric
// polynomials of per-axis index below N exactly, so for these band-limited
// potentials the rule is exact up to rounding.
Eigen::MatrixXcd quadrature_hamiltonian(const PlaneWaveBasis& basis,
                                        const InvariantPotential& pot, double z, int N = 16) {
  const int n = basis.size();
  const double inv = 1.0 / static_cast<double>(N * N * N);
  std::vector<Eigen::Vector3d> grid;
  std::vector<std::complex<double>> vvals;
  grid.reserve(static_cast<size_t>(N * N * N));
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b)
      for (int c = 0; c < N; ++c) {
        const Eigen::Vector3d t(static_cast<double>(a) / N, static_cast<double>(b) / N,
                                static_cast<double>(c) / N);
        const Eigen::Vector3d x = basis.lattice.basis * t;
        grid.push_back(x);
        vvals.push_back(pot(x));
      }
  Eigen::MatrixXcd phases(static_cast<Eigen::Index>(grid.size()), n);
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector3d p = basis.momentum(j);
    for (size_t gidx = 0; gidx < grid.size(); ++gidx)
      phases(static_cast<Eigen::Index>(gidx), j) =
          std::exp(std::complex<double>(0.0, p.dot(grid[gidx])));
  }
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::complex<double> acc = 0.0;
      for (size_t gidx = 0; gidx < grid.size(); ++gidx)
        acc += std::conj(phases(static_cast<Eigen::Index>(gidx), i)) * vvals[gidx] *
               phases(static_cast<Eigen::Index>(gidx), j);
      H(i, j) = z * acc * inv;
    }
  for (int i = 0; i < n; ++i) H(i, i) += basis.momentum(i).squaredNorm();
  return H;
}

}  // namespace

TEST_CASE("basis contains the base wave and respects the cutoff") {
  const Lattice bcc = Lattice::body_centered_cubic();
  const Eigen::Vector3d P = bloch::named_point(bcc.name, "P");
  const PlaneWaveBasis basis = bloch::build_basis(bcc, P);
  CHECK(basis.cutoff == doctest::Approx(10.0 * P.squaredNorm()).epsilon(1e-14));
  CHECK(basis.find(Eigen::Vector3i::Zero()) >= 0);
  for (int i = 0; i < basis.size(); ++i) CHECK(basis.momentum(i).squaredNorm() <= basis.cutoff + 1e-9);
  // Indices are unique and lexicographically sorted.
  for (int i = 1; i < basis.size(); ++i) {
    const Eigen::Vector3i a = basis.indices[static_cast<size_t>(i - 1)];
    const Eigen::Vector3i b = basis.indices[static_cast<size_t>(i)];
    CHECK(std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3));
  }
}

TEST_CASE("hamiltonian entries match the quadrature oracle") {
  const Lattice sc = Lattice::simple_cubic();
  const Eigen::Vector3d R = bloch::named_point(sc.name, "R");
  const InvariantPotential pot = bloch::random_invariant(3, sc, 2, 1.0);
  const PlaneWaveBasis basis = bloch::build_basis(sc, R, Eigen::Vector3d::Zero(), 3.0 * R.squaredNorm());
  const double z = 0.7;
  const HamiltonianMatrix ham = bloch::build_hamiltonian(basis, pot, z);
  const Eigen::MatrixXcd oracle = quadrature_hamiltonian(basis, pot, z);
  REQUIRE(ham.H.rows() == oracle.rows());
  CHECK((ham.H - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("single-orbit entry equals the coefficient") {
  const Lattice sc = Lattice::simple_cubic();
  const InvariantPotential pot = bloch::from_orbits(sc, {{bloch::CoeffKey{1, 0, 0}, 1.0}});
  const Eigen::Vector3d R = bloch::named_point(sc.name, "R");
  const PlaneWaveBasis basis = bloch::build_basis(sc, R);
  const HamiltonianMatrix ham = bloch::build_hamiltonian(basis, pot, 1.0);
  const int i = basis.find(Eigen::Vector3i(0, 0, 0));
  const int j = basis.find(Eigen::Vector3i(1, 0, 0));
  REQUIRE(i >= 0);
  REQUIRE(j >= 0);
  CHECK(std::abs(ham.H(i, j) - 1.0) < 1e-14);
  CHECK(std::abs(ham.H(i, i) - R.squaredNorm()) < 1e-12);
}

TEST_CASE("hamiltonian is symmetric and eigensolve is self-checking") {
  const Lattice fcc = Lattice::face_centered_cubic();
  const Eigen::Vector3d W = bloch::named_point(fcc.name, "W");
  const InvariantPotential pot = bloch::random_invariant(9, fcc, 3, 1.0);
  const HamiltonianMatrix ham = bloch::build_hamiltonian(bloch::build_basis(fcc, W), pot, 0.4);
  CHECK((ham.H - ham.H.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(ham.H.imag().cwiseAbs().maxCoeff() < 1e-12);  // real even potential
  const bloch::EigenSystem sys = bloch::eigensolve(ham);
  CHECK(sys.values.size() == ham.H.rows());
  for (Eigen::Index i = 1; i < sys.values.size(); ++i) CHECK(sys.values(i) >= sys.values(i - 1));
}

TEST_CASE("spectra agree at K and K shifted by a dual vector") {
  const Lattice bcc = Lattice::body_centered_cubic();
  const Eigen::Vector3d H = bloch::named_point(bcc.name, "H");
  const InvariantPotential pot = bloch::random_invariant(4, bcc, 3, 1.0);
  const double cutoff = 10.0 * H.squaredNorm();
  const Eigen::Vector3d shifted = H + bloch::dual_basis(bcc).vector(Eigen::Vector3i(1, 0, 0));
  const bloch::EigenSystem a =
      bloch::eigensolve(bloch::build_hamiltonian(bloch::build_basis(bcc, H, Eigen::Vector3d::Zero(), cutoff), pot, 0.3));
  const bloch::EigenSystem b = bloch::eigensolve(bloch::build_hamiltonian(
      bloch::build_basis(bcc, shifted, Eigen::Vector3d::Zero(), cutoff), pot, 0.3));
  REQUIRE(a.values.size() == b.values.size());
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("spectra agree at K and gK") {
  const Lattice fcc = Lattice::face_centered_cubic();
  const Eigen::Vector3d W = bloch::named_point(fcc.name, "W");
  const InvariantPotential pot = bloch::random_invariant(6, fcc, 3, 1.0);
  const double cutoff = 8.0 * W.squaredNorm();
  const bloch::GroupElement g = bloch::octa_r() * bloch::axis_flip(1);
  const Eigen::Vector3d gW = g.dmat() * W;
  const bloch::EigenSystem a = bloch::eigensolve(
      bloch::build_hamiltonian(bloch::build_basis(fcc, W, Eigen::Vector3d::Zero(), cutoff), pot, 0.25));
  const bloch::EigenSystem b = bloch::eigensolve(
      bloch::build_hamiltonian(bloch::build_basis(fcc, gW, Eigen::Vector3d::Zero(), cutoff), pot, 0.25));
  REQUIRE(a.values.size() == b.values.size());
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("cluster eigenvalues converge in the cutoff") {
  // Truncation error is second order in the coupling: measure the change of
  // the cluster at ||K||^2 under a 1.5x cutoff increase and check both the
  // small-coupling bound and the quadratic scaling in z.
  const Lattice bcc = Lattice::body_centered_cubic();
  const Eigen::Vector3d P = bloch::named_point(bcc.name, "P");
  const double base = 10.0 * P.squaredNorm();
  const double E0 = P.squaredNorm();
  auto cluster_shift = [&](const InvariantPotential& pot, double z) {
    const Eigen::VectorXd a = bloch::eigensolve(bloch::build_hamiltonian(
        bloch::build_basis(bcc, P, Eigen::Vector3d::Zero(), base), pot, z)).values;
    const Eigen::VectorXd b = bloch::eigensolve(bloch::build_hamiltonian(
        bloch::build_basis(bcc, P, Eigen::Vector3d::Zero(), 1.5 * base), pot, z)).values;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size() && i < b.size(); ++i)
      if (std::abs(b(i) - E0) < 2.0) worst = std::max(worst, std::abs(a(i) - b(i)));
    return worst;
  };
  double worst_small = 0.0;
  for (std::uint64_t seed : {3ULL, 8ULL, 17ULL})
    worst_small = std::max(worst_small, cluster_shift(bloch::random_invariant(seed, bcc, 3, 1.0), 0.005));
  CHECK(worst_small < 1e-6);
  const InvariantPotential pot = bloch::random_invariant(8, bcc, 3, 1.0);
  const double d1 = cluster_shift(pot, 0.01);
  const double d2 = cluster_shift(pot, 0.005);
  CHECK(d1 / d2 > 3.0);  // halving z quarters the truncation error
  CHECK(d1 / d2 < 5.5);
}

TEST_CASE("sector decomposition: dimensions, orthogonality, spectral union") {
  const Lattice bcc = Lattice::body_centered_cubic();
  const Eigen::Vector3d H = bloch::named_point(bcc.name, "H");
  const bloch::AdmissibleSubgroup sub = bloch::admissible_subgroup(bcc, H);
  const InvariantPotential pot = bloch::random_invariant(2, bcc, 3, 1.0);
  const HamiltonianMatrix ham = bloch::build_hamiltonian(bloch::build_basis(bcc, H), pot, 0.35);

  int dim_total = 0;
  std::vector<double> pooled;
  std::vector<bloch::SectorBasis> bases;
  for (const bloch::SectorLabel& s : sub.sectors) {
    const bloch::SectorBasis sb = bloch::sector_basis(ham.basis, sub, s);
    bases.push_back(sb);
    // Orthonormal columns.
    const Eigen::MatrixXcd gram = sb.Q.adjoint() * sb.Q;
    CHECK((gram - Eigen::MatrixXcd::Identity(sb.dim(), sb.dim())).cwiseAbs().maxCoeff() < 1e-10);
    dim_total += sb.dim();
    const bloch::SectorSpectrum spec = bloch::sector_restrict(ham, sub, s);
    CHECK(spec.dim == sb.dim());
    for (Eigen::Index i = 0; i < spec.evals.size(); ++i) pooled.push_back(spec.evals(i));
  }
  CHECK(dim_total == ham.basis.size());
  // Cross-sector orthogonality.
  for (size_t a = 0; a < bases.size(); ++a)
    for (size_t b = a + 1; b < bases.size(); ++b)
      CHECK((bases[a].Q.adjoint() * bases[b].Q).cwiseAbs().maxCoeff() < 1e-10);
  // The pooled sector spectra reproduce the full spectrum.
  std::sort(pooled.begin(), pooled.end());
  const bloch::EigenSystem full = bloch::eigensolve(ham);
  REQUIRE(static_cast<Eigen::Index>(pooled.size()) == full.values.size());
  for (Eigen::Index i = 0; i < full.values.size(); ++i)
    CHECK(std::abs(pooled[static_cast<size_t>(i)] - full.values(i)) < 1e-8);
}

TEST_CASE("at z = 0 the base eigenvalue appears once per sector") {
  struct Case {
    Lattice lat;
    const char* label;
  };
  for (const Case& c : {Case{Lattice::simple_cubic(), "R"},
                        Case{Lattice::body_centered_cubic(), "P"},
                        Case{Lattice::body_centered_cubic(), "H"},
                        Case{Lattice::face_centered_cubic(), "W"}}) {
    const Eigen::Vector3d K = bloch::named_point(c.lat.name, c.label);
    const bloch::AdmissibleSubgroup sub = bloch::admissible_subgroup(c.lat, K);
    const InvariantPotential zero = bloch::from_orbits(c.lat, {});
    const HamiltonianMatrix ham = bloch::build_hamiltonian(bloch::build_basis(c.lat, K), zero, 0.0);
    for (const bloch::SectorLabel& s : sub.sectors) {
      const bloch::SectorSpectrum spec = bloch::sector_restrict(ham, sub, s);
      const int hits = static_cast<int>(
          std::count_if(spec.evals.data(), spec.evals.data() + spec.evals.size(),
                        [&](double e) { return std::abs(e - K.squaredNorm()) < 1e-8; }));
      CHECK(hits == 1);
    }
  }
}

TEST_CASE("basis and sector error paths") {
  const Lattice sc = Lattice::simple_cubic();
  const Eigen::Vector3d R = bloch::named_point(sc.name, "R");
  CHECK_THROWS_WITH_AS(bloch::build_basis(sc, R, Eigen::Vector3d::Zero(), 0.5 * R.squaredNorm()),
                       "cutoff excludes the zero dual offset", std::invalid_argument);

  const bloch::AdmissibleSubgroup sub = bloch::admissible_subgroup(sc, R);
  // A basis missing part of an orbit is rejected.
  PlaneWaveBasis broken = bloch::build_basis(sc, R, Eigen::Vector3d::Zero(), 1.01 * R.squaredNorm());
  REQUIRE(broken.size() == 8);
  broken.indices.pop_back();
  CHECK_THROWS_WITH_AS(bloch::sector_basis(broken, sub, sub.sectors.front()),
                       "basis is not closed under the group action", std::runtime_error);

  // Sector restriction is only defined on the symmetric point itself.
  const InvariantPotential pot = bloch::random_invariant(1, sc, 2, 1.0);
  const PlaneWaveBasis off = bloch::build_basis(sc, R, Eigen::Vector3d(0.01, 0.0, 0.0));
  const HamiltonianMatrix ham = bloch::build_hamiltonian(off, pot, 0.1);
  CHECK_THROWS_WITH_AS(bloch::sector_restrict(ham, sub, sub.sectors.front()),
                       "sector restriction requires kappa = 0", std::invalid_argument);
}

TEST_CASE("eigenvalue clustering groups by gaps") {
  Eigen::VectorXd evals(7);
  evals << 1.0, 1.0 + 1e-9, 1.0 + 2e-9, 2.0, 2.0 + 5e-10, 3.0, 4.0;
  const std::vector<bloch::Cluster> clusters = bloch::cluster_eigenvalues(evals, 1e-6);
  REQUIRE(clusters.size() == 4);
  CHECK(clusters[0].multiplicity() == 3);
  CHECK(clusters[1].multiplicity() == 2);
  CHECK(clusters[2].multiplicity() == 1);
  CHECK(clusters[3].multiplicity() == 1);
  CHECK(clusters[0].mean == doctest::Approx(1.0 + 1e-9));
}

TEST_CASE("dispersion scan: single point matches eigensolve, threads agree") {
  const Lattice bcc = Lattice::body_centered_cubic();
  const Eigen::Vector3d P = bloch::named_point(bcc.name, "P");
  const InvariantPotential pot = bloch::random_invariant(12, bcc, 3, 1.0);
  const bloch::DispersionResult single =
      bloch::dispersion_scan(bcc, pot, 0.2, {P}, 6, 10.0 * P.squaredNorm());
  const bloch::EigenSystem sys = bloch::eigensolve(bloch::build_hamiltonian(
      bloch::build_basis(bcc, P, Eigen::Vector3d::Zero(), 10.0 * P.squaredNorm()), pot, 0.2));
  REQUIRE(single.bands.cols() == 6);
  for (int b = 0; b < 6; ++b) CHECK(single.bands(0, b) == doctest::Approx(sys.values(b)).epsilon(1e-12));

  std::vector<Eigen::Vector3d> path;
  for (int i = 0; i < 7; ++i)
    path.push_back(P + (i - 3) * 0.05 * Eigen::Vector3d(1, 1, 1).normalized());
  const bloch::DispersionResult serial = bloch::dispersion_scan(bcc, pot, 0.2, path, 5, 0.0, 1);
  const bloch::DispersionResult parallel = bloch::dispersion_scan(bcc, pot, 0.2, path, 5, 0.0, 3);
  CHECK((serial.bands - parallel.bands).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dispersion at z = 0 reproduces folded free bands") {
  const Lattice sc = Lattice::simple_cubic();
  const InvariantPotential zero = bloch::from_orbits(sc, {});
  const Eigen::Vector3d k(0.4, -0.9, 0.7);
  const bloch::DispersionResult disp = bloch::dispersion_scan(sc, zero, 0.0, {k}, 8, 150.0);
  // Oracle: the eight smallest |k + 2 pi m|^2 over an index box.
  std::vector<double> norms;
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b)
      for (int c = -3; c <= 3; ++c)
        norms.push_back((k + 2.0 * kPi * Eigen::Vector3d(a, b, c)).squaredNorm());
  std::sort(norms.begin(), norms.end());
  for (int i = 0; i < 8; ++i) CHECK(disp.bands(0, i) == doctest::Approx(norms[static_cast<size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("quasi-momentum offset enters the kinetic diagonal") {
  const Lattice sc = Lattice::simple_cubic();
  const Eigen::Vector3d R = bloch::named_point(sc.name, "R");
  const Eigen::Vector3d kappa(0.01, -0.02, 0.015);
  const PlaneWaveBasis base = bloch::build_basis(sc, R);
  const PlaneWaveBasis off = bloch::build_basis(sc, R, kappa);
  REQUIRE(base.size() == off.size());  // kappa never changes the index set
  const int i = base.find(Eigen::Vector3i(0, 0, 0));
  CHECK((off.momentum(i) - (R + kappa)).norm() < 1e-14);
}
