// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Criterion 10 drives the command-line tool named by the BLOCHBAND_CLI
// environment variable.

#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bloch/analytic.hpp"
#include "bloch/errors.hpp"
#include "bloch/lattice.hpp"
#include "bloch/perturbation.hpp"
#include "bloch/planewave.hpp"
#include "bloch/point_group.hpp"
#include "bloch/potential.hpp"

using namespace bloch;
using Complex = std::complex<double>;

namespace {

const double kPi = std::acos(-1.0);
int g_failures = 0;

class Criterion {
 public:
  Criterion(int number, std::string title, double time_limit_s = 0.0)
      : number_(number), title_(std::move(title)), limit_(time_limit_s),
        start_(std::chrono::steady_clock::now()) {}

  void require(bool ok, const std::string& what) {
    if (!ok) problems_.push_back(what);
  }

  void finish() {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (limit_ > 0.0 && elapsed > limit_) {
      std::ostringstream os;
      os << "took " << elapsed << " s, limit " << limit_ << " s";
      problems_.push_back(os.str());
    }
    if (problems_.empty()) {
      std::printf("[PASS] criterion %d: %s (%.1f s)\n", number_, title_.c_str(), elapsed);
    } else {
      ++g_failures;
      std::printf("[FAIL] criterion %d: %s (%.1f s)\n", number_, title_.c_str(), elapsed);
      for (const std::string& p : problems_) std::printf("       - %s\n", p.c_str());
    }
    std::fflush(stdout);
  }

 private:
  int number_;
  std::string title_;
  double limit_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> problems_;
};

struct VertexCase {
  Lattice lat;
  const char* label;
  std::uint64_t seed;
  int table_multiplicity;
};

std::vector<VertexCase> table_cases() {
  return {{Lattice::simple_cubic(), "R", 9, 8},
          {Lattice::body_centered_cubic(), "P", 17, 4},
          {Lattice::body_centered_cubic(), "H", 17, 6},
          {Lattice::face_centered_cubic(), "W", 15, 4}};
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

std::vector<Complex> separated_roots(std::mt19937_64& rng, int count) {
  auto u53 = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Complex> roots;
  while (static_cast<int>(roots.size()) < count) {
    const Complex cand(-1.25 + 2.5 * u53(), -1.25 + 2.5 * u53());
    bool ok = true;
    for (const Complex& r : roots)
      if (std::abs(cand - r) < 0.6) ok = false;
    if (ok) roots.push_back(cand);
  }
  return roots;
}

void criterion_1() {
  Criterion c(1, "degenerate multiplicities 8/4/6/4 at the table vertices", 10.0);
  for (const VertexCase& vc : table_cases()) {
    const Eigen::Vector3d K = named_point(vc.lat.name, vc.label);
    const InvariantPotential zero = from_orbits(vc.lat, {});
    const PlaneWaveBasis basis = build_basis(vc.lat, K, Eigen::Vector3d::Zero(), 10.0 * K.squaredNorm());
    const EigenSystem sys = eigensolve(build_hamiltonian(basis, zero, 0.0));
    const std::vector<Cluster> clusters =
        cluster_eigenvalues(sys.values, default_gap_threshold(sys.hnorm));
    int found = -1;
    for (const Cluster& cl : clusters)
      if (std::abs(cl.mean - K.squaredNorm()) < 1e-8) found = cl.multiplicity();
    c.require(found == vc.table_multiplicity,
              std::string(vc.label) + ": cluster multiplicity " + std::to_string(found) +
                  ", table says " + std::to_string(vc.table_multiplicity));
  }
  c.finish();
}

void criterion_2() {
  Criterion c(2, "Brillouin-zone vertex counts and the class bound", 5.0);
  const std::array<int, 3> expect_vertices = {8, 14, 24};
  const std::array<Lattice, 3> lats = {Lattice::simple_cubic(), Lattice::body_centered_cubic(),
                                       Lattice::face_centered_cubic()};
  const std::vector<std::pair<int, const char*>> named = {{0, "R"}, {1, "P"}, {1, "H"}, {2, "W"}};
  for (size_t i = 0; i < lats.size(); ++i) {
    const ReciprocalBasis recip = dual_basis(lats[i]);
    const BrillouinZone bz = brillouin_zone(recip);
    const std::string lname = to_string(lats[i].name);
    c.require(static_cast<int>(bz.vertices.size()) == expect_vertices[i],
              lname + ": " + std::to_string(bz.vertices.size()) + " vertices, expected " +
                  std::to_string(expect_vertices[i]));
    for (const Eigen::Vector3d& v : bz.vertices) {
      const MomentumClass cls = k_class(v, recip);
      const size_t faces = faces_containing(v, bz).size();
      c.require(cls.size() >= static_cast<int>(faces) + 1,
                lname + ": class bound violated at a vertex (" + std::to_string(cls.size()) +
                    " members, " + std::to_string(faces) + " faces)");
      try {
        verify_vertex_class(v, bz);
      } catch (const std::exception& e) {
        c.require(false, lname + ": " + e.what());
      }
    }
  }
  for (const auto& [idx, label] : named) {
    const BrillouinZone bz = brillouin_zone(dual_basis(lats[static_cast<size_t>(idx)]));
    const Eigen::Vector3d K = named_point(lats[static_cast<size_t>(idx)].name, label);
    double dmin = std::numeric_limits<double>::infinity();
    for (const Eigen::Vector3d& v : bz.vertices) dmin = std::min(dmin, (v - K).norm());
    c.require(dmin < 1e-8, std::string(label) + " is not a zone vertex (distance " + fmt(dmin) + ")");
  }
  c.finish();
}

void criterion_3() {
  Criterion c(3, "first-order slopes against finite differences, 20 potentials per vertex", 120.0);
  for (const VertexCase& vc : table_cases()) {
    const Eigen::Vector3d K = named_point(vc.lat.name, vc.label);
    const AdmissibleSubgroup sub = admissible_subgroup(vc.lat, K);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const InvariantPotential pot = random_invariant(seed, vc.lat, 3, 1.0);
      for (const SectorLabel& s : sub.sectors) {
        const double analytic = first_order_slope(pot, sub, s);
        const double numeric = numeric_slope(pot, sub, s, 1e-4);
        const double err = std::abs(numeric - analytic) / (1.0 + std::abs(analytic));
        c.require(err <= 1e-2, std::string(vc.label) + " seed " + std::to_string(seed) +
                                   " sector " + s.str() + ": relative error " + fmt(err));
      }
    }
  }
  c.finish();
}

void criterion_4() {
  Criterion c(4, "splitting patterns and cluster multiplicities at z = 0.05 and 0.2", 300.0);
  const std::vector<std::vector<int>> patterns = {{1, 3, 3, 1}, {1, 3}, {1, 2, 3}, {1, 2, 1}};
  const std::vector<VertexCase> cases = table_cases();
  for (size_t i = 0; i < cases.size(); ++i) {
    const Eigen::Vector3d K = named_point(cases[i].lat.name, cases[i].label);
    const AdmissibleSubgroup sub = admissible_subgroup(cases[i].lat, K);
    const InvariantPotential pot = random_invariant(cases[i].seed, cases[i].lat, 3, 1.0);
    const SplittingTable tab = splitting_table(pot, sub);
    std::vector<int> got = tab.pattern();
    std::sort(got.begin(), got.end());
    std::vector<int> want = patterns[i];
    std::sort(want.begin(), want.end());
    std::ostringstream gs;
    for (int v : got) gs << v << " ";
    c.require(got == want, std::string(cases[i].label) + ": group sizes { " + gs.str() + "}");
    c.require(genericity_check(pot, sub).pass,
              std::string(cases[i].label) + ": genericity check failed");
    for (double z : {0.05, 0.2}) {
      for (const SlopeGroup& g : tab.groups) {
        try {
          const ClusterBasis cb = degenerate_cluster_basis(pot, sub, z, g.sectors);
          c.require(static_cast<int>(cb.sectors.size()) == static_cast<int>(g.sectors.size()),
                    "cluster size mismatch");
        } catch (const std::exception& e) {
          c.require(false, std::string(cases[i].label) + " z=" + fmt(z) + ": " + e.what());
        }
      }
    }
  }
  c.finish();
}

void criterion_5() {
  Criterion c(5, "coupling constants approach the free-operator limit quadratically", 300.0);
  // Three-fold point: alpha(z) -> pi i.
  {
    const Lattice bcc = Lattice::body_centered_cubic();
    const Eigen::Vector3d P = named_point(bcc.name, "P");
    const AdmissibleSubgroup sub = admissible_subgroup(bcc, P);
    const InvariantPotential pot = random_invariant(17, bcc, 3, 1.0);
    const SplittingTable tab = splitting_table(pot, sub);
    const SlopeGroup* triple = nullptr;
    for (const SlopeGroup& g : tab.groups)
      if (g.sectors.size() == 3) triple = &g;
    if (triple == nullptr) {
      c.require(false, "no three-fold slope group at P");
    } else {
      auto alpha_at = [&](double z) {
        const ClusterBasis cb = degenerate_cluster_basis(pot, sub, z, triple->sectors);
        const Classification cls = classify(cb, gradient_elements(cb));
        if (cls.type != SingularityType::Weyl3)
          throw AnomalyError("triple not classified as a three-fold point at z=" + fmt(z));
        return cls.alpha;
      };
      try {
        const double d1 = std::abs(alpha_at(0.05) - Complex(0.0, kPi));
        const double d2 = std::abs(alpha_at(0.025) - Complex(0.0, kPi));
        c.require(d1 <= 0.05, "P: |alpha(0.05) - pi i| = " + fmt(d1));
        c.require(d1 / d2 >= 3.0, "P: halving z shrank the distance by only " + fmt(d1 / d2));
      } catch (const std::exception& e) {
        c.require(false, e.what());
      }
    }
  }
  // Valley: |alpha(z)| -> pi.
  {
    const Lattice fcc = Lattice::face_centered_cubic();
    const Eigen::Vector3d W = named_point(fcc.name, "W");
    const AdmissibleSubgroup sub = admissible_subgroup(fcc, W);
    const InvariantPotential pot = random_invariant(15, fcc, 3, 1.0);
    const SplittingTable tab = splitting_table(pot, sub);
    const SlopeGroup* pair = nullptr;
    for (const SlopeGroup& g : tab.groups)
      if (g.sectors.size() == 2) pair = &g;
    if (pair == nullptr) {
      c.require(false, "no two-fold slope group at W");
    } else {
      auto dist_at = [&](double z) {
        const ClusterBasis cb = degenerate_cluster_basis(pot, sub, z, pair->sectors);
        const Classification cls = classify(cb, gradient_elements(cb));
        if (cls.type != SingularityType::Valley)
          throw AnomalyError("pair not classified as a valley at z=" + fmt(z));
        return std::abs(std::abs(cls.alpha) - kPi);
      };
      try {
        const double d1 = dist_at(0.05);
        const double d2 = dist_at(0.025);
        c.require(d1 <= 0.05, "W: ||alpha(0.05)| - pi| = " + fmt(d1));
        c.require(d1 / d2 >= 3.0, "W: halving z shrank the distance by only " + fmt(d1 / d2));
      } catch (const std::exception& e) {
        c.require(false, e.what());
      }
    }
  }
  c.finish();
}

void criterion_6() {
  Criterion c(6, "characteristic polynomial of the three-fold effective model at z = 0.3");
  const Lattice bcc = Lattice::body_centered_cubic();
  const Eigen::Vector3d P = named_point(bcc.name, "P");
  const AdmissibleSubgroup sub = admissible_subgroup(bcc, P);
  const InvariantPotential pot = random_invariant(17, bcc, 3, 1.0);
  const SplittingTable tab = splitting_table(pot, sub);
  const SlopeGroup* triple = nullptr;
  for (const SlopeGroup& g : tab.groups)
    if (g.sectors.size() == 3) triple = &g;
  if (triple == nullptr) {
    c.require(false, "no three-fold slope group at P");
  } else {
    try {
      const ClusterBasis cb = degenerate_cluster_basis(pot, sub, 0.3, triple->sectors);
      const GradientTable gt = gradient_elements(cb);
      const Classification cls = classify(cb, gt);
      c.require(cls.type == SingularityType::Weyl3, "triple not classified as three-fold");
      c.require(std::abs(cls.im_alpha_cubed) >= 1e-3,
                "Im(alpha^3) margin " + fmt(std::abs(cls.im_alpha_cubed)));
      std::vector<Eigen::Vector3d> kappas;
      for (const Eigen::Vector3d& d : halton_directions(20)) kappas.push_back(0.01 * P.norm() * d);
      const double err = weyl_polynomial_error(gt, cls.alpha, kappas);
      c.require(err <= 1e-8, "worst relative coefficient error " + fmt(err));
    } catch (const std::exception& e) {
      c.require(false, e.what());
    }
  }
  c.finish();
}

void criterion_7() {
  Criterion c(7, "effective models reach fit exponent 1.9 at every classified point", 600.0);
  struct Setting {
    Lattice lat;
    const char* label;
    std::uint64_t seed;
    double amplitude;
    double z;
  };
  const std::vector<Setting> settings = {{Lattice::simple_cubic(), "R", 9, 5.0, 0.5},
                                         {Lattice::body_centered_cubic(), "P", 17, 2.0, 0.5},
                                         {Lattice::body_centered_cubic(), "H", 17, 4.0, 0.5},
                                         {Lattice::face_centered_cubic(), "W", 15, 3.0, 0.65}};
  for (const Setting& s : settings) {
    const Eigen::Vector3d K = named_point(s.lat.name, s.label);
    const AdmissibleSubgroup sub = admissible_subgroup(s.lat, K);
    const InvariantPotential pot = random_invariant(s.seed, s.lat, 3, s.amplitude);
    const SplittingTable tab = splitting_table(pot, sub);
    int classified = 0;
    for (const SlopeGroup& g : tab.groups) {
      if (g.sectors.size() < 2) continue;
      try {
        const ClusterBasis cb = degenerate_cluster_basis(pot, sub, s.z, g.sectors);
        const Classification cls = classify(cb, gradient_elements(cb));
        c.require(cls.type != SingularityType::Unclassified,
                  std::string(s.label) + ": a cluster stayed unclassified");
        const FitReport fit = validate_effective(pot, cb);
        c.require(fit.exponent >= 1.9, std::string(s.label) + " " + to_string(cls.type) +
                                           ": exponent " + fmt(fit.exponent));
        c.require(fit.excluded_evaluations == 0,
                  std::string(s.label) + ": " + std::to_string(fit.excluded_evaluations) +
                      " excluded evaluations");
        ++classified;
      } catch (const std::exception& e) {
        c.require(false, std::string(s.label) + ": " + e.what());
      }
    }
    c.require(classified >= 1, std::string(s.label) + ": no multi-sector cluster found");
  }
  c.finish();
}

void criterion_8() {
  Criterion c(8, "quadratic points carry an identically vanishing first-order model");
  struct Spot {
    Lattice lat;
    const char* label;
    std::uint64_t seed;
    int size;
    int skip;
  };
  const std::vector<Spot> spots = {{Lattice::simple_cubic(), "R", 9, 3, 0},
                                   {Lattice::simple_cubic(), "R", 9, 3, 1},
                                   {Lattice::body_centered_cubic(), "H", 17, 2, 0},
                                   {Lattice::body_centered_cubic(), "H", 17, 3, 0}};
  for (const Spot& s : spots) {
    const Eigen::Vector3d K = named_point(s.lat.name, s.label);
    const AdmissibleSubgroup sub = admissible_subgroup(s.lat, K);
    const InvariantPotential pot = random_invariant(s.seed, s.lat, 3, 1.0);
    const SplittingTable tab = splitting_table(pot, sub);
    const SlopeGroup* group = nullptr;
    int skip = s.skip;
    for (const SlopeGroup& g : tab.groups)
      if (static_cast<int>(g.sectors.size()) == s.size && skip-- == 0) group = &g;
    if (group == nullptr) {
      c.require(false, std::string(s.label) + ": no slope group of size " + std::to_string(s.size));
      continue;
    }
    for (double z : {0.1, 0.5}) {
      try {
        const ClusterBasis cb = degenerate_cluster_basis(pot, sub, z, group->sectors);
        const GradientTable gt = gradient_elements(cb);
        c.require(gt.max_norm() < 1e-8 * K.norm(),
                  std::string(s.label) + " m=" + std::to_string(s.size) + " z=" + fmt(z) +
                      ": max gradient " + fmt(gt.max_norm()));
        c.require(classify(cb, gt).type == SingularityType::Quadratic,
                  std::string(s.label) + " m=" + std::to_string(s.size) + " z=" + fmt(z) +
                      ": not classified quadratic");
      } catch (const std::exception& e) {
        c.require(false, std::string(s.label) + " z=" + fmt(z) + ": " + e.what());
      }
    }
  }
  c.finish();
}

void criterion_9() {
  Criterion c(9, "polynomial, projector, and branch property suite", 120.0);
  // 200 planted-gcd Sylvester rank identities.
  {
    std::mt19937_64 rng(20250818);
    auto pick = [&](int lo, int hi) {
      return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };
    for (int trial = 0; trial < 200; ++trial) {
      const int g = pick(0, 3), ea = pick(1, 3), eb = pick(1, 3);
      const std::vector<Complex> pool = separated_roots(rng, g + ea + eb);
      std::vector<Complex> ra(pool.begin(), pool.begin() + g);
      std::vector<Complex> rb = ra;
      ra.insert(ra.end(), pool.begin() + g, pool.begin() + g + ea);
      rb.insert(rb.end(), pool.begin() + g + ea, pool.end());
      const SylvesterBlock blk = generalized_sylvester(
          {MonicPolynomial::from_roots(ra).full(), MonicPolynomial::from_roots(rb).full()});
      if (numeric_rank(blk.matrix, 1e-10) != blk.total_degree - g) {
        c.require(false, "rank identity failed at planted trial " + std::to_string(trial));
        break;
      }
    }
  }
  // 200 multiplicity profiles against the companion-matrix census.
  {
    std::mt19937_64 rng(424242);
    std::normal_distribution<double> nd;
    auto census = [](const MonicPolynomial& p) {
      const int n = p.degree();
      Eigen::MatrixXcd cm = Eigen::MatrixXcd::Zero(n, n);
      for (int i = 1; i < n; ++i) cm(i, i - 1) = 1.0;
      for (int i = 0; i < n; ++i) cm(i, n - 1) = -p.lower(i);
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(cm);
      std::vector<Complex> vals(es.eigenvalues().data(), es.eigenvalues().data() + n);
      std::vector<bool> used(vals.size(), false);
      std::vector<int> rho;
      for (size_t i = 0; i < vals.size(); ++i) {
        if (used[i]) continue;
        int size = 0;
        for (size_t j = i; j < vals.size(); ++j)
          if (!used[j] && std::abs(vals[j] - vals[i]) < 1e-3) {
            used[j] = true;
            ++size;
          }
        if (static_cast<int>(rho.size()) < size) rho.resize(static_cast<size_t>(size), 0);
        ++rho[static_cast<size_t>(size - 1)];
      }
      while (!rho.empty() && rho.back() == 0) rho.pop_back();
      return rho;
    };
    auto trim = [](std::vector<int> v) {
      while (!v.empty() && v.back() == 0) v.pop_back();
      return v;
    };
    for (int trial = 0; trial < 200; ++trial) {
      MonicPolynomial p;
      if (trial % 2 == 0) {
        const int n = 2 + static_cast<int>(rng() % 11);
        p.lower.resize(n);
        for (int i = 0; i < n; ++i) p.lower(i) = Complex(nd(rng), nd(rng));
      } else {
        std::vector<Complex> roots;
        const std::vector<Complex> distinct = separated_roots(rng, 2 + static_cast<int>(rng() % 3));
        int degree = 0;
        for (const Complex& r : distinct) {
          const int m = 1 + static_cast<int>(rng() % 3);
          if (degree + m > 12) break;
          degree += m;
          for (int i = 0; i < m; ++i) roots.push_back(r);
        }
        p = MonicPolynomial::from_roots(roots);
      }
      try {
        if (trim(multiplicity_profile(p).rho) != census(p)) {
          c.require(false, "profile/census mismatch at trial " + std::to_string(trial));
          break;
        }
      } catch (const std::exception& e) {
        c.require(false, std::string("profile raised at trial ") + std::to_string(trial) + ": " +
                             e.what());
        break;
      }
    }
  }
  // Riesz projector algebra on 100 random Hermitian matrices.
  {
    std::mt19937_64 rng(31415);
    std::normal_distribution<double> nd;
    int done = 0;
    while (done < 100) {
      const int n = 4 + static_cast<int>(rng() % 9);
      Eigen::MatrixXcd m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = Complex(nd(rng), nd(rng));
      const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
      const Eigen::VectorXd ev = es.eigenvalues();
      const int lo = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
      const int hi = lo + static_cast<int>(rng() % static_cast<std::uint64_t>(n - lo));
      const double below = lo > 0 ? 0.5 * (ev(lo) - ev(lo - 1)) : 1.0;
      const double above = hi < n - 1 ? 0.5 * (ev(hi + 1) - ev(hi)) : 1.0;
      const double margin = std::min({below, above, 1.0});
      if (margin < 1e-6) continue;
      const Eigen::MatrixXcd p =
          riesz_projector(h, 0.5 * (ev(lo) + ev(hi)), 0.5 * (ev(hi) - ev(lo)) + 0.8 * margin);
      const bool ok = (p * p - p).cwiseAbs().maxCoeff() < 1e-8 &&
                      (h * p - p * h).cwiseAbs().maxCoeff() < 1e-8 &&
                      std::abs(p.trace() - static_cast<double>(hi - lo + 1)) < 1e-8;
      if (!ok) {
        c.require(false, "projector algebra failed at trial " + std::to_string(done));
        break;
      }
      ++done;
    }
  }
  // Branch slopes against the projector trace rule.
  {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    auto herm = [&](int n) {
      Eigen::MatrixXcd m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = Complex(nd(rng), nd(rng));
      return Eigen::MatrixXcd(0.5 * (m + m.adjoint()));
    };
    for (int rep = 0; rep < 5; ++rep) {
      const Eigen::MatrixXcd a = herm(8), b = herm(8);
      auto family = [&](double z) { return Eigen::MatrixXcd(a + z * b); };
      const BranchTrace trace = continue_branch(family, {-1e-4, 0.0, 1e-4}, -100.0, 100.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
      for (const Branch& br : trace.branches) {
        if (br.points.size() != 3) {
          c.require(false, "a branch lost a sample in the slope study");
          continue;
        }
        const double secant = (br.points[2].eigenvalue - br.points[0].eigenvalue) / 2e-4;
        const double lam = br.points[1].eigenvalue;
        double gap = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 8; ++i)
          if (std::abs(es.eigenvalues()(i) - lam) > 1e-9)
            gap = std::min(gap, std::abs(es.eigenvalues()(i) - lam));
        const Eigen::MatrixXcd pi = riesz_projector(a, lam, 0.45 * gap);
        const double predicted = (pi * b * pi).trace().real() / br.points[1].multiplicity;
        if (std::abs(secant - predicted) >= 1e-6)
          c.require(false, "branch slope off the trace rule by " + fmt(secant - predicted));
      }
    }
  }
  c.finish();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void criterion_10() {
  Criterion c(10, "command-line outputs are byte-reproducible");
  const char* cli = std::getenv("BLOCHBAND_CLI");
  if (cli == nullptr) {
    c.require(false, "BLOCHBAND_CLI is not set");
    c.finish();
    return;
  }
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "blochband-acceptance";
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir);

  std::ofstream(dir / "poly.json") << "{\"coeffs\": [2, -3, 1]}\n";

  struct Config {
    std::string name;
    std::string args;                     // {out} is replaced per run
    std::vector<std::string> artifacts;   // paths relative to the out stem
  };
  const std::vector<Config> configs = {
      {"lattice", "lattice --name fcc", {}},
      {"sectors", "sectors --lattice bcc --k P", {}},
      {"split", "split --lattice sc --k R --seed 9 --format json", {}},
      {"spectrum", "spectrum --lattice bcc --k P --z 0.2 --seed 17", {}},
      {"classify", "classify --lattice bcc --k P --z 0.3 --seed 17 --no-fit", {}},
      {"dispersion",
       "dispersion --lattice bcc --k-start P --k-end H --n-points 5 --bands 4 --out {out}.csv",
       {".csv"}},
      {"scan-z",
       "scan-z --lattice sc --k R --amplitude 0 --z-range 0.02:0.3 --samples 8 --out {out}.csv",
       {".csv", ".csv.anomalies.json"}},
      {"poly-profile", "poly-profile --in " + (dir / "poly.json").string(), {}},
  };
  for (const Config& cfg : configs) {
    std::array<std::string, 2> stdouts;
    std::array<std::vector<std::string>, 2> artifacts;
    bool ran = true;
    for (int run = 0; run < 2 && ran; ++run) {
      const std::string stem = (dir / (cfg.name + "-run" + std::to_string(run))).string();
      std::string args = cfg.args;
      const std::string token = "{out}";
      for (size_t at = args.find(token); at != std::string::npos; at = args.find(token))
        args.replace(at, token.size(), stem);
      const std::string redirect = stem + ".stdout";
      const std::string cmd = std::string(cli) + " " + args + " > " + redirect + " 2>/dev/null";
      const int status = std::system(cmd.c_str());
      if (status != 0) {
        c.require(false, cfg.name + ": exit status " + std::to_string(status));
        ran = false;
        break;
      }
      stdouts[static_cast<size_t>(run)] = slurp(redirect);
      for (const std::string& suffix : cfg.artifacts)
        artifacts[static_cast<size_t>(run)].push_back(slurp(stem + suffix));
    }
    if (!ran) continue;
    c.require(!stdouts[0].empty() || !cfg.artifacts.empty(), cfg.name + ": no output captured");
    c.require(stdouts[0] == stdouts[1], cfg.name + ": stdout differs between runs");
    for (size_t a = 0; a < cfg.artifacts.size(); ++a) {
      c.require(!artifacts[0][a].empty(), cfg.name + cfg.artifacts[a] + ": artifact empty");
      c.require(artifacts[0][a] == artifacts[1][a],
                cfg.name + cfg.artifacts[a] + ": artifact differs between runs");
    }
  }
  fs::remove_all(dir, ec);
  c.finish();
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
