#include "bloch/planewave.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace bloch {

namespace {

bool int_lex_less(const Eigen::Vector3i& a, const Eigen::Vector3i& b) {
  for (int i = 0; i < 3; ++i)
    if (a(i) != b(i)) return a(i) < b(i);
  return false;
}

std::string fingerprint(const Eigen::MatrixXcd& m) {
  // FNV-1a over the raw matrix bytes; stable identifier for failure reports.
  const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
  const size_t n = sizeof(std::complex<double>) * static_cast<size_t>(m.size());
  std::uint64_t h = 14695981039346656037ull;
  for (size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace

int PlaneWaveBasis::find(const Eigen::Vector3i& m) const {
  auto it = std::lower_bound(indices.begin(), indices.end(), m, int_lex_less);
  if (it == indices.end() || int_lex_less(m, *it)) return -1;
  return static_cast<int>(it - indices.begin());
}

Eigen::Vector3d PlaneWaveBasis::momentum(int i) const {
  return K + kappa + recip.vector(indices[static_cast<size_t>(i)]);
}

PlaneWaveBasis build_basis(const Lattice& lat, const Eigen::Vector3d& K,
                           const Eigen::Vector3d& kappa, double cutoff) {
  PlaneWaveBasis basis;
  basis.lattice = lat;
  basis.recip = dual_basis(lat);
  basis.K = K;
  basis.kappa = kappa;
  basis.cutoff = cutoff > 0.0 ? cutoff : 10.0 * K.squaredNorm();
  if (K.squaredNorm() > basis.cutoff + 1e-9)
    throw std::invalid_argument("cutoff excludes the zero dual offset");

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(basis.recip.basis);
  const double sigma_min = svd.singularValues()(2);
  if (sigma_min <= 0.0) throw std::invalid_argument("degenerate lattice");
  const double reach = K.norm() + std::sqrt(basis.cutoff);
  const int bound = static_cast<int>(std::ceil(reach / sigma_min)) + 1;

  std::set<CoeffKey> selected;
  for (int a = -bound; a <= bound; ++a)
    for (int b = -bound; b <= bound; ++b)
      for (int c = -bound; c <= bound; ++c) {
        const Eigen::Vector3i m(a, b, c);
        if ((K + basis.recip.vector(m)).squaredNorm() <= basis.cutoff + 1e-9)
          selected.insert(coeff_key(m));
      }

  // Close under the K-invariant elements so borderline waves never break the
  // symmetry of the basis.
  const std::vector<GroupElement> stabilizer = k_invariant_elements(K, basis.recip);
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<CoeffKey> snapshot(selected.begin(), selected.end());
    for (const CoeffKey& key : snapshot)
      for (const GroupElement& g : stabilizer) {
        const Eigen::Vector3i image =
            act_on_planewave(g, Eigen::Vector3i(key[0], key[1], key[2]), K, basis.recip);
        if (selected.insert(coeff_key(image)).second) grew = true;
      }
  }

  if (selected.size() > 20000) throw std::runtime_error("cutoff too large");
  for (const CoeffKey& key : selected) basis.indices.emplace_back(key[0], key[1], key[2]);
  std::sort(basis.indices.begin(), basis.indices.end(), int_lex_less);
  if (basis.find(Eigen::Vector3i::Zero()) < 0)
    throw std::invalid_argument("cutoff excludes the zero dual offset");
  return basis;
}

HamiltonianMatrix build_hamiltonian(const PlaneWaveBasis& basis, const InvariantPotential& pot,
                                    double z) {
  const int n = basis.size();
  HamiltonianMatrix ham;
  ham.basis = basis;
  ham.z = z;
  ham.H = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    ham.H(i, i) = basis.momentum(i).squaredNorm();
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v = pot.coeff(basis.indices[i] - basis.indices[j]);
      if (v != 0.0) ham.H(i, j) += z * v;
    }
  }
  // The constant Fourier mode shifts the diagonal.
  const double v0 = pot.coeff(Eigen::Vector3i::Zero());
  if (v0 != 0.0) ham.H.diagonal().array() += z * v0;
  return ham;
}

EigenSystem eigensolve_matrix(const Eigen::MatrixXcd& H) {
  EigenSystem sys;
  sys.hnorm = H.norm();
  if ((H - H.adjoint()).norm() > 1e-10 * std::max(1.0, sys.hnorm))
    throw std::invalid_argument("matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigensolver failed to converge on matrix " + fingerprint(H));
  sys.values = es.eigenvalues();
  sys.vectors = es.eigenvectors();
  const double scale = std::max(1.0, sys.hnorm);
  const double residual = (H * sys.vectors - sys.vectors * sys.values.asDiagonal()).norm();
  const double ortho = (sys.vectors.adjoint() * sys.vectors -
                        Eigen::MatrixXcd::Identity(H.rows(), H.cols())).norm();
  if (residual > 1e-8 * scale || ortho > 1e-8 * std::sqrt(static_cast<double>(H.rows())))
    throw std::runtime_error("eigensolver accuracy check failed on matrix " + fingerprint(H));
  return sys;
}

EigenSystem eigensolve(const HamiltonianMatrix& ham) { return eigensolve_matrix(ham.H); }

Eigen::MatrixXcd planewave_action(const GroupElement& g, const PlaneWaveBasis& basis) {
  const int n = basis.size();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3i image = act_on_planewave(g, basis.indices[i], basis.K, basis.recip);
    const int target = basis.find(image);
    if (target < 0) throw std::runtime_error("basis is not closed under the group action");
    M(target, i) = 1.0;
  }
  return M;
}

SectorBasis sector_basis(const PlaneWaveBasis& basis, const AdmissibleSubgroup& sub,
                         const SectorLabel& sector) {
  const int n = basis.size();
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(n, n);
  for (size_t j = 0; j < sub.elements.size(); ++j) {
    const std::complex<double> chi = sector.char_at(sub.exponents[j]).value();
    P += std::conj(chi) * planewave_action(sub.elements[j], basis);
  }
  P /= static_cast<double>(sub.order());

  // P is an orthogonal projector: Hermitian with spectrum {0, 1}, so its
  // eigenvectors at eigenvalue 1 give an orthonormal sector basis.
  P = 0.5 * (P + P.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(P);
  if (es.info() != Eigen::Success) throw std::runtime_error("sector projector diagonalization failed");
  int dim = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 0.5) ++dim;
  if (dim == 0) throw std::runtime_error("sector empty at this cutoff");
  SectorBasis sb;
  sb.sector = sector;
  sb.Q = es.eigenvectors().rightCols(dim);  // eigenvalues ascend, ones sit last
  return sb;
}

SectorSpectrum sector_restrict(const HamiltonianMatrix& ham, const SectorBasis& sb) {
  if (ham.basis.kappa.norm() > 0.0)
    throw std::invalid_argument("sector restriction requires kappa = 0");
  Eigen::MatrixXcd Hs = sb.Q.adjoint() * ham.H * sb.Q;
  Hs = 0.5 * (Hs + Hs.adjoint()).eval();
  const EigenSystem sys = eigensolve_matrix(Hs);
  SectorSpectrum out;
  out.sector = sb.sector;
  out.dim = sb.dim();
  out.evals = sys.values;
  out.evecs_pw = sb.Q * sys.vectors;
  return out;
}

SectorSpectrum sector_restrict(const HamiltonianMatrix& ham, const AdmissibleSubgroup& sub,
                               const SectorLabel& sector) {
  return sector_restrict(ham, sector_basis(ham.basis, sub, sector));
}

std::vector<Cluster> cluster_eigenvalues(const Eigen::VectorXd& evals, double gap_threshold) {
  std::vector<Cluster> clusters;
  const int n = static_cast<int>(evals.size());
  int lo = 0;
  for (int i = 1; i <= n; ++i) {
    if (i == n || evals(i) - evals(i - 1) > gap_threshold) {
      Cluster c;
      c.lo = lo;
      c.hi = i;
      c.mean = evals.segment(lo, i - lo).mean();
      clusters.push_back(c);
      lo = i;
    }
  }
  return clusters;
}

DispersionResult dispersion_scan(const Lattice& lat, const InvariantPotential& pot, double z,
                                 const std::vector<Eigen::Vector3d>& path, int n_bands,
                                 double cutoff, int threads) {
  if (path.empty()) throw std::invalid_argument("empty dispersion path");
  if (n_bands < 1) throw std::invalid_argument("band count must be positive");
  double cut = cutoff;
  if (cut <= 0.0) {
    double maxsq = 0.0;
    for (const Eigen::Vector3d& p : path) maxsq = std::max(maxsq, p.squaredNorm());
    cut = 10.0 * std::max(maxsq, 1.0);
  }

  DispersionResult result;
  result.path = path;
  result.bands.resize(static_cast<Eigen::Index>(path.size()), n_bands);

  auto solve_range = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const PlaneWaveBasis basis = build_basis(lat, path[i], Eigen::Vector3d::Zero(), cut);
      if (basis.size() < n_bands)
        throw std::runtime_error("basis too small for requested band count");
      const EigenSystem sys = eigensolve(build_hamiltonian(basis, pot, z));
      result.bands.row(static_cast<Eigen::Index>(i)) = sys.values.head(n_bands).transpose();
    }
  };

  const int t = std::max(1, threads);
  if (t == 1) {
    solve_range(0, path.size());
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(t));
    for (int w = 0; w < t; ++w) {
      const size_t begin = path.size() * static_cast<size_t>(w) / static_cast<size_t>(t);
      const size_t end = path.size() * static_cast<size_t>(w + 1) / static_cast<size_t>(t);
      pool.emplace_back([&, begin, end, w] {
        try {
          solve_range(begin, end);
        } catch (...) {
          errors[static_cast<size_t>(w)] = std::current_exception();
        }
      });
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return result;
}

}  // namespace bloch
