#include "bloch/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace bloch {

namespace {

constexpr double kPi = std::numbers::pi;

std::string format_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Phase convention "generic": rotate the column so its largest-magnitude
// coefficient (ties to the smallest index) becomes real positive.
Eigen::VectorXcd phase_fixed(const Eigen::VectorXcd& v) {
  int pivot = 0;
  double best = std::abs(v(0));
  for (int i = 1; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best + 1e-12) {
      best = a;
      pivot = i;
    }
  }
  if (best == 0.0) throw std::runtime_error("cannot phase-fix a zero vector");
  return v * (std::conj(v(pivot)) / best);
}

double radical_inverse(int base, int k) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (k > 0) {
    r += f * static_cast<double>(k % base);
    k /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

double first_order_slope(const InvariantPotential& pot, const AdmissibleSubgroup& sub,
                         const SectorLabel& sector) {
  std::complex<double> s(0.0, 0.0);
  for (size_t j = 0; j < sub.elements.size(); ++j)
    s += sector.char_at(sub.exponents[j]).value() * pot.coeff(sub.m_table[j]);
  if (std::abs(s.imag()) > 1e-12 * (1.0 + pot.sum_abs_coeff()))
    throw std::runtime_error("potential not invariant");
  return s.real();
}

std::vector<int> SplittingTable::pattern() const {
  std::vector<int> p;
  for (const SlopeGroup& g : groups) p.push_back(static_cast<int>(g.sectors.size()));
  return p;
}

SplittingTable splitting_table(const InvariantPotential& pot, const AdmissibleSubgroup& sub,
                               double tol) {
  SplittingTable table;
  for (const SectorLabel& s : sub.sectors) table.slopes.push_back(first_order_slope(pot, sub, s));

  std::vector<int> order(table.slopes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return table.slopes[a] < table.slopes[b]; });

  SlopeGroup current;
  for (size_t k = 0; k < order.size(); ++k) {
    if (!current.sectors.empty() &&
        table.slopes[order[k]] - table.slopes[current.sectors.back()] > tol) {
      table.groups.push_back(current);
      current = SlopeGroup{};
    }
    current.sectors.push_back(order[k]);
  }
  if (!current.sectors.empty()) table.groups.push_back(current);
  for (SlopeGroup& g : table.groups) {
    double mean = 0.0;
    for (int s : g.sectors) mean += table.slopes[s];
    g.slope = mean / static_cast<double>(g.sectors.size());
    std::sort(g.sectors.begin(), g.sectors.end());
  }
  return table;
}

namespace {

std::vector<std::vector<int>> canonical_partition(std::vector<std::vector<int>> parts) {
  for (auto& p : parts) std::sort(p.begin(), p.end());
  std::sort(parts.begin(), parts.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) { return a.front() < b.front(); });
  return parts;
}

bool near_point(const Eigen::Vector3d& k, double x, double y, double z) {
  return (k - Eigen::Vector3d(x, y, z)).lpNorm<Eigen::Infinity>() <= 1e-9;
}

// Reference slope partitions at the named vertices, as predicates on labels.
std::vector<std::vector<int>> reference_partition(const AdmissibleSubgroup& sub) {
  std::vector<std::vector<int>> parts;
  const auto& sectors = sub.sectors;
  auto collect = [&](auto&& pred) {
    std::vector<int> ids;
    for (size_t i = 0; i < sectors.size(); ++i)
      if (pred(sub.exponents[i])) ids.push_back(static_cast<int>(i));
    if (!ids.empty()) parts.push_back(std::move(ids));
  };
  const LatticeName name = sub.lattice.name;
  if (name == LatticeName::SimpleCubic && near_point(sub.K, kPi, kPi, kPi) &&
      sub.orders == std::vector<int>{2, 2, 2}) {
    for (int count = 0; count <= 3; ++count)
      collect([count](const std::vector<int>& p) {
        return p[0] + p[1] + p[2] == count;
      });
    return parts;
  }
  if (name == LatticeName::BodyCenteredCubic && near_point(sub.K, kPi, kPi, kPi) &&
      sub.orders == std::vector<int>{2, 2}) {
    collect([](const std::vector<int>& p) { return p[0] == 0 && p[1] == 0; });
    collect([](const std::vector<int>& p) { return p[0] != 0 || p[1] != 0; });
    return parts;
  }
  if (name == LatticeName::BodyCenteredCubic && near_point(sub.K, 0.0, 0.0, 2.0 * kPi) &&
      sub.orders == std::vector<int>{3, 2}) {
    collect([](const std::vector<int>& p) { return p[0] == 0 && p[1] == 0; });
    collect([](const std::vector<int>& p) { return p[0] != 0 && p[1] == 0; });
    collect([](const std::vector<int>& p) { return p[1] == 1; });
    return parts;
  }
  if (name == LatticeName::FaceCenteredCubic && near_point(sub.K, 0.0, 2.0 * kPi, kPi) &&
      sub.orders == std::vector<int>{4}) {
    collect([](const std::vector<int>& p) { return p[0] == 0; });
    collect([](const std::vector<int>& p) { return p[0] == 1 || p[0] == 3; });
    collect([](const std::vector<int>& p) { return p[0] == 2; });
    return parts;
  }
  return {};
}

}  // namespace

GenericityReport genericity_check(const InvariantPotential& pot, const AdmissibleSubgroup& sub) {
  GenericityReport report;
  const SplittingTable table = splitting_table(pot, sub);
  std::vector<std::vector<int>> observed;
  for (const SlopeGroup& g : table.groups) observed.push_back(g.sectors);
  report.observed = canonical_partition(observed);

  report.min_margin = std::numeric_limits<double>::infinity();
  for (size_t a = 0; a < table.groups.size(); ++a)
    for (size_t b = a + 1; b < table.groups.size(); ++b)
      report.min_margin =
          std::min(report.min_margin, std::abs(table.groups[a].slope - table.groups[b].slope));
  if (table.groups.size() < 2) report.min_margin = 0.0;

  const std::vector<std::vector<int>> expected = reference_partition(sub);
  if (expected.empty()) {
    report.has_reference = false;
    report.pass = true;
    report.note = "no reference partition for this lattice and K; reporting observed groups";
    return report;
  }
  report.has_reference = true;
  report.expected = canonical_partition(expected);
  report.pass = (report.observed == report.expected) && report.min_margin > 1e-9;
  if (!report.pass) report.note = "slope partition differs from the generic one at this vertex";
  return report;
}

double numeric_slope(const InvariantPotential& pot, const AdmissibleSubgroup& sub,
                     const SectorLabel& sector, double h, double cutoff) {
  const PlaneWaveBasis basis =
      build_basis(sub.lattice, sub.K, Eigen::Vector3d::Zero(), cutoff);
  const SectorBasis sb = sector_basis(basis, sub, sector);
  const double target = sub.K.squaredNorm();
  auto level = [&](double z) {
    const SectorSpectrum ss = sector_restrict(build_hamiltonian(basis, pot, z), sb);
    int best = 0;
    for (int i = 1; i < ss.evals.size(); ++i)
      if (std::abs(ss.evals(i) - target) < std::abs(ss.evals(best) - target)) best = i;
    return ss.evals(best);
  };
  auto central = [&](double step) { return (level(step) - level(-step)) / (2.0 * step); };
  const double coarse = central(h);
  const double fine = central(0.5 * h);
  if (std::abs(coarse - fine) > 1e-2 * (1.0 + std::abs(fine)))
    throw std::runtime_error("finite-difference unstable");
  return fine;
}

ClusterBasis degenerate_cluster_basis(const InvariantPotential& pot, const AdmissibleSubgroup& sub,
                                      double z, const std::vector<int>& group_sectors,
                                      double cutoff) {
  if (group_sectors.empty()) throw std::invalid_argument("empty sector group");
  std::vector<int> group = group_sectors;
  std::sort(group.begin(), group.end());

  ClusterBasis cb;
  cb.z = z;
  cb.basis = build_basis(sub.lattice, sub.K, Eigen::Vector3d::Zero(), cutoff);
  const HamiltonianMatrix ham = build_hamiltonian(cb.basis, pot, z);

  // Full spectrum sector by sector, pooled for cluster location.
  std::vector<SectorSpectrum> spectra;
  for (const SectorLabel& s : sub.sectors) spectra.push_back(sector_restrict(ham, sub, s));
  struct Entry {
    double eval;
    int sector;
    int index;
  };
  std::vector<Entry> pool;
  for (size_t s = 0; s < spectra.size(); ++s)
    for (int i = 0; i < spectra[s].evals.size(); ++i)
      pool.push_back({spectra[s].evals(i), static_cast<int>(s), i});
  std::sort(pool.begin(), pool.end(), [](const Entry& a, const Entry& b) { return a.eval < b.eval; });
  Eigen::VectorXd pooled(pool.size());
  for (size_t i = 0; i < pool.size(); ++i) pooled(static_cast<Eigen::Index>(i)) = pool[i].eval;

  double predicted_slope = 0.0;
  for (int s : group) predicted_slope += first_order_slope(pot, sub, sub.sectors[s]);
  predicted_slope /= static_cast<double>(group.size());
  const double predicted = sub.K.squaredNorm() + z * predicted_slope;

  const double threshold = default_gap_threshold(ham.H.norm());
  const std::vector<Cluster> clusters = cluster_eigenvalues(pooled, threshold);
  size_t target = 0;
  for (size_t c = 1; c < clusters.size(); ++c)
    if (std::abs(clusters[c].mean - predicted) < std::abs(clusters[target].mean - predicted))
      target = c;
  const Cluster& cl = clusters[target];

  // The located cluster must consist of exactly one eigenvalue from each
  // sector of the slope group.
  std::vector<int> found;
  std::vector<int> index_in_sector(sub.sectors.size(), -1);
  for (int i = cl.lo; i < cl.hi; ++i) {
    found.push_back(pool[static_cast<size_t>(i)].sector);
    index_in_sector[static_cast<size_t>(pool[static_cast<size_t>(i)].sector)] =
        pool[static_cast<size_t>(i)].index;
  }
  std::sort(found.begin(), found.end());
  if (found != group) {
    std::ostringstream os;
    os << "multiplicity anomaly at z=" << format_double(z) << ": expected " << group.size()
       << " states from the slope group, ";
    if (found.size() == group.size())
      os << "but the nearest cluster holds states from different sectors";
    else
      os << "found " << found.size() << " in the nearest cluster";
    throw AnomalyError(os.str());
  }

  cb.mu = cl.mean;
  cb.cluster_width = pool[static_cast<size_t>(cl.hi - 1)].eval - pool[static_cast<size_t>(cl.lo)].eval;
  double gap = std::numeric_limits<double>::infinity();
  if (cl.lo > 0) gap = std::min(gap, pool[static_cast<size_t>(cl.lo)].eval - pool[static_cast<size_t>(cl.lo - 1)].eval);
  if (static_cast<size_t>(cl.hi) < pool.size())
    gap = std::min(gap, pool[static_cast<size_t>(cl.hi)].eval - pool[static_cast<size_t>(cl.hi - 1)].eval);
  cb.gap = gap;

  // The coupling constant is inside its validated range only while the
  // cluster is separated from the rest of the spectrum by ten times its own
  // width; beyond that, perturbing off the cluster is meaningless.
  if (!(cb.gap > 10.0 * cb.cluster_width)) {
    std::ostringstream os;
    os << "multiplicity anomaly at z=" << format_double(z)
       << ": cluster of width " << cb.cluster_width
       << " is not separated from the rest of the spectrum (gap " << cb.gap << ")";
    throw AnomalyError(os.str());
  }

  const int m = static_cast<int>(group.size());
  cb.vectors.resize(cb.basis.size(), m);
  cb.evals.resize(m);

  // Representation-type detection for the special phase conventions.
  const bool u22_triple = (m == 3) && (sub.orders == std::vector<int>{2, 2}) &&
                          std::all_of(group.begin(), group.end(), [&](int s) {
                            const auto& p = sub.exponents[static_cast<size_t>(s)];
                            return p[0] != 0 || p[1] != 0;
                          });
  const bool u4_pair = (m == 2) && (sub.orders == std::vector<int>{4}) &&
                       sub.exponents[static_cast<size_t>(group[0])][0] +
                               sub.exponents[static_cast<size_t>(group[1])][0] ==
                           4;

  // Column-in-sector verification against the generator actions.
  std::vector<Eigen::MatrixXcd> gen_action;
  for (const GroupElement& g : sub.generators) gen_action.push_back(planewave_action(g, cb.basis));
  auto check_sector = [&](const Eigen::VectorXcd& v, const SectorLabel& s, const char* what) {
    for (size_t i = 0; i < gen_action.size(); ++i) {
      const std::complex<double> w = s.omega[i].value();
      if ((gen_action[i] * v - w * v).norm() > 1e-8)
        throw std::runtime_error(std::string("cluster state failed to land in its sector (") +
                                 what + ")");
    }
  };

  bool rotation_ok = false;
  if (u22_triple) {
    Eigen::Vector3i off;
    rotation_ok = cb.basis.recip.try_coords(octa_r().apply(sub.K) - sub.K, off);
  }

  if (u22_triple && rotation_ok) {
    // Seed in the sector with omega(gen1) = -1, omega(gen2) = +1, then cycle
    // with the coordinate rotation; the sectors are rotated along.
    int seed = -1;
    for (int s : group) {
      const auto& p = sub.exponents[static_cast<size_t>(s)];
      if (p[0] == 1 && p[1] == 0) seed = s;
    }
    if (seed < 0) seed = group.front();
    const Eigen::MatrixXcd R = planewave_action(octa_r(), cb.basis);
    SectorLabel s0 = sub.sectors[static_cast<size_t>(seed)];
    Eigen::VectorXcd v =
        phase_fixed(spectra[static_cast<size_t>(seed)].evecs_pw.col(index_in_sector[static_cast<size_t>(seed)]));
    SectorLabel current = s0;
    for (int c = 0; c < 3; ++c) {
      check_sector(v, current, "rotation-triple");
      cb.sectors.push_back(current);
      cb.vectors.col(c) = v;
      const int sidx = sub.sector_index(current);
      cb.evals(c) = spectra[static_cast<size_t>(sidx)].evals(index_in_sector[static_cast<size_t>(sidx)]);
      if (c < 2) {
        v = R * v;
        current = mapped_sector(sub, current, octa_r());
      }
    }
    cb.tag = "rotation-triple";
    return cb;
  }

  if (u4_pair) {
    // Seed in the omega = i sector; the partner is its antiunitary image
    // under T f = conj(f(-x)), i.e. coefficient-wise conjugation.
    const int seed = sub.exponents[static_cast<size_t>(group[0])][0] == 1 ? group[0] : group[1];
    const int other = seed == group[0] ? group[1] : group[0];
    Eigen::VectorXcd v =
        phase_fixed(spectra[static_cast<size_t>(seed)].evecs_pw.col(index_in_sector[static_cast<size_t>(seed)]));
    Eigen::VectorXcd w = v.conjugate();
    check_sector(v, sub.sectors[static_cast<size_t>(seed)], "conjugation-pair");
    check_sector(w, sub.sectors[static_cast<size_t>(other)], "conjugation-pair");
    cb.sectors = {sub.sectors[static_cast<size_t>(seed)], sub.sectors[static_cast<size_t>(other)]};
    cb.vectors.col(0) = v;
    cb.vectors.col(1) = w;
    cb.evals(0) = spectra[static_cast<size_t>(seed)].evals(index_in_sector[static_cast<size_t>(seed)]);
    cb.evals(1) = spectra[static_cast<size_t>(other)].evals(index_in_sector[static_cast<size_t>(other)]);
    cb.tag = "conjugation-pair";
    return cb;
  }

  for (int c = 0; c < m; ++c) {
    const int s = group[static_cast<size_t>(c)];
    Eigen::VectorXcd v =
        phase_fixed(spectra[static_cast<size_t>(s)].evecs_pw.col(index_in_sector[static_cast<size_t>(s)]));
    check_sector(v, sub.sectors[static_cast<size_t>(s)], "generic");
    cb.sectors.push_back(sub.sectors[static_cast<size_t>(s)]);
    cb.vectors.col(c) = v;
    cb.evals(c) = spectra[static_cast<size_t>(s)].evals(index_in_sector[static_cast<size_t>(s)]);
  }
  cb.tag = "generic";
  return cb;
}

Eigen::Vector3cd GradientTable::entry(int j, int l) const {
  return Eigen::Vector3cd(G[0](j, l), G[1](j, l), G[2](j, l));
}

double GradientTable::max_norm() const {
  double best = 0.0;
  for (int j = 0; j < G[0].rows(); ++j)
    for (int l = 0; l < G[0].cols(); ++l) best = std::max(best, entry(j, l).norm());
  return best;
}

GradientTable gradient_elements(const ClusterBasis& cb) {
  const int n = cb.basis.size();
  const int m = static_cast<int>(cb.vectors.cols());
  GradientTable gt;
  gt.K = cb.basis.K;
  Eigen::MatrixX3d momenta(n, 3);
  for (int i = 0; i < n; ++i) momenta.row(i) = cb.basis.momentum(i).transpose();
  const std::complex<double> iunit(0.0, 1.0);
  for (int a = 0; a < 3; ++a) {
    Eigen::MatrixXcd raw =
        cb.vectors.adjoint() * (momenta.col(a).asDiagonal() * cb.vectors) * iunit;
    if ((raw + raw.adjoint()).norm() > 1e-10 * (1.0 + gt.K.norm()) * std::sqrt(double(m)))
      throw std::runtime_error("gradient table failed the anti-Hermitian check");
    gt.G[static_cast<size_t>(a)] = 0.5 * (raw - raw.adjoint().eval());
  }
  return gt;
}

Eigen::MatrixXcd effective_matrix(const GradientTable& gt, const Eigen::Vector3d& kappa) {
  const std::complex<double> scale(0.0, -2.0);
  Eigen::MatrixXcd M = scale * (kappa(0) * gt.G[0] + kappa(1) * gt.G[1] + kappa(2) * gt.G[2]);
  return 0.5 * (M + M.adjoint().eval());
}

std::string to_string(SingularityType t) {
  switch (t) {
    case SingularityType::Quadratic: return "quadratic";
    case SingularityType::Valley: return "valley";
    case SingularityType::Weyl3: return "weyl3";
    case SingularityType::Unclassified: return "unclassified";
  }
  return "unclassified";
}

double weyl_polynomial_error(const GradientTable& gt, std::complex<double> alpha,
                             const std::vector<Eigen::Vector3d>& kappas) {
  const double a2 = std::norm(alpha);
  const double a3 = std::pow(std::abs(alpha), 3);
  const double im3 = std::pow(alpha, 3).imag();
  double worst = 0.0;
  for (const Eigen::Vector3d& kappa : kappas) {
    const Eigen::MatrixXcd M = effective_matrix(gt, kappa);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
    const double k2 = kappa.squaredNorm();
    const double k3 = std::pow(kappa.norm(), 3);
    const double prod = kappa(0) * kappa(1) * kappa(2);
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      const double mu = es.eigenvalues()(i);
      const double p = mu * mu * mu - 4.0 * a2 * k2 * mu + 16.0 * im3 * prod;
      const double denom =
          std::abs(mu * mu * mu) + 4.0 * a2 * k2 * std::abs(mu) + 16.0 * a3 * k3 + 1e-300;
      worst = std::max(worst, std::abs(p) / denom);
    }
  }
  return worst;
}

std::vector<Eigen::Vector3d> halton_directions(int count, int start) {
  std::vector<Eigen::Vector3d> dirs;
  for (int k = start; k < start + count; ++k) {
    const double u = radical_inverse(2, k);
    const double v = radical_inverse(3, k);
    const double theta = std::acos(1.0 - 2.0 * u);
    const double phi = 2.0 * kPi * v;
    dirs.emplace_back(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                      std::cos(theta));
  }
  return dirs;
}

Classification classify(const ClusterBasis& cb, const GradientTable& gt) {
  Classification result;
  const int m = static_cast<int>(cb.vectors.cols());
  result.multiplicity = m;
  result.max_gradient_norm = gt.max_norm();
  const double tol = 1e-8 * gt.K.norm();

  if (result.max_gradient_norm < tol) {
    result.type = SingularityType::Quadratic;
    result.detail = "all gradient matrix elements vanish; dispersion is quadratic to leading order";
    return result;
  }

  double max_diag = 0.0;
  for (int j = 0; j < m; ++j) max_diag = std::max(max_diag, gt.entry(j, j).norm());
  if (max_diag >= tol) {
    result.detail = "nonvanishing diagonal gradient element";
    return result;
  }

  if (m == 2) {
    const Eigen::Vector3cd g12 = gt.entry(0, 1);
    int axis = -1;
    bool single = true;
    for (int a = 0; a < 3; ++a) {
      if (std::abs(g12(a)) >= tol) {
        if (axis >= 0) single = false;
        axis = a;
      }
    }
    if (single && axis >= 0) {
      result.type = SingularityType::Valley;
      result.alpha = g12(axis);
      result.axis = axis;
      result.velocity = 2.0 * std::abs(result.alpha);
      result.detail = "two-fold cluster with a single-axis gradient coupling";
    } else {
      result.detail = "two-fold cluster with a multi-axis gradient coupling";
    }
    return result;
  }

  if (m == 3) {
    const std::complex<double> alpha = gt.entry(0, 1)(2);
    const Eigen::Vector3cd t12(0.0, 0.0, alpha);
    const Eigen::Vector3cd t13(0.0, -std::conj(alpha), 0.0);
    const Eigen::Vector3cd t23(alpha, 0.0, 0.0);
    const bool matches = (gt.entry(0, 1) - t12).norm() < tol &&
                         (gt.entry(0, 2) - t13).norm() < tol &&
                         (gt.entry(1, 2) - t23).norm() < tol;
    if (!matches) {
      result.detail = "gradient table does not match the three-fold template";
      return result;
    }
    result.alpha = alpha;
    result.im_alpha_cubed = std::pow(alpha, 3).imag();
    result.polynomial_rel_err = weyl_polynomial_error(gt, alpha, halton_directions(20));
    if (result.polynomial_rel_err <= 1e-8) {
      result.type = SingularityType::Weyl3;
      result.detail = "three-fold conical point";
    } else {
      result.detail = "three-fold template matched but the characteristic polynomial check failed";
    }
    return result;
  }

  result.detail = "no template available at this multiplicity";
  return result;
}

FitReport validate_effective(const InvariantPotential& pot, const ClusterBasis& cb,
                             int directions, int magnitudes) {
  const GradientTable gt = gradient_elements(cb);
  const int m = static_cast<int>(cb.vectors.cols());
  const double window = 0.5 * cb.gap;
  const double knorm = cb.basis.K.norm();
  const std::vector<Eigen::Vector3d> dirs = halton_directions(directions);

  FitReport report;
  std::vector<double> xs, ys;  // per-evaluation log-log samples
  for (int i = 0; i < magnitudes; ++i) {
    const double t = knorm * std::pow(10.0, -3.0 + 0.375 * i);
    FitPoint point;
    point.magnitude = t;
    for (const Eigen::Vector3d& d : dirs) {
      const Eigen::Vector3d kappa = t * d;
      PlaneWaveBasis shifted = cb.basis;
      shifted.kappa = kappa;
      const HamiltonianMatrix ham = build_hamiltonian(shifted, pot, cb.z);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ham.H, Eigen::EigenvaluesOnly);

      std::vector<double> selected;
      for (int k = 0; k < es.eigenvalues().size(); ++k) {
        const double lambda = es.eigenvalues()(k);
        if (std::abs(lambda - cb.mu) <= window) selected.push_back(lambda);
      }
      if (static_cast<int>(selected.size()) != m) {
        ++report.excluded_evaluations;
        continue;
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ms(effective_matrix(gt, kappa),
                                                         Eigen::EigenvaluesOnly);
      double resid = 0.0;
      for (int k = 0; k < m; ++k)
        resid = std::max(resid, std::abs(selected[static_cast<size_t>(k)] -
                                         (cb.mu + ms.eigenvalues()(k))));
      point.worst_residual = std::max(point.worst_residual, resid);
      ++point.directions_used;
      if (resid > 0.0) {
        xs.push_back(std::log10(t));
        ys.push_back(std::log10(resid));
      }
    }
    point.excluded = point.directions_used == 0;
    report.points.push_back(point);
  }

  if (xs.size() < 2) throw std::runtime_error("too few usable evaluations for the scaling fit");
  double xbar = 0.0, ybar = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= static_cast<double>(xs.size());
  ybar /= static_cast<double>(xs.size());
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - xbar) * (ys[i] - ybar);
    den += (xs[i] - xbar) * (xs[i] - xbar);
  }
  report.exponent = num / den;
  return report;
}

}  // namespace bloch
