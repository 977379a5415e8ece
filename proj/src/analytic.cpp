#include "bloch/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace bloch {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

/// Evaluate a polynomial given by its full ascending coefficient vector.
std::complex<double> eval_full(const Eigen::VectorXcd& full, std::complex<double> x) {
  std::complex<double> acc{0.0, 0.0};
  for (Eigen::Index i = full.size(); i-- > 0;) acc = acc * x + full(i);
  return acc;
}

/// Strip exact trailing zeros so the nominal degree is the true one.
Eigen::VectorXcd trim_exact_zeros(const Eigen::VectorXcd& full) {
  Eigen::Index n = full.size();
  while (n > 0 && full(n - 1) == std::complex<double>{0.0, 0.0}) --n;
  return full.head(n);
}

}  // namespace

Eigen::VectorXcd MonicPolynomial::full() const {
  Eigen::VectorXcd out(lower.size() + 1);
  out.head(lower.size()) = lower;
  out(lower.size()) = std::complex<double>{1.0, 0.0};
  return out;
}

std::complex<double> MonicPolynomial::eval(std::complex<double> x) const {
  std::complex<double> acc{1.0, 0.0};
  for (Eigen::Index i = lower.size(); i-- > 0;) acc = acc * x + lower(i);
  return acc;
}

MonicPolynomial MonicPolynomial::from_roots(const std::vector<std::complex<double>>& roots) {
  Eigen::VectorXcd full = Eigen::VectorXcd::Ones(1);
  for (const std::complex<double>& r : roots) {
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(full.size() + 1);
    next.tail(full.size()) += full;
    next.head(full.size()) -= r * full;
    full = std::move(next);
  }
  MonicPolynomial p;
  p.lower = full.head(full.size() - 1);
  return p;
}

Eigen::VectorXcd poly_derivative(const Eigen::VectorXcd& full) {
  if (full.size() <= 1) return Eigen::VectorXcd{};
  Eigen::VectorXcd out(full.size() - 1);
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out(i) = static_cast<double>(i + 1) * full(i + 1);
  return out;
}

SylvesterBlock generalized_sylvester(const std::vector<Eigen::VectorXcd>& polys) {
  if (polys.size() < 2)
    throw std::invalid_argument("Sylvester block needs at least two polynomials");

  SylvesterBlock block;
  block.sources.reserve(polys.size());
  int n = 0;
  for (const Eigen::VectorXcd& raw : polys) {
    Eigen::VectorXcd p = trim_exact_zeros(raw);
    if (p.size() == 0)
      throw std::invalid_argument("zero polynomial in Sylvester block");
    n += static_cast<int>(p.size()) - 1;
    block.sources.push_back(std::move(p));
  }
  block.total_degree = n;

  int cols = 0;
  for (const Eigen::VectorXcd& p : block.sources)
    cols += n - (static_cast<int>(p.size()) - 1);

  block.matrix = Eigen::MatrixXcd::Zero(n, cols);
  int col = 0;
  for (const Eigen::VectorXcd& p : block.sources) {
    const int deg = static_cast<int>(p.size()) - 1;
    for (int shift = 0; shift < n - deg; ++shift, ++col)
      block.matrix.block(shift, col, p.size(), 1) = p;
  }
  return block;
}

int numeric_rank(const Eigen::MatrixXcd& m, double rel_tol) {
  if (!(rel_tol > 0.0) || rel_tol > 1e-3)
    throw std::invalid_argument("rank tolerance must lie in (0, 1e-3]");
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const Eigen::VectorXd& sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma(0) == 0.0) return 0;
  const double cut = rel_tol * sigma(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cut) ++rank;
  return rank;
}

MultiplicityProfile multiplicity_profile(const MonicPolynomial& a) {
  const int n = a.degree();
  if (n < 1) throw std::invalid_argument("profile needs degree at least 1");

  // Degrees of gcd(A, A', ..., A^(j)) from Sylvester-block ranks, with the
  // rank certified across a decade sweep of the relative tolerance.
  static constexpr double kTols[] = {1e-8, 1e-9, 1e-10, 1e-11, 1e-12};

  MultiplicityProfile out;
  out.d.assign(static_cast<size_t>(n) + 1, 0);
  out.d[0] = n;

  // Each chain element is rescaled to be monic: gcd degrees are unchanged by
  // units, and removing the factorial growth of derivative coefficients keeps
  // the Sylvester singular values well separated across the tolerance sweep.
  const auto monicized = [](Eigen::VectorXcd p) {
    if (p.size() > 0) p /= p(p.size() - 1);
    return p;
  };

  std::vector<Eigen::VectorXcd> chain{a.full()};
  for (int j = 1; j <= n; ++j) {
    chain.push_back(monicized(poly_derivative(chain.back())));
    if (out.d[static_cast<size_t>(j - 1)] == 0) continue;  // gcd already constant

    const SylvesterBlock block = generalized_sylvester(chain);
    int rank = -1;
    for (double tol : kTols) {
      const int r = numeric_rank(block.matrix, tol);
      if (rank < 0) rank = r;
      if (r != rank) throw std::runtime_error("ill-conditioned profile");
    }
    out.d[static_cast<size_t>(j)] = block.total_degree - rank;
  }

  out.rho.assign(static_cast<size_t>(n), 0);
  int weighted = 0;
  for (int j = 1; j <= n; ++j) {
    const int dm = out.d[static_cast<size_t>(j - 1)];
    const int dj = out.d[static_cast<size_t>(j)];
    const int dp = j + 1 <= n ? out.d[static_cast<size_t>(j + 1)] : 0;
    const int rho = (dm - dj) - (dj - dp);
    if (rho < 0) throw std::runtime_error("ill-conditioned profile");
    out.rho[static_cast<size_t>(j - 1)] = rho;
    weighted += j * rho;
  }
  if (weighted != n) throw std::runtime_error("ill-conditioned profile");
  return out;
}

std::complex<double> residue_root(const MonicPolynomial& a, std::complex<double> center,
                                  double radius, int multiplicity) {
  if (a.degree() < 1) throw std::invalid_argument("residue extraction needs degree at least 1");
  if (!(radius > 0.0)) throw std::invalid_argument("contour radius must be positive");
  if (multiplicity < 1) throw std::invalid_argument("multiplicity must be at least 1");

  const Eigen::VectorXcd full = a.full();
  const Eigen::VectorXcd dfull = poly_derivative(full);

  // Trapezoid quadrature of (1/2 pi i) * integral of f(x) dx on the circle:
  // with x = center + radius e^{i theta} the rule is (1/N) sum f(x_k)(x_k - center).
  const auto sweep = [&](int nodes, std::complex<double>& root,
                         std::complex<double>& winding) -> bool {
    root = {0.0, 0.0};
    winding = {0.0, 0.0};
    for (int k = 0; k < nodes; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / nodes;
      const std::complex<double> x = center + radius * std::exp(kI * theta);
      const std::complex<double> ax = eval_full(full, x);
      if (std::abs(ax) <= 1e-12) return false;
      const std::complex<double> log_deriv = eval_full(dfull, x) / ax * (x - center);
      winding += log_deriv;
      root += x * log_deriv;
    }
    root /= static_cast<double>(nodes) * multiplicity;
    winding /= static_cast<double>(nodes);
    return true;
  };

  std::complex<double> root, winding;
  if (!sweep(256, root, winding))
    throw std::runtime_error("contour passes too close to a root");

  std::complex<double> refined = root;
  int nodes = 256;
  while (true) {
    nodes *= 2;
    if (nodes > (1 << 20)) throw std::runtime_error("contour quadrature failed to converge");
    std::complex<double> prev = refined;
    if (!sweep(nodes, refined, winding))
      throw std::runtime_error("contour passes too close to a root");
    if (std::abs(refined - prev) < 1e-10) break;
  }

  const double count = std::round(winding.real());
  if (std::abs(winding - std::complex<double>{count, 0.0}) > 1e-6 ||
      static_cast<int>(count) != multiplicity)
    throw std::runtime_error(
        "root count inside the contour does not match the requested multiplicity");
  return refined;
}

Eigen::MatrixXcd riesz_projector(const Eigen::MatrixXcd& t, std::complex<double> center,
                                 double radius) {
  if (t.rows() != t.cols()) throw std::invalid_argument("projector needs a square matrix");
  if (!(radius > 0.0)) throw std::invalid_argument("contour radius must be positive");

  {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(t, /*computeEigenvectors=*/false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (std::abs(std::abs(es.eigenvalues()(i) - center) - radius) < 1e-8)
        throw std::runtime_error("contour grazes spectrum");
  }

  const Eigen::Index n = t.rows();
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);

  // -(1/2 pi i) * integral of (T - x)^{-1} dx  ->  -(R/N) sum e^{i theta_k} (T - x_k)^{-1};
  // node doubling reuses the previous level through the shared half of the nodes.
  const auto partial_sum = [&](int nodes, int stride, int offset) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
    for (int k = offset; k < nodes; k += stride) {
      const double theta = 2.0 * std::numbers::pi * k / nodes;
      const std::complex<double> phase = std::exp(kI * theta);
      acc += phase * (t - (center + radius * phase) * eye).partialPivLu().solve(eye);
    }
    return acc;
  };

  int nodes = 32;
  Eigen::MatrixXcd sum = partial_sum(nodes, 1, 0);
  Eigen::MatrixXcd proj = -(radius / nodes) * sum;
  while (true) {
    nodes *= 2;
    if (nodes > (1 << 16)) throw std::runtime_error("projector quadrature failed to converge");
    sum += partial_sum(nodes, 2, 1);
    Eigen::MatrixXcd next = -(radius / nodes) * sum;
    const double drift = (next - proj).norm();
    proj = std::move(next);
    if (drift < 1e-10 * std::max(1.0, proj.norm())) break;
  }
  return proj;
}

namespace {

struct TrackedCluster {
  double mean = 0.0;
  int mult = 0;
  Eigen::MatrixXcd vecs;  // orthonormal columns spanning the cluster eigenspace
};

struct SampleData {
  double z = 0.0;
  Eigen::MatrixXcd t;
  std::vector<TrackedCluster> clusters;  // ascending mean
};

std::string pattern_string(const SampleData& s) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < s.clusters.size(); ++i)
    os << (i ? "," : "") << s.clusters[i].mult;
  os << ")";
  return os.str();
}

SampleData evaluate_sample(const std::function<Eigen::MatrixXcd(double)>& family, double z,
                           double lo, double hi, double gap_threshold) {
  SampleData s;
  s.z = z;
  s.t = family(z);
  if (s.t.rows() != s.t.cols()) throw std::invalid_argument("family sample is not square");
  const double scale = std::max(1.0, s.t.norm());
  if ((s.t - s.t.adjoint()).norm() > 1e-10 * scale)
    throw std::invalid_argument("family sample is not Hermitian");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.t);
  const double threshold =
      gap_threshold > 0.0 ? gap_threshold : std::max(1e-7, 1e-6 * s.t.norm());

  std::vector<int> selected;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double lambda = es.eigenvalues()(i);
    if (lambda >= lo && lambda <= hi) selected.push_back(i);
  }
  size_t start = 0;
  while (start < selected.size()) {
    size_t stop = start + 1;
    while (stop < selected.size() &&
           es.eigenvalues()(selected[stop]) - es.eigenvalues()(selected[stop - 1]) <= threshold)
      ++stop;
    TrackedCluster c;
    c.mult = static_cast<int>(stop - start);
    c.vecs.resize(s.t.rows(), c.mult);
    double mean = 0.0;
    for (size_t k = start; k < stop; ++k) {
      mean += es.eigenvalues()(selected[k]);
      c.vecs.col(static_cast<Eigen::Index>(k - start)) = es.eigenvectors().col(selected[k]);
    }
    c.mean = mean / c.mult;
    s.clusters.push_back(std::move(c));
    start = stop;
  }
  return s;
}

/// Spectral norm of the difference of two equal-rank orthoprojectors through
/// the principal angles: ||pi_a - pi_b|| = sqrt(1 - sigma_min(Va^H Vb)^2).
double projector_jump(const TrackedCluster& a, const TrackedCluster& b) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a.vecs.adjoint() * b.vecs);
  const double smin = svd.singularValues().minCoeff();
  return std::sqrt(std::max(0.0, 1.0 - smin * smin));
}

/// 1-1 match of the clusters of two samples: equal multiplicities, partner
/// chosen by the first-order trace prediction, continuity certified by the
/// Kato criterion on the projector jump.
std::optional<std::vector<int>> match_clusters(const SampleData& a, const SampleData& b) {
  if (a.clusters.size() != b.clusters.size()) return std::nullopt;
  const size_t count = a.clusters.size();

  std::vector<int> mapping(count, -1);
  std::vector<bool> used(count, false);
  const Eigen::MatrixXcd dt = b.t - a.t;
  for (size_t i = 0; i < count; ++i) {
    const TrackedCluster& ca = a.clusters[i];
    const double predicted =
        ca.mean + (ca.vecs.adjoint() * dt * ca.vecs).trace().real() / ca.mult;
    int best = -1;
    double best_dist = 0.0;
    for (size_t j = 0; j < count; ++j) {
      if (used[j] || b.clusters[j].mult != ca.mult) continue;
      const double dist = std::abs(predicted - b.clusters[j].mean);
      if (best < 0 || dist < best_dist) {
        best = static_cast<int>(j);
        best_dist = dist;
      }
    }
    if (best < 0) return std::nullopt;
    if (projector_jump(ca, b.clusters[static_cast<size_t>(best)]) >= 0.999)
      return std::nullopt;
    used[static_cast<size_t>(best)] = true;
    mapping[i] = best;
  }
  return mapping;
}

struct LinkResult {
  bool ok = false;
  std::vector<int> mapping;  // a-cluster index -> b-cluster index
  double fail_z = 0.0;
  double resolution = 0.0;
  std::string detail;
};

LinkResult certify_link(const std::function<Eigen::MatrixXcd(double)>& family,
                        const SampleData& a, const SampleData& b, double lo, double hi,
                        double gap_threshold, int depth) {
  if (auto mapping = match_clusters(a, b)) {
    LinkResult r;
    r.ok = true;
    r.mapping = std::move(*mapping);
    return r;
  }
  if (depth >= 8) {
    LinkResult r;
    r.fail_z = 0.5 * (a.z + b.z);
    r.resolution = 0.5 * (b.z - a.z);
    r.detail = "multiplicity pattern " + pattern_string(a) + " at z=" + std::to_string(a.z) +
               " does not continue to " + pattern_string(b) + " at z=" + std::to_string(b.z);
    return r;
  }
  const SampleData mid =
      evaluate_sample(family, 0.5 * (a.z + b.z), lo, hi, gap_threshold);
  LinkResult left = certify_link(family, a, mid, lo, hi, gap_threshold, depth + 1);
  if (!left.ok) return left;
  LinkResult right = certify_link(family, mid, b, lo, hi, gap_threshold, depth + 1);
  if (!right.ok) return right;

  LinkResult composed;
  composed.ok = true;
  composed.mapping.resize(left.mapping.size());
  for (size_t i = 0; i < left.mapping.size(); ++i)
    composed.mapping[i] = right.mapping[static_cast<size_t>(left.mapping[i])];
  return composed;
}

/// Eigenvalue of the branch with target value nearest `guess` at position z.
double branch_value_at(const std::function<Eigen::MatrixXcd(double)>& family, double z,
                       double lo, double hi, double guess) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(family(z), Eigen::EigenvaluesOnly);
  double best = guess;
  double best_dist = -1.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double lambda = es.eigenvalues()(i);
    if (lambda < lo || lambda > hi) continue;
    const double dist = std::abs(lambda - guess);
    if (best_dist < 0.0 || dist < best_dist) {
      best = lambda;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace

BranchTrace continue_branch(const std::function<Eigen::MatrixXcd(double)>& family,
                            const std::vector<double>& grid, double window_lo,
                            double window_hi, double gap_threshold) {
  if (grid.empty()) throw std::invalid_argument("branch continuation needs a non-empty grid");
  for (size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("grid samples must be strictly increasing");
  if (!(window_lo < window_hi))
    throw std::invalid_argument("eigenvalue window is empty");

  BranchTrace trace;
  trace.grid = grid;

  std::vector<SampleData> samples;
  samples.reserve(grid.size());
  for (double z : grid)
    samples.push_back(evaluate_sample(family, z, window_lo, window_hi, gap_threshold));

  int next_id = 0;
  const auto seed_branches = [&](const SampleData& s, int sample_index) {
    std::vector<int> ids;
    for (const TrackedCluster& c : s.clusters) {
      Branch br;
      br.id = next_id++;
      br.first_sample = sample_index;
      br.points.push_back({s.z, c.mean, c.mult});
      trace.branches.push_back(std::move(br));
      ids.push_back(trace.branches.back().id);
    }
    return ids;
  };

  // active[i] = branch id of cluster i at the current sample
  std::vector<int> active = seed_branches(samples[0], 0);
  for (size_t i = 0; i + 1 < samples.size(); ++i) {
    LinkResult link = certify_link(family, samples[i], samples[i + 1], window_lo, window_hi,
                                   gap_threshold, 0);
    if (link.ok) {
      std::vector<int> next_active(samples[i + 1].clusters.size(), -1);
      for (size_t c = 0; c < link.mapping.size(); ++c) {
        const int target = link.mapping[c];
        const TrackedCluster& tc = samples[i + 1].clusters[static_cast<size_t>(target)];
        trace.branches[static_cast<size_t>(active[c])].points.push_back(
            {samples[i + 1].z, tc.mean, tc.mult});
        next_active[static_cast<size_t>(target)] = active[c];
      }
      active = std::move(next_active);
    } else {
      trace.anomalies.push_back(
          {link.fail_z, link.resolution, "multiplicity change", link.detail});
      active = seed_branches(samples[i + 1], static_cast<int>(i) + 1);
    }
  }

  // Transversal crossings of tracked branches between samples: the eigenvalue
  // difference changes sign across an interval both branches span.
  for (size_t p = 0; p < trace.branches.size(); ++p) {
    for (size_t q = p + 1; q < trace.branches.size(); ++q) {
      const Branch& bp = trace.branches[p];
      const Branch& bq = trace.branches[q];
      const int lo_idx = std::max(bp.first_sample, bq.first_sample);
      const int hi_idx = std::min(bp.first_sample + static_cast<int>(bp.points.size()),
                                  bq.first_sample + static_cast<int>(bq.points.size())) -
                         1;
      for (int s = lo_idx; s < hi_idx; ++s) {
        const BranchPoint& pa = bp.points[static_cast<size_t>(s - bp.first_sample)];
        const BranchPoint& pb = bq.points[static_cast<size_t>(s - bq.first_sample)];
        const BranchPoint& na = bp.points[static_cast<size_t>(s + 1 - bp.first_sample)];
        const BranchPoint& nb = bq.points[static_cast<size_t>(s + 1 - bq.first_sample)];
        const double f0 = pa.eigenvalue - pb.eigenvalue;
        const double f1 = na.eigenvalue - nb.eigenvalue;
        if (!(f0 * f1 < 0.0)) continue;

        double za = pa.z, zb = na.z;
        double va = pa.eigenvalue, vb = pb.eigenvalue;
        double wa = na.eigenvalue, wb = nb.eigenvalue;
        double fa = f0;
        for (int it = 0; it < 60 && zb - za > 1e-12 * std::max(1.0, std::abs(zb)); ++it) {
          const double zm = 0.5 * (za + zb);
          const double s01 = (zm - za) / (zb - za);
          const double vm = branch_value_at(family, zm, window_lo, window_hi,
                                            va + s01 * (wa - va));
          const double wm = branch_value_at(family, zm, window_lo, window_hi,
                                            vb + s01 * (wb - vb));
          const double fm = vm - wm;
          if (fa * fm <= 0.0) {
            zb = zm;
            wa = vm;
            wb = wm;
          } else {
            za = zm;
            va = vm;
            vb = wm;
            fa = fm;
          }
        }
        const double zc = 0.5 * (za + zb);
        std::ostringstream detail;
        detail << "branches " << bp.id << " and " << bq.id << " cross transversally";
        trace.anomalies.push_back({zc, 0.5 * (zb - za), "crossing", detail.str()});
      }
    }
  }

  // Merge detections of the same event: anomalies closer than their combined
  // localization resolution describe one degeneracy.
  std::sort(trace.anomalies.begin(), trace.anomalies.end(),
            [](const BranchAnomaly& a, const BranchAnomaly& b) { return a.z < b.z; });
  std::vector<BranchAnomaly> merged;
  for (const BranchAnomaly& a : trace.anomalies) {
    if (!merged.empty() &&
        std::abs(a.z - merged.back().z) <=
            4.0 * std::max({a.resolution, merged.back().resolution, 1e-12})) {
      BranchAnomaly& prev = merged.back();
      prev.z = 0.5 * (prev.z + a.z);
      prev.resolution = std::max(prev.resolution, a.resolution);
      if (prev.kind != a.kind) prev.kind = "multiplicity change";
      continue;
    }
    merged.push_back(a);
  }
  trace.anomalies = std::move(merged);
  return trace;
}

}  // namespace bloch
