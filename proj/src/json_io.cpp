#include "bloch/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bloch/version.hpp"

namespace bloch {

namespace {

nlohmann::json vec3(const Eigen::Vector3d& v) {
  return nlohmann::json::array({v(0), v(1), v(2)});
}

nlohmann::json ivec3(const Eigen::Vector3i& v) {
  return nlohmann::json::array({v(0), v(1), v(2)});
}

nlohmann::json cplx(std::complex<double> c) {
  return nlohmann::json::array({c.real(), c.imag()});
}

nlohmann::json mat3i(const Eigen::Matrix3i& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 3; ++r)
    rows.push_back(nlohmann::json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

nlohmann::json mat3(const Eigen::Matrix3d& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 3; ++r)
    rows.push_back(nlohmann::json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

std::string format_csv_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

nlohmann::json provenance_block(const Provenance& p) {
  return {{"schema", 1},
          {"tool", kToolName},
          {"version", kToolVersion},
          {"command", p.command},
          {"config", p.config},
          {"tolerances", p.tolerances}};
}

std::string lattice_token(LatticeName name) {
  switch (name) {
    case LatticeName::SimpleCubic: return "sc";
    case LatticeName::BodyCenteredCubic: return "bcc";
    case LatticeName::FaceCenteredCubic: return "fcc";
    case LatticeName::Custom: break;
  }
  return "custom";
}

nlohmann::json brillouin_zone_json(const BrillouinZone& bz) {
  nlohmann::json halfspaces = nlohmann::json::array();
  for (const Halfspace& h : bz.halfspaces)
    halfspaces.push_back({{"g", vec3(h.g)}, {"offset", h.offset}});
  nlohmann::json vertices = nlohmann::json::array();
  for (const Eigen::Vector3d& v : bz.vertices) vertices.push_back(vec3(v));
  nlohmann::json faces = nlohmann::json::array();
  for (const std::vector<int>& f : bz.faces) faces.push_back(f);
  return {{"halfspaces", halfspaces}, {"vertices", vertices}, {"faces", faces}};
}

nlohmann::json lattice_report_json(LatticeName name) {
  const Lattice lat = Lattice::from_name(lattice_token(name));
  const ReciprocalBasis recip = dual_basis(lat);
  const BrillouinZone bz = brillouin_zone(recip);

  nlohmann::json points = nlohmann::json::array();
  for (const NamedPoint& np : named_points(name)) {
    const MomentumClass cls = k_class(np.K, recip);
    points.push_back({{"label", np.label},
                      {"k", vec3(np.K)},
                      {"class_size", cls.size()},
                      {"faces", static_cast<int>(faces_containing(np.K, bz).size())}});
  }

  return {{"lattice", lattice_token(name)},
          {"basis", mat3(lat.basis)},
          {"reciprocal_basis", mat3(recip.basis)},
          {"brillouin_zone", brillouin_zone_json(bz)},
          {"named_points", points}};
}

nlohmann::json sectors_json(const AdmissibleSubgroup& sub) {
  nlohmann::json generators = nlohmann::json::array();
  for (const GroupElement& g : sub.generators) generators.push_back(mat3i(g.mat));

  nlohmann::json mtable = nlohmann::json::array();
  for (size_t j = 0; j < sub.exponents.size(); ++j)
    mtable.push_back({{"exponents", sub.exponents[j]}, {"m", ivec3(sub.m_table[j])}});

  nlohmann::json sectors = nlohmann::json::array();
  for (const SectorLabel& s : sub.sectors) {
    nlohmann::json omega = nlohmann::json::array();
    for (const RootOfUnity& w : s.omega) omega.push_back({{"p", w.p}, {"q", w.q}});
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& [m, c] : symmetry_eigenvector(sub, s))
      coeffs.push_back({{"m", ivec3(m)}, {"c", cplx(c)}});
    sectors.push_back({{"label", s.str()}, {"omega", omega}, {"eigenvector", coeffs}});
  }

  return {{"lattice", lattice_token(sub.lattice.name)},
          {"k", vec3(sub.K)},
          {"generators", generators},
          {"orders", sub.orders},
          {"group_order", sub.order()},
          {"m_table", mtable},
          {"sectors", sectors}};
}

nlohmann::json potential_json(const InvariantPotential& pot) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const Eigen::Vector3i& rep : pot.orbit_reps())
    coeffs.push_back({{"m", ivec3(rep)}, {"v", pot.coeff(rep)}});
  nlohmann::json j = {{"schema", 1},
                      {"lattice", lattice_token(pot.lattice.name)},
                      {"coeffs", coeffs}};
  if (pot.has_seed) {
    j["prng"] = "mt19937_64/u53";
    j["seed"] = pot.seed;
    j["n_orbits"] = pot.n_orbits;
    j["amplitude"] = pot.amplitude;
  }
  return j;
}

InvariantPotential potential_from_json(const nlohmann::json& j) {
  if (!j.contains("lattice") || !j.contains("coeffs"))
    throw std::invalid_argument("potential file needs \"lattice\" and \"coeffs\"");
  const Lattice lat = Lattice::from_name(j.at("lattice").get<std::string>());

  std::map<CoeffKey, double> reps;
  for (const nlohmann::json& entry : j.at("coeffs")) {
    const auto m = entry.at("m");
    if (!m.is_array() || m.size() != 3)
      throw std::invalid_argument("potential coefficient index must be an integer triple");
    const CoeffKey key{m.at(0).get<int>(), m.at(1).get<int>(), m.at(2).get<int>()};
    const double value = entry.at("v").get<double>();
    const auto [it, fresh] = reps.emplace(key, value);
    if (!fresh && it->second != value)
      throw std::invalid_argument("conflicting values on one orbit");
  }

  InvariantPotential pot = from_orbits(lat, reps);
  if (j.contains("seed")) {
    pot.has_seed = true;
    pot.seed = j.at("seed").get<std::uint64_t>();
    pot.n_orbits = j.value("n_orbits", 0);
    pot.amplitude = j.value("amplitude", 0.0);
  }
  return pot;
}

nlohmann::json splitting_json(const AdmissibleSubgroup& sub, const SplittingTable& table,
                              const GenericityReport& gen) {
  nlohmann::json slopes = nlohmann::json::array();
  for (size_t i = 0; i < sub.sectors.size(); ++i)
    slopes.push_back({{"sector", sub.sectors[i].str()}, {"slope", table.slopes[i]}});

  nlohmann::json groups = nlohmann::json::array();
  for (const SlopeGroup& g : table.groups) {
    nlohmann::json members = nlohmann::json::array();
    for (int s : g.sectors) members.push_back(sub.sectors[static_cast<size_t>(s)].str());
    groups.push_back(
        {{"slope", g.slope}, {"multiplicity", static_cast<int>(g.sectors.size())},
         {"sectors", members}});
  }

  nlohmann::json genericity = {{"pass", gen.pass},
                               {"has_reference", gen.has_reference},
                               {"min_margin", gen.min_margin},
                               {"note", gen.note}};

  return {{"lattice", lattice_token(sub.lattice.name)},
          {"k", vec3(sub.K)},
          {"slopes", slopes},
          {"groups", groups},
          {"pattern", table.pattern()},
          {"genericity", genericity}};
}

std::string splitting_text(const AdmissibleSubgroup& sub, const SplittingTable& table) {
  // Aligned columns: sector label, slope, group id.
  size_t label_width = 6;
  for (const SectorLabel& s : sub.sectors) label_width = std::max(label_width, s.str().size());

  std::vector<int> group_of(sub.sectors.size(), -1);
  for (size_t g = 0; g < table.groups.size(); ++g)
    for (int s : table.groups[g].sectors) group_of[static_cast<size_t>(s)] = static_cast<int>(g);

  std::ostringstream os;
  os << "sector";
  for (size_t i = 6; i < label_width; ++i) os << ' ';
  os << "  first-order slope      group\n";
  for (size_t i = 0; i < sub.sectors.size(); ++i) {
    const std::string label = sub.sectors[i].str();
    os << label;
    for (size_t k = label.size(); k < label_width; ++k) os << ' ';
    char buf[40];
    std::snprintf(buf, sizeof buf, "  %+18.12f", table.slopes[i]);
    os << buf << "      " << group_of[i] << "\n";
  }
  os << "pattern:";
  for (int m : table.pattern()) os << ' ' << m;
  os << "\n";
  return os.str();
}

nlohmann::json spectrum_json(const HamiltonianMatrix& ham, const AdmissibleSubgroup* sub) {
  const EigenSystem full = eigensolve(ham);

  nlohmann::json evals = nlohmann::json::array();
  for (Eigen::Index i = 0; i < full.values.size(); ++i) evals.push_back(full.values(i));

  nlohmann::json clusters = nlohmann::json::array();
  for (const Cluster& c :
       cluster_eigenvalues(full.values, default_gap_threshold(full.hnorm)))
    clusters.push_back({{"mean", c.mean}, {"multiplicity", c.multiplicity()}});

  nlohmann::json out = {{"lattice", lattice_token(ham.basis.lattice.name)},
                        {"k", vec3(ham.basis.K)},
                        {"z", ham.z},
                        {"cutoff", ham.basis.cutoff},
                        {"basis_size", ham.basis.size()},
                        {"eigenvalues", evals},
                        {"clusters", clusters}};

  if (sub != nullptr) {
    nlohmann::json sectors = nlohmann::json::array();
    for (const SectorLabel& s : sub->sectors) {
      const SectorSpectrum spec = sector_restrict(ham, *sub, s);
      nlohmann::json se = nlohmann::json::array();
      for (Eigen::Index i = 0; i < spec.evals.size(); ++i) se.push_back(spec.evals(i));
      sectors.push_back({{"label", s.str()}, {"dim", spec.dim}, {"eigenvalues", se}});
    }
    out["sectors"] = sectors;
  }
  return out;
}

nlohmann::json classification_json(const ClusterBasis& cb, const GradientTable& gt,
                                   const Classification& cls, const FitReport* fit) {
  nlohmann::json sector_list = nlohmann::json::array();
  for (const SectorLabel& s : cb.sectors) sector_list.push_back(s.str());

  nlohmann::json evals = nlohmann::json::array();
  for (Eigen::Index i = 0; i < cb.evals.size(); ++i) evals.push_back(cb.evals(i));

  const int m = static_cast<int>(cb.sectors.size());
  nlohmann::json gradients = nlohmann::json::array();
  for (int j = 0; j < m; ++j) {
    nlohmann::json row = nlohmann::json::array();
    for (int l = 0; l < m; ++l) {
      const Eigen::Vector3cd g = gt.entry(j, l);
      row.push_back(nlohmann::json::array({cplx(g(0)), cplx(g(1)), cplx(g(2))}));
    }
    gradients.push_back(row);
  }

  nlohmann::json verdict = {{"type", to_string(cls.type)},
                            {"multiplicity", cls.multiplicity},
                            {"max_gradient_norm", cls.max_gradient_norm},
                            {"detail", cls.detail}};
  if (cls.type == SingularityType::Valley) {
    verdict["alpha"] = cplx(cls.alpha);
    verdict["velocity"] = cls.velocity;
    verdict["axis"] = cls.axis;
  } else if (cls.type == SingularityType::Weyl3) {
    verdict["alpha"] = cplx(cls.alpha);
    verdict["im_alpha_cubed"] = cls.im_alpha_cubed;
    verdict["polynomial_rel_err"] = cls.polynomial_rel_err;
  }

  nlohmann::json out = {
      {"lattice", lattice_token(cb.basis.lattice.name)},
      {"k", vec3(cb.basis.K)},
      {"z", cb.z},
      {"cluster",
       {{"mu", cb.mu},
        {"multiplicity", m},
        {"width", cb.cluster_width},
        {"gap", cb.gap},
        {"sectors", sector_list},
        {"eigenvalues", evals},
        {"phase_convention", cb.tag}}},
      {"gradients", gradients},
      {"classification", verdict},
      {"metadata",
       {{"weyl_polynomial",
         "mu^3 - 4|alpha|^2 |kappa|^2 mu + 16 Im(alpha^3) kappa1 kappa2 kappa3"},
        {"convention_note",
         "an alternative printed form carries the linear coefficient 4|alpha|^3 kappa^2; "
         "this tool uses the form above, which is the one the assembled effective matrix "
         "satisfies"}}}};

  if (fit != nullptr) {
    nlohmann::json points = nlohmann::json::array();
    for (const FitPoint& p : fit->points)
      points.push_back({{"magnitude", p.magnitude},
                        {"worst_residual", p.worst_residual},
                        {"directions_used", p.directions_used},
                        {"excluded", p.excluded}});
    out["fit"] = {{"exponent", fit->exponent},
                  {"points", points},
                  {"excluded_evaluations", fit->excluded_evaluations}};
  } else {
    out["fit"] = nullptr;
  }
  return out;
}

nlohmann::json profile_json(const MultiplicityProfile& prof) {
  nlohmann::json rho = nlohmann::json::array();
  for (size_t j = 0; j < prof.rho.size(); ++j)
    if (prof.rho[j] != 0)
      rho.push_back({{"multiplicity", static_cast<int>(j) + 1}, {"count", prof.rho[j]}});
  return {{"degree", prof.d.empty() ? 0 : prof.d[0]},
          {"gcd_degrees", prof.d},
          {"rho", prof.rho},
          {"roots", rho}};
}

nlohmann::json branch_anomalies_json(const BranchTrace& trace) {
  nlohmann::json anomalies = nlohmann::json::array();
  for (const BranchAnomaly& a : trace.anomalies)
    anomalies.push_back({{"z", a.z},
                         {"resolution", a.resolution},
                         {"kind", a.kind},
                         {"detail", a.detail}});
  return {{"anomalies", anomalies}};
}

std::string branch_trace_csv(const BranchTrace& trace) {
  std::ostringstream os;
  os << "z,branch,eigenvalue,multiplicity\n";
  // Rows ordered by grid position, then branch id.
  for (size_t gi = 0; gi < trace.grid.size(); ++gi) {
    for (const Branch& b : trace.branches) {
      const int local = static_cast<int>(gi) - b.first_sample;
      if (local < 0 || local >= static_cast<int>(b.points.size())) continue;
      const BranchPoint& p = b.points[static_cast<size_t>(local)];
      os << format_csv_double(p.z) << ',' << b.id << ',' << format_csv_double(p.eigenvalue)
         << ',' << p.multiplicity << '\n';
    }
  }
  return os.str();
}

std::string dispersion_csv(const DispersionResult& disp) {
  std::ostringstream os;
  os << "k_x,k_y,k_z";
  for (Eigen::Index b = 0; b < disp.bands.cols(); ++b) os << ",E_" << (b + 1);
  os << '\n';
  for (size_t i = 0; i < disp.path.size(); ++i) {
    const Eigen::Vector3d& p = disp.path[i];
    os << format_csv_double(p(0)) << ',' << format_csv_double(p(1)) << ','
       << format_csv_double(p(2));
    for (Eigen::Index b = 0; b < disp.bands.cols(); ++b)
      os << ',' << format_csv_double(disp.bands(static_cast<Eigen::Index>(i), b));
    os << '\n';
  }
  return os.str();
}

std::string json_to_string(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::ios_base::failure("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::ios_base::failure("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace bloch
