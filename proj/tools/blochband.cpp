// blochband - command-line front end for the Floquet-Bloch band toolkit.
//
// Subcommands: lattice, sectors, split, spectrum, classify, dispersion,
// scan-z, poly-profile.  Every artifact embeds a provenance block (tool
// version, resolved configuration, tolerances) and is written atomically;
// outputs carry no timestamps, so re-running a configuration reproduces the
// artifact byte for byte.
//
// Exit codes: 0 success, 2 usage, 3 invalid input, 4 anomaly, 5 I/O failure.

#include <algorithm>
#include <cctype>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <ios>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bloch/analytic.hpp"
#include "bloch/errors.hpp"
#include "bloch/json_io.hpp"
#include "bloch/lattice.hpp"
#include "bloch/perturbation.hpp"
#include "bloch/planewave.hpp"
#include "bloch/point_group.hpp"
#include "bloch/potential.hpp"
#include "bloch/version.hpp"

namespace {

// Thrown after a handler has already produced its artifact and only the
// process exit code remains to be delivered.
struct ExitWith {
  int code;
};

std::vector<double> parse_reals(const std::string& text, char alt_sep) {
  std::string normalized = text;
  std::replace(normalized.begin(), normalized.end(), alt_sep, ',');
  std::vector<double> out;
  size_t pos = 0;
  while (pos <= normalized.size()) {
    const size_t next = normalized.find(',', pos);
    const std::string tok = normalized.substr(pos, next == std::string::npos ? next : next - pos);
    size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse '" + tok + "' as a real number");
    }
    if (used != tok.size())
      throw std::invalid_argument("cannot parse '" + tok + "' as a real number");
    out.push_back(value);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

Eigen::Vector3d parse_triple(const std::string& text) {
  const std::vector<double> parts = parse_reals(text, ':');
  if (parts.size() != 3)
    throw std::invalid_argument("expected three comma-separated components, got '" + text + "'");
  return {parts[0], parts[1], parts[2]};
}

std::pair<double, double> parse_pair(const std::string& text) {
  const std::vector<double> parts = parse_reals(text, ':');
  if (parts.size() != 2)
    throw std::invalid_argument("expected two values as 'lo:hi', got '" + text + "'");
  return {parts[0], parts[1]};
}

// A k-point is either one of the documented labels for the lattice or an
// explicit comma triple.  Returns the point; label_out gets the matched label
// or the empty string.
Eigen::Vector3d resolve_k(const bloch::Lattice& lat, const std::string& spec,
                          std::string* label_out) {
  std::string upper = spec;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (const bloch::NamedPoint& np : bloch::named_points(lat.name)) {
    if (np.label == upper) {
      if (label_out) *label_out = np.label;
      return np.K;
    }
  }
  if (spec.find(',') == std::string::npos)
    throw std::invalid_argument("'" + spec + "' is not a named k-point of the " +
                                bloch::to_string(lat.name) + " lattice");
  if (label_out) label_out->clear();
  return parse_triple(spec);
}

// Shared potential-source options.  The default is the seeded generator so
// every command runs out of the box; --amplitude 0 yields the zero potential.
struct PotentialOpts {
  std::uint64_t seed = 1;
  int n_orbits = 3;
  double amplitude = 1.0;
  std::string file;

  void attach(CLI::App* cmd) {
    CLI::Option* s = cmd->add_option("--seed", seed,
                                     "seed for the deterministic potential generator (default 1)");
    cmd->add_option("--n-orbits", n_orbits,
                    "number of smallest-norm orbits the generator populates (default 3)");
    cmd->add_option("--amplitude", amplitude,
                    "generator coefficient range [-a, a]; 0 gives the zero potential (default 1)");
    CLI::Option* p =
        cmd->add_option("--potential", file, "JSON potential file (one coefficient per orbit)");
    s->excludes(p);
    p->excludes(s);
  }

  bloch::InvariantPotential load(const bloch::Lattice& lat) const {
    if (!file.empty()) {
      bloch::InvariantPotential pot = bloch::potential_from_json(bloch::load_json_file(file));
      if (pot.lattice.name != lat.name)
        throw std::invalid_argument("potential file is for the " +
                                    bloch::to_string(pot.lattice.name) +
                                    " lattice, but --lattice says " + bloch::to_string(lat.name));
      return pot;
    }
    return bloch::random_invariant(seed, lat, n_orbits, amplitude);
  }

  nlohmann::json config() const {
    if (!file.empty()) return {{"potential_file", file}};
    return {{"seed", seed}, {"n_orbits", n_orbits}, {"amplitude", amplitude}};
  }
};

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::fputs(content.c_str(), stdout);
    return;
  }
  bloch::write_text_atomic(out_path, content);
}

void emit_json(const std::string& out_path, const bloch::Provenance& prov,
               nlohmann::json payload) {
  payload["provenance"] = bloch::provenance_block(prov);
  emit(out_path, bloch::json_to_string(payload));
}

std::string csv_preamble(const bloch::Provenance& prov) {
  return "# " + bloch::provenance_block(prov).dump() + "\n";
}

constexpr const char* kPointTable =
    "Named k-points (--k accepts a label or an explicit comma triple):\n"
    "  sc : R = (pi, pi, pi)\n"
    "  bcc: P = (pi, pi, pi),  H = (0, 0, 2*pi)\n"
    "  fcc: W = (0, 2*pi, pi)\n"
    "with pi = 3.14159265358979312.  Example: --k 3.14159265358979312,0,0.\n"
    "\n"
    "Potential source: --potential FILE, or the built-in generator\n"
    "(--seed, --n-orbits, --amplitude; defaults 1 / 3 / 1.0).\n"
    "--amplitude 0 selects the zero potential.\n"
    "\n"
    "Exit codes: 0 success, 2 usage, 3 invalid input, 4 anomaly, 5 I/O failure.";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floquet-Bloch spectra on the cubic lattices: symmetry sectors, eigenvalue "
               "splitting, and band-degeneracy classification."};
  app.set_version_flag("--version", std::string(bloch::kToolVersion));
  app.footer(kPointTable);
  app.require_subcommand(1);

  const std::vector<std::string> lattice_names = {"sc", "bcc", "fcc"};

  // ---- lattice ----
  auto* cmd_lattice = app.add_subcommand(
      "lattice", "Dual basis, Brillouin zone (half-spaces, vertices, faces), and the named "
                 "high-symmetry points with class sizes and face counts.");
  struct {
    std::string name;
    std::string out;
  } lat_opts;
  cmd_lattice->add_option("--name", lat_opts.name, "lattice: sc, bcc, or fcc")
      ->required()
      ->check(CLI::IsMember(lattice_names));
  cmd_lattice->add_option("--out", lat_opts.out, "output file (default: stdout)");
  cmd_lattice->callback([&lat_opts] {
    const bloch::Lattice lat = bloch::Lattice::from_name(lat_opts.name);
    bloch::Provenance prov;
    prov.command = "lattice";
    prov.config = {{"lattice", lat_opts.name}};
    prov.tolerances = {{"vertex_dedup", 1e-8}, {"face_membership", 1e-9}};
    emit_json(lat_opts.out, prov, bloch::lattice_report_json(lat.name));
  });

  // ---- sectors ----
  auto* cmd_sectors = app.add_subcommand(
      "sectors", "Admissible symmetry subgroup at a k-point: generators, character table "
                 "exponents, momentum-offset table, and sector eigenvectors.");
  struct {
    std::string lattice;
    std::string k;
    std::string out;
  } sec_opts;
  cmd_sectors->add_option("--lattice", sec_opts.lattice, "lattice: sc, bcc, or fcc")
      ->required()
      ->check(CLI::IsMember(lattice_names));
  cmd_sectors->add_option("--k", sec_opts.k, "k-point label or comma triple")->required();
  cmd_sectors->add_option("--out", sec_opts.out, "output file (default: stdout)");
  cmd_sectors->callback([&sec_opts] {
    const bloch::Lattice lat = bloch::Lattice::from_name(sec_opts.lattice);
    std::string label;
    const Eigen::Vector3d K = resolve_k(lat, sec_opts.k, &label);
    const bloch::AdmissibleSubgroup sub = bloch::admissible_subgroup(lat, K);
    bloch::Provenance prov;
    prov.command = "sectors";
    prov.config = {{"lattice", sec_opts.lattice},
                   {"k", {K(0), K(1), K(2)}},
                   {"k_label", label}};
    prov.tolerances = {{"momentum_offset", 1e-9}};
    emit_json(sec_opts.out, prov, bloch::sectors_json(sub));
  });

  // ---- split ----
  auto* cmd_split = app.add_subcommand(
      "split", "First-order eigenvalue splitting at a k-point: per-sector slopes, slope "
               "groups, multiplicity pattern, and the genericity verdict.");
  struct {
    std::string lattice;
    std::string k;
    std::string out;
    std::string format = "json";
    double tol_slope = 1e-9;
    PotentialOpts pot;
  } split_opts;
  cmd_split->add_option("--lattice", split_opts.lattice, "lattice: sc, bcc, or fcc")
      ->required()
      ->check(CLI::IsMember(lattice_names));
  cmd_split->add_option("--k", split_opts.k, "k-point label or comma triple")->required();
  split_opts.pot.attach(cmd_split);
  cmd_split->add_option("--tol-slope", split_opts.tol_slope,
                        "slope-grouping tolerance (default 1e-9)");
  cmd_split->add_option("--format", split_opts.format, "json or text (default json)")
      ->check(CLI::IsMember({"json", "text"}));
  cmd_split->add_option("--out", split_opts.out, "output file (default: stdout)");
  cmd_split->callback([&split_opts] {
    const bloch::Lattice lat = bloch::Lattice::from_name(split_opts.lattice);
    std::string label;
    const Eigen::Vector3d K = resolve_k(lat, split_opts.k, &label);
    const bloch::AdmissibleSubgroup sub = bloch::admissible_subgroup(lat, K);
    const bloch::InvariantPotential pot = split_opts.pot.load(lat);
    const bloch::SplittingTable table = bloch::splitting_table(pot, sub, split_opts.tol_slope);
    if (split_opts.format == "text") {
      emit(split_opts.out, bloch::splitting_text(sub, table));
      return;
    }
    const bloch::GenericityReport gen = bloch::genericity_check(pot, sub);
    bloch::Provenance prov;
    prov.command = "split";
    prov.config = {{"lattice", split_opts.lattice},
                   {"k", {K(0), K(1), K(2)}},
                   {"k_label", label}};
    prov.config.update(split_opts.pot.config());
    prov.tolerances = {{"slope_group", split_opts.tol_slope}};
    emit_json(split_opts.out, prov, bloch::splitting_json(sub, table, gen));
  });

  // ---- spectrum ----
  auto* cmd_spectrum = app.add_subcommand(
      "spectrum", "Plane-wave eigenvalues at a k-point, with the symmetry-sector "
                  "decomposition and degeneracy clusters.");
  struct {
    std::string lattice;
    std::string k;
    std::string out;
    double z = 0.0;
    double cutoff = 0.0;
    PotentialOpts pot;
  } spec_opts;
  cmd_spectrum->add_option("--lattice", spec_opts.lattice, "lattice: sc, bcc, or fcc")
      ->required()
      ->check(CLI::IsMember(lattice_names));
  cmd_spectrum->add_option("--k", spec_opts.k, "k-point label or comma triple")->required();
  cmd_spectrum->add_option("--z", spec_opts.z, "coupling constant (default 0)");
  cmd_spectrum->add_option("--cutoff", spec_opts.cutoff,
                           "kinetic-energy cutoff; 0 means 10*|K|^2 (default 0)");
  spec_opts.pot.attach(cmd_spectrum);
  cmd_spectrum->add_option("--out", spec_opts.out, "output file (default: stdout)");
  cmd_spectrum->callback([&spec_opts] {
    const bloch::Lattice lat = bloch::Lattice::from_name(spec_opts.lattice);
    std::string label;
    const Eigen::Vector3d K = resolve_k(lat, spec_opts.k, &label);
    const bloch::InvariantPotential pot = spec_opts.pot.load(lat);
    const bloch::PlaneWaveBasis basis =
        bloch::build_basis(lat, K, Eigen::Vector3d::Zero(), spec_opts.cutoff);
    const bloch::HamiltonianMatrix ham = bloch::build_hamiltonian(basis, pot, spec_opts.z);

    const bloch::AdmissibleSubgroup* subp = nullptr;
    bloch::AdmissibleSubgroup sub;
    try {
      sub = bloch::admissible_subgroup(lat, K);
      subp = &sub;
    } catch (const std::invalid_argument&) {
      // No admissible subgroup at this k-point; emit the spectrum without sectors.
    }

    bloch::Provenance prov;
    prov.command = "spectrum";
    prov.config = {{"lattice", spec_opts.lattice},
                   {"k", {K(0), K(1), K(2)}},
                   {"k_label", label},
                   {"z", spec_opts.z},
                   {"cutoff", basis.cutoff}};
    prov.config.update(spec_opts.pot.config());
    prov.tolerances = {{"cluster_gap", "auto: max(1e-7, 1e-6*|H|_F)"}};
    emit_json(spec_opts.out, prov, bloch::spectrum_json(ham, subp));
  });

  // ---- classify ----
  auto* cmd_classify = app.add_subcommand(
      "classify", "Classify every degenerate slope group at a k-point: effective momentum "
                  "matrix, singularity type (quadratic / valley / three-fold Weyl), Weyl "
                  "coefficient and cubic check, and the dispersion-residual fit exponent.");
  struct {
    std::string lattice;
    std::string k;
    std::string out;
    double z = 0.3;
    double cutoff = 0.0;
    double tol_slope = 1e-9;
    bool fit = true;
    int fit_directions = 20;
    int fit_magnitudes = 5;
    PotentialOpts pot;
  } cls_opts;
  cmd_classify->add_option("--lattice", cls_opts.lattice, "lattice: sc, bcc, or fcc")
      ->required()
      ->check(CLI::IsMember(lattice_names));
  cmd_classify->add_option("--k", cls_opts.k, "k-point label or comma triple")->required();
  cmd_classify->add_option("--z", cls_opts.z, "coupling constant (default 0.3)");
  cmd_classify->add_option("--cutoff", cls_opts.cutoff,
                           "kinetic-energy cutoff; 0 means 10*|K|^2 (default 0)");
  cmd_classify->add_option("--tol-slope", cls_opts.tol_slope,
                           "slope-grouping tolerance (default 1e-9)");
  cmd_classify->add_flag("--fit,!--no-fit", cls_opts.fit,
                         "run the log-log dispersion-residual fit (default on)");
  cmd_classify->add_option("--fit-directions", cls_opts.fit_directions,
                           "quasi-random directions per magnitude (default 20)");
  cmd_classify->add_option("--fit-magnitudes", cls_opts.fit_magnitudes,
                           "kappa magnitudes in [1e-3, 10^-1.5]*|K| (default 5)");
  cls_opts.pot.attach(cmd_classify);
  cmd_classify->add_option("--out", cls_opts.out, "output file (default: stdout)");
  cmd_classify->callback([&cls_opts] {
    const bloch::Lattice lat = bloch::Lattice::from_name(cls_opts.lattice);
    std::string label;
    const Eigen::Vector3d K = resolve_k(lat, cls_opts.k, &label);
    const bloch::AdmissibleSubgroup sub = bloch::admissible_subgroup(lat, K);
    const bloch::InvariantPotential pot = cls_opts.pot.load(lat);
    const bloch::SplittingTable table = bloch::splitting_table(pot, sub, cls_opts.tol_slope);
    const bloch::GenericityReport gen = bloch::genericity_check(pot, sub);

    bloch::Provenance prov;
    prov.command = "classify";
    prov.config = {{"lattice", cls_opts.lattice},
                   {"k", {K(0), K(1), K(2)}},
                   {"k_label", label},
                   {"z", cls_opts.z},
                   {"cutoff", cls_opts.cutoff},
                   {"fit", cls_opts.fit},
                   {"fit_directions", cls_opts.fit_directions},
                   {"fit_magnitudes", cls_opts.fit_magnitudes}};
    prov.config.update(cls_opts.pot.config());
    prov.tolerances = {{"slope_group", cls_opts.tol_slope},
                       {"cluster_gap", "auto: max(1e-7, 1e-6*|H|_F)"}};

    try {
      nlohmann::json reports = nlohmann::json::array();
      for (const bloch::SlopeGroup& group : table.groups) {
        if (group.sectors.size() < 2) continue;
        const bloch::ClusterBasis cb =
            bloch::degenerate_cluster_basis(pot, sub, cls_opts.z, group.sectors, cls_opts.cutoff);
        const bloch::GradientTable gt = bloch::gradient_elements(cb);
        const bloch::Classification cls = bloch::classify(cb, gt);
        bloch::FitReport fit;
        const bloch::FitReport* fitp = nullptr;
        if (cls_opts.fit) {
          fit = bloch::validate_effective(pot, cb, cls_opts.fit_directions,
                                          cls_opts.fit_magnitudes);
          fitp = &fit;
        }
        reports.push_back(bloch::classification_json(cb, gt, cls, fitp));
      }
      nlohmann::json payload = {{"splitting", bloch::splitting_json(sub, table, gen)},
                                {"reports", reports}};
      if (reports.empty())
        payload["note"] = "all slope groups are simple at first order; nothing to classify";
      emit_json(cls_opts.out, prov, payload);
    } catch (const bloch::AnomalyError& e) {
      emit_json(cls_opts.out, prov, nlohmann::json{{"anomaly", e.what()}});
      throw ExitWith{4};
    }
  });

  // ---- dispersion ----
  auto* cmd_dispersion = app.add_subcommand(
      "dispersion", "Band table along a k-path: CSV with columns k_x,k_y,k_z,E_1..E_N.");
  struct {
    std::string lattice;
    std::string path_file;
    std::string k_start;
    std::string k_end;
    std::string out;
    int n_points = 25;
    int bands = 8;
    int threads = 1;
    double z = 0.0;
    double cutoff = 0.0;
    PotentialOpts pot;
  } disp_opts;
  cmd_dispersion->add_option("--lattice", disp_opts.lattice, "lattice: sc, bcc, or fcc")
      ->required()
      ->check(CLI::IsMember(lattice_names));
  auto* opt_path = cmd_dispersion->add_option(
      "--path", disp_opts.path_file,
      "JSON path file: an array of k triples, or {\"points\": [...]}");
  auto* opt_start = cmd_dispersion->add_option(
      "--k-start", disp_opts.k_start, "segment start (label or comma triple)");
  auto* opt_end = cmd_dispersion->add_option("--k-end", disp_opts.k_end,
                                             "segment end (label or comma triple)");
  cmd_dispersion->add_option("--n-points", disp_opts.n_points,
                             "samples on the segment, endpoints included (default 25)");
  opt_path->excludes(opt_start);
  opt_path->excludes(opt_end);
  opt_start->needs(opt_end);
  opt_end->needs(opt_start);
  cmd_dispersion->add_option("--bands", disp_opts.bands, "bands per point (default 8)");
  cmd_dispersion->add_option("--z", disp_opts.z, "coupling constant (default 0)");
  cmd_dispersion->add_option("--cutoff", disp_opts.cutoff,
                             "kinetic-energy cutoff; 0 means 10*|K|^2 per point (default 0)");
  cmd_dispersion->add_option("--threads", disp_opts.threads,
                             "worker threads across path points (default 1)");
  disp_opts.pot.attach(cmd_dispersion);
  cmd_dispersion->add_option("--out", disp_opts.out, "output file (default: stdout)");
  cmd_dispersion->callback([&disp_opts] {
    const bloch::Lattice lat = bloch::Lattice::from_name(disp_opts.lattice);
    const bloch::InvariantPotential pot = disp_opts.pot.load(lat);

    std::vector<Eigen::Vector3d> path;
    if (!disp_opts.path_file.empty()) {
      nlohmann::json j = bloch::load_json_file(disp_opts.path_file);
      if (j.is_object() && j.contains("points")) j = j.at("points");
      if (!j.is_array())
        throw std::invalid_argument("path file must hold an array of k triples");
      for (const nlohmann::json& p : j) {
        if (!p.is_array() || p.size() != 3)
          throw std::invalid_argument("path entries must be triples of reals");
        path.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
      }
      if (path.empty()) throw std::invalid_argument("path file holds no points");
    } else if (!disp_opts.k_start.empty()) {
      if (disp_opts.n_points < 1)
        throw std::invalid_argument("--n-points must be at least 1");
      const Eigen::Vector3d a = resolve_k(lat, disp_opts.k_start, nullptr);
      const Eigen::Vector3d b = resolve_k(lat, disp_opts.k_end, nullptr);
      for (int i = 0; i < disp_opts.n_points; ++i) {
        const double t = disp_opts.n_points == 1
                             ? 0.0
                             : static_cast<double>(i) / (disp_opts.n_points - 1);
        path.push_back(a + t * (b - a));
      }
    } else {
      throw std::invalid_argument("dispersion needs --path or --k-start/--k-end");
    }

    const bloch::DispersionResult disp = bloch::dispersion_scan(
        lat, pot, disp_opts.z, path, disp_opts.bands, disp_opts.cutoff, disp_opts.threads);

    bloch::Provenance prov;
    prov.command = "dispersion";
    prov.config = {{"lattice", disp_opts.lattice},
                   {"z", disp_opts.z},
                   {"cutoff", disp_opts.cutoff},
                   {"bands", disp_opts.bands},
                   {"points", path.size()},
                   {"threads", disp_opts.threads}};
    if (!disp_opts.path_file.empty())
      prov.config["path_file"] = disp_opts.path_file;
    else {
      prov.config["k_start"] = disp_opts.k_start;
      prov.config["k_end"] = disp_opts.k_end;
    }
    prov.config.update(disp_opts.pot.config());
    prov.tolerances = nlohmann::json::object();
    emit(disp_opts.out, csv_preamble(prov) + bloch::dispersion_csv(disp));
  });

  // ---- scan-z ----
  auto* cmd_scan = app.add_subcommand(
      "scan-z", "Continue eigenvalue branches of the coupling family over a z grid inside an "
                "energy window; emits a branch CSV plus an anomaly JSON.");
  struct {
    std::string lattice;
    std::string k;
    std::string z_range = "0:1";
    std::string window;
    std::string out;
    int samples = 41;
    double cutoff = 0.0;
    double tol_cluster = 0.0;
    PotentialOpts pot;
  } scan_opts;
  cmd_scan->add_option("--lattice", scan_opts.lattice, "lattice: sc, bcc, or fcc")
      ->required()
      ->check(CLI::IsMember(lattice_names));
  cmd_scan->add_option("--k", scan_opts.k, "k-point label or comma triple")->required();
  cmd_scan->add_option("--z-range", scan_opts.z_range, "grid range as lo:hi (default 0:1)");
  cmd_scan->add_option("--samples", scan_opts.samples, "grid samples (default 41)");
  cmd_scan->add_option("--window", scan_opts.window,
                       "energy window as lo:hi (default 0.8:1.2 times |K|^2)");
  cmd_scan->add_option("--cutoff", scan_opts.cutoff,
                       "kinetic-energy cutoff; 0 means 10*|K|^2 (default 0)");
  cmd_scan->add_option("--tol-cluster", scan_opts.tol_cluster,
                       "clustering gap threshold; 0 means max(1e-7, 1e-6*|H|_F) (default 0)");
  scan_opts.pot.attach(cmd_scan);
  cmd_scan->add_option("--out", scan_opts.out,
                       "CSV output file; anomalies go to <out>.anomalies.json "
                       "(default: both to stdout)");
  cmd_scan->callback([&scan_opts] {
    const bloch::Lattice lat = bloch::Lattice::from_name(scan_opts.lattice);
    std::string label;
    const Eigen::Vector3d K = resolve_k(lat, scan_opts.k, &label);
    const bloch::InvariantPotential pot = scan_opts.pot.load(lat);
    const auto [zlo, zhi] = parse_pair(scan_opts.z_range);
    if (!(zhi > zlo)) throw std::invalid_argument("--z-range needs lo < hi");
    if (scan_opts.samples < 2) throw std::invalid_argument("--samples must be at least 2");

    double wlo = 0.8 * K.squaredNorm();
    double whi = 1.2 * K.squaredNorm();
    if (!scan_opts.window.empty()) std::tie(wlo, whi) = parse_pair(scan_opts.window);
    if (!(whi > wlo)) throw std::invalid_argument("--window needs lo < hi");

    const bloch::PlaneWaveBasis basis =
        bloch::build_basis(lat, K, Eigen::Vector3d::Zero(), scan_opts.cutoff);
    std::vector<double> grid(static_cast<size_t>(scan_opts.samples));
    for (int i = 0; i < scan_opts.samples; ++i)
      grid[static_cast<size_t>(i)] =
          zlo + (zhi - zlo) * static_cast<double>(i) / (scan_opts.samples - 1);

    const auto family = [&](double z) -> Eigen::MatrixXcd {
      return bloch::build_hamiltonian(basis, pot, z).H.cast<std::complex<double>>();
    };
    const bloch::BranchTrace trace =
        bloch::continue_branch(family, grid, wlo, whi, scan_opts.tol_cluster);

    bloch::Provenance prov;
    prov.command = "scan-z";
    prov.config = {{"lattice", scan_opts.lattice},
                   {"k", {K(0), K(1), K(2)}},
                   {"k_label", label},
                   {"z_range", {zlo, zhi}},
                   {"samples", scan_opts.samples},
                   {"window", {wlo, whi}},
                   {"cutoff", basis.cutoff}};
    prov.config.update(scan_opts.pot.config());
    prov.tolerances = {{"cluster_gap", scan_opts.tol_cluster == 0.0
                                           ? nlohmann::json("auto: max(1e-7, 1e-6*|H|_F)")
                                           : nlohmann::json(scan_opts.tol_cluster)}};

    const std::string csv = csv_preamble(prov) + bloch::branch_trace_csv(trace);
    nlohmann::json anomalies = bloch::branch_anomalies_json(trace);
    anomalies["provenance"] = bloch::provenance_block(prov);
    if (scan_opts.out.empty()) {
      std::fputs(csv.c_str(), stdout);
      std::fputs(bloch::json_to_string(anomalies).c_str(), stdout);
    } else {
      bloch::write_text_atomic(scan_opts.out, csv);
      bloch::write_text_atomic(scan_opts.out + ".anomalies.json",
                               bloch::json_to_string(anomalies));
    }
  });

  // ---- poly-profile ----
  auto* cmd_profile = app.add_subcommand(
      "poly-profile", "Root-multiplicity profile of a complex polynomial from numerical "
                      "gcd-chain ranks (no root finding).");
  struct {
    std::string in;
    std::string out;
  } prof_opts;
  cmd_profile
      ->add_option("--in", prof_opts.in,
                   "JSON input {\"coeffs\": [[re, im], ...]} listing coefficients by "
                   "ascending degree; plain numbers are taken as real")
      ->required();
  cmd_profile->add_option("--out", prof_opts.out, "output file (default: stdout)");
  cmd_profile->callback([&prof_opts] {
    const nlohmann::json j = bloch::load_json_file(prof_opts.in);
    if (!j.is_object() || !j.contains("coeffs") || !j.at("coeffs").is_array())
      throw std::invalid_argument("input must be a JSON object with a \"coeffs\" array");
    const nlohmann::json& cj = j.at("coeffs");
    Eigen::VectorXcd full(static_cast<Eigen::Index>(cj.size()));
    for (size_t i = 0; i < cj.size(); ++i) {
      const nlohmann::json& c = cj.at(i);
      if (c.is_number())
        full(static_cast<Eigen::Index>(i)) = c.get<double>();
      else if (c.is_array() && c.size() == 2)
        full(static_cast<Eigen::Index>(i)) =
            std::complex<double>(c.at(0).get<double>(), c.at(1).get<double>());
      else
        throw std::invalid_argument("coefficients must be numbers or [re, im] pairs");
    }
    Eigen::Index n = full.size() - 1;
    while (n >= 0 && full(n) == 0.0) --n;
    if (n < 1)
      throw std::invalid_argument("the polynomial must have degree at least 1");
    bloch::MonicPolynomial poly{full.head(n) / full(n)};
    const bloch::MultiplicityProfile prof = bloch::multiplicity_profile(poly);

    bloch::Provenance prov;
    prov.command = "poly-profile";
    prov.config = {{"input", prof_opts.in}, {"degree", static_cast<int>(n)}};
    prov.tolerances = {{"rank_sweep", {1e-8, 1e-9, 1e-10, 1e-11, 1e-12}}};
    emit_json(prof_opts.out, prov, bloch::profile_json(prof));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ExitWith& e) {
    return e.code;
  } catch (const bloch::AnomalyError& e) {
    std::fprintf(stderr, "anomaly: %s\n", e.what());
    return 4;
  } catch (const std::ios_base::failure& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 5;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 5;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 3;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "anomaly: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
