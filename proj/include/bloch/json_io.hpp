#pragma once

// JSON and CSV emitters/loaders for every file format the command-line tool
// speaks, plus atomic output writing. All emitters are deterministic: equal
// inputs serialize to identical bytes, and no output carries timestamps.

#include <filesystem>
#include <string>

#include "json.hpp"

#include "bloch/analytic.hpp"
#include "bloch/lattice.hpp"
#include "bloch/perturbation.hpp"
#include "bloch/planewave.hpp"
#include "bloch/point_group.hpp"
#include "bloch/potential.hpp"

namespace bloch {

/// Reproducibility metadata embedded in every output file:
/// {"schema":1, "tool", "version", "command", "config", "tolerances"}.
struct Provenance {
  std::string command;        ///< the resolved command line
  nlohmann::json config;      ///< fully resolved run configuration
  nlohmann::json tolerances;  ///< active numeric tolerances
};

nlohmann::json provenance_block(const Provenance& p);

std::string lattice_token(LatticeName name);  // "sc" / "bcc" / "fcc"

nlohmann::json brillouin_zone_json(const BrillouinZone& bz);

/// Full `lattice` subcommand payload: primitive and dual bases, the zone, and
/// the named points with class sizes and face counts.
nlohmann::json lattice_report_json(LatticeName name);

/// `sectors` payload: generators, group order, the character table as (p, q)
/// angle pairs, the momentum-offset table, and the symmetry eigenvector
/// coefficient lists.
nlohmann::json sectors_json(const AdmissibleSubgroup& sub);

nlohmann::json potential_json(const InvariantPotential& pot);
InvariantPotential potential_from_json(const nlohmann::json& j);

nlohmann::json splitting_json(const AdmissibleSubgroup& sub, const SplittingTable& table,
                              const GenericityReport& gen);
/// Aligned text rendering of the splitting table.
std::string splitting_text(const AdmissibleSubgroup& sub, const SplittingTable& table);

/// `spectrum` payload: eigenvalues of the truncated operator at one (K, z),
/// the per-sector spectra, and the cluster structure.
// sub may be null when the k-point has no admissible subgroup; the sector
// decomposition is omitted in that case.
nlohmann::json spectrum_json(const HamiltonianMatrix& ham, const AdmissibleSubgroup* sub);

/// Degeneracy report for one classified cluster, including the gradient
/// table, the classification verdict, and the scaling-fit diagnostics
/// (fit may be null).
nlohmann::json classification_json(const ClusterBasis& cb, const GradientTable& gt,
                                   const Classification& cls, const FitReport* fit);

nlohmann::json profile_json(const MultiplicityProfile& prof);

nlohmann::json branch_anomalies_json(const BranchTrace& trace);
std::string branch_trace_csv(const BranchTrace& trace);

std::string dispersion_csv(const DispersionResult& disp);

/// Canonical serialization used for all JSON files: 2-space indent plus a
/// trailing newline.
std::string json_to_string(const nlohmann::json& j);

/// Parse a JSON file; throws std::ios_base::failure when unreadable.
nlohmann::json load_json_file(const std::filesystem::path& path);

/// Write-then-rename so readers never observe a partial file. Throws
/// std::ios_base::failure on any I/O error.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace bloch
