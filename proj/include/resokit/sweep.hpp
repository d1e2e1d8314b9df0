#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "resokit/cpw_design.hpp"
#include "resokit/loss_physics.hpp"
#include "resokit/report.hpp"
#include "resokit/resonator_model.hpp"

namespace resokit::dataio {

enum class SweepKind { kAuto, kPower, kTemperature, kField };

struct ManifestEntry {
  std::string path;  // relative to the manifest directory unless absolute
  double vna_power_dbm = 0.0;
  double temperature_k = 0.0;
  double field_mt = 0.0;
  SweepKind sweep = SweepKind::kAuto;
};

struct SweepManifest {
  std::vector<ManifestEntry> entries;
  resonator::AttenuationChain chain;
  loss::QpParams material = loss::QpParams::from_tc(12.0, 0.0974);
  std::optional<cpw::CpwGeometry> geometry;
  double film_thickness = 100e-9;  // m, for vortex thresholds and D(k)
  std::filesystem::path base_dir;
};

/// JSON manifest:
///   {"entries": [{"path", "vna_power_dbm", "temperature_k", "field_mt", "sweep"?}],
///    "chain": [{"label", "attenuation_db"}], "material": {"t_c", "alpha_kinetic", "gap_joules"?},
///    "geometry"?: {...}, "film_thickness_m"?}
/// Throws ParseError on malformed content (duplicate paths included).
SweepManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
std::string write_manifest(const SweepManifest& manifest);

struct SweepOptions {
  /// 0: RESOKIT_THREADS if set, else hardware concurrency.
  unsigned threads = 0;
  bool stamp = false;  // write a creation timestamp into provenance
};

/// Worker count after applying the RESOKIT_THREADS cap.
unsigned resolve_threads(unsigned requested);

/// Fits every entry (in parallel), converts power through the chain into photon numbers and
/// assembles the curves. The report is ordered by manifest index and does not depend on the
/// number of workers.
Report run_sweep(const SweepManifest& manifest, const SweepOptions& options = {});

/// Fit record for one trace with its photon number computed through the chain.
TraceRecord make_trace_record(const resonator::S21Trace& trace, const fit::FitReport& fit,
                              const resonator::AttenuationChain& chain);

nlohmann::json config_json(const SweepManifest& manifest);

}  // namespace resokit::dataio
