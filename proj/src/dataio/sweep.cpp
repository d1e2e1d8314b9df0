#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <map>
#include <set>
#include <thread>
#include <variant>

#include "resokit/dataio.hpp"
#include "resokit/errors.hpp"
#include "resokit/sweep.hpp"

#ifndef RESOKIT_VERSION
#define RESOKIT_VERSION "dev"
#endif

namespace resokit::dataio {

namespace {

struct Outcome {
  InputDigest digest;
  std::variant<TraceRecord, TraceFailure> result;
};

Outcome process_entry(const SweepManifest& m, const ManifestEntry& entry) {
  Outcome out;
  out.digest.path = entry.path;
  const std::filesystem::path path =
      std::filesystem::path(entry.path).is_absolute() ? std::filesystem::path(entry.path) : m.base_dir / entry.path;
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const Error& e) {
    out.result = TraceFailure{entry.path, "io", e.what()};
    return out;
  }
  out.digest.sha256 = sha256_hex(bytes);
  try {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    resonator::S21Trace trace = ext == ".csv" ? parse_csv_trace(bytes) : parse_touchstone(bytes);
    resonator::TraceMeta meta = trace.meta();
    meta.vna_power_dbm = entry.vna_power_dbm;
    meta.temperature_k = entry.temperature_k;
    meta.field_mt = entry.field_mt;
    meta.label = entry.path;
    trace = trace.with_meta(meta);
    out.result = make_trace_record(trace, fit::fit_notch(trace), m.chain);
  } catch (const ParseError& e) {
    out.result = TraceFailure{entry.path, "parse", e.what()};
  } catch (const NoResonanceError& e) {
    out.result = TraceFailure{entry.path, "no_resonance", e.what()};
  } catch (const UnphysicalError& e) {
    out.result = TraceFailure{entry.path, "unphysical", e.what()};
  } catch (const Error& e) {
    out.result = TraceFailure{entry.path, "fit", e.what()};
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct CurveMembership {
  bool power = false;
  bool temperature = false;
  bool field = false;
};

// Explicit tags win; untagged entries are classified from the acquisition grid.
std::vector<CurveMembership> classify(const std::vector<ManifestEntry>& entries) {
  double t_min = std::numeric_limits<double>::infinity();
  for (const auto& e : entries) t_min = std::min(t_min, e.temperature_k);

  std::map<double, std::set<double>> temps_at_power;
  std::set<std::pair<double, double>> field_conditions;
  for (const auto& e : entries) {
    if (e.field_mt == 0.0) temps_at_power[e.vna_power_dbm].insert(e.temperature_k);
    if (e.field_mt != 0.0) field_conditions.insert({e.vna_power_dbm, e.temperature_k});
  }
  double p_star = std::numeric_limits<double>::quiet_NaN();
  std::size_t most = 0;
  for (const auto& [p, temps] : temps_at_power) {
    if (temps.size() > most) most = temps.size(), p_star = p;
  }

  std::vector<CurveMembership> out(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    switch (e.sweep) {
      case SweepKind::kPower:
        out[i].power = true;
        break;
      case SweepKind::kTemperature:
        out[i].temperature = true;
        break;
      case SweepKind::kField:
        out[i].field = true;
        break;
      case SweepKind::kAuto:
        out[i].power = e.temperature_k == t_min && e.field_mt == 0.0;
        out[i].temperature = e.field_mt == 0.0 && most > 1 && e.vna_power_dbm == p_star;
        out[i].field = field_conditions.count({e.vna_power_dbm, e.temperature_k}) > 0;
        break;
    }
  }
  return out;
}

}  // namespace

unsigned resolve_threads(unsigned requested) {
  unsigned n = requested;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RESOKIT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

TraceRecord make_trace_record(const resonator::S21Trace& trace, const fit::FitReport& fit,
                              const resonator::AttenuationChain& chain) {
  TraceRecord rec;
  rec.label = trace.meta().label;
  rec.meta = trace.meta();
  rec.fit = fit;
  rec.p_in_w = resonator::chip_input_power(trace.meta().vna_power_dbm, chain);
  const double cos_phi = std::cos(fit.params.phi);
  if (cos_phi > 0.0) {
    try {
      rec.n_ph = resonator::photon_number(*rec.p_in_w, fit.params.f_r, fit.q_internal,
                                          fit.params.q_coupling_mag / cos_phi, fit.params.q_loaded);
    } catch (const DomainError&) {
      rec.n_ph.reset();
    }
  }
  return rec;
}

Report run_sweep(const SweepManifest& manifest, const SweepOptions& options) {
  const std::size_t n = manifest.entries.size();
  std::vector<Outcome> outcomes(n);
  const unsigned workers = std::min<unsigned>(resolve_threads(options.threads), std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) outcomes[i] = process_entry(manifest, manifest.entries[i]);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  Report report;
  report.provenance.version = RESOKIT_VERSION;
  if (options.stamp) report.provenance.created = utc_timestamp();
  report.config = config_json(manifest);

  const std::vector<CurveMembership> curves = classify(manifest.entries);
  for (std::size_t i = 0; i < n; ++i) {
    report.provenance.inputs.push_back(outcomes[i].digest);
    if (const auto* failure = std::get_if<TraceFailure>(&outcomes[i].result)) {
      report.failures.push_back(*failure);
      continue;
    }
    const auto& rec = std::get<TraceRecord>(outcomes[i].result);
    report.traces.push_back(rec);
    const auto& fit = rec.fit;
    if (curves[i].power && rec.n_ph) {
      report.qi_vs_nph.push_back(
          {rec.label, rec.meta.vna_power_dbm, *rec.n_ph, fit.params.f_r, fit.q_internal, fit.uncertainties.q_internal});
    }
    if (curves[i].temperature) {
      report.df_vs_t.push_back({rec.label, rec.meta.temperature_k, fit.params.f_r, fit.uncertainties.f_r,
                                fit.q_internal, fit.uncertainties.q_internal});
    }
    if (curves[i].field) {
      report.field.push_back({rec.label, rec.meta.field_mt * 1e-3, fit.params.f_r, fit.uncertainties.f_r,
                              fit.q_internal, fit.uncertainties.q_internal});
    }
  }
  return report;
}

}  // namespace resokit::dataio
