#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "resokit/resonator_model.hpp"
#include "resokit/spectrum_fit.hpp"

namespace resokit::dataio {

inline constexpr std::string_view kSchemaVersion = "1";

struct InputDigest {
  std::string path;
  std::string sha256;
  bool operator==(const InputDigest&) const = default;
};

struct Provenance {
  std::string tool = "resokit";
  std::string version;
  std::vector<InputDigest> inputs;
  std::string created;  // empty: not written
  bool operator==(const Provenance&) const = default;
};

struct TraceRecord {
  std::string label;
  resonator::TraceMeta meta;
  fit::FitReport fit;
  std::optional<double> p_in_w;
  std::optional<double> n_ph;
  bool operator==(const TraceRecord&) const = default;
};

struct TraceFailure {
  std::string label;
  std::string kind;  // no_resonance, unphysical, parse, fit
  std::string message;
  bool operator==(const TraceFailure&) const = default;
};

struct QiNphPoint {
  std::string label;
  double vna_power_dbm = 0.0;
  double n_ph = 0.0;
  double f_r = 0.0;
  double q_i = 0.0;
  double sigma_q_i = 0.0;
  bool operator==(const QiNphPoint&) const = default;
};

struct ShiftPoint {
  std::string label;
  double temperature_k = 0.0;
  double f_r = 0.0;
  double sigma_f_r = 0.0;
  double q_i = 0.0;
  double sigma_q_i = 0.0;
  bool operator==(const ShiftPoint&) const = default;
};

struct FieldPoint {
  std::string label;
  double field_t = 0.0;
  double f_r = 0.0;
  double sigma_f_r = 0.0;
  double q_i = 0.0;
  double sigma_q_i = 0.0;
  bool operator==(const FieldPoint&) const = default;
};

struct Report {
  Provenance provenance;
  std::vector<TraceRecord> traces;
  std::vector<TraceFailure> failures;
  std::vector<QiNphPoint> qi_vs_nph;
  std::vector<ShiftPoint> df_vs_t;
  std::vector<FieldPoint> field;
  nlohmann::json models = nlohmann::json::object();  // fitted model parameters by model name
  nlohmann::json config = nlohmann::json::object();  // chain, material, thickness, geometry
  bool operator==(const Report&) const = default;
};

nlohmann::json to_json(const fit::FitReport& fit);
fit::FitReport fit_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);

/// Canonical JSON: sorted keys, shortest round-trip floats, schema_version "1",
/// newline-terminated. Byte-stable for equal reports.
std::string write_report(const Report& report);

/// Throws ParseError (1-based line) on malformed JSON or a schema mismatch.
Report parse_report(std::string_view text);

}  // namespace resokit::dataio
