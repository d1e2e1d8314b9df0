#include <algorithm>
#include <cmath>
#include <set>

#include "resokit/errors.hpp"
#include "resokit/sweep.hpp"

namespace resokit::dataio {

using nlohmann::json;

namespace {

std::string_view sweep_name(SweepKind kind) {
  switch (kind) {
    case SweepKind::kPower:
      return "power";
    case SweepKind::kTemperature:
      return "temperature";
    case SweepKind::kField:
      return "field";
    case SweepKind::kAuto:
      break;
  }
  return "auto";
}

SweepKind sweep_from(const std::string& name) {
  for (const SweepKind k : {SweepKind::kAuto, SweepKind::kPower, SweepKind::kTemperature, SweepKind::kField}) {
    if (sweep_name(k) == name) return k;
  }
  throw ParseError(1, "manifest: unknown sweep kind '" + name + "'");
}

double finite_number(const json& j, const char* key) {
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw ParseError(1, std::string("manifest: '") + key + "' must be finite");
  return v;
}

json length_json(double v) { return std::isfinite(v) ? json(v) : json("inf"); }

double length_from(const json& j) {
  if (j.is_string() && j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

json geometry_json(const cpw::CpwGeometry& g) {
  return {{"width_m", g.width},
          {"gap_m", g.gap},
          {"film_thickness_m", g.film_thickness},
          {"substrate_epsilon_r", g.substrate_epsilon_r},
          {"substrate_thickness_m", length_json(g.substrate_thickness)},
          {"resonator_length_m", g.resonator_length},
          {"mode", g.mode == cpw::ResonatorMode::kQuarterWave ? "quarter_wave" : "half_wave"}};
}

cpw::CpwGeometry geometry_from(const json& j) {
  cpw::CpwGeometry g;
  g.width = j.at("width_m").get<double>();
  g.gap = j.at("gap_m").get<double>();
  g.film_thickness = j.at("film_thickness_m").get<double>();
  g.substrate_epsilon_r = j.at("substrate_epsilon_r").get<double>();
  g.substrate_thickness = length_from(j.at("substrate_thickness_m"));
  g.resonator_length = j.at("resonator_length_m").get<double>();
  const std::string mode = j.value("mode", std::string("quarter_wave"));
  if (mode == "quarter_wave") {
    g.mode = cpw::ResonatorMode::kQuarterWave;
  } else if (mode == "half_wave") {
    g.mode = cpw::ResonatorMode::kHalfWave;
  } else {
    throw ParseError(1, "manifest: unknown resonator mode '" + mode + "'");
  }
  return g;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

SweepManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line_of(text, e.byte == 0 ? 0 : e.byte - 1), std::string("manifest JSON: ") + e.what());
  }
  SweepManifest m;
  m.base_dir = base_dir;
  try {
    std::set<std::string> seen;
    for (const auto& e : j.at("entries")) {
      ManifestEntry entry;
      entry.path = e.at("path").get<std::string>();
      entry.vna_power_dbm = finite_number(e, "vna_power_dbm");
      entry.temperature_k = finite_number(e, "temperature_k");
      entry.field_mt = finite_number(e, "field_mt");
      if (e.contains("sweep")) entry.sweep = sweep_from(e.at("sweep").get<std::string>());
      if (entry.path.empty()) throw ParseError(1, "manifest: empty path");
      if (!(entry.temperature_k >= 0.0)) throw ParseError(1, "manifest: temperature must be >= 0");
      if (!seen.insert(entry.path).second) throw ParseError(1, "manifest: duplicate path '" + entry.path + "'");
      m.entries.push_back(std::move(entry));
    }
    if (j.contains("chain")) {
      for (const auto& s : j.at("chain")) {
        m.chain.stages.push_back({s.at("label").get<std::string>(), s.at("attenuation_db").get<double>()});
      }
      m.chain.validate();
    }
    if (j.contains("material")) {
      const json& mat = j.at("material");
      m.material = loss::QpParams::from_tc(mat.at("t_c").get<double>(), mat.at("alpha_kinetic").get<double>());
      if (mat.contains("gap_joules")) m.material.gap_joules = mat.at("gap_joules").get<double>();
      m.material.validate();
    }
    if (j.contains("geometry")) {
      m.geometry = geometry_from(j.at("geometry"));
      m.geometry->validate();
    }
    if (j.contains("film_thickness_m")) {
      m.film_thickness = j.at("film_thickness_m").get<double>();
      if (!(m.film_thickness > 0.0)) throw ParseError(1, "manifest: film_thickness_m must be > 0");
    }
  } catch (const json::exception& e) {
    throw ParseError(1, std::string("manifest schema: ") + e.what());
  } catch (const PreconditionError& e) {
    throw ParseError(1, std::string("manifest: ") + e.what());
  }
  return m;
}

json config_json(const SweepManifest& m) {
  json chain = json::array();
  for (const auto& s : m.chain.stages) chain.push_back({{"label", s.label}, {"attenuation_db", s.attenuation_db}});
  json c = {{"chain", chain},
            {"chain_total_db", m.chain.total_db()},
            {"material",
             {{"t_c", m.material.t_c},
              {"alpha_kinetic", m.material.alpha_kinetic},
              {"gap_joules", m.material.gap_joules}}},
            {"film_thickness_m", m.film_thickness}};
  if (m.geometry) c["geometry"] = geometry_json(*m.geometry);
  return c;
}

std::string write_manifest(const SweepManifest& m) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    json row = {{"path", e.path},
                {"vna_power_dbm", e.vna_power_dbm},
                {"temperature_k", e.temperature_k},
                {"field_mt", e.field_mt}};
    if (e.sweep != SweepKind::kAuto) row["sweep"] = std::string(sweep_name(e.sweep));
    entries.push_back(std::move(row));
  }
  json j = config_json(m);
  j.erase("chain_total_db");
  j["entries"] = entries;
  return j.dump(2) + "\n";
}

}  // namespace resokit::dataio
