#include "resokit/report.hpp"

#include <algorithm>

#include "resokit/errors.hpp"

namespace resokit::dataio {

using nlohmann::json;

namespace {

json meta_json(const resonator::TraceMeta& m) {
  return {{"vna_power_dbm", m.vna_power_dbm}, {"temperature_k", m.temperature_k},
          {"field_mt", m.field_mt}, {"z0_ohm", m.z0_ohm}};
}

resonator::TraceMeta meta_from(const json& j, const std::string& label) {
  resonator::TraceMeta m;
  m.vna_power_dbm = j.at("vna_power_dbm").get<double>();
  m.temperature_k = j.at("temperature_k").get<double>();
  m.field_mt = j.at("field_mt").get<double>();
  m.z0_ohm = j.at("z0_ohm").get<double>();
  m.label = label;
  return m;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

json to_json(const fit::FitReport& fit) {
  const auto& p = fit.params;
  const auto& u = fit.uncertainties;
  json flags = json::array();
  for (const auto f : fit.flags) flags.push_back(std::string(fit::to_string(f)));
  return {
      {"params",
       {{"f_r", p.f_r},
        {"q_loaded", p.q_loaded},
        {"q_coupling_mag", p.q_coupling_mag},
        {"phi", p.phi},
        {"amp", p.amp},
        {"phase_offset", p.phase_offset},
        {"delay", p.delay}}},
      {"uncertainties",
       {{"f_r", u.f_r},
        {"q_loaded", u.q_loaded},
        {"q_coupling_mag", u.q_coupling_mag},
        {"phi", u.phi},
        {"amp", u.amp},
        {"phase_offset", u.phase_offset},
        {"delay", u.delay},
        {"q_internal", u.q_internal}}},
      {"q_internal", fit.q_internal},
      {"rms_residual", fit.rms_residual},
      {"n_points", fit.n_points},
      {"flags", flags},
  };
}

fit::FitReport fit_report_from_json(const json& j) {
  fit::FitReport r;
  const json& p = j.at("params");
  r.params = {p.at("f_r").get<double>(),   p.at("q_loaded").get<double>(),     p.at("q_coupling_mag").get<double>(),
              p.at("phi").get<double>(),   p.at("amp").get<double>(),          p.at("phase_offset").get<double>(),
              p.at("delay").get<double>()};
  const json& u = j.at("uncertainties");
  r.uncertainties = {u.at("f_r").get<double>(),   u.at("q_loaded").get<double>(),     u.at("q_coupling_mag").get<double>(),
                     u.at("phi").get<double>(),   u.at("amp").get<double>(),          u.at("phase_offset").get<double>(),
                     u.at("delay").get<double>(), u.at("q_internal").get<double>()};
  r.q_internal = j.at("q_internal").get<double>();
  r.rms_residual = j.at("rms_residual").get<double>();
  r.n_points = j.at("n_points").get<int>();
  for (const auto& f : j.at("flags")) {
    const auto flag = fit::flag_from_string(f.get<std::string>());
    if (!flag) throw ParseError(1, "unknown fit flag '" + f.get<std::string>() + "'");
    r.flags.push_back(*flag);
  }
  return r;
}

json to_json(const Report& report) {
  json inputs = json::array();
  for (const auto& in : report.provenance.inputs) inputs.push_back({{"path", in.path}, {"sha256", in.sha256}});
  json provenance = {{"tool", report.provenance.tool}, {"version", report.provenance.version}, {"inputs", inputs}};
  if (!report.provenance.created.empty()) provenance["created"] = report.provenance.created;

  json traces = json::array();
  for (const auto& t : report.traces) {
    json rec = {{"label", t.label}, {"meta", meta_json(t.meta)}, {"fit", to_json(t.fit)}};
    if (t.p_in_w) rec["p_in_w"] = *t.p_in_w;
    if (t.n_ph) rec["n_ph"] = *t.n_ph;
    traces.push_back(std::move(rec));
  }
  json failures = json::array();
  for (const auto& f : report.failures) {
    failures.push_back({{"label", f.label}, {"kind", f.kind}, {"message", f.message}});
  }

  json qi = json::array();
  for (const auto& p : report.qi_vs_nph) {
    qi.push_back({{"label", p.label}, {"vna_power_dbm", p.vna_power_dbm}, {"n_ph", p.n_ph}, {"f_r", p.f_r},
                  {"q_i", p.q_i}, {"sigma_q_i", p.sigma_q_i}});
  }
  json shift = json::array();
  for (const auto& p : report.df_vs_t) {
    shift.push_back({{"label", p.label}, {"temperature_k", p.temperature_k}, {"f_r", p.f_r},
                     {"sigma_f_r", p.sigma_f_r}, {"q_i", p.q_i}, {"sigma_q_i", p.sigma_q_i}});
  }
  json field = json::array();
  for (const auto& p : report.field) {
    field.push_back({{"label", p.label}, {"field_t", p.field_t}, {"f_r", p.f_r}, {"sigma_f_r", p.sigma_f_r},
                     {"q_i", p.q_i}, {"sigma_q_i", p.sigma_q_i}});
  }

  return {
      {"schema_version", std::string(kSchemaVersion)},
      {"provenance", provenance},
      {"traces", traces},
      {"failures", failures},
      {"curves", {{"qi_vs_nph", qi}, {"df_vs_t", shift}, {"field", field}}},
      {"models", report.models},
      {"config", report.config},
  };
}

Report report_from_json(const json& j) {
  if (!j.is_object()) throw ParseError(1, "report: top level must be an object");
  if (j.value("schema_version", std::string()) != kSchemaVersion) {
    throw ParseError(1, "report: unsupported schema_version");
  }
  try {
    Report r;
    const json& prov = j.at("provenance");
    r.provenance.tool = prov.at("tool").get<std::string>();
    r.provenance.version = prov.at("version").get<std::string>();
    for (const auto& in : prov.at("inputs")) {
      r.provenance.inputs.push_back({in.at("path").get<std::string>(), in.at("sha256").get<std::string>()});
    }
    r.provenance.created = prov.value("created", std::string());

    for (const auto& t : j.at("traces")) {
      TraceRecord rec;
      rec.label = t.at("label").get<std::string>();
      rec.meta = meta_from(t.at("meta"), rec.label);
      rec.fit = fit_report_from_json(t.at("fit"));
      if (t.contains("p_in_w")) rec.p_in_w = t.at("p_in_w").get<double>();
      if (t.contains("n_ph")) rec.n_ph = t.at("n_ph").get<double>();
      r.traces.push_back(std::move(rec));
    }
    for (const auto& f : j.at("failures")) {
      r.failures.push_back(
          {f.at("label").get<std::string>(), f.at("kind").get<std::string>(), f.at("message").get<std::string>()});
    }
    const json& curves = j.at("curves");
    for (const auto& p : curves.at("qi_vs_nph")) {
      r.qi_vs_nph.push_back({p.at("label").get<std::string>(), p.at("vna_power_dbm").get<double>(),
                             p.at("n_ph").get<double>(), p.at("f_r").get<double>(), p.at("q_i").get<double>(),
                             p.at("sigma_q_i").get<double>()});
    }
    for (const auto& p : curves.at("df_vs_t")) {
      r.df_vs_t.push_back({p.at("label").get<std::string>(), p.at("temperature_k").get<double>(),
                           p.at("f_r").get<double>(), p.at("sigma_f_r").get<double>(), p.at("q_i").get<double>(),
                           p.at("sigma_q_i").get<double>()});
    }
    for (const auto& p : curves.at("field")) {
      r.field.push_back({p.at("label").get<std::string>(), p.at("field_t").get<double>(), p.at("f_r").get<double>(),
                         p.at("sigma_f_r").get<double>(), p.at("q_i").get<double>(),
                         p.at("sigma_q_i").get<double>()});
    }
    r.models = j.at("models");
    r.config = j.at("config");
    return r;
  } catch (const json::exception& e) {
    throw ParseError(1, std::string("report schema: ") + e.what());
  }
}

std::string write_report(const Report& report) { return to_json(report).dump(2) + "\n"; }

Report parse_report(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line_of(text, e.byte == 0 ? 0 : e.byte - 1), std::string("report JSON: ") + e.what());
  }
  return report_from_json(j);
}

}  // namespace resokit::dataio
