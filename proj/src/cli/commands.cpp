#include "resokit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "resokit/cpw_design.hpp"
#include "resokit/dataio.hpp"
#include "resokit/errors.hpp"
#include "resokit/loss_physics.hpp"
#include "resokit/report.hpp"
#include "resokit/spectrum_fit.hpp"
#include "resokit/sweep.hpp"
#include "resokit/synth.hpp"

#ifndef RESOKIT_VERSION
#define RESOKIT_VERSION "dev"
#endif

namespace resokit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Bad arguments or unreadable inputs named on the command line.
class UsageError : public Error {
 public:
  using Error::Error;
};

// A fit that ran but did not converge; its best-effort output has already been printed.
class NotConvergedError : public Error {
 public:
  using Error::Error;
};

std::string read_input(const std::string& path) {
  try {
    return dataio::read_file(path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

void write_output(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw UsageError("cannot write '" + path + "'");
}

void emit(std::ostream& out, const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    out << text;
  } else {
    write_output(out_path, text);
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (const char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

// ----------------------------------------------------------------------------- design

struct DesignArgs {
  double width_um = 4.0;
  double gap_um = 2.0;
  double thickness_nm = 100.0;
  double eps_r = 11.9;
  std::string sub_um = "525";
  double length_mm = 4.688;
  double lk_per_m = 0.0;
  std::string mode = "quarter";
  int n = 1;
  double f_measured = 0.0;
};

int cmd_design(const DesignArgs& a, std::ostream& out) {
  cpw::CpwGeometry g;
  g.width = a.width_um * 1e-6;
  g.gap = a.gap_um * 1e-6;
  g.film_thickness = a.thickness_nm * 1e-9;
  g.substrate_epsilon_r = a.eps_r;
  g.substrate_thickness = a.sub_um == "inf" ? std::numeric_limits<double>::infinity()
                                            : dataio::parse_number(a.sub_um, 1) * 1e-6;
  g.resonator_length = a.length_mm * 1e-3;
  g.mode = a.mode == "half" ? cpw::ResonatorMode::kHalfWave : cpw::ResonatorMode::kQuarterWave;

  json result;
  try {
    const cpw::LineParams lp = cpw::line_params_from_geometry(g, a.lk_per_m);
    result = {{"l_geo_h_per_m", lp.l_geo},
              {"c_geo_f_per_m", lp.c_geo},
              {"l_kin_h_per_m", lp.l_kin},
              {"impedance_ohm", lp.impedance},
              {"phase_velocity_m_per_s", lp.phase_velocity},
              {"alpha_kinetic", lp.alpha_kinetic},
              {"epsilon_eff", lp.epsilon_eff},
              {"mode", a.mode == "half" ? "half_wave" : "quarter_wave"},
              {"mode_index", a.n},
              {"f_n_hz", cpw::resonance_frequency(lp, g.resonator_length, a.n, g.mode)}};
    if (a.f_measured > 0.0) {
      result["l_kin_from_f_measured_h_per_m"] = cpw::invert_kinetic_inductance(a.f_measured, g, a.n, g.mode);
    }
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }
  out << result.dump(2) << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------------------- fit

struct FitArgs {
  std::string trace;
  std::string out;
  double power_dbm = 0.0;
  double temperature_k = 0.0;
  double field_mt = 0.0;
  double chain_db = 100.0;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const std::string bytes = read_input(a.trace);
  const fs::path path(a.trace);
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  resonator::S21Trace trace = ext == ".csv" ? dataio::parse_csv_trace(bytes) : dataio::parse_touchstone(bytes);
  resonator::TraceMeta meta = trace.meta();
  meta.vna_power_dbm = a.power_dbm;
  meta.temperature_k = a.temperature_k;
  meta.field_mt = a.field_mt;
  meta.label = path.filename().string();
  trace = trace.with_meta(meta);

  const fit::FitReport fit = fit::fit_notch(trace);
  const resonator::AttenuationChain chain{{{"input line", a.chain_db}}};
  dataio::Report report;
  report.provenance.version = RESOKIT_VERSION;
  report.provenance.inputs.push_back({meta.label, dataio::sha256_hex(bytes)});
  report.traces.push_back(dataio::make_trace_record(trace, fit, chain));
  report.config = {{"chain_total_db", a.chain_db}};
  emit(out, a.out, dataio::write_report(report));
  if (fit.has(fit::FitFlag::kNotConverged)) throw NotConvergedError("fit_notch: refinement did not converge");
  return kExitOk;
}

// ----------------------------------------------------------------------------- sweep-fit

struct SweepArgs {
  std::string manifest;
  std::string out;
  unsigned threads = 0;
  bool stamp = false;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const std::string text = read_input(a.manifest);
  const fs::path base = fs::path(a.manifest).parent_path();
  const dataio::SweepManifest manifest = dataio::parse_manifest(text, base.empty() ? fs::path(".") : base);
  dataio::Report report = dataio::run_sweep(manifest, {a.threads, a.stamp});
  report.provenance.inputs.insert(report.provenance.inputs.begin(),
                                  {fs::path(a.manifest).filename().string(), dataio::sha256_hex(text)});
  emit(out, a.out, dataio::write_report(report));
  return kExitOk;
}

// ----------------------------------------------------------------------------- model fits

dataio::Report load_report(const std::string& path) { return dataio::parse_report(read_input(path)); }

double config_number(const dataio::Report& r, const char* section, const char* key, double fallback) {
  const json& c = r.config;
  if (section != nullptr) {
    if (c.contains(section) && c[section].is_object() && c[section].contains(key) && c[section][key].is_number()) {
      return c[section][key].get<double>();
    }
    return fallback;
  }
  return c.contains(key) && c[key].is_number() ? c[key].get<double>() : fallback;
}

void finish_model(std::ostream& out, const std::string& out_path, dataio::Report report, const char* name,
                  const json& model, bool converged) {
  out << json{{name, model}}.dump(2) << "\n";
  if (!out_path.empty()) {
    report.models[name] = model;
    write_output(out_path, dataio::write_report(report));
  }
  if (!converged) throw NotConvergedError(std::string(name) + " fit did not converge");
}

struct TlsArgs {
  std::string report;
  std::string out;
  double temperature_k = 0.026;
};

int cmd_tls(const TlsArgs& a, std::ostream& out) {
  const dataio::Report report = load_report(a.report);
  std::vector<double> n, q, f, sq;
  bool weighted = true;
  for (const auto& p : report.qi_vs_nph) {
    n.push_back(p.n_ph), q.push_back(p.q_i), f.push_back(p.f_r), sq.push_back(p.sigma_q_i);
    weighted = weighted && p.sigma_q_i > 0.0 && std::isfinite(p.sigma_q_i);
  }
  if (!weighted) sq.clear();
  if (f.empty()) throw PreconditionError("tls-fit: report has no qi_vs_nph curve");
  std::vector<double> sorted = f;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const double f_r = sorted[sorted.size() / 2];

  const loss::TlsFit fit = loss::fit_tls(n, q, a.temperature_k, f_r, sq);
  const json model = {{"q_tls0", fit.params.q_tls0},
                      {"n_c", fit.params.n_c},
                      {"beta", fit.params.beta},
                      {"delta0", fit.delta0},
                      {"sigma_q_tls0", fit.sigma_q_tls0},
                      {"sigma_n_c", fit.sigma_n_c},
                      {"sigma_beta", fit.sigma_beta},
                      {"sigma_delta0", fit.sigma_delta0},
                      {"rms_log_residual", fit.rms_log_residual},
                      {"temperature_k", a.temperature_k},
                      {"f_r", f_r},
                      {"n_points", n.size()},
                      {"weighted", !sq.empty()},
                      {"beta_at_bound", fit.beta_at_bound},
                      {"converged", fit.converged}};
  finish_model(out, a.out, report, "tls", model, fit.converged);
  return kExitOk;
}

struct ShiftArgs {
  std::string report;
  std::string out;
  double alpha = -1.0;
  bool free_alpha = false;
  double tc_guess = -1.0;
  double q0_guess = 1e5;
};

int cmd_shift(const ShiftArgs& a, std::ostream& out) {
  const dataio::Report report = load_report(a.report);
  std::vector<double> t, f;
  for (const auto& p : report.df_vs_t) t.push_back(p.temperature_k), f.push_back(p.f_r);
  loss::ShiftFitOptions opt;
  opt.alpha_kinetic = a.alpha >= 0.0 ? a.alpha : config_number(report, "material", "alpha_kinetic", 0.0974);
  opt.free_alpha = a.free_alpha;
  opt.t_c_guess = a.tc_guess > 0.0 ? a.tc_guess : config_number(report, "material", "t_c", 12.0);
  opt.q_tls0_guess = a.q0_guess;
  const loss::ShiftFit fit = loss::fit_freq_shift(t, f, opt);
  const json model = {{"f_r0", fit.f_r0},
                      {"q_tls0", fit.q_tls0},
                      {"t_c", fit.t_c},
                      {"alpha_kinetic", fit.alpha_kinetic},
                      {"alpha_free", a.free_alpha},
                      {"sigma_f_r0", fit.sigma_f_r0},
                      {"sigma_q_tls0", fit.sigma_q_tls0},
                      {"sigma_t_c", fit.sigma_t_c},
                      {"sigma_alpha", fit.sigma_alpha},
                      {"rms_residual_hz", fit.rms_residual},
                      {"n_points", t.size()},
                      {"converged", fit.converged}};
  finish_model(out, a.out, report, "shift", model, fit.converged);
  return kExitOk;
}

struct FieldArgs {
  std::string report;
  std::string out;
  double thickness_nm = -1.0;
  double t_c = -1.0;
};

int cmd_field(const FieldArgs& a, std::ostream& out) {
  const dataio::Report report = load_report(a.report);
  std::vector<dataio::FieldPoint> pts = report.field;
  std::stable_sort(pts.begin(), pts.end(), [](const auto& x, const auto& y) { return x.field_t < y.field_t; });
  std::vector<double> b, f, q;
  for (const auto& p : pts) b.push_back(p.field_t), f.push_back(p.f_r), q.push_back(p.q_i);

  const double thickness =
      a.thickness_nm > 0.0 ? a.thickness_nm * 1e-9 : config_number(report, nullptr, "film_thickness_m", 100e-9);
  const double t_c = a.t_c > 0.0 ? a.t_c : config_number(report, "material", "t_c", 12.0);

  const loss::FieldShiftFit shift = loss::fit_field_shift(b, f);
  const loss::FieldLossFit lossfit = loss::fit_field_loss(b, q);
  const loss::VortexThresholds v = loss::vortex_thresholds(thickness);
  json jumps = json::array();
  if (b.size() >= 4) {
    for (const auto& e : loss::detect_jumps(b, f)) {
      jumps.push_back({{"index", e.index}, {"b_field_t", e.b_field}, {"delta_f_hz", e.delta_f}});
    }
  }
  json model = {{"f_r0", shift.f_r0},
                {"k_quad", shift.k_quad},
                {"sigma_f_r0", shift.sigma_f_r0},
                {"sigma_k_quad", shift.sigma_k},
                {"c2", lossfit.c2},
                {"sigma_c2", lossfit.sigma_c2},
                {"delta_base", lossfit.delta_base},
                {"thickness_m", thickness},
                {"t_c", t_c},
                {"b_a_t", v.b_a},
                {"b_c1_t", v.b_c1},
                {"jumps", jumps},
                {"n_points", b.size()},
                {"converged", shift.converged && lossfit.converged}};
  if (shift.k_quad > 0.0) model["diffusion_m2_per_s"] = loss::diffusion_from_k(shift.k_quad, thickness, t_c);
  finish_model(out, a.out, report, "field", model, shift.converged && lossfit.converged);
  return kExitOk;
}

// ----------------------------------------------------------------------------- plot-data

struct PlotArgs {
  std::string report;
  std::string curve = "qi-vs-nph";
  std::string out;
};

int cmd_plot(const PlotArgs& a, std::ostream& out) {
  const dataio::Report r = load_report(a.report);
  using dataio::format_number;
  std::string csv;
  if (a.curve == "qi-vs-nph") {
    csv = "label,vna_power_dbm,n_ph,q_i,sigma_q_i\n";
    for (const auto& p : r.qi_vs_nph) {
      csv += csv_field(p.label) + "," + format_number(p.vna_power_dbm) + "," + format_number(p.n_ph) + "," +
             format_number(p.q_i) + "," + format_number(p.sigma_q_i) + "\n";
    }
  } else if (a.curve == "df-vs-t") {
    csv = "label,temperature_k,f_r,delta_f,sigma_f_r,q_i,sigma_q_i\n";
    const auto coldest = std::min_element(r.df_vs_t.begin(), r.df_vs_t.end(), [](const auto& x, const auto& y) {
      return x.temperature_k < y.temperature_k;
    });
    for (const auto& p : r.df_vs_t) {
      csv += csv_field(p.label) + "," + format_number(p.temperature_k) + "," + format_number(p.f_r) + "," +
             format_number(p.f_r - coldest->f_r) + "," + format_number(p.sigma_f_r) + "," + format_number(p.q_i) +
             "," + format_number(p.sigma_q_i) + "\n";
    }
  } else if (a.curve == "field") {
    csv = "label,field_t,f_r,delta_f,sigma_f_r,q_i,sigma_q_i\n";
    const auto lowest = std::min_element(r.field.begin(), r.field.end(), [](const auto& x, const auto& y) {
      return std::abs(x.field_t) < std::abs(y.field_t);
    });
    for (const auto& p : r.field) {
      csv += csv_field(p.label) + "," + format_number(p.field_t) + "," + format_number(p.f_r) + "," +
             format_number(p.f_r - lowest->f_r) + "," + format_number(p.sigma_f_r) + "," + format_number(p.q_i) +
             "," + format_number(p.sigma_q_i) + "\n";
    }
  } else {
    throw UsageError("plot-data: unknown curve '" + a.curve + "' (qi-vs-nph, df-vs-t, field)");
  }
  emit(out, a.out, csv);
  return kExitOk;
}

// ----------------------------------------------------------------------------- synth

struct SynthArgs {
  std::string preset = "paper-sample2";
  std::uint64_t seed = 7;
  std::string out;
  double noise = -1.0;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.preset != "paper-sample2") throw UsageError("synth: unknown preset '" + a.preset + "'");
  dataio::SynthPreset preset = dataio::paper_sample2_preset();
  if (a.noise >= 0.0) preset.noise_sigma = a.noise;
  const dataio::SynthDataset ds = dataio::synthesize_dataset(preset, a.seed);
  try {
    dataio::write_dataset(ds, a.out);
  } catch (const fs::filesystem_error& e) {
    throw UsageError(e.what());
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  out << json{{"preset", a.preset}, {"seed", a.seed}, {"traces", ds.traces.size()},
              {"manifest", (fs::path(a.out) / "manifest.json").string()}}
             .dump(2)
      << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------------------- errors

int report_error(std::ostream& err, int code, const std::string& kind, const std::string& message,
                 std::size_t line = 0) {
  json e = {{"code", code}, {"kind", kind}, {"message", message}};
  if (line > 0) e["line"] = line;
  err << json{{"error", e}}.dump() << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Superconducting CPW resonator design and S21 characterisation", "resokit"};
  app.set_version_flag("--version", RESOKIT_VERSION);
  app.require_subcommand(1);

  DesignArgs design;
  auto* s_design = app.add_subcommand("design", "CPW line parameters and mode frequency from geometry");
  s_design->add_option("--width-um", design.width_um, "centre conductor width [um]")->check(CLI::PositiveNumber);
  s_design->add_option("--gap-um", design.gap_um, "slot width [um]")->check(CLI::PositiveNumber);
  s_design->add_option("--thickness-nm", design.thickness_nm, "film thickness [nm]")->check(CLI::PositiveNumber);
  s_design->add_option("--eps-r", design.eps_r, "substrate relative permittivity");
  s_design->add_option("--sub-um", design.sub_um, "substrate thickness [um] or 'inf'");
  s_design->add_option("--length-mm", design.length_mm, "resonator length [mm]")->check(CLI::PositiveNumber);
  s_design->add_option("--lk-per-m", design.lk_per_m, "kinetic inductance [H/m]")->check(CLI::NonNegativeNumber);
  s_design->add_option("--mode", design.mode, "quarter or half")->check(CLI::IsMember({"quarter", "half"}));
  s_design->add_option("--n", design.n, "mode index, 1 = fundamental")->check(CLI::PositiveNumber);
  s_design->add_option("--f-measured", design.f_measured, "invert this frequency [Hz] to L_k");

  FitArgs fit_args;
  auto* s_fit = app.add_subcommand("fit", "fit one S21 trace (.s2p or .csv)");
  s_fit->add_option("trace", fit_args.trace)->required();
  s_fit->add_option("--out", fit_args.out, "report path (default stdout)");
  s_fit->add_option("--power-dbm", fit_args.power_dbm, "VNA output power");
  s_fit->add_option("--temperature-k", fit_args.temperature_k);
  s_fit->add_option("--field-mt", fit_args.field_mt);
  s_fit->add_option("--chain-db", fit_args.chain_db, "total input attenuation")->check(CLI::NonNegativeNumber);

  SweepArgs sweep;
  auto* s_sweep = app.add_subcommand("sweep-fit", "fit every trace of a manifest");
  s_sweep->add_option("manifest", sweep.manifest)->required();
  s_sweep->add_option("--out", sweep.out, "report path (default stdout)");
  s_sweep->add_option("--threads", sweep.threads, "worker cap (0: RESOKIT_THREADS or all cores)");
  s_sweep->add_flag("--stamp", sweep.stamp, "record a creation timestamp");

  TlsArgs tls;
  auto* s_tls = app.add_subcommand("tls-fit", "TLS model over the Q_i(n_ph) curve of a report");
  s_tls->add_option("report", tls.report)->required();
  s_tls->add_option("--temperature-k", tls.temperature_k)->check(CLI::PositiveNumber);
  s_tls->add_option("--out", tls.out, "write the report with the model added");

  ShiftArgs shift;
  auto* s_shift = app.add_subcommand("shift-fit", "TLS + quasiparticle frequency-shift fit over f_r(T)");
  s_shift->add_option("report", shift.report)->required();
  s_shift->add_option("--alpha", shift.alpha, "kinetic inductance fraction (default: report config)");
  s_shift->add_flag("--free-alpha", shift.free_alpha, "fit alpha as well");
  s_shift->add_option("--tc-guess", shift.tc_guess, "starting T_c [K] (default: report config)");
  s_shift->add_option("--q0-guess", shift.q0_guess, "starting Q0_TLS")->check(CLI::PositiveNumber);
  s_shift->add_option("--out", shift.out, "write the report with the model added");

  FieldArgs field;
  auto* s_field = app.add_subcommand("field-fit", "parabolic field shift, field loss, vortex thresholds, jumps");
  s_field->add_option("report", field.report)->required();
  s_field->add_option("--thickness-nm", field.thickness_nm, "film thickness (default: report config)");
  s_field->add_option("--t-c", field.t_c, "critical temperature for D (default: report config)");
  s_field->add_option("--out", field.out, "write the report with the model added");

  PlotArgs plot;
  auto* s_plot = app.add_subcommand("plot-data", "emit a report curve as CSV");
  s_plot->add_option("report", plot.report)->required();
  s_plot->add_option("--curve", plot.curve, "qi-vs-nph, df-vs-t or field");
  s_plot->add_option("--out", plot.out, "CSV path (default stdout)");

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "write a synthetic sweep dataset");
  s_synth->add_option("--preset", synth.preset)->check(CLI::IsMember({"paper-sample2"}));
  s_synth->add_option("--seed", synth.seed);
  s_synth->add_option("--out", synth.out, "output directory")->required();
  s_synth->add_option("--noise", synth.noise, "per-quadrature noise relative to |a|")->check(CLI::NonNegativeNumber);

  std::vector<char*> argv;
  std::vector<std::string> owned = args.empty() ? std::vector<std::string>{"resokit"} : args;
  for (auto& s : owned) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << RESOKIT_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return report_error(err, kExitUsage, "usage", e.what());
  }

  try {
    if (s_design->parsed()) return cmd_design(design, out);
    if (s_fit->parsed()) return cmd_fit(fit_args, out);
    if (s_sweep->parsed()) return cmd_sweep(sweep, out);
    if (s_tls->parsed()) return cmd_tls(tls, out);
    if (s_shift->parsed()) return cmd_shift(shift, out);
    if (s_field->parsed()) return cmd_field(field, out);
    if (s_plot->parsed()) return cmd_plot(plot, out);
    if (s_synth->parsed()) return cmd_synth(synth, out);
  } catch (const UsageError& e) {
    return report_error(err, kExitUsage, "usage", e.what());
  } catch (const ParseError& e) {
    return report_error(err, kExitParse, "parse", e.what(), e.line());
  } catch (const NoResonanceError& e) {
    return report_error(err, kExitNoResonance, "no_resonance", e.what());
  } catch (const NotConvergedError& e) {
    return report_error(err, kExitFit, "not_converged", e.what());
  } catch (const UnphysicalError& e) {
    return report_error(err, kExitFit, "unphysical", e.what());
  } catch (const Error& e) {
    return report_error(err, kExitFit, "fit", e.what());
  } catch (const std::exception& e) {
    return report_error(err, kExitFit, "internal", e.what());
  }
  return report_error(err, kExitUsage, "usage", "no command given");
}

}  // namespace resokit::cli
