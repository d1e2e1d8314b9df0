#include "resokit/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <boost/math/tools/roots.hpp>

#include "resokit/constants.hpp"
#include "resokit/dataio.hpp"
#include "resokit/errors.hpp"

namespace resokit::dataio {

namespace {

std::uint64_t trace_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 step so neighbouring indices get unrelated streams
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string numbered(const char* stem, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%02zu%s", stem, i, ext);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace

SynthPreset paper_sample2_preset() {
  SynthPreset p;
  p.name = "paper-sample2";
  p.f_r0 = 5.9643e9;
  p.tls = {9.5102e4, 13.0, 0.35};
  p.delta0 = 8e-7;
  p.qp = loss::QpParams::from_tc(12.0, 0.0974);
  p.k_quad = 0.261;
  p.field_c2 = 1e-3;
  p.q_coupling_mag = 2308.0;
  p.phi = 0.0;
  p.amp = 0.5;
  p.phase_offset = 0.3;
  p.delay = 45e-9;
  p.chain = resonator::AttenuationChain::adr_input_line();
  p.film_thickness = 100e-9;
  p.noise_sigma = 3e-4;
  p.n_points = 801;
  p.span_linewidths = 10.0;

  for (int k = 0; k <= 20; ++k) p.power_dbm.push_back(-40.0 + 2.5 * k);
  p.power_sweep_temperature = 0.026;
  p.temperatures = {0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0,
                    1.2,  1.4, 1.6,  1.8, 2.0, 2.2, 2.4, 2.6, 2.8, 3.0};
  p.temperature_sweep_power = -30.0;
  for (int k = 1; k <= 12; ++k) p.fields_mt.push_back(20.0 * k);
  p.field_sweep_power = -20.0;
  p.field_sweep_temperature = 0.026;
  return p;
}

double preset_q_internal(const SynthPreset& p, double temperature, double n_ph, double b_field) {
  const double f = preset_resonance(p, temperature, b_field);
  const loss::LossBudget budget =
      loss::total_loss(loss::tls_loss(temperature, n_ph, f, p.tls), loss::qp_loss(temperature, f, p.qp),
                       loss::field_loss(b_field, p.field_c2), p.delta0);
  return budget.q_internal();
}

double preset_resonance(const SynthPreset& p, double temperature, double b_field) {
  return p.f_r0 + loss::total_freq_shift(temperature, p.f_r0, p.tls, p.qp) +
         loss::field_freq_shift(b_field, p.f_r0, p.k_quad);
}

double preset_photon_number(const SynthPreset& p, double vna_power_dbm, double temperature, double b_field) {
  const double p_in = resonator::chip_input_power(vna_power_dbm, p.chain);
  const double f = preset_resonance(p, temperature, b_field);
  const double q_c = p.q_coupling_mag / std::cos(p.phi);
  const auto n_of = [&](double n) {
    const double q_i = preset_q_internal(p, temperature, n, b_field);
    const double q_l = 1.0 / (1.0 / q_i + 1.0 / q_c);
    return resonator::photon_number(p_in, f, q_i, q_c, q_l);
  };
  if (p_in == 0.0) return 0.0;
  // Q_i rises with n but sub-linearly, so log n - log n_of(n) is increasing with one root.
  const double lo = n_of(0.0);
  const double hi = n_of(1e300);
  if (!(hi > lo * (1.0 + 1e-15))) return lo;
  const auto g = [&](double log_n) { return log_n - std::log(n_of(std::exp(log_n))); };
  std::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(g, std::log(lo), std::log(hi),
                                                      boost::math::tools::eps_tolerance<double>(50), iters);
  return std::exp(0.5 * (root.first + root.second));
}

SynthDataset synthesize_dataset(const SynthPreset& preset, std::uint64_t seed) {
  SynthDataset ds;
  ds.manifest.chain = preset.chain;
  ds.manifest.material = preset.qp;
  ds.manifest.film_thickness = preset.film_thickness;
  cpw::CpwGeometry g;
  g.width = 4e-6;
  g.gap = 2e-6;
  g.film_thickness = preset.film_thickness;
  g.substrate_epsilon_r = 11.9;
  g.substrate_thickness = 525e-6;
  g.resonator_length = 4.688e-3;
  ds.manifest.geometry = g;

  const auto add = [&](const std::string& path, double power, double temperature, double field_mt) {
    const double b = field_mt * 1e-3;
    const double n = preset_photon_number(preset, power, temperature, b);
    const double q_i = preset_q_internal(preset, temperature, n, b);
    resonator::NotchParams np;
    np.f_r = preset_resonance(preset, temperature, b);
    np.q_coupling_mag = preset.q_coupling_mag;
    np.phi = preset.phi;
    np.q_loaded = 1.0 / (1.0 / q_i + std::cos(preset.phi) / preset.q_coupling_mag);
    np.amp = preset.amp;
    np.phase_offset = preset.phase_offset;
    np.delay = preset.delay;
    const double half = 0.5 * preset.span_linewidths * np.f_r / np.q_loaded;
    resonator::TraceMeta meta{power, temperature, field_mt, path, 50.0};
    ds.traces.push_back(resonator::synthesize_trace(np, np.f_r - half, np.f_r + half, preset.n_points,
                                                    preset.noise_sigma * preset.amp,
                                                    trace_seed(seed, ds.traces.size()), meta));
    ds.manifest.entries.push_back({path, power, temperature, field_mt, SweepKind::kAuto});
    ds.truth.push_back({path, np.f_r, q_i, n});
  };

  for (std::size_t i = 0; i < preset.power_dbm.size(); ++i) {
    add(numbered("power", i, ".s2p"), preset.power_dbm[i], preset.power_sweep_temperature, 0.0);
  }
  for (std::size_t i = 0; i < preset.temperatures.size(); ++i) {
    add(numbered("temperature", i, ".csv"), preset.temperature_sweep_power, preset.temperatures[i], 0.0);
  }
  for (std::size_t i = 0; i < preset.fields_mt.size(); ++i) {
    add(numbered("field", i, ".csv"), preset.field_sweep_power, preset.field_sweep_temperature, preset.fields_mt[i]);
  }
  return ds;
}

void write_dataset(const SynthDataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < dataset.traces.size(); ++i) {
    const std::string& name = dataset.manifest.entries[i].path;
    const bool csv = std::filesystem::path(name).extension() == ".csv";
    write_text(dir / name, csv ? write_csv_trace(dataset.traces[i]) : write_touchstone(dataset.traces[i]));
  }
  write_text(dir / "manifest.json", write_manifest(dataset.manifest));

  nlohmann::json truth = nlohmann::json::array();
  for (const auto& t : dataset.truth) {
    truth.push_back({{"path", t.path}, {"f_r", t.f_r}, {"q_internal", t.q_internal}, {"n_ph", t.n_ph}});
  }
  write_text(dir / "truth.json", truth.dump(2) + "\n");
}

}  // namespace resokit::dataio
