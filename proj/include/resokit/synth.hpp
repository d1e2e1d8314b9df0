#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "resokit/loss_physics.hpp"
#include "resokit/resonator_model.hpp"
#include "resokit/sweep.hpp"

namespace resokit::dataio {

/// Device, loss model and acquisition plan for a synthetic sweep.
struct SynthPreset {
  std::string name;
  double f_r0 = 0.0;  // Hz, zero-temperature zero-field resonance
  loss::TlsParams tls;
  double delta0 = 0.0;
  loss::QpParams qp;
  double k_quad = 0.0;    // 1/T^2
  double field_c2 = 0.0;  // 1/T^2, delta_B = c2 B^2
  double q_coupling_mag = 0.0;
  double phi = 0.0;
  double amp = 1.0;
  double phase_offset = 0.0;
  double delay = 0.0;
  resonator::AttenuationChain chain;
  double film_thickness = 0.0;
  double noise_sigma = 0.0;  // per quadrature, relative to amp
  int n_points = 801;
  double span_linewidths = 10.0;

  std::vector<double> power_dbm;  // power sweep
  double power_sweep_temperature = 0.0;
  std::vector<double> temperatures;  // temperature sweep
  double temperature_sweep_power = 0.0;
  std::vector<double> fields_mt;  // field sweep
  double field_sweep_power = 0.0;
  double field_sweep_temperature = 0.0;
};

/// f_r = 5.9643 GHz, Q0_TLS = 9.5102e4, n_c = 13, beta = 0.35, |Q_c| = 2308, 100 dB chain,
/// t = 100 nm; delta0, T_c, k and the field loss as documented in the README.
SynthPreset paper_sample2_preset();

/// Ground truth behind one synthetic trace.
struct SynthTruth {
  std::string path;
  double f_r = 0.0;
  double q_internal = 0.0;
  double n_ph = 0.0;
  bool operator==(const SynthTruth&) const = default;
};

struct SynthDataset {
  SweepManifest manifest;
  std::vector<resonator::S21Trace> traces;  // parallel to manifest.entries
  std::vector<SynthTruth> truth;
};

/// Internal quality factor from the loss budget at (T, n, B).
double preset_q_internal(const SynthPreset& p, double temperature, double n_ph, double b_field);
/// Resonance frequency including TLS, quasiparticle and field shifts.
double preset_resonance(const SynthPreset& p, double temperature, double b_field);
/// Self-consistent photon number: n = photon_number(P_in, f_r, Q_i(n), Q_c, Q_l(n)).
double preset_photon_number(const SynthPreset& p, double vna_power_dbm, double temperature, double b_field);

SynthDataset synthesize_dataset(const SynthPreset& preset, std::uint64_t seed);

/// Writes traces (.s2p for the power sweep, .csv otherwise), manifest.json and truth.json.
void write_dataset(const SynthDataset& dataset, const std::filesystem::path& dir);

}  // namespace resokit::dataio
