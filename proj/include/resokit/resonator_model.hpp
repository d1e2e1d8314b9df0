#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace resokit::resonator {

/// Parameters of a notch-type resonator on a feedline, including the cable environment
/// a e^{i alpha} e^{-2 pi i f tau}.
struct NotchParams {
  double f_r = 0.0;             // Hz
  double q_loaded = 0.0;        // Q_l
  double q_coupling_mag = 0.0;  // |Q_c|
  double phi = 0.0;             // impedance-mismatch angle, rad
  double amp = 1.0;             // a
  double phase_offset = 0.0;    // alpha, rad
  double delay = 0.0;           // tau, s

  /// Throws PreconditionError unless f_r, Q_l, |Q_c|, a > 0 and 1/Q_l >= cos(phi)/|Q_c|.
  void validate() const;

  bool operator==(const NotchParams&) const = default;
};

/// 1 - (Q_l/|Q_c|) e^{i phi} / (1 + 2 i Q_l (f/f_r - 1))
std::complex<double> s21_ideal(double f, const NotchParams& p);

/// s21_ideal scaled by the environment factor a e^{i alpha} e^{-2 pi i f tau}.
std::complex<double> s21_full(double f, const NotchParams& p);

/// Acquisition metadata carried alongside a trace.
struct TraceMeta {
  double vna_power_dbm = 0.0;
  double temperature_k = 0.0;
  double field_mt = 0.0;
  std::string label;
  double z0_ohm = 50.0;

  bool operator==(const TraceMeta&) const = default;
};

/// Complex transmission samples on a strictly increasing frequency grid. Immutable.
class S21Trace {
 public:
  S21Trace() = default;
  /// Throws PreconditionError when lengths differ, the grid is not strictly increasing,
  /// or any sample is non-finite.
  S21Trace(std::vector<double> freqs, std::vector<std::complex<double>> values, TraceMeta meta = {});

  const std::vector<double>& freqs() const { return freqs_; }
  const std::vector<std::complex<double>>& values() const { return values_; }
  const TraceMeta& meta() const { return meta_; }
  std::size_t size() const { return freqs_.size(); }

  S21Trace with_meta(TraceMeta meta) const;

  bool operator==(const S21Trace&) const = default;

 private:
  std::vector<double> freqs_;
  std::vector<std::complex<double>> values_;
  TraceMeta meta_;
};

/// Evaluates s21_full on a uniform grid and adds independent Gaussian noise of standard
/// deviation `noise_sigma` to each quadrature. Deterministic for a given seed.
S21Trace synthesize_trace(const NotchParams& p, double f_start, double f_stop, int n_points,
                          double noise_sigma, std::uint64_t seed, TraceMeta meta = {});

struct AttenuationStage {
  std::string label;
  double attenuation_db = 0.0;

  bool operator==(const AttenuationStage&) const = default;
};

/// Cascade of input-line attenuators between the instrument and the chip.
struct AttenuationChain {
  std::vector<AttenuationStage> stages;

  double total_db() const;
  /// Throws PreconditionError on a negative stage.
  void validate() const;

  /// Room temperature 40 dB, then 20 dB at the 70 K, 4 K and 0.5 K stages (100 dB total).
  static AttenuationChain adr_input_line();

  bool operator==(const AttenuationChain&) const = default;
};

/// Power at the chip in watts: 10^((P_vna - total_db - 30) / 10).
double chip_input_power(double vna_power_dbm, const AttenuationChain& chain);

/// Mean intra-resonator photon number Q_i P_in / (hbar w0^2) * 2 Q_l (Q_c - Q_l) / Q_c^2.
/// Throws DomainError when q_l > q_c or a quality factor is not positive.
double photon_number(double p_in, double f_r, double q_i, double q_c, double q_l);

}  // namespace resokit::resonator
