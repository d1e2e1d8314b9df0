#include "resokit/resonator_model.hpp"

#include <cmath>
#include <random>

#include "resokit/constants.hpp"
#include "resokit/errors.hpp"

namespace resokit::resonator {

using namespace std::complex_literals;

void NotchParams::validate() const {
  if (!(f_r > 0.0) || !(q_loaded > 0.0) || !(q_coupling_mag > 0.0) || !(amp > 0.0)) {
    throw PreconditionError("NotchParams: f_r, Q_l, |Q_c| and a must be > 0");
  }
  if (!std::isfinite(phi) || !std::isfinite(phase_offset) || !std::isfinite(delay)) {
    throw PreconditionError("NotchParams: angles and delay must be finite");
  }
  if (1.0 / q_loaded < std::cos(phi) / q_coupling_mag) {
    throw PreconditionError("NotchParams: 1/Q_l < cos(phi)/|Q_c| implies negative internal loss");
  }
}

std::complex<double> s21_ideal(double f, const NotchParams& p) {
  const double detuning = 2.0 * p.q_loaded * (f / p.f_r - 1.0);
  return 1.0 - (p.q_loaded / p.q_coupling_mag) * std::polar(1.0, p.phi) / (1.0 + 1i * detuning);
}

std::complex<double> s21_full(double f, const NotchParams& p) {
  // Separate factors: the delay phase can reach thousands of radians and would swamp alpha if summed.
  return std::polar(p.amp, p.phase_offset) * std::polar(1.0, -2.0 * constants::pi * f * p.delay) * s21_ideal(f, p);
}

S21Trace::S21Trace(std::vector<double> freqs, std::vector<std::complex<double>> values, TraceMeta meta)
    : freqs_(std::move(freqs)), values_(std::move(values)), meta_(std::move(meta)) {
  if (freqs_.size() != values_.size()) {
    throw PreconditionError("S21Trace: frequency and value counts differ");
  }
  for (std::size_t i = 0; i < freqs_.size(); ++i) {
    if (!std::isfinite(freqs_[i]) || !std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag())) {
      throw PreconditionError("S21Trace: non-finite sample at index " + std::to_string(i));
    }
    if (i > 0 && !(freqs_[i] > freqs_[i - 1])) {
      throw PreconditionError("S21Trace: frequencies not strictly increasing at index " + std::to_string(i));
    }
  }
}

S21Trace S21Trace::with_meta(TraceMeta meta) const {
  S21Trace copy = *this;
  copy.meta_ = std::move(meta);
  return copy;
}

S21Trace synthesize_trace(const NotchParams& p, double f_start, double f_stop, int n_points,
                          double noise_sigma, std::uint64_t seed, TraceMeta meta) {
  if (!(f_start < f_stop) || !(f_start > 0.0)) throw PreconditionError("synthesize_trace: need 0 < f_start < f_stop");
  if (n_points < 16) throw PreconditionError("synthesize_trace: need at least 16 points");
  if (!(noise_sigma >= 0.0)) throw PreconditionError("synthesize_trace: noise sigma must be >= 0");

  const auto n = static_cast<std::size_t>(n_points);
  std::vector<double> freqs(n);
  std::vector<std::complex<double>> values(n);
  const double step = (f_stop - f_start) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    freqs[i] = i + 1 == n ? f_stop : f_start + step * static_cast<double>(i);
    values[i] = s21_full(freqs[i], p);
  }
  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (auto& v : values) {
      const double re = noise(rng);
      const double im = noise(rng);
      v += std::complex<double>(re, im);
    }
  }
  return S21Trace(std::move(freqs), std::move(values), std::move(meta));
}

double AttenuationChain::total_db() const {
  double total = 0.0;
  for (const auto& stage : stages) total += stage.attenuation_db;
  return total;
}

void AttenuationChain::validate() const {
  for (const auto& stage : stages) {
    if (!(stage.attenuation_db >= 0.0) || !std::isfinite(stage.attenuation_db)) {
      throw PreconditionError("AttenuationChain: stage '" + stage.label + "' must be >= 0 dB");
    }
  }
}

AttenuationChain AttenuationChain::adr_input_line() {
  return {{{"room temperature", 40.0}, {"70 K", 20.0}, {"4 K", 20.0}, {"0.5 K", 20.0}}};
}

double chip_input_power(double vna_power_dbm, const AttenuationChain& chain) {
  return std::pow(10.0, (vna_power_dbm - chain.total_db() - 30.0) / 10.0);
}

double photon_number(double p_in, double f_r, double q_i, double q_c, double q_l) {
  if (!(p_in >= 0.0) || !(f_r > 0.0) || !(q_i > 0.0) || !(q_c > 0.0) || !(q_l > 0.0)) {
    throw DomainError("photon_number: inputs must be positive");
  }
  if (q_l > q_c) throw DomainError("photon_number: Q_l > Q_c is unphysical");
  const double omega = 2.0 * constants::pi * f_r;
  return q_i * p_in / (constants::hbar * omega * omega) * (2.0 * q_l * (q_c - q_l) / (q_c * q_c));
}

}  // namespace resokit::resonator
