#include "resokit/loss_physics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "resokit/constants.hpp"
#include "resokit/errors.hpp"
#include "resokit/numerics.hpp"

namespace resokit::loss {

namespace c = constants;

namespace {

void require_temperature(double t, const char* who) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError(std::string(who) + ": temperature must be > 0 K, got " + std::to_string(t));
  }
}

// x / sinh(x) for x >= 0 without overflow.
double x_over_sinh(double x) {
  if (x < 1e-8) return 1.0;
  return 2.0 * x * std::exp(-x) / -std::expm1(-2.0 * x);
}

}  // namespace

void TlsParams::validate() const {
  if (!(q_tls0 > 0.0) || !(n_c > 0.0) || !(beta > 0.0)) {
    throw PreconditionError("TlsParams: Q0, n_c and beta must be > 0");
  }
}

QpParams QpParams::from_tc(double t_c, double alpha_kinetic) {
  return {t_c, c::bcs_gap_ratio * c::boltzmann * t_c, alpha_kinetic};
}

void QpParams::validate() const {
  if (!(t_c > 0.0) || !(gap_joules > 0.0)) throw PreconditionError("QpParams: t_c and gap must be > 0");
  if (!(alpha_kinetic >= 0.0 && alpha_kinetic < 1.0)) {
    throw PreconditionError("QpParams: alpha_kinetic must lie in [0, 1)");
  }
}

double tls_loss(double temperature, double n_ph, double f_r, const TlsParams& p) {
  require_temperature(temperature, "tls_loss");
  const double thermal = std::tanh(c::planck * f_r / (2.0 * c::boltzmann * temperature));
  return thermal / p.q_tls0 / std::pow(1.0 + n_ph / p.n_c, p.beta);
}

double qp_loss(double temperature, double f_r, const QpParams& p) {
  require_temperature(temperature, "qp_loss");
  const double kt = c::boltzmann * temperature;
  const double omega = 2.0 * c::pi * f_r;
  return (2.0 * p.alpha_kinetic / c::pi) * std::sqrt(2.0 * p.gap_joules / (c::hbar * omega)) *
         std::sqrt(2.0 * c::pi * kt / p.gap_joules) * std::exp(-p.gap_joules / kt);
}

double field_loss(double b_parallel, double c2) { return c2 * b_parallel * b_parallel; }

LossBudget total_loss(double delta_tls, double delta_qp, double delta_field, double delta_const) {
  std::array<double, 4> parts = {delta_tls, delta_qp, delta_field, delta_const};
  for (const double d : parts) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw PreconditionError("total_loss: components must be finite and >= 0, got " + std::to_string(d));
    }
  }
  std::sort(parts.begin(), parts.end());
  LossBudget b{delta_tls, delta_qp, delta_field, delta_const, 0.0};
  for (const double d : parts) b.total += d;
  return b;
}

double tls_freq_shift(double temperature, double f_r, double q_tls0) {
  require_temperature(temperature, "tls_freq_shift");
  const double y = c::planck * f_r / (2.0 * c::pi * c::boltzmann * temperature);
  return f_r / (c::pi * q_tls0) * (numerics::digamma_half_line(y) - std::log(y));
}

double qp_freq_shift(double temperature, double f_r, const QpParams& p) {
  require_temperature(temperature, "qp_freq_shift");
  const double x = p.gap_joules / (c::boltzmann * temperature);
  return -0.5 * p.alpha_kinetic * f_r * x_over_sinh(x);
}

double total_freq_shift(double temperature, double f_r, const TlsParams& tls, const QpParams& qp) {
  return tls_freq_shift(temperature, f_r, tls.q_tls0) + qp_freq_shift(temperature, f_r, qp);
}

double field_freq_shift(double b_parallel, double f_r0, double k_quad) {
  return -k_quad * (b_parallel * b_parallel) * f_r0;
}

double diffusion_from_k(double k_quad, double thickness, double t_c) {
  if (!(k_quad > 0.0) || !(thickness > 0.0) || !(t_c > 0.0)) {
    throw PreconditionError("diffusion_from_k: inputs must be > 0");
  }
  const double e = c::elementary_charge;
  return 48.0 * k_quad * c::hbar * c::boltzmann * t_c / (c::pi * thickness * thickness * e * e);
}

double k_from_diffusion(double diffusion, double thickness, double t_c) {
  if (!(diffusion > 0.0) || !(thickness > 0.0) || !(t_c > 0.0)) {
    throw PreconditionError("k_from_diffusion: inputs must be > 0");
  }
  const double e = c::elementary_charge;
  return c::pi / 48.0 * thickness * thickness * e * e * diffusion / (c::hbar * c::boltzmann * t_c);
}

VortexThresholds vortex_thresholds(double thickness) {
  if (!(thickness > 0.0)) throw PreconditionError("vortex_thresholds: thickness must be > 0");
  const double t2 = thickness * thickness;
  return {c::pi * c::flux_quantum / (4.0 * t2), 1.65 * c::flux_quantum / t2};
}

std::vector<JumpEvent> detect_jumps(std::span<const double> b_field, std::span<const double> f_r) {
  if (b_field.size() != f_r.size()) throw PreconditionError("detect_jumps: field and frequency counts differ");
  if (b_field.size() < 4) throw PreconditionError("detect_jumps: need at least 4 points");
  const bool up = std::is_sorted(b_field.begin(), b_field.end());
  const bool down = std::is_sorted(b_field.begin(), b_field.end(), std::greater<>());
  if (!up && !down) throw PreconditionError("detect_jumps: field axis is not monotone");

  std::vector<double> steps(f_r.size() - 1);
  for (std::size_t i = 0; i + 1 < f_r.size(); ++i) steps[i] = std::abs(f_r[i + 1] - f_r[i]);
  std::vector<double> sorted = steps;
  const std::size_t mid = sorted.size() / 2;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid), sorted.end());
  double med = sorted[mid];
  if (sorted.size() % 2 == 0) {
    med = 0.5 * (med + *std::max_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  const double threshold = std::max(5.0 * med, 1e4);

  std::vector<JumpEvent> events;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i] > threshold) {
      events.push_back({i, 0.5 * (b_field[i] + b_field[i + 1]), f_r[i + 1] - f_r[i]});
    }
  }
  return events;
}

}  // namespace resokit::loss
