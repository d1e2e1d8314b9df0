#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace resokit::loss {

/// Power- and temperature-saturable two-level-system loss.
struct TlsParams {
  double q_tls0 = 0.0;  // 1 / delta_TLS at zero power and zero temperature
  double n_c = 0.0;     // critical photon number
  double beta = 0.0;

  /// Throws PreconditionError unless every field is > 0.
  void validate() const;
  /// beta in (0, 1]; values outside are allowed but flagged by callers.
  bool beta_in_range() const { return beta > 0.0 && beta <= 1.0; }

  bool operator==(const TlsParams&) const = default;
};

/// Thermal-quasiparticle parameters. The density of states at the Fermi level cancels
/// between n_qp and the loss prefactor, so it is not a parameter.
struct QpParams {
  double t_c = 0.0;             // K
  double gap_joules = 0.0;      // Delta
  double alpha_kinetic = 0.0;   // L_k / (L_k + L_geo)

  /// Delta = 1.76 k_B T_c.
  static QpParams from_tc(double t_c, double alpha_kinetic);
  void validate() const;

  bool operator==(const QpParams&) const = default;
};

struct FieldParams {
  double k_quad = 0.0;     // 1/T^2
  double thickness = 0.0;  // m
  double diffusion = 0.0;  // m^2/s
  double t_c = 0.0;        // K

  bool operator==(const FieldParams&) const = default;
};

struct LossBudget {
  double delta_tls = 0.0;
  double delta_qp = 0.0;
  double delta_field = 0.0;
  double delta_const = 0.0;
  double total = 0.0;

  double q_internal() const { return 1.0 / total; }
  bool operator==(const LossBudget&) const = default;
};

// ---------------------------------------------------------------------------
// Loss models
// ---------------------------------------------------------------------------

/// (1/Q0) tanh(h f_r / 2 k_B T) / (1 + n_ph/n_c)^beta. Throws DomainError for T <= 0.
double tls_loss(double temperature, double n_ph, double f_r, const TlsParams& p);

/// (2 alpha/pi) sqrt(2 Delta / hbar w) sqrt(2 pi k_B T / Delta) exp(-Delta / k_B T),
/// i.e. the Mattis-Bardeen low-temperature loss with the thermal n_qp substituted.
double qp_loss(double temperature, double f_r, const QpParams& p);

/// Phenomenological c2 B^2.
double field_loss(double b_parallel, double c2);

/// Assembles the budget. The total is summed in ascending order of the components so it
/// does not depend on argument order. Throws PreconditionError on a negative or
/// non-finite component.
LossBudget total_loss(double delta_tls, double delta_qp, double delta_field, double delta_const);

// ---------------------------------------------------------------------------
// Frequency shifts (Hz)
// ---------------------------------------------------------------------------

/// f_r / (pi Q0) [Re psi(1/2 + i y) - ln y], y = h f_r / (2 pi k_B T).
/// The bracket is dimensionless; f_r supplies the frequency scale.
double tls_freq_shift(double temperature, double f_r, double q_tls0);

/// -(1/2) alpha f_r x / sinh(x), x = Delta / k_B T.
double qp_freq_shift(double temperature, double f_r, const QpParams& p);

double total_freq_shift(double temperature, double f_r, const TlsParams& tls, const QpParams& qp);

/// -k B^2 f_r0.
double field_freq_shift(double b_parallel, double f_r0, double k_quad);

/// D = 48 k hbar k_B T_c / (pi t^2 e^2).
double diffusion_from_k(double k_quad, double thickness, double t_c);
/// k = (pi/48) t^2 e^2 D / (hbar k_B T_c).
double k_from_diffusion(double diffusion, double thickness, double t_c);

struct VortexThresholds {
  double b_a = 0.0;   // pi phi0 / 4 t^2
  double b_c1 = 0.0;  // 1.65 phi0 / t^2
};
VortexThresholds vortex_thresholds(double thickness);

struct JumpEvent {
  std::size_t index = 0;  // step between samples index and index + 1
  double b_field = 0.0;   // midpoint of the two fields
  double delta_f = 0.0;   // f[index + 1] - f[index]

  bool operator==(const JumpEvent&) const = default;
};

/// Steps whose |f_{i+1} - f_i| exceeds max(5 * median |successive difference|, 10 kHz).
/// Throws PreconditionError for fewer than 4 points, mismatched lengths or a
/// non-monotone field axis.
std::vector<JumpEvent> detect_jumps(std::span<const double> b_field, std::span<const double> f_r);

// ---------------------------------------------------------------------------
// Regression
// ---------------------------------------------------------------------------

struct TlsFit {
  TlsParams params;
  double delta0 = 0.0;
  double sigma_q_tls0 = 0.0;
  double sigma_n_c = 0.0;
  double sigma_beta = 0.0;
  double sigma_delta0 = 0.0;
  double rms_log_residual = 0.0;
  bool converged = false;
  bool beta_at_bound = false;
};

/// Fits 1/Q_i = tls_loss(T, n, f_r) + delta0 on log residuals. Needs >= 6 points spanning
/// >= 2 decades of n_ph (PreconditionError otherwise). beta is confined to (0, 1].
/// With `sigma_q_i` (one per point, all > 0) each log residual is weighted by q_i / sigma_q_i;
/// otherwise weights are uniform.
TlsFit fit_tls(std::span<const double> n_ph, std::span<const double> q_i, double temperature, double f_r,
               std::span<const double> sigma_q_i = {});

struct ShiftFitOptions {
  double alpha_kinetic = 0.0974;
  bool free_alpha = false;
  double t_c_guess = 12.0;
  double q_tls0_guess = 1e5;
};

struct ShiftFit {
  double f_r0 = 0.0;
  double q_tls0 = 0.0;
  double t_c = 0.0;
  double alpha_kinetic = 0.0;
  double sigma_f_r0 = 0.0;
  double sigma_q_tls0 = 0.0;
  double sigma_t_c = 0.0;
  double sigma_alpha = 0.0;
  double rms_residual = 0.0;  // Hz
  bool converged = false;
};

/// Fits f_r(T) = f_r0 + total_freq_shift(T, f_r0, ...) over a temperature sweep.
ShiftFit fit_freq_shift(std::span<const double> temperature, std::span<const double> f_r,
                        const ShiftFitOptions& options = {});

struct FieldShiftFit {
  double f_r0 = 0.0;
  double k_quad = 0.0;
  double sigma_f_r0 = 0.0;
  double sigma_k = 0.0;
  bool converged = false;
};

/// Fits f_r(B) = f_r0 (1 - k B^2).
FieldShiftFit fit_field_shift(std::span<const double> b_field, std::span<const double> f_r);

struct FieldLossFit {
  double c2 = 0.0;
  double delta_base = 0.0;  // field-independent part of 1/Q_i
  double sigma_c2 = 0.0;
  double sigma_delta_base = 0.0;
  bool converged = false;
};

/// Fits 1/Q_i(B) = delta_base + c2 B^2.
FieldLossFit fit_field_loss(std::span<const double> b_field, std::span<const double> q_i);

}  // namespace resokit::loss
