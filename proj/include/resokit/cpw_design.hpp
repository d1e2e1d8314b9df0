#pragma once

namespace resokit::cpw {

enum class ResonatorMode { kQuarterWave, kHalfWave };

/// Cross-section and length of a coplanar-waveguide resonator, SI units.
/// `substrate_thickness` may be +infinity for the semi-infinite substrate limit.
struct CpwGeometry {
  double width = 0.0;           // centre conductor w
  double gap = 0.0;             // slot s
  double film_thickness = 0.0;  // t (validated, not used by the mapping)
  double substrate_epsilon_r = 1.0;
  double substrate_thickness = 0.0;  // h
  double resonator_length = 0.0;     // l
  ResonatorMode mode = ResonatorMode::kQuarterWave;

  /// Throws PreconditionError when an invariant is violated.
  void validate() const;
};

/// Per-unit-length transmission-line parameters and their derived quantities.
struct LineParams {
  double l_geo = 0.0;  // H/m
  double c_geo = 0.0;  // F/m
  double l_kin = 0.0;  // H/m
  double impedance = 0.0;        // ohm
  double phase_velocity = 0.0;   // m/s
  double alpha_kinetic = 0.0;    // L_k / (L_k + L_geo)
  double epsilon_eff = 1.0;
};

/// Builds LineParams from per-unit-length values, filling in the derived fields.
LineParams make_line_params(double l_geo, double c_geo, double l_kin, double epsilon_eff = 1.0);

/// Effective permittivity of a CPW on a substrate of finite height h
/// (filling-factor form; h = infinity gives (eps_r + 1) / 2).
double effective_permittivity(const CpwGeometry& geom);

/// Conformal-mapping line parameters for the given geometry plus a kinetic inductance.
LineParams line_params_from_geometry(const CpwGeometry& geom, double l_kin);

/// Frequency of mode `n` (n >= 1 is the fundamental). Quarter-wave modes are the odd
/// harmonics v (2n - 1) / 4l; half-wave modes are v n / 2l.
double resonance_frequency(const LineParams& params, double length, int n, ResonatorMode mode);

/// Kinetic inductance per metre that places mode `n` of `geom` at `f_measured`.
/// Throws DomainError when f_measured is above the L_k = 0 frequency.
double invert_kinetic_inductance(double f_measured, const CpwGeometry& geom, int n, ResonatorMode mode);

}  // namespace resokit::cpw
