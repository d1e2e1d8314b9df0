#include "resokit/cpw_design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "resokit/constants.hpp"
#include "resokit/errors.hpp"
#include "resokit/numerics.hpp"

namespace resokit::cpw {

using numerics::elliptic_k;

namespace {

double complementary(double k) { return std::sqrt((1.0 - k) * (1.0 + k)); }

// K(k') / K(k), modulus convention.
double k_ratio(double k) { return elliptic_k(complementary(k)) / elliptic_k(k); }

// sinh(a) / sinh(b) for 0 < a < b without overflow at large arguments.
double sinh_ratio(double a, double b) {
  if (b < 20.0) return std::sinh(a) / std::sinh(b);
  return std::exp(a - b) * (-std::expm1(-2.0 * a)) / (-std::expm1(-2.0 * b));
}

double mode_wavelength_factor(int n, ResonatorMode mode, double length) {
  if (n < 1) throw PreconditionError("mode index must be >= 1, got " + std::to_string(n));
  // f = v / lambda_n
  return mode == ResonatorMode::kQuarterWave ? 4.0 * length / (2.0 * n - 1.0) : 2.0 * length / n;
}

}  // namespace

void CpwGeometry::validate() const {
  if (!(width > 0.0) || !(gap > 0.0) || !(film_thickness > 0.0) || !(resonator_length > 0.0)) {
    throw PreconditionError("CpwGeometry: width, gap, film thickness and length must be > 0");
  }
  if (!(substrate_epsilon_r >= 1.0) || !std::isfinite(substrate_epsilon_r)) {
    throw PreconditionError("CpwGeometry: substrate epsilon_r must be >= 1");
  }
  if (!(substrate_thickness > 0.0)) {
    throw PreconditionError("CpwGeometry: substrate thickness must be > 0 (or infinity)");
  }
}

LineParams make_line_params(double l_geo, double c_geo, double l_kin, double epsilon_eff) {
  if (!(l_geo > 0.0) || !(c_geo > 0.0) || !(l_kin >= 0.0)) {
    throw PreconditionError("line parameters must satisfy l_geo > 0, c_geo > 0, l_kin >= 0");
  }
  LineParams p;
  p.l_geo = l_geo;
  p.c_geo = c_geo;
  p.l_kin = l_kin;
  p.epsilon_eff = epsilon_eff;
  const double l_total = l_geo + l_kin;
  p.impedance = std::sqrt(l_total / c_geo);
  p.phase_velocity = 1.0 / std::sqrt(c_geo * l_total);
  p.alpha_kinetic = l_kin / l_total;
  return p;
}

double effective_permittivity(const CpwGeometry& geom) {
  const double w = geom.width;
  const double outer = geom.width + 2.0 * geom.gap;
  const double k0 = w / outer;
  double filling = 0.5;
  if (std::isfinite(geom.substrate_thickness)) {
    const double h = geom.substrate_thickness;
    const double k1 = sinh_ratio(constants::pi * w / (4.0 * h), constants::pi * outer / (4.0 * h));
    filling = 0.5 * (elliptic_k(k1) / elliptic_k(complementary(k1))) * k_ratio(k0);
  }
  return 1.0 + filling * (geom.substrate_epsilon_r - 1.0);
}

LineParams line_params_from_geometry(const CpwGeometry& geom, double l_kin) {
  geom.validate();
  const double k0 = geom.width / (geom.width + 2.0 * geom.gap);
  const double ratio = k_ratio(k0);
  const double eps_eff = effective_permittivity(geom);
  const double l_geo = constants::mu0 / 4.0 * ratio;
  const double c_geo = 4.0 * constants::epsilon0 * eps_eff / ratio;
  return make_line_params(l_geo, c_geo, l_kin, eps_eff);
}

double resonance_frequency(const LineParams& params, double length, int n, ResonatorMode mode) {
  if (!(length > 0.0)) throw PreconditionError("resonator length must be > 0");
  return params.phase_velocity / mode_wavelength_factor(n, mode, length);
}

double invert_kinetic_inductance(double f_measured, const CpwGeometry& geom, int n, ResonatorMode mode) {
  if (!(f_measured > 0.0)) throw PreconditionError("measured frequency must be > 0");
  const LineParams bare = line_params_from_geometry(geom, 0.0);
  const double v_target = f_measured * mode_wavelength_factor(n, mode, geom.resonator_length);
  const double l_kin = 1.0 / (v_target * v_target * bare.c_geo) - bare.l_geo;
  if (l_kin < -1e-12 * bare.l_geo) {
    throw DomainError("invert_kinetic_inductance: " + std::to_string(f_measured) +
                      " Hz is above the L_k = 0 frequency of this geometry");
  }
  return std::max(l_kin, 0.0);
}

}  // namespace resokit::cpw
