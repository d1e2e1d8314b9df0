#pragma once

// Reference evaluations used only by tests. Each takes a different route from the library:
// quadrature instead of AGM, a convergent series instead of recurrence plus asymptotics,
// closed-form derivatives instead of finite differences.

#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "resokit/constants.hpp"
#include "resokit/resonator_model.hpp"

namespace oracle {

// K(k) = int_0^{pi/2} d theta / sqrt(1 - k^2 sin^2 theta), adaptive 61-point Gauss-Kronrod.
inline double elliptic_k(double k) {
  const auto integrand = [k](double t) {
    const double s = std::sin(t);
    return 1.0 / std::sqrt(1.0 - k * k * s * s);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, std::numbers::pi / 2, 25,
                                                                       1e-13);
}

// Re psi(1/2 + i y) = psi(1/2) + sum_n y^2 / (x_n (x_n^2 + y^2)), x_n = n + 1/2.
// Partial sum to N in long double, tail by Euler-Maclaurin (integral, f/2, -f'/12).
inline double digamma_half_line(double y_in) {
  using ld = long double;
  const ld y2 = static_cast<ld>(y_in) * static_cast<ld>(y_in);
  const ld psi_half = -0.5772156649015328606065120900824024L - 2.0L * 0.6931471805599453094172321214581766L;
  constexpr int n_terms = 40000;
  ld sum = 0.0L;
  for (int n = n_terms - 1; n >= 0; --n) {
    const ld x = n + 0.5L;
    sum += y2 / (x * (x * x + y2));
  }
  const ld x = n_terms + 0.5L;
  const ld f = y2 / (x * (x * x + y2));
  const ld fp = -y2 * (3.0L * x * x + y2) / ((x * x * x + x * y2) * (x * x * x + x * y2));
  const ld tail = 0.5L * std::log1p(y2 / (x * x)) + f / 2.0L - fp / 12.0L;
  return static_cast<double>(psi_half + sum + tail);
}

// Closed-form CPW line parameters (conformal mapping, finite substrate) on top of the
// quadrature K. h <= 0 or infinite selects the semi-infinite substrate.
struct Cpw {
  double l_geo, c_geo, eps_eff;
};
inline Cpw cpw(double w, double s, double eps_r, double h) {
  const double k0 = w / (w + 2 * s);
  const double k0p = std::sqrt(1 - k0 * k0);
  const double ratio0 = elliptic_k(k0p) / elliptic_k(k0);
  double eps_eff = (eps_r + 1) / 2;
  if (std::isfinite(h) && h > 0) {
    const double pi = std::numbers::pi;
    const double k1 = std::sinh(pi * w / (4 * h)) / std::sinh(pi * (w + 2 * s) / (4 * h));
    const double k1p = std::sqrt(1 - k1 * k1);
    const double q = 0.5 * (elliptic_k(k1) / elliptic_k(k1p)) * ratio0;
    eps_eff = 1 + q * (eps_r - 1);
  }
  return {resokit::constants::mu0 / 4 * ratio0, 4 * resokit::constants::epsilon0 * eps_eff / ratio0, eps_eff};
}

// d s21_full / d(field), analytic. Order: f_r, Q_l, |Q_c|, phi, a, alpha, tau.
inline std::complex<double> ds21(double f, const resokit::resonator::NotchParams& p, int field) {
  using namespace std::complex_literals;
  const double pi = std::numbers::pi;
  const std::complex<double> env = p.amp * std::exp(1i * p.phase_offset) * std::exp(-2i * pi * f * p.delay);
  const std::complex<double> g = p.q_loaded / p.q_coupling_mag * std::exp(1i * p.phi);
  const std::complex<double> d = 1.0 + 2i * p.q_loaded * (f / p.f_r - 1.0);
  const std::complex<double> s = env * (1.0 - g / d);
  switch (field) {
    case 0: return env * g / (d * d) * (2i * p.q_loaded * (-f / (p.f_r * p.f_r)));
    case 1: return -env * std::exp(1i * p.phi) / (p.q_coupling_mag * d * d);
    case 2: return env * g / (p.q_coupling_mag * d);
    case 3: return env * (-1i * g / d);
    case 4: return s / p.amp;
    case 5: return 1i * s;
    default: return -2i * pi * f * s;
  }
}

}  // namespace oracle
