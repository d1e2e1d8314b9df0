#include "resokit/spectrum_fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <boost/math/tools/minima.hpp>

#include "resokit/constants.hpp"
#include "resokit/errors.hpp"
#include "resokit/numerics.hpp"

namespace resokit::fit {

using resonator::NotchParams;
using resonator::S21Trace;
using cplx = std::complex<double>;

namespace {

constexpr double kPi = constants::pi;
constexpr double kTwoPi = 2.0 * constants::pi;
constexpr std::size_t kMinPoints = 16;

double wrap_angle(double a) {
  double w = std::remainder(a, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

struct DipInfo {
  double median_level = 0.0;
  double minimum = 0.0;
  bool shallow = false;
};

DipInfo analyse_dip(const S21Trace& trace) {
  std::vector<double> mags(trace.size());
  std::transform(trace.values().begin(), trace.values().end(), mags.begin(),
                 [](const cplx& z) { return std::abs(z); });
  std::vector<double> steps(mags.size() - 1);
  for (std::size_t i = 0; i + 1 < mags.size(); ++i) steps[i] = std::abs(mags[i + 1] - mags[i]);

  DipInfo dip;
  dip.median_level = median(mags);
  dip.minimum = *std::min_element(mags.begin(), mags.end());
  // Gaussian noise: median |x_{i+1} - x_i| = 0.6745 * sqrt(2) * sigma.
  const double noise = median(steps) / (0.6745 * std::sqrt(2.0));
  if (!(dip.median_level > 0.0)) throw NoResonanceError("fit_notch: trace has zero median level");
  const double depth = 1.0 - dip.minimum / dip.median_level;
  if (!(depth >= std::max(8.0 * noise / dip.median_level, 1e-3))) {
    throw NoResonanceError("fit_notch: no dip above the noise floor");
  }
  dip.shallow = 20.0 * std::log10(dip.median_level / std::max(dip.minimum, 1e-300)) < 3.0;
  return dip;
}

std::vector<double> unwrapped_args(std::span<const cplx> z) {
  std::vector<double> wrapped(z.size());
  std::transform(z.begin(), z.end(), wrapped.begin(), [](const cplx& v) { return std::arg(v); });
  return unwrap_phase(wrapped);
}

// Rotates out the delay, referencing the environment phase at f_ref.
std::vector<cplx> remove_delay(const S21Trace& trace, double tau, double f_ref) {
  std::vector<cplx> out(trace.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = trace.values()[i] * std::polar(1.0, kTwoPi * (trace.freqs()[i] - f_ref) * tau);
  }
  return out;
}

// Excursion of a least-squares quadratic in x over the window, x mapped to [-1, 1].
double quadratic_excursion(std::span<const double> x, std::span<const double> y) {
  const double lo = x.front(), hi = x.back();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), 3);
  Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = (2.0 * x[i] - lo - hi) / (hi - lo);
    a.row(static_cast<Eigen::Index>(i)) << 1.0, t, t * t;
    b[static_cast<Eigen::Index>(i)] = y[i];
  }
  const Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
  std::array<double, 3> probes = {c[0] - c[1] + c[2], c[0] + c[1] + c[2], c[0]};
  if (c[2] != 0.0) {
    const double t_star = -c[1] / (2.0 * c[2]);
    if (std::abs(t_star) < 1.0) probes[2] = c[0] + c[1] * t_star + c[2] * t_star * t_star;
  }
  return *std::max_element(probes.begin(), probes.end()) - *std::min_element(probes.begin(), probes.end());
}

std::size_t edge_window(std::size_t n) { return std::max<std::size_t>(3, n / 5); }

double line_fit_delay(const S21Trace& trace) {
  const std::size_t n = trace.size();
  const std::size_t w = edge_window(n);
  const auto& f = trace.freqs();
  const std::span<const cplx> values(trace.values());
  double sxy = 0.0, sxx = 0.0;
  for (const std::size_t start : {std::size_t{0}, n - w}) {
    const std::vector<double> phase = unwrapped_args(values.subspan(start, w));
    double fm = 0.0, pm = 0.0;
    for (std::size_t i = 0; i < w; ++i) fm += f[start + i], pm += phase[i];
    fm /= static_cast<double>(w);
    pm /= static_cast<double>(w);
    for (std::size_t i = 0; i < w; ++i) {
      sxy += (f[start + i] - fm) * (phase[i] - pm);
      sxx += (f[start + i] - fm) * (f[start + i] - fm);
    }
  }
  return -(sxy / sxx) / kTwoPi;
}

bool edges_show_resonance(const S21Trace& trace) {
  const std::size_t n = trace.size();
  const std::size_t w = edge_window(n);
  std::vector<double> mags(n);
  std::transform(trace.values().begin(), trace.values().end(), mags.begin(),
                 [](const cplx& z) { return std::abs(z); });
  const double depth = median(mags) - *std::min_element(mags.begin(), mags.end());
  const std::span<const double> f(trace.freqs());
  const std::span<const double> m(mags);
  const double left = quadratic_excursion(f.subspan(0, w), m.subspan(0, w));
  const double right = quadratic_excursion(f.subspan(n - w, w), m.subspan(n - w, w));
  return std::max(left, right) > 0.1 * depth;
}

void require_size(const S21Trace& trace) {
  if (trace.size() < kMinPoints) {
    throw PreconditionError("fit_notch: need at least " + std::to_string(kMinPoints) + " points, got " +
                            std::to_string(trace.size()));
  }
}

// Linear interpolation of the frequency where the phase crosses `level` between i and j.
double crossing(const std::vector<double>& f, const std::vector<double>& theta, std::size_t i,
                std::size_t j, double level) {
  const double d = theta[j] - theta[i];
  if (d == 0.0) return 0.5 * (f[i] + f[j]);
  return f[i] + (level - theta[i]) / d * (f[j] - f[i]);
}

struct PhaseEstimate {
  double theta0 = 0.0;
  double f_r = 0.0;
  double q_loaded = 0.0;
};

// Initial guesses for the phase model from the resonance-angle and half-linewidth crossings.
PhaseEstimate initial_phase_guess(const std::vector<double>& f, const std::vector<double>& theta) {
  const std::size_t n = f.size();
  const double off = std::arg(std::polar(1.0, theta.front()) + std::polar(1.0, theta.back()));
  const double res_wrapped = wrap_angle(off + kPi);

  std::size_t i_res = 0;
  double best = kTwoPi;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::abs(wrap_angle(theta[i] - res_wrapped));
    if (d < best) best = d, i_res = i;
  }
  const double theta_res = theta[i_res] + wrap_angle(res_wrapped - theta[i_res]);

  PhaseEstimate est;
  est.theta0 = theta_res;
  est.f_r = f[i_res];
  if (i_res > 0 && i_res + 1 < n) {
    // Phase decreases through the resonance.
    const std::size_t j = theta[i_res] > theta_res ? i_res : i_res - 1;
    if (theta[j] != theta[j + 1]) est.f_r = crossing(f, theta, j, j + 1, theta_res);
  }

  double f_lo = 0.0, f_hi = 0.0;
  for (std::size_t j = i_res; j-- > 0;) {
    if (theta[j] >= theta_res + 0.5 * kPi) {
      f_lo = crossing(f, theta, j, j + 1, theta_res + 0.5 * kPi);
      break;
    }
  }
  for (std::size_t j = i_res + 1; j < n; ++j) {
    if (theta[j] <= theta_res - 0.5 * kPi) {
      f_hi = crossing(f, theta, j - 1, j, theta_res - 0.5 * kPi);
      break;
    }
  }
  if (f_lo > 0.0 && f_hi > f_lo) {
    est.q_loaded = est.f_r / (f_hi - f_lo);
  } else {
    // Narrow span: invert the phase model at the farther grid end.
    const std::size_t e = (est.f_r - f.front() > f.back() - est.f_r) ? 0 : n - 1;
    const double x = 1.0 - f[e] / est.f_r;
    const double q = std::tan(0.5 * std::clamp(theta[e] - theta_res, -0.99 * kPi, 0.99 * kPi)) / (2.0 * x);
    est.q_loaded = q > 0.0 && std::isfinite(q) ? q : est.f_r / (f.back() - f.front());
  }
  return est;
}

PhaseEstimate fit_phase(const std::vector<double>& f, const std::vector<double>& theta, PhaseEstimate guess) {
  const double f0 = guess.f_r;
  const double q0 = guess.q_loaded;
  const double width = f0 / q0;
  const numerics::ResidualFn model = [&](std::span<const double> p, std::span<double> out) {
    const double f_r = f0 + p[2] * width;
    const double q = p[1] * q0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      out[i] = theta[i] - (p[0] + 2.0 * std::atan(2.0 * q * (f_r - f[i]) / f_r));
    }
  };
  const double initial[] = {guess.theta0, 1.0, 0.0};
  const numerics::Bound bounds[] = {{}, {0.0}, {}};
  try {
    const auto result = numerics::least_squares_fit(model, f.size(), initial, bounds);
    return {result.params[0], f0 + result.params[2] * width, result.params[1] * q0};
  } catch (const SingularJacobianError&) {
    return guess;
  }
}

}  // namespace

std::string_view to_string(FitFlag flag) {
  switch (flag) {
    case FitFlag::kLowSnr:
      return "low_snr";
    case FitFlag::kDelayUncertain:
      return "delay_uncertain";
    case FitFlag::kShallowDip:
      return "shallow_dip";
    case FitFlag::kNotConverged:
      return "not_converged";
  }
  return "unknown";
}

std::optional<FitFlag> flag_from_string(std::string_view name) {
  for (const FitFlag f : {FitFlag::kLowSnr, FitFlag::kDelayUncertain, FitFlag::kShallowDip, FitFlag::kNotConverged}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

bool FitReport::has(FitFlag flag) const { return std::find(flags.begin(), flags.end(), flag) != flags.end(); }

std::vector<double> unwrap_phase(std::span<const double> wrapped) {
  std::vector<double> out(wrapped.begin(), wrapped.end());
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double d = std::remainder(wrapped[i] - out[i - 1], kTwoPi);
    if (std::abs(d) == kPi) {
      out[i] = wrapped[i] + (out[i - 1] - wrapped[i - 1]);
    } else {
      out[i] = out[i - 1] + d;
    }
  }
  return out;
}

double extract_qi(double q_loaded, double q_coupling_mag, double phi) {
  const double inv = 1.0 / q_loaded - std::cos(phi) / q_coupling_mag;
  if (!(inv > 0.0) || !std::isfinite(inv)) {
    throw UnphysicalError("extract_qi: 1/Q_l <= cos(phi)/|Q_c| (Q_l=" + std::to_string(q_loaded) +
                          ", |Q_c|=" + std::to_string(q_coupling_mag) + ", phi=" + std::to_string(phi) + ")");
  }
  return 1.0 / inv;
}

DelayEstimate estimate_delay(const S21Trace& trace) {
  require_size(trace);
  const double span = trace.freqs().back() - trace.freqs().front();
  const double f_ref = 0.5 * (trace.freqs().front() + trace.freqs().back());
  const double step = 1.0 / (kTwoPi * span);
  const double x0 = line_fit_delay(trace) / step;

  const auto objective = [&](double x) {
    const std::vector<cplx> z = remove_delay(trace, x * step, f_ref);
    try {
      return numerics::circle_rms_distance(numerics::circle_fit_algebraic(z), z);
    } catch (const DegenerateError&) {
      return std::numeric_limits<double>::max();
    }
  };
  // Wide spans put the off-resonant points on |z| = a for any delay, which gives the
  // objective a second basin; scan the bracket before polishing.
  constexpr int kScan = 40;
  double best_x = x0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kScan; ++k) {
    const double x = x0 - 2.0 + 4.0 * k / kScan;
    if (const double v = objective(x); v < best_val) best_val = v, best_x = x;
  }
  const double cell = 4.0 / kScan;
  std::uintmax_t max_iter = 200;
  const auto best = boost::math::tools::brent_find_minima(objective, std::max(best_x - cell, x0 - 2.0),
                                                          std::min(best_x + cell, x0 + 2.0), 40, max_iter);
  return {best.first * step, edges_show_resonance(trace)};
}

FitReport fit_notch(const S21Trace& trace) {
  require_size(trace);
  const DipInfo dip = analyse_dip(trace);
  const DelayEstimate delay = estimate_delay(trace);

  const std::vector<double>& f = trace.freqs();
  const std::size_t n = f.size();
  const double span = f.back() - f.front();
  const double f_ref = 0.5 * (f.front() + f.back());
  const double tau_step = 1.0 / (kTwoPi * span);

  const std::vector<cplx> z = remove_delay(trace, delay.delay, f_ref);
  const numerics::Circle2D circle = numerics::circle_fit(z);
  std::vector<cplx> centred(n);
  std::transform(z.begin(), z.end(), centred.begin(), [&](const cplx& v) { return v - circle.center(); });
  const std::vector<double> theta = unwrapped_args(centred);

  const PhaseEstimate phase = fit_phase(f, theta, initial_phase_guess(f, theta));

  // Off-resonant point and circle geometry give the environment and coupling.
  const cplx off_res = circle.center() + std::polar(circle.radius, phase.theta0 + kPi);
  const double a1 = std::abs(off_res);
  const double env1 = std::arg(off_res);
  const double phi1 = std::arg(1.0 - circle.center() / off_res);
  const double qc1 = phase.q_loaded / (2.0 * circle.radius / a1);
  const double fr1 = phase.f_r;
  const double ql1 = phase.q_loaded;
  // f_r offset in units of 1% of f_r: the 1e-8 differencing step then moves f_r by ~1e-10 relative,
  // far above the rounding of the absolute frequency and far below a linewidth up to Q ~ 1e6.
  const double fr_unit = 1e-2 * fr1;

  const auto to_notch = [&](std::span<const double> p) {
    NotchParams q;
    q.f_r = fr1 + p[0] * fr_unit;
    q.q_loaded = p[1] * ql1;
    q.q_coupling_mag = p[2] * qc1;
    q.phi = p[3];
    q.amp = p[4] * a1;
    q.phase_offset = p[5];  // referenced at f_ref
    q.delay = p[6] * tau_step;
    return q;
  };
  const std::span<const cplx> data(trace.values());
  const numerics::ResidualFn model = [&](std::span<const double> p, std::span<double> out) {
    const NotchParams q = to_notch(p);
    for (std::size_t i = 0; i < n; ++i) {
      const cplx env = std::polar(q.amp, q.phase_offset - kTwoPi * (f[i] - f_ref) * q.delay);
      const cplx r = env * resonator::s21_ideal(f[i], q) - data[i];
      out[i] = r.real();
      out[n + i] = r.imag();
    }
  };
  const double initial[] = {0.0, 1.0, 1.0, phi1, 1.0, env1, delay.delay / tau_step};
  const numerics::FitResult refined = numerics::least_squares_fit(model, 2 * n, initial);

  FitReport report;
  report.params = to_notch(refined.params);
  const double env_shift = kTwoPi * std::fmod(f_ref * report.params.delay, 1.0);
  report.params.phase_offset = wrap_angle(refined.params[5] + env_shift);
  report.params.phi = wrap_angle(report.params.phi);
  report.n_points = static_cast<int>(n);
  report.rms_residual = refined.residual_norm / std::sqrt(static_cast<double>(n));

  // Internal -> physical covariance.
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(7, 7);
  g(0, 0) = fr_unit;
  g(1, 1) = ql1;
  g(2, 2) = qc1;
  g(3, 3) = 1.0;
  g(4, 4) = a1;
  g(5, 5) = 1.0;
  g(5, 6) = kTwoPi * f_ref * tau_step;
  g(6, 6) = tau_step;
  const Eigen::MatrixXd cov = g * refined.covariance * g.transpose();
  const auto sigma = [&](int i) { return std::sqrt(std::max(0.0, cov(i, i))); };

  const NotchParams& p = report.params;
  report.q_internal = extract_qi(p.q_loaded, p.q_coupling_mag, p.phi);
  const double qi2 = report.q_internal * report.q_internal;
  Eigen::Vector3d grad;
  grad << qi2 / (p.q_loaded * p.q_loaded), -qi2 * std::cos(p.phi) / (p.q_coupling_mag * p.q_coupling_mag),
      -qi2 * std::sin(p.phi) / p.q_coupling_mag;
  const double var_qi = grad.dot(cov.block<3, 3>(1, 1) * grad);

  report.uncertainties = {sigma(0), sigma(1), sigma(2), sigma(3), sigma(4), sigma(5), sigma(6),
                          std::sqrt(std::max(0.0, var_qi))};

  if (report.rms_residual > 0.1 * 2.0 * circle.radius) report.flags.push_back(FitFlag::kLowSnr);
  if (delay.uncertain) report.flags.push_back(FitFlag::kDelayUncertain);
  if (dip.shallow) report.flags.push_back(FitFlag::kShallowDip);
  if (!refined.converged) report.flags.push_back(FitFlag::kNotConverged);
  return report;
}

}  // namespace resokit::fit
