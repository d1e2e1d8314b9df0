#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "resokit/errors.hpp"
#include "resokit/loss_physics.hpp"
#include "resokit/numerics.hpp"

namespace resokit::loss {

namespace {

void require_same_size(std::size_t a, std::size_t b, std::size_t min_points, const char* who) {
  if (a != b) throw PreconditionError(std::string(who) + ": input lengths differ");
  if (a < min_points) {
    throw PreconditionError(std::string(who) + ": need at least " + std::to_string(min_points) + " points, got " +
                            std::to_string(a));
  }
}

double sigma_of(const Eigen::MatrixXd& cov, Eigen::Index i) { return std::sqrt(std::max(0.0, cov(i, i))); }

// Ordinary least squares y = c0 + c1 x, used for starting points of linear-in-parameter fits.
std::pair<double, double> straight_line(std::span<const double> x, std::span<const double> y) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    a.row(static_cast<Eigen::Index>(i)) << 1.0, x[i];
    b[static_cast<Eigen::Index>(i)] = y[i];
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  return {c[0], c[1]};
}

}  // namespace

TlsFit fit_tls(std::span<const double> n_ph, std::span<const double> q_i, double temperature, double f_r,
               std::span<const double> sigma_q_i) {
  require_same_size(n_ph.size(), q_i.size(), 6, "fit_tls");
  std::vector<double> weight(n_ph.size(), 1.0);
  if (!sigma_q_i.empty()) {
    if (sigma_q_i.size() != q_i.size()) throw PreconditionError("fit_tls: one sigma per point required");
    for (std::size_t i = 0; i < q_i.size(); ++i) {
      if (!(sigma_q_i[i] > 0.0) || !std::isfinite(sigma_q_i[i])) {
        throw PreconditionError("fit_tls: sigma_q_i must be finite and > 0");
      }
      weight[i] = q_i[i] / sigma_q_i[i];
    }
  }
  for (std::size_t i = 0; i < n_ph.size(); ++i) {
    if (!(n_ph[i] > 0.0) || !(q_i[i] > 0.0) || !std::isfinite(n_ph[i]) || !std::isfinite(q_i[i])) {
      throw PreconditionError("fit_tls: photon numbers and Q_i must be finite and > 0");
    }
  }
  const auto [n_min, n_max] = std::minmax_element(n_ph.begin(), n_ph.end());
  if (*n_max / *n_min < 100.0) throw PreconditionError("fit_tls: photon numbers must span >= 2 decades");
  if (!(f_r > 0.0)) throw PreconditionError("fit_tls: f_r must be > 0");
  // tls_loss rejects T <= 0; probe once so the error surfaces before fitting.
  const double thermal = tls_loss(temperature, 0.0, f_r, {1.0, 1.0, 1.0});

  // Starting point: for fixed (n_c, beta) the loss is linear in (thermal/Q0, delta0), so scan a
  // grid, solve that 2x2 problem in relative-loss units and keep the best log-space cost.
  const auto [q_min, q_max] = std::minmax_element(q_i.begin(), q_i.end());
  double best_cost = std::numeric_limits<double>::infinity();
  std::array<double, 4> initial = {std::log(*q_min * thermal), std::log(std::sqrt(*n_min * *n_max)), 0.3,
                                   std::log(0.5 / *q_max)};
  std::vector<double> g(n_ph.size());
  for (int a = 0; a <= 16; ++a) {
    const double n_c = *n_min * std::pow(*n_max / *n_min, a / 16.0);
    for (int b = 1; b <= 19; ++b) {
      const double beta = 0.05 * b;
      Eigen::Matrix2d ata = Eigen::Matrix2d::Zero();
      Eigen::Vector2d atb = Eigen::Vector2d::Zero();
      for (std::size_t i = 0; i < n_ph.size(); ++i) {
        g[i] = thermal / std::pow(1.0 + n_ph[i] / n_c, beta);
        const Eigen::Vector2d row(g[i] * q_i[i], q_i[i]);
        ata += row * row.transpose();
        atb += row;
      }
      Eigen::Vector2d c = ata.ldlt().solve(atb);
      const double d_floor = 1e-3 / *q_max;
      if (!(c[1] > d_floor)) {
        c[1] = d_floor;
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n_ph.size(); ++i) {
          num += g[i] * q_i[i] * (1.0 - c[1] * q_i[i]);
          den += g[i] * q_i[i] * g[i] * q_i[i];
        }
        c[0] = num / den;
      }
      if (!(c[0] > 0.0) || !std::isfinite(c[0])) continue;
      double cost = 0.0;
      for (std::size_t i = 0; i < n_ph.size(); ++i) {
        const double r = weight[i] * std::log((c[0] * g[i] + c[1]) * q_i[i]);
        cost += r * r;
      }
      if (cost < best_cost) {
        best_cost = cost;
        initial = {-std::log(c[0]), std::log(n_c), beta, std::log(c[1])};
      }
    }
  }

  // p = [ln Q0, ln n_c, beta, ln delta0]
  const numerics::ResidualFn model = [&](std::span<const double> p, std::span<double> out) {
    const TlsParams tls{std::exp(p[0]), std::exp(p[1]), p[2]};
    const double d0 = std::exp(p[3]);
    for (std::size_t i = 0; i < n_ph.size(); ++i) {
      out[i] = weight[i] * (std::log(tls_loss(temperature, n_ph[i], f_r, tls) + d0) + std::log(q_i[i]));
    }
  };
  const numerics::Bound bounds[] = {{}, {}, {0.0, 1.0}, {}};
  const std::vector<double> requested = std::exchange(weight, std::vector<double>(n_ph.size(), 1.0));
  numerics::FitResult r = numerics::least_squares_fit(model, n_ph.size(), initial, bounds);
  if (!sigma_q_i.empty()) {
    // The weighted objective is rougher from the crude start; seed it with the uniform solution.
    weight = requested;
    r = numerics::least_squares_fit(model, n_ph.size(), r.params, bounds);
  }

  TlsFit fit;
  fit.params = {std::exp(r.params[0]), std::exp(r.params[1]), r.params[2]};
  fit.delta0 = std::exp(r.params[3]);
  fit.sigma_q_tls0 = fit.params.q_tls0 * sigma_of(r.covariance, 0);
  fit.sigma_n_c = fit.params.n_c * sigma_of(r.covariance, 1);
  fit.sigma_beta = sigma_of(r.covariance, 2);
  fit.sigma_delta0 = fit.delta0 * sigma_of(r.covariance, 3);
  fit.rms_log_residual = r.residual_norm / std::sqrt(static_cast<double>(n_ph.size()));
  fit.converged = r.converged;
  fit.beta_at_bound = fit.params.beta > 1.0 - 1e-6 || fit.params.beta < 1e-6;
  return fit;
}

ShiftFit fit_freq_shift(std::span<const double> temperature, std::span<const double> f_r,
                        const ShiftFitOptions& options) {
  const std::size_t n_params = options.free_alpha ? 4 : 3;
  require_same_size(temperature.size(), f_r.size(), n_params + 1, "fit_freq_shift");
  for (const double t : temperature) {
    if (!(t > 0.0)) throw PreconditionError("fit_freq_shift: temperatures must be > 0");
  }
  const auto coldest = std::min_element(temperature.begin(), temperature.end()) - temperature.begin();
  const double f_guess = f_r[static_cast<std::size_t>(coldest)];
  const double f_unit = 1e-6 * f_guess;

  // p = [f_r0 offset in ppm, ln Q0, ln T_c, alpha]
  const auto unpack = [&](std::span<const double> p) {
    ShiftFit s;
    s.f_r0 = f_guess + p[0] * f_unit;
    s.q_tls0 = std::exp(p[1]);
    s.t_c = std::exp(p[2]);
    s.alpha_kinetic = options.free_alpha ? p[3] : options.alpha_kinetic;
    return s;
  };
  const numerics::ResidualFn model = [&](std::span<const double> p, std::span<double> out) {
    const ShiftFit s = unpack(p);
    const TlsParams tls{s.q_tls0, 1.0, 1.0};
    const QpParams qp = QpParams::from_tc(s.t_c, s.alpha_kinetic);
    for (std::size_t i = 0; i < f_r.size(); ++i) {
      out[i] = (s.f_r0 + total_freq_shift(temperature[i], s.f_r0, tls, qp) - f_r[i]) / f_unit;
    }
  };
  std::vector<double> initial = {0.0, std::log(options.q_tls0_guess), std::log(options.t_c_guess)};
  std::vector<numerics::Bound> bounds(3);
  if (options.free_alpha) {
    initial.push_back(options.alpha_kinetic);
    bounds.push_back({0.0, 1.0});
  }
  const numerics::FitResult r = numerics::least_squares_fit(model, f_r.size(), initial, bounds);

  ShiftFit fit = unpack(r.params);
  fit.sigma_f_r0 = f_unit * sigma_of(r.covariance, 0);
  fit.sigma_q_tls0 = fit.q_tls0 * sigma_of(r.covariance, 1);
  fit.sigma_t_c = fit.t_c * sigma_of(r.covariance, 2);
  fit.sigma_alpha = options.free_alpha ? sigma_of(r.covariance, 3) : 0.0;
  fit.rms_residual = f_unit * r.residual_norm / std::sqrt(static_cast<double>(f_r.size()));
  fit.converged = r.converged;
  return fit;
}

FieldShiftFit fit_field_shift(std::span<const double> b_field, std::span<const double> f_r) {
  require_same_size(b_field.size(), f_r.size(), 3, "fit_field_shift");
  std::vector<double> b2(b_field.size());
  std::transform(b_field.begin(), b_field.end(), b2.begin(), [](double b) { return b * b; });
  const auto [c0, c1] = straight_line(b2, f_r);
  if (!(c0 > 0.0)) throw DegenerateError("fit_field_shift: zero-field intercept is not positive");

  // p = [f_r0 / c0, k]
  const numerics::ResidualFn model = [&](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < f_r.size(); ++i) out[i] = p[0] * (1.0 - p[1] * b2[i]) - f_r[i] / c0;
  };
  const double initial[] = {1.0, -c1 / c0};
  const numerics::FitResult r = numerics::least_squares_fit(model, f_r.size(), initial);
  return {r.params[0] * c0, r.params[1], c0 * sigma_of(r.covariance, 0), sigma_of(r.covariance, 1), r.converged};
}

FieldLossFit fit_field_loss(std::span<const double> b_field, std::span<const double> q_i) {
  require_same_size(b_field.size(), q_i.size(), 3, "fit_field_loss");
  std::vector<double> b2(b_field.size()), loss(q_i.size());
  std::transform(b_field.begin(), b_field.end(), b2.begin(), [](double b) { return b * b; });
  for (std::size_t i = 0; i < q_i.size(); ++i) {
    if (!(q_i[i] > 0.0)) throw PreconditionError("fit_field_loss: Q_i must be > 0");
    loss[i] = 1.0 / q_i[i];
  }
  const auto [c0, c1] = straight_line(b2, loss);
  double scale = 0.0;
  for (const double d : loss) scale += d;
  scale /= static_cast<double>(loss.size());

  // p = [delta_base / scale, c2 / scale]
  const numerics::ResidualFn model = [&](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < loss.size(); ++i) out[i] = p[0] + p[1] * b2[i] - loss[i] / scale;
  };
  const double initial[] = {c0 / scale, c1 / scale};
  const numerics::FitResult r = numerics::least_squares_fit(model, loss.size(), initial);
  return {r.params[1] * scale, r.params[0] * scale, scale * sigma_of(r.covariance, 1),
          scale * sigma_of(r.covariance, 0), r.converged};
}

}  // namespace resokit::loss
