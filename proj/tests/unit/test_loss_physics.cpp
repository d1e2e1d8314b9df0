#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "resokit/constants.hpp"
#include "resokit/errors.hpp"
#include "resokit/loss_physics.hpp"

using namespace resokit;
using namespace resokit::loss;

namespace {

const TlsParams kTls{9.5102e4, 13.0, 0.35};
const QpParams kQp = QpParams::from_tc(12.0, 0.0974);

double rel(double a, double b) { return std::abs(a / b - 1.0); }

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, i / (n - 1.0)));
  return v;
}

}  // namespace

TEST_CASE("tls_loss") {
  CHECK(rel(tls_loss(1e-4, 0.0, 5.96e9, kTls), 1 / 9.5102e4) < 1e-12);
  const double d1 = tls_loss(0.026, 1.0, 5.96e9, kTls);
  CHECK(rel(d1, 1.024545436150840e-5) < 1e-12);
  CHECK(rel(1 / d1, 9.57e4) < 0.15);
  CHECK(rel(tls_loss(0.026, 13.0, 5.96e9, kTls) / tls_loss(0.026, 0.0, 5.96e9, kTls), std::pow(2.0, -0.35)) <
        1e-14);
  CHECK_THROWS_AS(tls_loss(0.0, 1.0, 5.96e9, kTls), DomainError);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double t = 0.01 + 3 * u(rng), n = 1e4 * u(rng);
    const double d = tls_loss(t, n, 5.96e9, kTls);
    CHECK(tls_loss(t, n * 1.5 + 1, 5.96e9, kTls) <= d);
    CHECK(tls_loss(t * 1.5, n, 5.96e9, kTls) <= d);
    CHECK(rel(d / tls_loss(t, 0.0, 5.96e9, kTls), std::pow(1 + n / 13.0, -0.35)) < 1e-13);
    CHECK(d * 9.5102e4 <= 1.0);
    CHECK(d > 0.0);
  }
}

TEST_CASE("qp_loss") {
  const double f = 5.96e9;
  CHECK(rel(qp_loss(3.0, f, kQp), 6.236802382962922e-4) < 1e-12);
  // Density of states cancels: evaluate the two-step form with arbitrary D(E_F).
  for (double dos : {1.0, 3.7e47}) {
    const double kt = constants::boltzmann * 3.0, gap = kQp.gap_joules;
    const double n_qp = 2 * dos * std::sqrt(2 * std::numbers::pi * kt * gap) * std::exp(-gap / kt);
    const double want = kQp.alpha_kinetic / std::numbers::pi *
                        std::sqrt(2 * gap / (constants::hbar * 2 * std::numbers::pi * f)) * n_qp / (dos * gap);
    CHECK(rel(qp_loss(3.0, f, kQp), want) < 1e-13);
  }
  const double prefactor = qp_loss(3.0, f, kQp) / std::exp(-kQp.gap_joules / (constants::boltzmann * 3.0)) *
                           std::sqrt(12.0 / 20 / 3.0);
  CHECK(qp_loss(12.0 / 20, f, kQp) < 1e-12 * prefactor);
  QpParams doubled = kQp;
  doubled.alpha_kinetic *= 2;
  CHECK(rel(qp_loss(2.0, f, doubled), 2 * qp_loss(2.0, f, kQp)) < 1e-14);

  // qp-limited Q at 2.9 K against the measured 7.421e3, as a function of the unknown T_c
  CHECK(std::abs(1 / qp_loss(2.9, f, kQp) - 2078.87) < 0.01);
  CHECK(std::abs(1 / qp_loss(2.9, f, QpParams::from_tc(13.0, 0.0974)) - 3814.17) < 0.01);
  CHECK(std::abs(1 / qp_loss(2.9, f, QpParams::from_tc(14.0, 0.0974)) - 6997.97) < 0.01);
  bool within_factor_3 = false;
  for (double tc = 12.0; tc <= 16.0; tc += 0.5) {
    const double q = 1 / qp_loss(2.9, f, QpParams::from_tc(tc, 0.0974));
    within_factor_3 = within_factor_3 || (q > 7.421e3 / 3 && q < 7.421e3 * 3);
  }
  CHECK(within_factor_3);
  CHECK_THROWS_AS(qp_loss(-1.0, f, kQp), DomainError);
}

TEST_CASE("field loss and budget") {
  CHECK(field_loss(0.0, 5.0) == 0.0);
  CHECK(std::abs(field_loss(0.1, 1.0) - 0.01) < 1e-17);
  const auto b = total_loss(0, 0, 0, 1e-6);
  CHECK(b.total == 1e-6);
  CHECK(rel(b.q_internal(), 1e6) < 1e-12);

  const double parts[] = {3.1e-6, 7.7e-9, 1.3e-7, 2.2e-5};
  const auto ref = total_loss(parts[0], parts[1], parts[2], parts[3]);
  CHECK(ref.total == total_loss(parts[3], parts[2], parts[1], parts[0]).total);
  CHECK(ref.total == total_loss(parts[1], parts[3], parts[0], parts[2]).total);
  CHECK(ref.delta_tls == parts[0]);
  CHECK_THROWS_AS(total_loss(-1e-9, 0, 0, 0), PreconditionError);

  // Matching Q_i = 9.76e5 at 2000 photons with the quoted TLS parameters needs a negative delta0.
  const double d_tls = tls_loss(0.026, 2000.0, 5.96e9, kTls);
  CHECK(rel(d_tls, 1.800241273377699e-6) < 1e-12);
  const double delta0 = 1 / 9.76e5 - d_tls;
  CHECK(rel(delta0, -7.756511094432724e-7) < 1e-10);
  CHECK_THROWS_AS(total_loss(d_tls, 0, 0, delta0), PreconditionError);
}

TEST_CASE("frequency shifts") {
  const double f = 5.952e9;
  CHECK(rel(tls_freq_shift(1.0, f, 9.5102e4), 22802.35842251125) < 1e-10);
  CHECK(rel(qp_freq_shift(2.5, f, kQp), -1049677.822194037) < 1e-10);
  // T -> 0
  const double t_low = constants::planck * f / (2 * std::numbers::pi * constants::boltzmann * 2e3);
  CHECK(std::abs(tls_freq_shift(t_low, f, 9.5102e4)) < 1e-6 * f);
  CHECK(std::abs(qp_freq_shift(0.05, f, kQp)) < 1e-6 * f);
  CHECK(qp_freq_shift(0.01, f, kQp) == 0.0);

  // blue shift for k_B T >> h f, growing with T
  double prev = tls_freq_shift(5.0, f, 9.5102e4);
  CHECK(prev > 0);
  for (double t = 6; t < 50; t += 1) {
    const double v = tls_freq_shift(t, f, 9.5102e4);
    CHECK(v > prev);
    prev = v;
  }

  // qp: non-positive, decreasing up to Delta/k_B
  const double t_max = kQp.gap_joules / constants::boltzmann;
  prev = 0.0;
  for (double t = 0.05; t < t_max; t *= 1.05) {
    const double v = qp_freq_shift(t, f, kQp);
    CHECK(v <= 0.0);
    CHECK(v <= prev);
    prev = v;
  }

  QpParams no_kinetic = kQp;
  no_kinetic.alpha_kinetic = 0.0;
  CHECK(total_freq_shift(1.3, f, kTls, no_kinetic) == tls_freq_shift(1.3, f, kTls.q_tls0));
  CHECK(std::abs(total_freq_shift(2.3, f, {1e300, 1, 1}, kQp) - qp_freq_shift(2.3, f, kQp)) < 1e-9);
}

TEST_CASE("field shift, diffusion and vortex thresholds") {
  CHECK(field_freq_shift(0.0, 5.303e9, 0.261) == 0.0);
  const double df = field_freq_shift(0.24, 5.303e9, 0.261);
  CHECK(rel(df, -0.261 * 0.24 * 0.24 * 5.303e9) < 1e-12);
  CHECK(rel(df, -7.97e7) < 2e-3);
  CHECK(field_freq_shift(-0.17, 5e9, 0.3) == field_freq_shift(0.17, 5e9, 0.3));

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double k = 0.01 + u(rng), t = 1e-8 + 1e-6 * u(rng), tc = 1 + 20 * u(rng);
    CHECK(rel(k_from_diffusion(diffusion_from_k(k, t, tc), t, tc), k) < 1e-12);
    CHECK(rel(diffusion_from_k(k, 2 * t, tc), diffusion_from_k(k, t, tc) / 4) < 1e-12);
    const double b = -1 + 2 * u(rng);
    CHECK(field_freq_shift(b, 5e9, k) == field_freq_shift(-b, 5e9, k));
    const auto v1 = vortex_thresholds(t), v2 = vortex_thresholds(2 * t);
    CHECK(rel(v2.b_a, v1.b_a / 4) < 1e-12);
    CHECK(rel(v2.b_c1, v1.b_c1 / 4) < 1e-12);
    CHECK(rel(v1.b_c1 / v1.b_a, 1.65 * 4 / std::numbers::pi) < 1e-12);
  }

  const double tcs[] = {10, 12, 14, 16};
  const double ds[] = {2.261885040573667e-4, 2.714262048688401e-4, 3.166639056803134e-4, 3.619016064917868e-4};
  for (int i = 0; i < 4; ++i) CHECK(rel(diffusion_from_k(0.261, 100e-9, tcs[i]), ds[i]) < 1e-12);

  const auto v = vortex_thresholds(100e-9);
  CHECK(rel(v.b_a, 0.16240729067930767) < 1e-12);
  CHECK(rel(v.b_c1, 0.34119258499621834) < 1e-12);
  CHECK(rel(v.b_a, 0.161) < 0.02);
  CHECK(rel(v.b_c1, 0.341) < 0.02);
  CHECK_THROWS_AS(vortex_thresholds(0.0), PreconditionError);
}

TEST_CASE("detect_jumps") {
  std::vector<double> b, f;
  for (int i = 0; i < 25; ++i) {
    b.push_back(0.002 * i);
    f.push_back(5.3e9 * (1 - 0.261 * b.back() * b.back()));
  }
  CHECK(detect_jumps(b, f).empty());
  const std::vector<double> flat(b.size(), 5.3e9);
  CHECK(detect_jumps(b, flat).empty());

  auto stepped = f;
  for (std::size_t i = 8; i < stepped.size(); ++i) stepped[i] -= 1e6;
  const auto ev = detect_jumps(b, stepped);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].index == 7);
  CHECK(std::abs(ev[0].b_field - 0.5 * (b[7] + b[8])) < 1e-15);
  CHECK(ev[0].delta_f < -1e6 + 1e5);

  // invariant under offset and (above the floor) scaling
  auto shifted = stepped;
  for (auto& x : shifted) x += 1.234e8;
  CHECK(detect_jumps(b, shifted) .size() == 1);
  auto scaled = stepped;
  for (auto& x : scaled) x *= 3.0;
  const auto ev3 = detect_jumps(b, scaled);
  REQUIRE(ev3.size() == 1);
  CHECK(ev3[0].index == 7);

  CHECK_THROWS_AS(detect_jumps(std::vector<double>{0, 1, 2}, std::vector<double>{1, 2, 3}), PreconditionError);
  CHECK_THROWS_AS(detect_jumps(std::vector<double>{0, 2, 1, 3}, std::vector<double>{1, 2, 3, 4}), PreconditionError);
}

TEST_CASE("fit_tls noiseless recovery and preconditions") {
  const auto n = log_grid(0.5, 3e4, 20);
  std::vector<double> q;
  for (double x : n) q.push_back(1 / (tls_loss(0.026, x, 5.9643e9, kTls) + 8e-7));
  const auto fit = fit_tls(n, q, 0.026, 5.9643e9);
  CHECK(fit.converged);
  CHECK(rel(fit.params.q_tls0, 9.5102e4) < 1e-3);
  CHECK(rel(fit.params.n_c, 13) < 1e-3);
  CHECK(rel(fit.params.beta, 0.35) < 1e-3);
  CHECK(rel(fit.delta0, 8e-7) < 1e-3);
  CHECK_FALSE(fit.beta_at_bound);

  // constant sigma gives the same optimum as uniform weights
  std::vector<double> sig;
  for (double x : q) sig.push_back(0.01 * x);
  const auto w = fit_tls(n, q, 0.026, 5.9643e9, sig);
  CHECK(rel(w.params.beta, 0.35) < 1e-3);

  const std::vector<double> few_n(n.begin(), n.begin() + 5), few_q(q.begin(), q.begin() + 5);
  CHECK_THROWS_AS(fit_tls(few_n, few_q, 0.026, 5.9643e9), PreconditionError);
  const auto narrow = log_grid(1, 50, 10);
  CHECK_THROWS_AS(fit_tls(narrow, std::vector<double>(10, 1e5), 0.026, 5.9643e9), PreconditionError);
  CHECK_THROWS_AS(fit_tls(n, q, 0.026, 5.9643e9, std::vector<double>(3, 1.0)), PreconditionError);
  CHECK_THROWS_AS(fit_tls(n, q, 0.0, 5.9643e9), DomainError);
}

TEST_CASE("fit_tls self-consistency under 2% noise") {
  const auto n = log_grid(0.5, 3e4, 20);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 0.02);
  for (int s = 0; s < 20; ++s) {
    std::vector<double> q;
    for (double x : n) q.push_back((1 + g(rng)) / (tls_loss(0.026, x, 5.9643e9, kTls) + 8e-7));
    const auto fit = fit_tls(n, q, 0.026, 5.9643e9);
    CHECK(fit.rms_log_residual <= 0.02 * 1.2);
    CHECK(fit.params.beta > 0.0);
    CHECK(fit.params.beta <= 1.0);
  }
}

TEST_CASE("fit_freq_shift recovers T_c and Q0") {
  const double f0 = 5.9643e9;
  std::vector<double> t, f;
  for (int i = 0; i < 20; ++i) {
    t.push_back(0.05 + 2.95 * i / 19.0);
    f.push_back(f0 + total_freq_shift(t.back(), f0, kTls, kQp));
  }
  const auto fit = fit_freq_shift(t, f);
  CHECK(fit.converged);
  CHECK(rel(fit.f_r0, f0) < 1e-10);
  CHECK(rel(fit.t_c, 12.0) < 1e-6);
  CHECK(rel(fit.q_tls0, 9.5102e4) < 1e-6);

  ShiftFitOptions free;
  free.free_alpha = true;
  free.alpha_kinetic = 0.05;
  const auto fit2 = fit_freq_shift(t, f, free);
  CHECK(rel(fit2.alpha_kinetic, 0.0974) < 1e-4);
  CHECK_THROWS_AS(fit_freq_shift(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), PreconditionError);
}

TEST_CASE("field fits") {
  std::vector<double> b, f, q;
  for (int i = 1; i <= 12; ++i) {
    b.push_back(0.02 * i);
    f.push_back(5.303e9 + field_freq_shift(b.back(), 5.303e9, 0.261));
    q.push_back(1 / (2e-5 + field_loss(b.back(), 1e-3)));
  }
  const auto fs = fit_field_shift(b, f);
  CHECK(rel(fs.k_quad, 0.261) < 1e-9);
  CHECK(rel(fs.f_r0, 5.303e9) < 1e-12);
  const auto fl = fit_field_loss(b, q);
  CHECK(rel(fl.c2, 1e-3) < 1e-2);
  CHECK(rel(fl.delta_base, 2e-5) < 1e-2);

  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 0.005);
  for (auto& x : q) x *= 1 + g(rng);
  CHECK(rel(fit_field_loss(b, q).c2, 1e-3) < 0.1);
}
