#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "resokit/cpw_design.hpp"
#include "resokit/errors.hpp"

using namespace resokit;
using cpw::CpwGeometry;
using cpw::ResonatorMode;

namespace {

CpwGeometry paper_geometry(double h = 525e-6) {
  CpwGeometry g;
  g.width = 4e-6;
  g.gap = 2e-6;
  g.film_thickness = 100e-9;
  g.substrate_epsilon_r = 11.9;
  g.substrate_thickness = h;
  g.resonator_length = 4.688e-3;
  return g;
}

double rel(double a, double b) { return std::abs(a / b - 1.0); }

}  // namespace

TEST_CASE("paper geometry lands within 10% of the quoted line constants") {
  const auto lp = cpw::line_params_from_geometry(paper_geometry(), 0.0);
  CHECK(rel(lp.l_geo, 4.1367e-7) < 0.10);
  CHECK(rel(lp.c_geo, 1.6803e-10) < 0.10);
  // regression against the closed form on quadrature K
  CHECK(rel(lp.l_geo, 4.018918756198372e-7) < 1e-12);
  CHECK(rel(lp.c_geo, 1.785686835019831e-10) < 1e-12);
  CHECK(rel(lp.epsilon_eff, 6.449943785031528) < 1e-12);
}

TEST_CASE("line parameters agree with the quadrature oracle") {
  const double inf = std::numeric_limits<double>::infinity();
  for (double h : {inf, 525e-6, 50e-6, 8e-6}) {
    const auto lp = cpw::line_params_from_geometry(paper_geometry(h), 0.0);
    const auto o = oracle::cpw(4e-6, 2e-6, 11.9, h);
    CHECK(rel(lp.l_geo, o.l_geo) < 1e-9);
    CHECK(rel(lp.c_geo, o.c_geo) < 1e-9);
    CHECK(rel(lp.epsilon_eff, o.eps_eff) < 1e-9);
  }
}

TEST_CASE("scale invariance and permittivity bounds") {
  auto g = paper_geometry();
  const auto a = cpw::line_params_from_geometry(g, 0.0);
  g.width *= 10, g.gap *= 10, g.substrate_thickness *= 10;
  const auto b = cpw::line_params_from_geometry(g, 0.0);
  CHECK(rel(a.l_geo, b.l_geo) < 1e-12);
  CHECK(rel(a.c_geo, b.c_geo) < 1e-12);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    CpwGeometry r = paper_geometry();
    r.width = 1e-6 + 20e-6 * u(rng);
    r.gap = 1e-6 + 20e-6 * u(rng);
    r.substrate_epsilon_r = 1.0 + 15.0 * u(rng);
    r.substrate_thickness = 1e-6 + 1e-3 * u(rng);
    const double e = cpw::effective_permittivity(r);
    CHECK(e >= 1.0);
    CHECK(e <= r.substrate_epsilon_r);
    r.substrate_thickness = 1e4 * (r.width + 2 * r.gap) * 1.01;
    CHECK(std::abs(cpw::effective_permittivity(r) - (r.substrate_epsilon_r + 1) / 2) < 1e-6);
  }
}

TEST_CASE("derived line quantities") {
  const auto lp = cpw::make_line_params(4.1367e-7, 1.6803e-10, 4.464e-8);
  const double lt = 4.1367e-7 + 4.464e-8;
  CHECK(rel(lp.impedance, std::sqrt(lt / 1.6803e-10)) < 1e-12);
  CHECK(rel(lp.phase_velocity, 1 / std::sqrt(1.6803e-10 * lt)) < 1e-12);
  CHECK(rel(lp.alpha_kinetic, 4.464e-8 / lt) < 1e-12);
  CHECK(rel(lp.alpha_kinetic, 0.09740132224913268) < 1e-12);
  CHECK(std::abs(lp.alpha_kinetic - 0.0974) < 5e-5);
  CHECK(rel(lp.phase_velocity, 113953303.43715577) < 1e-12);
  CHECK(rel(cpw::resonance_frequency(lp, 4.688e-3, 1, ResonatorMode::kQuarterWave), 6076861318.107710) < 1e-12);
  CHECK_THROWS_AS(cpw::make_line_params(-1, 1, 0), PreconditionError);
}

TEST_CASE("resonance ladder") {
  // v = 1.2e8 m/s via L C = 1/v^2
  const auto lp = cpw::make_line_params(1.0 / (1.2e8 * 1.2e8), 1.0, 0.0);
  const double f1 = cpw::resonance_frequency(lp, 6e-3, 1, ResonatorMode::kQuarterWave);
  CHECK(rel(f1, 5e9) < 1e-12);
  CHECK(rel(cpw::resonance_frequency(lp, 6e-3, 2, ResonatorMode::kQuarterWave), 3 * f1) < 1e-12);
  CHECK(rel(cpw::resonance_frequency(lp, 6e-3, 1, ResonatorMode::kHalfWave), 2 * f1) < 1e-12);
  CHECK(rel(cpw::resonance_frequency(lp, 6e-3, 3, ResonatorMode::kHalfWave), 6 * f1) < 1e-12);
  CHECK_THROWS_AS(cpw::resonance_frequency(lp, 6e-3, 0, ResonatorMode::kQuarterWave), PreconditionError);
}

TEST_CASE("kinetic inductance monotonicity and inversion") {
  const auto g = paper_geometry();
  double prev_f = std::numeric_limits<double>::infinity(), prev_z = 0;
  for (double lk = 0; lk < 1e-6; lk += 5e-8) {
    const auto lp = cpw::line_params_from_geometry(g, lk);
    const double f = cpw::resonance_frequency(lp, g.resonator_length, 1, g.mode);
    CHECK(f < prev_f);
    CHECK(lp.impedance > prev_z);
    prev_f = f, prev_z = lp.impedance;
  }

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    CpwGeometry r = paper_geometry();
    r.width = 1e-6 + 20e-6 * u(rng);
    r.gap = 1e-6 + 20e-6 * u(rng);
    r.substrate_epsilon_r = 1.0 + 15.0 * u(rng);
    r.substrate_thickness = u(rng) < 0.2 ? std::numeric_limits<double>::infinity() : 5e-6 + 1e-3 * u(rng);
    r.resonator_length = 1e-3 + 1e-2 * u(rng);
    r.mode = u(rng) < 0.5 ? ResonatorMode::kQuarterWave : ResonatorMode::kHalfWave;
    const int n = 1 + static_cast<int>(3 * u(rng));
    const double lk = 1e-6 * u(rng);
    const double f = cpw::resonance_frequency(cpw::line_params_from_geometry(r, lk), r.resonator_length, n, r.mode);
    const double back = cpw::invert_kinetic_inductance(f, r, n, r.mode);
    CHECK(std::abs(back - lk) <= 1e-10 * std::max(lk, 1e-9));
  }

  const double f0 = cpw::resonance_frequency(cpw::line_params_from_geometry(g, 0.0), g.resonator_length, 1, g.mode);
  CHECK_THROWS_AS(cpw::invert_kinetic_inductance(2 * f0, g, 1, g.mode), DomainError);
  CHECK_THROWS_AS(cpw::invert_kinetic_inductance(-1.0, g, 1, g.mode), PreconditionError);
}

TEST_CASE("geometry validation") {
  auto g = paper_geometry();
  g.gap = 0;
  CHECK_THROWS_AS(g.validate(), PreconditionError);
  g = paper_geometry();
  g.substrate_epsilon_r = 0.5;
  CHECK_THROWS_AS(cpw::line_params_from_geometry(g, 0), PreconditionError);
  g = paper_geometry();
  g.film_thickness = -1;
  CHECK_THROWS_AS(g.validate(), PreconditionError);
}
