#include "resokit/numerics.hpp"

#include <cmath>
#include <complex>

#include "resokit/constants.hpp"
#include "resokit/errors.hpp"

namespace resokit::numerics {

double elliptic_k(double k) {
  if (!(k >= 0.0 && k < 1.0)) {
    throw DomainError("elliptic_k: modulus must satisfy 0 <= k < 1, got " + std::to_string(k));
  }
  // (1-k)(1+k) keeps the complementary modulus accurate as k -> 1.
  double a = 1.0;
  double b = std::sqrt((1.0 - k) * (1.0 + k));
  for (int i = 0; i < 64 && std::abs(a - b) > 1e-16 * a; ++i) {
    const double mean = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = mean;
  }
  return constants::pi / (2.0 * a);
}

namespace {

// B_2k / (2k), k = 1..7
constexpr double kBernoulliTerms[] = {
    1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0, 1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0,
};

std::complex<double> digamma_asymptotic(std::complex<double> z) {
  const std::complex<double> inv2 = 1.0 / (z * z);
  std::complex<double> power = inv2;
  std::complex<double> series = 0.0;
  for (double c : kBernoulliTerms) {
    series += c * power;
    power *= inv2;
  }
  return std::log(z) - 0.5 / z - series;
}

}  // namespace

double digamma_half_line(double y) {
  y = std::abs(y);
  if (y > 1e7) {
    return std::log(y) - 1.0 / (24.0 * y * y);
  }
  std::complex<double> z{0.5, y};
  std::complex<double> shift = 0.0;
  while (std::abs(z) <= 8.0) {
    shift -= 1.0 / z;
    z += 1.0;
  }
  return (digamma_asymptotic(z) + shift).real();
}

}  // namespace resokit::numerics
