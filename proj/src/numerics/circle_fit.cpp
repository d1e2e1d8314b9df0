#include <algorithm>
#include <cmath>

#include "resokit/errors.hpp"
#include "resokit/numerics.hpp"

namespace resokit::numerics {

namespace {

struct Normalization {
  std::complex<double> centroid;
  double scale = 1.0;
};

Normalization normalization_for(std::span<const std::complex<double>> points) {
  Normalization n;
  for (const auto& p : points) n.centroid += p;
  n.centroid /= static_cast<double>(points.size());
  double spread = 0.0;
  for (const auto& p : points) spread += std::norm(p - n.centroid);
  n.scale = std::sqrt(spread / static_cast<double>(points.size()));
  return n;
}

void require_fit_input(std::span<const std::complex<double>> points) {
  if (points.size() < 3) throw DegenerateError("circle_fit: need at least 3 points");
  for (const auto& p : points) {
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) {
      throw DegenerateError("circle_fit: non-finite point");
    }
  }
}

}  // namespace

Circle2D circle_fit_algebraic(std::span<const std::complex<double>> points) {
  require_fit_input(points);
  const Normalization norm = normalization_for(points);
  if (!(norm.scale > 0.0)) throw DegenerateError("circle_fit: all points coincide");

  // Moments of the centred, unit-rms point cloud (Chernov's Taubin formulation).
  double mxx = 0, myy = 0, mxy = 0, mxz = 0, myz = 0, mzz = 0;
  for (const auto& p : points) {
    const std::complex<double> q = (p - norm.centroid) / norm.scale;
    const double x = q.real(), y = q.imag(), z = x * x + y * y;
    mxx += x * x;
    myy += y * y;
    mxy += x * y;
    mxz += x * z;
    myz += y * z;
    mzz += z * z;
  }
  const double count = static_cast<double>(points.size());
  mxx /= count, myy /= count, mxy /= count, mxz /= count, myz /= count, mzz /= count;

  // Smallest principal variance relative to the largest: zero for collinear input.
  const double trace = mxx + myy;
  const double det = mxx * myy - mxy * mxy;
  const double disc = std::sqrt(std::max(0.0, 0.25 * trace * trace - det));
  const double lambda_min = 0.5 * trace - disc;
  if (!(lambda_min > 1e-20 * trace)) throw DegenerateError("circle_fit: points are collinear");

  const double mz = mxx + myy;
  const double cov_xy = mxx * myy - mxy * mxy;
  const double var_z = mzz - mz * mz;
  const double a3 = 4.0 * mz;
  const double a2 = -3.0 * mz * mz - mzz;
  const double a1 = var_z * mz + 4.0 * cov_xy * mz - mxz * mxz - myz * myz;
  const double a0 = mxz * (mxz * myy - myz * mxy) + myz * (myz * mxx - mxz * mxy) - var_z * cov_xy;

  // Newton from x = 0 on the characteristic polynomial; converges to the smallest root.
  double x = 0.0;
  double y = a0;
  for (int iter = 0; iter < 100; ++iter) {
    const double dy = a1 + x * (2.0 * a2 + 3.0 * a3 * x);
    const double x_new = x - y / dy;
    if (x_new == x || !std::isfinite(x_new)) break;
    const double y_new = a0 + x_new * (a1 + x_new * (a2 + x_new * a3));
    if (std::abs(y_new) >= std::abs(y)) break;
    x = x_new;
    y = y_new;
  }

  const double denom = x * x - x * mz + cov_xy;
  if (!(std::abs(denom) > 0.0) || !std::isfinite(denom)) {
    throw DegenerateError("circle_fit: singular moment system");
  }
  const double cx = (mxz * (myy - x) - myz * mxy) / denom / 2.0;
  const double cy = (myz * (mxx - x) - mxz * mxy) / denom / 2.0;
  const double radius = std::sqrt(cx * cx + cy * cy + mz);
  if (!std::isfinite(radius) || !(radius > 0.0)) throw DegenerateError("circle_fit: invalid radius");

  const std::complex<double> center = norm.centroid + norm.scale * std::complex<double>(cx, cy);
  return {center.real(), center.imag(), radius * norm.scale};
}

Circle2D circle_fit(std::span<const std::complex<double>> points) {
  const Circle2D start = circle_fit_algebraic(points);
  const Normalization norm = normalization_for(points);

  std::vector<std::complex<double>> local(points.size());
  std::transform(points.begin(), points.end(), local.begin(),
                 [&](const std::complex<double>& p) { return (p - norm.centroid) / norm.scale; });

  const ResidualFn distances = [&local](std::span<const double> p, std::span<double> out) {
    const std::complex<double> c{p[0], p[1]};
    for (std::size_t i = 0; i < local.size(); ++i) out[i] = std::abs(local[i] - c) - p[2];
  };
  const std::complex<double> c0 = (start.center() - norm.centroid) / norm.scale;
  const double initial[] = {c0.real(), c0.imag(), start.radius / norm.scale};

  FitResult refined;
  try {
    refined = least_squares_fit(distances, local.size(), initial);
  } catch (const SingularJacobianError&) {
    return start;
  }
  if (!(refined.params[2] > 0.0)) return start;
  const std::complex<double> center =
      norm.centroid + norm.scale * std::complex<double>(refined.params[0], refined.params[1]);
  return {center.real(), center.imag(), refined.params[2] * norm.scale};
}

double circle_rms_distance(const Circle2D& circle, std::span<const std::complex<double>> points) {
  if (points.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : points) {
    const double d = std::abs(p - circle.center()) - circle.radius;
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(points.size()));
}

}  // namespace resokit::numerics
