#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace resokit::numerics {

/// Complete elliptic integral of the first kind K(k), by arithmetic-geometric mean.
/// Takes the modulus k (not the parameter m = k^2). Throws DomainError unless 0 <= k < 1.
double elliptic_k(double k);

/// Re psi(1/2 + i y). Even in y; tends to ln|y| for large |y|.
double digamma_half_line(double y);

// ---------------------------------------------------------------------------
// Damped nonlinear least squares
// ---------------------------------------------------------------------------

/// Writes the residual vector for a parameter vector. Must not resize `residuals`.
using ResidualFn = std::function<void(std::span<const double> params, std::span<double> residuals)>;

/// Closed interval for one parameter; infinite ends mean unbounded on that side.
struct Bound {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

struct FitOptions {
  int max_iterations = 200;
  double relative_decrease_tol = 1e-12;
  double step_tol = 1e-12;
  double initial_damping = 1e-3;
};

struct FitResult {
  std::vector<double> params;
  /// sigma^2 (J^T J)^-1 in model units, sigma^2 = residual_norm^2 / (N - M).
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Residual norm at the start and after every accepted step.
  std::vector<double> history;
};

/// Levenberg-Marquardt on `model`. Bounded parameters are mapped through a logistic
/// (two finite ends) or exponential (one finite end) transform, so the core iterates
/// on unconstrained internal variables. `bounds` is empty or has one entry per parameter.
///
/// Throws PreconditionError when n_residuals < params or the start lies outside its bounds,
/// SingularJacobianError when the start-point Jacobian is rank deficient. Running out of
/// iterations is reported through `converged = false`, never thrown.
FitResult least_squares_fit(const ResidualFn& model, std::size_t n_residuals,
                            std::span<const double> initial, std::span<const Bound> bounds = {},
                            const FitOptions& options = {});

/// Central-difference Jacobian with step max(1e-8, 1e-8 |p_j|) per column.
Eigen::MatrixXd central_difference_jacobian(const ResidualFn& model, std::size_t n_residuals,
                                            std::span<const double> at);

// ---------------------------------------------------------------------------
// Circle fitting in the complex plane
// ---------------------------------------------------------------------------

struct Circle2D {
  double center_re = 0.0;
  double center_im = 0.0;
  double radius = 1.0;

  std::complex<double> center() const { return {center_re, center_im}; }
};

/// Taubin algebraic fit only (no refinement). Throws DegenerateError for fewer than
/// three distinct points or (near-)collinear input.
Circle2D circle_fit_algebraic(std::span<const std::complex<double>> points);

/// Taubin fit followed by one geometric least-squares refinement of (center, radius).
Circle2D circle_fit(std::span<const std::complex<double>> points);

/// Root-mean-square geometric distance of the points from the circle.
double circle_rms_distance(const Circle2D& circle, std::span<const std::complex<double>> points);

}  // namespace resokit::numerics
