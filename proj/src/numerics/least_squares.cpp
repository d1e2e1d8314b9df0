#include <algorithm>
#include <cmath>
#include <string>

#include "resokit/errors.hpp"
#include "resokit/numerics.hpp"

namespace resokit::numerics {

namespace {

// Maps an unconstrained internal variable onto the admissible parameter range.
class ParamTransform {
 public:
  ParamTransform() = default;
  explicit ParamTransform(const Bound& b) : lo_(b.lower), hi_(b.upper) {
    const bool has_lo = std::isfinite(lo_);
    const bool has_hi = std::isfinite(hi_);
    if (has_lo && has_hi) {
      if (!(hi_ > lo_)) throw PreconditionError("least_squares_fit: empty bound interval");
      kind_ = Kind::kLogistic;
    } else if (has_lo) {
      kind_ = Kind::kLower;
    } else if (has_hi) {
      kind_ = Kind::kUpper;
    }
  }

  double to_model(double u) const {
    switch (kind_) {
      case Kind::kLogistic:
        return lo_ + (hi_ - lo_) / (1.0 + std::exp(-u));
      case Kind::kLower:
        return lo_ + std::exp(u);
      case Kind::kUpper:
        return hi_ - std::exp(u);
      case Kind::kNone:
        break;
    }
    return u;
  }

  double to_internal(double p) const {
    switch (kind_) {
      case Kind::kLogistic:
        if (!(p > lo_ && p < hi_)) break;
        return std::log((p - lo_) / (hi_ - p));
      case Kind::kLower:
        if (!(p > lo_)) break;
        return std::log(p - lo_);
      case Kind::kUpper:
        if (!(p < hi_)) break;
        return std::log(hi_ - p);
      case Kind::kNone:
        return p;
    }
    throw PreconditionError("least_squares_fit: initial value " + std::to_string(p) +
                            " not strictly inside its bounds");
  }

  // dp/du
  double slope(double u) const {
    switch (kind_) {
      case Kind::kLogistic: {
        const double s = 1.0 / (1.0 + std::exp(-u));
        return (hi_ - lo_) * s * (1.0 - s);
      }
      case Kind::kLower:
        return std::exp(u);
      case Kind::kUpper:
        return -std::exp(u);
      case Kind::kNone:
        break;
    }
    return 1.0;
  }

 private:
  enum class Kind { kNone, kLogistic, kLower, kUpper };
  Kind kind_ = Kind::kNone;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

constexpr double kMaxDamping = 1e12;

class Problem {
 public:
  Problem(const ResidualFn& model, std::size_t n_residuals, std::vector<ParamTransform> transforms)
      : model_(model), n_(n_residuals), transforms_(std::move(transforms)), scratch_(transforms_.size()) {}

  std::size_t residuals() const { return n_; }
  std::size_t params() const { return transforms_.size(); }

  std::vector<double> to_model(const Eigen::VectorXd& u) const {
    std::vector<double> p(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j) p[j] = transforms_[j].to_model(u[j]);
    return p;
  }

  // False when the model produced a non-finite residual.
  bool evaluate(const Eigen::VectorXd& u, Eigen::VectorXd& r) {
    for (Eigen::Index j = 0; j < u.size(); ++j) scratch_[j] = transforms_[j].to_model(u[j]);
    r.resize(static_cast<Eigen::Index>(n_));
    model_(scratch_, std::span<double>(r.data(), n_));
    return r.allFinite();
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& u) {
    const ResidualFn internal = [this](std::span<const double> uu, std::span<double> out) {
      for (std::size_t j = 0; j < uu.size(); ++j) scratch_[j] = transforms_[j].to_model(uu[j]);
      model_(scratch_, out);
    };
    return central_difference_jacobian(internal, n_, std::span<const double>(u.data(), u.size()));
  }

  Eigen::VectorXd slopes(const Eigen::VectorXd& u) const {
    Eigen::VectorXd d(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j) d[j] = transforms_[j].slope(u[j]);
    return d;
  }

 private:
  const ResidualFn& model_;
  std::size_t n_;
  std::vector<ParamTransform> transforms_;
  std::vector<double> scratch_;
};

Eigen::VectorXd column_scales(const Eigen::MatrixXd& jac) {
  Eigen::VectorXd s(jac.cols());
  for (Eigen::Index j = 0; j < jac.cols(); ++j) {
    const double norm = jac.col(j).norm();
    s[j] = norm > 0.0 && std::isfinite(norm) ? 1.0 / norm : 0.0;
  }
  return s;
}

std::size_t numerical_rank(const Eigen::MatrixXd& jac) {
  if (!jac.allFinite()) return 0;
  const Eigen::VectorXd s = column_scales(jac);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jac * s.asDiagonal());
  qr.setThreshold(1e-12);
  return static_cast<std::size_t>(qr.rank());
}

Eigen::MatrixXd unscaled_covariance(const Eigen::MatrixXd& jac) {
  const Eigen::VectorXd s = column_scales(jac);
  const Eigen::MatrixXd js = jac * s.asDiagonal();
  const Eigen::MatrixXd normal = js.transpose() * js;
  const Eigen::MatrixXd inv = normal.completeOrthogonalDecomposition().pseudoInverse();
  return s.asDiagonal() * inv * s.asDiagonal();
}

}  // namespace

Eigen::MatrixXd central_difference_jacobian(const ResidualFn& model, std::size_t n_residuals,
                                            std::span<const double> at) {
  const std::size_t m = at.size();
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n_residuals), static_cast<Eigen::Index>(m));
  std::vector<double> probe(at.begin(), at.end());
  Eigen::VectorXd plus(static_cast<Eigen::Index>(n_residuals));
  Eigen::VectorXd minus(static_cast<Eigen::Index>(n_residuals));
  for (std::size_t j = 0; j < m; ++j) {
    const double h = std::max(1e-8, 1e-8 * std::abs(at[j]));
    probe[j] = at[j] + h;
    model(probe, std::span<double>(plus.data(), n_residuals));
    probe[j] = at[j] - h;
    model(probe, std::span<double>(minus.data(), n_residuals));
    probe[j] = at[j];
    jac.col(static_cast<Eigen::Index>(j)) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

FitResult least_squares_fit(const ResidualFn& model, std::size_t n_residuals,
                            std::span<const double> initial, std::span<const Bound> bounds,
                            const FitOptions& options) {
  const std::size_t m = initial.size();
  if (m == 0) throw PreconditionError("least_squares_fit: no parameters");
  if (n_residuals < m) {
    throw PreconditionError("least_squares_fit: " + std::to_string(n_residuals) +
                            " residuals for " + std::to_string(m) + " parameters");
  }
  if (!bounds.empty() && bounds.size() != m) {
    throw PreconditionError("least_squares_fit: bounds size does not match parameter count");
  }

  std::vector<ParamTransform> transforms(m);
  if (!bounds.empty()) {
    for (std::size_t j = 0; j < m; ++j) transforms[j] = ParamTransform(bounds[j]);
  }
  Eigen::VectorXd u(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) u[static_cast<Eigen::Index>(j)] = transforms[j].to_internal(initial[j]);

  Problem problem(model, n_residuals, std::move(transforms));
  Eigen::VectorXd r;
  if (!problem.evaluate(u, r)) {
    throw PreconditionError("least_squares_fit: non-finite residuals at the initial point");
  }
  double cost = r.squaredNorm();

  FitResult result;
  result.history.push_back(std::sqrt(cost));

  Eigen::MatrixXd jac = problem.jacobian(u);
  if (const std::size_t rank = numerical_rank(jac); rank < m) {
    throw SingularJacobianError(rank, m);
  }

  const auto small_step = [&](const Eigen::VectorXd& step) {
    return step.norm() <= options.step_tol * (1.0 + u.norm());
  };

  double damping = options.initial_damping;
  bool converged = options.max_iterations > 0 && cost == 0.0;
  bool jacobian_current = true;
  Eigen::VectorXd trial_r;

  while (!converged && result.iterations < options.max_iterations) {
    ++result.iterations;
    if (!jacobian_current) jac = problem.jacobian(u);
    jacobian_current = true;

    Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-r);
    if (step.allFinite() && small_step(step)) {
      converged = true;
      break;
    }

    bool accepted = false;
    double trial_cost = 0.0;
    if (step.allFinite()) {
      const Eigen::VectorXd trial = u + step;
      if (problem.evaluate(trial, trial_r) && (trial_cost = trial_r.squaredNorm()) < cost) {
        accepted = true;
        damping = std::max(damping / 3.0, 1e-15);
      }
    }

    if (!accepted) {
      const Eigen::MatrixXd normal = jac.transpose() * jac;
      const Eigen::VectorXd gradient = jac.transpose() * r;
      Eigen::VectorXd diag = normal.diagonal();
      const double floor = 1e-12 * std::max(diag.maxCoeff(), 1e-300);
      diag = diag.cwiseMax(floor);
      while (damping <= kMaxDamping) {
        Eigen::MatrixXd lhs = normal;
        lhs.diagonal() += damping * diag;
        step = lhs.ldlt().solve(-gradient);
        if (!step.allFinite()) {
          damping *= 3.0;
          continue;
        }
        if (small_step(step)) {
          converged = true;
          break;
        }
        const Eigen::VectorXd trial = u + step;
        if (problem.evaluate(trial, trial_r) && (trial_cost = trial_r.squaredNorm()) < cost) {
          accepted = true;
          damping /= 3.0;
          break;
        }
        damping *= 3.0;
      }
      if (!accepted) {
        // No descent direction left at working precision.
        converged = true;
        break;
      }
    }

    const double old_norm = std::sqrt(cost);
    const double new_norm = std::sqrt(trial_cost);
    u += step;
    r.swap(trial_r);
    cost = trial_cost;
    result.history.push_back(new_norm);
    jacobian_current = false;

    if (cost == 0.0 || (old_norm - new_norm) < options.relative_decrease_tol * old_norm ||
        small_step(step)) {
      converged = true;
    }
  }

  if (!jacobian_current) jac = problem.jacobian(u);
  const std::size_t dof = n_residuals > m ? n_residuals - m : 1;
  const double sigma2 = cost / static_cast<double>(dof);
  const Eigen::VectorXd d = problem.slopes(u);
  Eigen::MatrixXd cov = sigma2 * (d.asDiagonal() * unscaled_covariance(jac) * d.asDiagonal());
  result.covariance = 0.5 * (cov + cov.transpose());

  result.params = problem.to_model(u);
  result.residual_norm = std::sqrt(cost);
  result.converged = converged;
  return result;
}

}  // namespace resokit::numerics
