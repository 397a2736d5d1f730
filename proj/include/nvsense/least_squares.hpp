#pragma once

// Damped Gauss-Newton (Levenberg-Marquardt) for small dense problems with
// box bounds. Trial points are projected onto the box; a step is accepted
// only if it lowers the cost, so the accepted cost sequence is monotone.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace nvsense::lsq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Problem {
  Eigen::Index n_residuals = 0;
  // r(x); residuals already carry any weighting
  std::function<void(const Vector& x, Vector& r)> residuals;
  // J_ij = dr_i/dx_j; forward differences when empty
  std::function<void(const Vector& x, Matrix& jac)> jacobian;
  Vector lower;
  Vector upper;
};

struct Options {
  int max_iterations = 200;
  double step_tol = 1e-12;
  double cost_tol = 1e-15;
  double initial_damping = 1e-3;
  double max_damping = 1e12;
};

struct Solution {
  Vector x;
  Vector residuals;
  Matrix jacobian;
  double cost = 0.0;  // 0.5 * |r|^2
  int iterations = 0;
  bool converged = false;
  std::vector<double> accepted_costs;
};

namespace detail {

inline void forward_difference(const Problem& p, const Vector& x, const Vector& r0, Matrix& jac) {
  jac.resize(p.n_residuals, x.size());
  Vector xh = x;
  Vector rh(p.n_residuals);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    double h = 1e-7 * std::max(std::abs(x[j]), 1e-8);
    if (p.upper.size() && x[j] + h > p.upper[j]) h = -h;
    xh[j] = x[j] + h;
    p.residuals(xh, rh);
    jac.col(j) = (rh - r0) / h;
    xh[j] = x[j];
  }
}

inline Vector project(const Problem& p, Vector x) {
  if (p.lower.size()) x = x.cwiseMax(p.lower);
  if (p.upper.size()) x = x.cwiseMin(p.upper);
  return x;
}

}  // namespace detail

inline Solution solve(const Problem& problem, Vector x0, const Options& options = {}) {
  Solution s;
  s.x = detail::project(problem, std::move(x0));
  s.residuals.resize(problem.n_residuals);
  problem.residuals(s.x, s.residuals);
  auto evaluate_jacobian = [&] {
    if (problem.jacobian)
      problem.jacobian(s.x, s.jacobian);
    else
      detail::forward_difference(problem, s.x, s.residuals, s.jacobian);
  };
  evaluate_jacobian();
  s.cost = 0.5 * s.residuals.squaredNorm();
  if (!std::isfinite(s.cost)) return s;
  s.accepted_costs.push_back(s.cost);

  double damping = options.initial_damping;
  Vector trial_r(problem.n_residuals);
  for (s.iterations = 0; s.iterations < options.max_iterations; ++s.iterations) {
    if (s.cost == 0.0) {
      s.converged = true;
      break;
    }
    const Matrix jtj = s.jacobian.transpose() * s.jacobian;
    const Vector gradient = s.jacobian.transpose() * s.residuals;
    Vector scale = jtj.diagonal().cwiseMax(1e-30 * std::max(1.0, jtj.diagonal().maxCoeff()));

    bool accepted = false;
    while (!accepted) {
      Matrix damped = jtj;
      damped.diagonal() += damping * scale;
      const Vector step = damped.ldlt().solve(-gradient);
      const Vector trial = detail::project(problem, s.x + step);
      problem.residuals(trial, trial_r);
      const double trial_cost = 0.5 * trial_r.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < s.cost) {
        const double moved = (trial - s.x).norm();
        const double reduction = s.cost - trial_cost;
        s.x = trial;
        s.residuals = trial_r;
        const double previous = s.cost;
        s.cost = trial_cost;
        s.accepted_costs.push_back(s.cost);
        evaluate_jacobian();
        damping = std::max(damping / 10.0, 1e-12);
        accepted = true;
        if (moved <= options.step_tol * (s.x.norm() + options.step_tol) ||
            reduction <= options.cost_tol * previous) {
          s.converged = true;
        }
      } else {
        damping *= 10.0;
        if (damping > options.max_damping) {
          // no descent direction left at working precision
          s.converged = true;
          break;
        }
      }
    }
    if (s.converged) break;
  }
  return s;
}

/// Parameter covariance (J^T J)^-1, optionally scaled by the residual
/// variance 2 cost / (m - p). Undefined (NaN) when m <= p and scaling is
/// requested.
inline Matrix covariance(const Solution& s, bool scale_by_residual_variance) {
  const Eigen::Index m = s.jacobian.rows();
  const Eigen::Index p = s.jacobian.cols();
  const Matrix jtj = s.jacobian.transpose() * s.jacobian;
  Matrix cov = jtj.completeOrthogonalDecomposition().pseudoInverse();
  if (scale_by_residual_variance) {
    if (m <= p) return Matrix::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
    cov *= 2.0 * s.cost / static_cast<double>(m - p);
  }
  return cov;
}

}  // namespace nvsense::lsq
