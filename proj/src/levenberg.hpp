#pragma once

// Dense Levenberg damped Gauss-Newton over an arbitrary parameter state.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace drishti::calib::detail {

template <class State>
struct LeastSquaresProblem {
  /// Fills residuals (and the Jacobian when non-null). Returns false when the
  /// state is infeasible, e.g. a point falls behind a camera.
  std::function<bool(const State&, Eigen::VectorXd&, Eigen::MatrixXd*)> evaluate;
  /// Applies a tangent-space increment.
  std::function<State(const State&, const Eigen::VectorXd&)> retract;
};

struct LevenbergOptions {
  double initial_lambda = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  double relative_tolerance = 1e-10;
  int max_iterations = 100;
  double max_lambda = 1e12;
  /// Cost per residual below which the fit is exact to working precision.
  double exact_fit_cost = 1e-20;
};

struct LevenbergResult {
  std::vector<double> cost_history;
  int iterations = 0;
  bool converged = false;
  bool feasible_start = true;
  Eigen::VectorXd residuals;
};

template <class State>
LevenbergResult levenberg(State& state, const LeastSquaresProblem<State>& problem, const LevenbergOptions& opt) {
  LevenbergResult result;
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  if (!problem.evaluate(state, r, &jac)) {
    result.feasible_start = false;
    return result;
  }
  double cost = r.squaredNorm();
  result.cost_history.push_back(cost);
  const double exact_cost = opt.exact_fit_cost * static_cast<double>(std::max<Eigen::Index>(r.size(), 1));
  if (cost <= exact_cost) {
    result.converged = true;
    result.residuals = r;
    return result;
  }

  double lambda = opt.initial_lambda;
  Eigen::VectorXd r_new;
  Eigen::MatrixXd jac_new;
  for (int it = 0; it < opt.max_iterations; ++it) {
    result.iterations = it + 1;
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;
    Eigen::MatrixXd damped = jtj;
    damped.diagonal().array() += lambda;
    const Eigen::VectorXd delta = damped.ldlt().solve(-jtr);

    bool accepted = false;
    if (delta.allFinite()) {
      State candidate = problem.retract(state, delta);
      if (problem.evaluate(candidate, r_new, &jac_new)) {
        const double cost_new = r_new.squaredNorm();
        if (std::isfinite(cost_new) && cost_new < cost) {
          const double rel = (cost - cost_new) / cost;
          state = std::move(candidate);
          r.swap(r_new);
          jac.swap(jac_new);
          cost = cost_new;
          result.cost_history.push_back(cost);
          lambda = std::max(lambda / opt.lambda_down, 1e-15);
          accepted = true;
          if (rel < opt.relative_tolerance || cost <= exact_cost) {
            result.converged = true;
            break;
          }
        }
      }
    }
    if (!accepted) {
      lambda *= opt.lambda_up;
      // No damping level yields descent: the state is stationary.
      if (lambda > opt.max_lambda) {
        result.converged = true;
        break;
      }
    }
  }
  result.residuals = r;
  return result;
}

}  // namespace drishti::calib::detail
