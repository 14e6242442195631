#pragma once

#include <functional>

#include "drel/ordinal.hpp"

namespace drel::ordinal::detail {

void check_problem(const OrdinalProblem& data);
void check_full_rank(const OrdinalProblem& data);

/// Jacobian d theta / d (theta_1, log gaps) for the threshold block.
Matrix threshold_jacobian(const Vector& params, int K);

/// Starting thresholds from smoothed cumulative response proportions.
Vector initial_threshold_params(const OrdinalProblem& data);

bool all_levels_present(const OrdinalProblem& data);

struct BfgsResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
};

using Objective = std::function<double(const Vector&)>;

/// Central-difference gradient.
Vector fd_gradient(const Objective& f, const Vector& x);
/// Central-difference Hessian.
Matrix fd_hessian(const Objective& f, const Vector& x);

/// Quasi-Newton maximisation with finite-difference gradients.
BfgsResult bfgs_maximize(const Objective& f, Vector x0, int max_iterations, double gtol);

}  // namespace drel::ordinal::detail
