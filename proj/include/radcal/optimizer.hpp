#pragma once

#include <Eigen/Core>
#include <functional>
#include <string_view>
#include <vector>

namespace radcal {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Maps a parameter vector to a residual vector. The cost is its squared norm.
// A trial point where the model cannot be evaluated may return non-finite
// residuals; the optimizer then rejects that step.
using ResidualFn = std::function<VecX(const VecX&)>;

// Stopping thresholds default to TolX = TolFun = 1e-5, MaxIter = 120,
// MaxFunEvals = 8000.
struct LmOptions {
  double param_tol = 1e-5;
  double fn_tol = 1e-5;
  int max_iters = 120;
  int max_fn_evals = 8000;
  double initial_lambda = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 0.1;
  double fd_step = 1e-6;  // relative: h_i = fd_step * max(1, |x_i|)

  void validate() const;
};

enum class Termination {
  ZeroCost,
  StepTolerance,
  FunctionTolerance,
  MaxIterations,
  MaxFunctionEvaluations,
  DampingOverflow,
};

std::string_view to_string(Termination t);

struct LmResult {
  VecX x;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;  // accepted steps
  int fn_evals = 0;
  Termination termination = Termination::MaxIterations;
  std::vector<double> cost_history;  // cost at x0 followed by every accepted iterate
};

// Forward differences with per-coordinate step fd_step * max(1, |x_i|).
// `f0` is residual_fn(x) if the caller already has it.
MatX numeric_jacobian(const ResidualFn& residual_fn, const VecX& x, double fd_step = 1e-6, const VecX* f0 = nullptr);

// Central differences; used only to sanity-check numeric_jacobian.
MatX central_jacobian(const ResidualFn& residual_fn, const VecX& x, double fd_step = 1e-6);

// Levenberg-Marquardt on the normal equations (J^T J + lambda diag(J^T J)) dx = -J^T r.
// A step is accepted only if it lowers the cost.
LmResult minimize(const ResidualFn& residual_fn, const VecX& x0, const LmOptions& opts = {});

}  // namespace radcal
