#include "radcal/optimizer.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "radcal/error.hpp"

namespace radcal {

void LmOptions::validate() const {
  const bool ok = param_tol > 0.0 && fn_tol > 0.0 && max_iters >= 1 && max_fn_evals >= 1 && initial_lambda > 0.0 &&
                  lambda_up > 1.0 && lambda_down > 0.0 && lambda_down < 1.0 && fd_step > 0.0;
  if (!ok) throw Error(ErrorCode::InvalidArgument, "optimizer options must be positive with max_iters >= 1");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::ZeroCost: return "zero cost";
    case Termination::StepTolerance: return "step below tolx";
    case Termination::FunctionTolerance: return "relative cost change below tolfun";
    case Termination::MaxIterations: return "iteration limit";
    case Termination::MaxFunctionEvaluations: return "evaluation limit";
    case Termination::DampingOverflow: return "damping overflow";
  }
  return "unknown";
}

MatX numeric_jacobian(const ResidualFn& residual_fn, const VecX& x, double fd_step, const VecX* f0) {
  const VecX base = f0 != nullptr ? *f0 : residual_fn(x);
  MatX jac(base.size(), x.size());
  VecX xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = fd_step * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    const double step = xp[i] - x[i];  // exactly representable increment
    jac.col(i) = (residual_fn(xp) - base) / step;
    xp[i] = x[i];
  }
  if (!jac.allFinite()) throw Error(ErrorCode::JacobianNaN, "non-finite entry in the finite-difference Jacobian");
  return jac;
}

MatX central_jacobian(const ResidualFn& residual_fn, const VecX& x, double fd_step) {
  const VecX base = residual_fn(x);
  MatX jac(base.size(), x.size());
  VecX xp = x;
  VecX xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = fd_step * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    jac.col(i) = (residual_fn(xp) - residual_fn(xm)) / (xp[i] - xm[i]);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  if (!jac.allFinite()) throw Error(ErrorCode::JacobianNaN, "non-finite entry in the central-difference Jacobian");
  return jac;
}

LmResult minimize(const ResidualFn& residual_fn, const VecX& x0, const LmOptions& opts) {
  opts.validate();

  LmResult out;
  out.x = x0;
  VecX residual = residual_fn(out.x);
  out.fn_evals = 1;
  if (!residual.allFinite()) throw Error(ErrorCode::JacobianNaN, "residual is not finite at the starting point");
  if (residual.size() < x0.size()) {
    throw Error(ErrorCode::InvalidArgument, "fewer residuals (" + std::to_string(residual.size()) +
                                                ") than parameters (" + std::to_string(x0.size()) + ")");
  }

  double cost = residual.squaredNorm();
  out.initial_cost = cost;
  out.final_cost = cost;
  out.cost_history.push_back(cost);
  if (cost == 0.0) {
    out.termination = Termination::ZeroCost;
    return out;
  }

  const auto n = x0.size();
  double lambda = opts.initial_lambda;

  while (out.iterations < opts.max_iters) {
    if (out.fn_evals + n > opts.max_fn_evals) {
      out.termination = Termination::MaxFunctionEvaluations;
      return out;
    }
    MatX jac;
    try {
      jac = numeric_jacobian(residual_fn, out.x, opts.fd_step, &residual);
    } catch (const Error& e) {
      throw Error(e.code(), e.detail() + " at iteration " + std::to_string(out.iterations));
    }
    out.fn_evals += static_cast<int>(n);

    const MatX jtj = jac.transpose() * jac;
    const VecX grad = jac.transpose() * residual;
    const VecX diag = jtj.diagonal();
    if (!(diag.minCoeff() > 0.0)) {
      throw Error(ErrorCode::SingularNormalEquations,
                  "a parameter has no influence on the residuals at iteration " + std::to_string(out.iterations));
    }

    for (;;) {
      if (out.fn_evals >= opts.max_fn_evals) {
        out.termination = Termination::MaxFunctionEvaluations;
        return out;
      }
      MatX lhs = jtj;
      lhs.diagonal() += lambda * diag;
      const Eigen::LDLT<MatX> ldlt(lhs);
      const VecX step = ldlt.solve(-grad);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        throw Error(ErrorCode::SingularNormalEquations,
                    "damped normal equations not solvable at iteration " + std::to_string(out.iterations));
      }

      const VecX trial = out.x + step;
      const VecX trial_residual = residual_fn(trial);
      ++out.fn_evals;
      const double trial_cost =
          trial_residual.allFinite() ? trial_residual.squaredNorm() : std::numeric_limits<double>::infinity();
      const double step_norm = step.norm();

      if (trial_cost < cost) {
        const double rel_change = (cost - trial_cost) / cost;
        out.x = trial;
        residual = trial_residual;
        cost = trial_cost;
        out.final_cost = cost;
        out.cost_history.push_back(cost);
        ++out.iterations;
        lambda = std::max(lambda * opts.lambda_down, 1e-15);
        if (cost == 0.0) {
          out.termination = Termination::ZeroCost;
          return out;
        }
        if (step_norm < opts.param_tol) {
          out.termination = Termination::StepTolerance;
          return out;
        }
        if (rel_change < opts.fn_tol) {
          out.termination = Termination::FunctionTolerance;
          return out;
        }
        break;
      }

      if (step_norm < opts.param_tol) {
        out.termination = Termination::StepTolerance;
        return out;
      }
      lambda *= opts.lambda_up;
      if (lambda > 1e20) {
        out.termination = Termination::DampingOverflow;
        return out;
      }
    }
  }
  out.termination = Termination::MaxIterations;
  return out;
}

}  // namespace radcal
