#pragma once

#include <vector>

#include "varreg/linops.hpp"
#include "varreg/penalties.hpp"
#include "varreg/signal.hpp"

namespace varreg {

// min over phi of 0.5*||T phi - data||^2 + alpha * J(phi), alpha > 0.
struct VariationalProblem {
  LinearMap op;
  Penalty penalty;
  Signal data;
  double alpha = 1.0;
};

struct RegularizedSolution {
  Signal phi;
  double objective_value = 0.0;
  double residual_norm = 0.0;
  double penalty_value = 0.0;
  double optimality_defect = 0.0;
  int iterations = 0;
  bool converged = false;
  // objective at each accepted iterate; non-increasing by restart policy
  std::vector<double> objective_trace;
};

struct SolverSettings {
  double tol = 1e-8;   // on the normalized optimality defect
  int max_iter = 20000;
};

double objective(const VariationalProblem& p, const Signal& phi);

// Normalized first-order optimality measure, zero exactly at a minimizer.
// Differentiable J: ||(1/alpha) T*(data - T phi) - grad J(phi)|| /
// (1 + ||grad J(phi)||). Prox-handled J: fixed-point residual of the
// proximal gradient map at step 1/||T||^2, scaled to the same units.
double optimality_defect(const VariationalProblem& p, const Signal& phi);

// Accelerated (momentum + adaptive restart) first-order method with
// backtracking line search; proximal steps when J has a prox, plain
// gradient steps otherwise. A non-converged result is returned as a value
// carrying the best iterate and its defect, never thrown.
RegularizedSolution minimize_tikhonov(const VariationalProblem& p,
                                      const SolverSettings& settings = {},
                                      const Signal* warm_start = nullptr);

// Direct normal-equations solve (T^T T + alpha I) phi = T^T data for the
// quadratic penalty. Serves as the independent oracle for the iterative path.
Signal closed_form_quadratic(const LinearMap& op, const Signal& data, double alpha);

}  // namespace varreg
