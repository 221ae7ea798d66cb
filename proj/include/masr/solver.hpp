// Barrier path-following solver for ConicProblem.
#pragma once

#include <string>

#include "masr/conic.hpp"

namespace masr {

enum class SolveStatus { optimal, infeasible, numerical_failure };

std::string to_string(SolveStatus s);

struct SolverOptions {
  double gap_tolerance = 1e-8;        // on the barrier duality-gap estimate
  double acceptable_gap = 1e-5;       // still reported optimal if Newton stalls here
  double barrier_growth = 20.0;
  double newton_tolerance = 1e-9;     // on lambda^2 / 2
  int max_newton_steps = 600;
  double variable_bound = 1e4;        // implicit box |z_i| <= bound
  bool exploit_structure = true;      // diagonal / low-rank LMI coefficients
};

struct ConicSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  Eigen::VectorXd x;
  double objective = 0.0;
  double gap = 0.0;
  int newton_steps = 0;
  int phase_one_steps = 0;
  std::string message;
};

// `hint` (optional, may be empty) is used as the starting point after being
// projected onto the equality constraints.
ConicSolution solve_conic(const ConicProblem& problem, const SolverOptions& opts = {},
                          const Eigen::VectorXd& hint = {});

}  // namespace masr
