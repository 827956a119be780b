#ifndef MHECT_LMI_SOLVER_H_
#define MHECT_LMI_SOLVER_H_

#include <functional>
#include <string>
#include <vector>

#include "mhect/linalg.h"

namespace mhect {

// One affine matrix constraint G(z) = F0 + sum_k z_k F_k > 0 (positive
// definite). Matrices are symmetric; empty F_k entries mean zero.
struct LmiBlock {
  Matrix f0;
  std::vector<Matrix> fk;
};

struct LmiProgram {
  int num_vars = 0;
  Vector cost;  // minimize cost' z
  std::vector<LmiBlock> blocks;
};

struct BarrierOptions {
  int max_newton_iters = 200;
  double initial_barrier_weight = 1.0;  // s in s*cost'z - sum log det G
  double weight_growth = 10.0;
  double min_barrier_parameter = 1e-10;  // stop when 1/s falls below
  double armijo = 0.01;
  double backtrack = 0.5;
  double newton_tol = 1e-9;  // half squared Newton decrement
};

struct BarrierResult {
  Vector z;
  double objective = 0.0;
  int newton_iters = 0;
  bool stopped_early = false;  // `done` returned true
  std::string termination;
};

// Log-barrier interior-point method from a strictly feasible start. Newton
// with exact Hessian on the barrier subproblem, Armijo backtracking that keeps
// every block positive definite. `done` is checked after every accepted step.
// Throws ConfigError if z0 is not strictly feasible.
BarrierResult SolveLmiBarrier(const LmiProgram& prog, const Vector& z0,
                              const BarrierOptions& opts,
                              const std::function<bool(const Vector&)>& done = {});

// Evaluate G(z) for one block.
Matrix EvaluateBlock(const LmiBlock& block, const Vector& z);

}  // namespace mhect

#endif  // MHECT_LMI_SOLVER_H_
