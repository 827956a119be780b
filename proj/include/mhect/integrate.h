#ifndef MHECT_INTEGRATE_H_
#define MHECT_INTEGRATE_H_

#include <ostream>
#include <string>
#include <vector>

#include "mhect/linalg.h"
#include "mhect/signal.h"
#include "mhect/system_model.h"

namespace mhect {

// States at grid nodes t0, t0 + dt, ... Queries snap to nodes; no
// interpolation between them.
struct Trajectory {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<Vector> states;

  long size() const { return static_cast<long>(states.size()); }
  double end_time() const { return t0 + dt * static_cast<double>(size() - 1); }
  // State at grid node `t`; throws DomainError if t is off-grid or outside.
  const Vector& At(double t) const;
};

// Partial derivatives of one RK4 step x+ = phi(x, u, w).
struct StepJacobians {
  Matrix dx;  // n x n
  Matrix dw;  // n x q
};

// One classic RK4 step with u and w held over the step. If `jac` is non-null
// the exact derivative of the discrete map is returned as well; the state
// result is identical either way.
Vector Rk4Step(const SystemModel& model, const Vector& x, const Vector& u,
               const Vector& w, double dt, StepJacobians* jac = nullptr);

// Fixed-step RK4 from chi over [t0, t1]. u and w are sampled at each step's
// left node; their grids must be integer multiples of dt and cover [t0, t1).
// For m = 0 an empty signal is accepted for u.
// Throws ConfigError on non-divisible spans, DivergenceError on non-finite
// states.
Trajectory Integrate(const SystemModel& model, const Vector& chi,
                     const PiecewiseSignal& u, const PiecewiseSignal& w,
                     double t0, double t1, double dt);

// y_k = h(x_k, u_k, w_k) at the left node of each step of `traj`.
PiecewiseSignal OutputAlong(const SystemModel& model, const Trajectory& traj,
                            const PiecewiseSignal& u, const PiecewiseSignal& w);

// Empty input signal for models with m = 0 (dimension 0, covers any span).
PiecewiseSignal NoInput(double t0, double dt, long pieces);

// CSV: header t,x1,...,xn then one row per node, 17 significant digits.
void WriteTrajectoryCsv(std::ostream& os, const Trajectory& traj,
                        const std::string& prefix = "x");

}  // namespace mhect

#endif  // MHECT_INTEGRATE_H_
