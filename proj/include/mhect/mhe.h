#ifndef MHECT_MHE_H_
#define MHECT_MHE_H_

#include <optional>
#include <string>
#include <vector>

#include "mhect/certificate.h"
#include "mhect/integrate.h"
#include "mhect/sampling.h"
#include "mhect/signal.h"
#include "mhect/system_model.h"

namespace mhect {

struct SolverOptions {
  double grad_tol = 1e-8;   // on the projected gradient of J (+ penalty)
  int max_iters = 100;
  double lm_damping = 1e-3;  // initial Levenberg-Marquardt damping
  double penalty_weight = 1e6;  // node-state / output box penalty, doubled on violation
  double constraint_tol = 1e-9;
};

// Horizon, certificate-derived weights (Gamma = 2|.|^2_P2, L = 2|w|^2_Q +
// |dy|^2_R, discount lambda) and the sampling rule.
struct MheConfig {
  double horizon = 2.0;
  DetectabilityCertificate cert;
  SamplerSpec sampler;
  double dt = 0.01;
  SolverOptions solver;
  // Windows start on sampling times: delta_bar = 0 in the contraction
  // condition and factor 4 in the error bound.
  bool equidistant_mode = false;
};

// Checks T on the dt grid, T > delta_bar(sampling) and, in equidistant mode,
// an equidistant sampler with T a multiple of its period whose windows start
// on sampling times (or 0). Throws ConfigError / HorizonError.
void ValidateConfig(const MheConfig& cfg, const SamplingSet& sampling);

struct SolverStats {
  int iterations = 0;
  double grad_norm = 0.0;
  // "converged", "max_iters", "stalled" or "error: ..."
  std::string termination;
  bool feasible = true;  // node states in X, outputs in Y, within constraint_tol
  double max_violation = 0.0;
  double penalty_weight = 0.0;
  bool prior_projected = false;
  int divergence_retries = 0;
  // Penalized merit after each accepted step, with the penalty weight in
  // force at that step.
  std::vector<double> merit_history;
  std::vector<double> weight_history;
};

struct MheSolution {
  double t_i = 0.0;
  double window = 0.0;  // T_ti = min(t_i, T)
  Vector prior;
  Vector chi_star;
  PiecewiseSignal w_star;  // window-relative grid [0, T_ti)
  Trajectory x_star;       // nodes 0..T_ti/dt, x_star.states[0] == chi_star
  PiecewiseSignal y_star;
  double cost = 0.0;       // J at (chi_star, w_star)
  SolverStats stats;
};

// Optional initial guess for a window solve.
struct MheGuess {
  Vector chi;
  std::vector<Vector> w;  // T_ti/dt pieces; shorter lists are zero-filled
};

// J = 2|chi - prior|^2_P2 lambda^T_ti + sum_j omega_j (2|w_j|^2_Q +
// |y_meas_j - y_est_j|^2_R) with omega_j the exact discount weight of piece j.
// Signals must be piecewise constant on grids nested in cfg.dt and cover a
// window of length T_ti.
double MheObjective(const MheConfig& cfg, const Vector& prior, const Vector& chi,
                    const PiecewiseSignal& w, const PiecewiseSignal& y_meas,
                    const PiecewiseSignal& y_est, double window);

// Solves the window problem at t_i over [t_i - T_ti, t_i] with
// window-relative u_seg, y_seg covering [0, T_ti). Decision variables are
// chi and the dt pieces of w; node states and outputs enter through RK4
// rollouts. Projected Levenberg-Marquardt with Riccati-structured
// Gauss-Newton steps. Never throws for solver trouble: the best iterate is
// returned with stats.termination set.
MheSolution SolveMhe(const SystemModel& model, const MheConfig& cfg,
                     const Vector& prior, const PiecewiseSignal& u_seg,
                     const PiecewiseSignal& y_seg, double t_i,
                     const MheGuess* warm = nullptr);

// Full-information estimate: the window problem over [0, t_i] with prior
// chi_hat. u and y start at time 0.
MheSolution SolveFie(const SystemModel& model, const MheConfig& cfg,
                     const Vector& chi_hat, const PiecewiseSignal& u,
                     const PiecewiseSignal& y, double t_i);

struct MeasurementData {
  PiecewiseSignal u;  // dim 0 allowed for m = 0
  PiecewiseSignal y;
};

struct SampleRecord {
  double t_i = 0.0;
  double window = 0.0;
  long window_start_step = 0;
  Vector prior;      // x_hat(t_i - T_ti) as read from the stored estimate
  Vector x_hat;      // x_hat(t_i)
  double cost = 0.0;
  SolverStats stats;
  double wall_time = 0.0;  // seconds
};

struct EstimationRun {
  SamplingSet sampling;
  Vector chi_hat;
  // Concatenated estimate on the dt grid from 0 to the last sampling time.
  Trajectory estimate;
  // Index of the sample whose window produced each node (-1 for node 0).
  std::vector<int> source;
  std::vector<SampleRecord> samples;
  std::vector<MheSolution> solutions;
  MeasurementData data;
  double total_time = 0.0;
};

// Receding-horizon loop over the sampling times in [0, t_sim]: slice the
// data, solve with the prior read from the concatenated estimate, append the
// new segment on (t_prev, t_i], move on. Each solve is warm-started from the
// previous one shifted by the sampling gap. Event-triggered samplers are
// evaluated online from the latest estimate.
EstimationRun RunMhe(const SystemModel& model, const MheConfig& cfg,
                     const Vector& chi_hat, const MeasurementData& data,
                     double t_sim);

}  // namespace mhect

#endif  // MHECT_MHE_H_
