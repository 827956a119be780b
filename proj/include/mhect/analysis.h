#ifndef MHECT_ANALYSIS_H_
#define MHECT_ANALYSIS_H_

#include <ostream>
#include <vector>

#include <json.hpp>

#include "mhect/certificate.h"
#include "mhect/integrate.h"
#include "mhect/mhe.h"
#include "mhect/signal.h"
#include "mhect/system_model.h"

namespace mhect {

// 4 rho^t_i |chi - chi_hat|^2_P2 + factor * int_0^t_i rho^(t_i - tau) |w|^2_Q.
// factor is 8, or 4 for windows starting on sampling times. w must cover
// [0, t_i). Throws ConfigError for rho outside (0, 1) or another factor.
double Theorem1Bound(const DetectabilityCertificate& cert, double rho,
                     const Vector& chi, const Vector& chi_hat,
                     const PiecewiseSignal& w, double t_i, int factor);

// lambda^-(t_i - t) (4 lmax(P2, P1) lambda^T_ti U_prior
//   + 4 int_{t_i - T_ti}^{t_i} lambda^(t_i - tau) |w|^2_Q).
// Throws DomainError if t > t_i.
double Prop3Bound(const DetectabilityCertificate& cert, double t, double t_i,
                  double window, double u_prior, const PiecewiseSignal& w);

// Quadratic instantiation of the sup-norm bound
// |x(t_i) - x_hat(t_i)| <= max{C |chi - chi_hat| rho_s^t_i, gamma_coeff |w|_inf}.
struct SupBoundConstants {
  double C = 0.0;
  double rho_s = 0.0;
  double gamma_coeff = 0.0;
};
SupBoundConstants ComputeSupBoundConstants(const DetectabilityCertificate& cert,
                                           double rho, int factor);

struct GroundTruth {
  Vector chi;
  Trajectory x;
  PiecewiseSignal w;
  PiecewiseSignal u;  // may be empty for m = 0
  bool empty() const { return x.states.empty(); }
};

struct SampleBound {
  double t_i = 0.0;
  double lhs = 0.0;     // |x - x_hat|^2_P1 at t_i
  double rhs = 0.0;     // exponential error bound
  double margin = 0.0;  // rhs - lhs
  bool pass = true;
  double u_prior = 0.0;  // |x - x_hat|^2_P2 at the window start
  double prop3_rhs = 0.0;
  bool prop3_pass = true;
  double cost = 0.0;            // solver cost
  double candidate_cost = 0.0;  // J at the true window trajectory
  bool optimality_pass = true;
  double error_norm = 0.0;
  double sup_bound = 0.0;
  bool sup_pass = true;
};

struct BoundReport {
  double rho = 0.0;
  double horizon = 0.0;
  double delta_bar = 0.0;
  double min_horizon = 0.0;
  int factor = 8;
  bool equidistant_mode = false;
  double rate_residual = 0.0;  // relative mismatch of rho^(T-db) vs 4 lmax lambda^(T-db)
  SupBoundConstants sup;
  std::vector<SampleBound> samples;
  double worst_margin = 0.0;
  double worst_relative_margin = 0.0;
  bool pass = true;  // error-bound margins
  bool prop3_pass = true;
  bool optimality_pass = true;
  bool sup_pass = true;
};

// Audits a simulated run against the exponential error bound (factor 8, or 4 with
// delta_bar = 0 in equidistant mode), the per-window bound, the
// optimality chain cost <= J(truth) and the sup-norm form. A sample passes
// iff margin >= -1e-9 rhs. Throws AuditError without truth and HorizonError
// if T does not exceed the minimal horizon.
BoundReport AuditRun(const SystemModel& model, const EstimationRun& run,
                     const GroundTruth& truth, const MheConfig& cfg);

// t_i,lhs,rhs,margin,U_prior,prop3_rhs
void WriteBoundsCsv(std::ostream& os, const BoundReport& report);
nlohmann::json BoundReportSummary(const BoundReport& report);

}  // namespace mhect

#endif  // MHECT_ANALYSIS_H_
