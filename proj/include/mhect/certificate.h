#ifndef MHECT_CERTIFICATE_H_
#define MHECT_CERTIFICATE_H_

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhect/box.h"
#include "mhect/errors.h"
#include "mhect/lmi_solver.h"
#include "mhect/linalg.h"
#include "mhect/system_model.h"

namespace mhect {

// Sample points for pointwise LMI checks over X x U x W. Either the box
// vertices (sound only if the caller knows the LMI entries are affine per
// axis) or a tensor grid with `counts` points per stacked axis (x, u, w).
// A count of 1 samples the axis midpoint.
struct GridSpec {
  bool vertices_only = false;
  std::vector<int> counts;

  static GridSpec Vertices() { return GridSpec{true, {}}; }
  static GridSpec Uniform(int n_axes, int per_axis) {
    return GridSpec{false, std::vector<int>(n_axes, per_axis)};
  }
};

struct GridPoint {
  Vector x, u, w;
};

struct CertificateDomain {
  Box X, U, W;
};

// Enumerates the sample points of `grid` over `domain`. Throws ConfigError on
// an empty grid or unbounded axes.
std::vector<GridPoint> GridPoints(const CertificateDomain& domain,
                                  const GridSpec& grid);

struct VerificationReport {
  bool vertices_only = false;
  std::vector<int> counts;
  long points = 0;
  double max_eigenvalue = 0.0;
  GridPoint worst;
  double tol_psd = 1e-8;
  bool passed = false;
};

// Matrices for which the pointwise LMI was checked, U = |x1 - x2|^2_P with
// dissipation weights (Q, R).
struct LmiWitness {
  Matrix P, Q, R;
};

// Quadratic i-iIOSS Lyapunov data: P1 <= U/|.|^2 <= P2, dissipation rate
// lambda = exp(-kappa) with supply weights Q (disturbance) and R (output).
// For LMI-derived certificates P1 = P2 = witness.P; after rescaling the
// witness keeps the (scaled) LMI matrices so the certificate stays
// re-verifiable.
struct DetectabilityCertificate {
  Matrix P1, P2, Q, R;
  double lambda = 0.5;
  double kappa = std::log(2.0);
  LmiWitness witness;
  CertificateDomain domain;
  VerificationReport verification;

  // Certificate with P1 = P2 = P from an LMI solution.
  static DetectabilityCertificate FromLmi(const Matrix& P, const Matrix& Q,
                                          const Matrix& R, double lambda,
                                          const CertificateDomain& domain);

  // Checks symmetry/definiteness of the weights, P1 <= P2, lambda in (0,1)
  // and kappa = -ln(lambda). Throws ConfigError.
  void Validate() const;
};

// Linearization (A, B, C, D) of f and h at one point.
struct Linearization {
  Matrix A, B, C, D;
};
Linearization Linearize(const SystemModel& model, const Vector& x,
                        const Vector& u, const Vector& w);

// [[PA + A'P + kappa P - C'RC, PB - C'RD], [B'P - D'RC, -D'RD - Q]],
// symmetrized.
Matrix LmiMatrix(const Linearization& lin, const Matrix& P, const Matrix& Q,
                 const Matrix& R, double kappa);
Matrix LmiMatrix(const SystemModel& model, const Matrix& P, const Matrix& Q,
                 const Matrix& R, double kappa, const Vector& x,
                 const Vector& u, const Vector& w);

// Maximum LMI eigenvalue of the certificate witness over the grid; passes iff
// it is <= tol_psd. The domain must lie inside the model's boxes.
VerificationReport VerifyCertificate(const SystemModel& model,
                                     const DetectabilityCertificate& cert,
                                     const GridSpec& grid,
                                     double tol_psd = 1e-8);

struct SynthesisMode {
  enum class Kind { kFixedQR, kJoint };
  Kind kind = Kind::kFixedQR;
  Matrix Q, R;  // used in kFixedQR

  static SynthesisMode FixedQR(Matrix q, Matrix r) {
    return SynthesisMode{Kind::kFixedQR, std::move(q), std::move(r)};
  }
  static SynthesisMode Joint() { return SynthesisMode{Kind::kJoint, {}, {}}; }
};

struct SdpOptions {
  double eps_pd = 1e-3;         // P (and Q, R in joint mode) >= eps_pd I
  double max_eigenvalue = 1e6;  // and <= max_eigenvalue I, keeps joint mode bounded
  double target = -1e-8;        // stop once the LMI slack t falls below this
  double tol_psd = 1e-8;        // re-check tolerance
  int max_iters = 200;
  double min_barrier_parameter = 1e-10;
};

struct InfeasibilityReport {
  double best_slack = 0.0;  // smallest t reached: LMI <= t I at every point
  GridPoint worst;          // grid point attaining the largest eigenvalue
  double worst_eigenvalue = 0.0;
  int iterations = 0;
  std::string termination;
};

class SynthesisInfeasible : public InfeasibleError {
 public:
  SynthesisInfeasible(const std::string& what, InfeasibilityReport report)
      : InfeasibleError(what), report_(std::move(report)) {}
  const InfeasibilityReport& report() const { return report_; }

 private:
  InfeasibilityReport report_;
};

// Solves min t s.t. LMI(P[,Q,R]) <= t I at all grid points with the box
// constraints on the decision matrices; succeeds once t < target. The result
// is re-verified on the same grid before returning (InternalError if that
// fails). Throws SynthesisInfeasible otherwise.
DetectabilityCertificate SynthesizeCertificate(const SystemModel& model,
                                               double lambda,
                                               const SynthesisMode& mode,
                                               const GridSpec& grid,
                                               const SdpOptions& opts = {});

// K = 1 / max(lmax(P2, P2t), lmax(Q, Qt), lmax(R, Rt)). Returns the
// certificate for K U: P1 <- K P1, (P2, Q, R) <- (P2t, Qt, Rt), same lambda,
// witness scaled by K.
DetectabilityCertificate ScaleCertificate(const DetectabilityCertificate& cert,
                                          const Matrix& P2t, const Matrix& Qt,
                                          const Matrix& Rt, double* k_out = nullptr);

// Strict lower bound on the horizon: -ln(4 lmax(P2, P1)) / ln(lambda) + delta_bar.
double MinHorizon(const DetectabilityCertificate& cert, double delta_bar);

// rho = (4 lmax(P2, P1))^(1/(T - delta_bar)) * lambda. Throws HorizonError
// unless T > MinHorizon(cert, delta_bar).
double ContractionRate(const DetectabilityCertificate& cert, double horizon,
                       double delta_bar);

nlohmann::json CertificateToJson(const DetectabilityCertificate& cert);
DetectabilityCertificate CertificateFromJson(const nlohmann::json& j);
void SaveCertificate(const DetectabilityCertificate& cert, const std::string& path);
DetectabilityCertificate LoadCertificate(const std::string& path);

// Human-readable summary of a verification or synthesis.
std::string DescribeVerification(const VerificationReport& report);

nlohmann::json MatrixToJson(const Matrix& m);
Matrix MatrixFromJson(const nlohmann::json& j);

}  // namespace mhect

#endif  // MHECT_CERTIFICATE_H_
