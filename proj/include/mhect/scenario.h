#ifndef MHECT_SCENARIO_H_
#define MHECT_SCENARIO_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "mhect/analysis.h"
#include "mhect/box.h"
#include "mhect/certificate.h"
#include "mhect/mhe.h"
#include "mhect/sampling.h"
#include "mhect/signal.h"
#include "mhect/system_model.h"

namespace mhect {

// SplitMix64 (Steele, Lea, Flood 2014). Uniform doubles take the top 53
// bits: (next() >> 11) * 2^-53, in [0, 1).
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}
  uint64_t Next();
  double Uniform();

 private:
  uint64_t state_;
};

// Uniform i.i.d. samples in `box` per piece of length `piece_length`.
struct DisturbanceSpec {
  Box box;
  double piece_length = 0.01;
  uint64_t seed = 0;
};

// Covers [0, t_sim) (the last piece may extend past t_sim). Throws
// ConfigError if the box is not inside W or piece_length is not a multiple
// of dt.
PiecewiseSignal GenerateDisturbance(const DisturbanceSpec& spec, const Box& W,
                                    double t_sim, double dt);

struct ScenarioConfig {
  std::string model = "batch_reactor";
  // Certificate file path (string), inline certificate object, or
  // {"synthesize": {"lambda", "mode": "fixed_QR" | "joint", "Q", "R"}}.
  nlohmann::json certificate;
  Vector chi;
  Vector chi_hat;
  DisturbanceSpec disturbance;
  double t_sim = 5.0;
  double dt = 0.01;
  double horizon = 2.0;
  SamplerSpec sampler;
  SolverOptions solver;
  bool equidistant_mode = false;
  std::string out_dir;
  // Recorded output CSV; when set, estimation uses it instead of simulating.
  std::string measurements;
};

// Relative certificate/model paths are resolved against `base_dir`.
ScenarioConfig ScenarioFromJson(const nlohmann::json& j, const std::string& base_dir = "");
nlohmann::json ScenarioToJson(const ScenarioConfig& s);
ScenarioConfig LoadScenario(const std::string& path);

// Checks chi, chi_hat in X, the disturbance box inside W and grid alignment.
void ValidateScenario(const ScenarioConfig& s, const SystemModel& model);

DetectabilityCertificate ResolveCertificate(const ScenarioConfig& s,
                                            const SystemModel& model);

MheConfig MakeMheConfig(const ScenarioConfig& s, const DetectabilityCertificate& cert);

struct Simulation {
  GroundTruth truth;
  MeasurementData data;
};

// True trajectory on the dt grid over [0, t_sim] and y_k = h(x_k, u_k, w_k)
// on each dt piece. u is zero-dimensional for m = 0, else zero-valued.
Simulation Simulate(const SystemModel& model, const ScenarioConfig& s);

// CSV with header t,<prefix>1,... and one row per piece (left node).
void WriteSignalCsv(std::ostream& os, const PiecewiseSignal& s, const std::string& prefix);
// Reads a signal written by WriteSignalCsv; rows must be equally spaced.
PiecewiseSignal ReadSignalCsv(const std::string& path);

struct ScenarioResult {
  ScenarioConfig scenario;
  MheConfig mhe;
  Simulation sim;
  EstimationRun run;
  std::optional<BoundReport> report;
};

// Simulates, estimates and (if T exceeds the minimal horizon) audits.
ScenarioResult RunScenario(const SystemModel& model, const ScenarioConfig& s,
                           const DetectabilityCertificate& cert, bool audit = true);

// estimate.csv, samples.csv, truth.csv, bounds.csv, summary.json and SVG
// panels in `dir` (created if needed).
void WriteScenarioOutputs(const ScenarioResult& r, const std::string& dir);

// Batch-reactor benchmark: chi = [3, 1], chi_hat = [0.1, 4.5], t_sim = 5,
// dt = piece length = 0.01, |w_i| <= 0.1, T = 2, the documented 50-sample
// schedule and Q = diag(1000, 1000, 100), R = 100, lambda = 0.4.
ScenarioConfig BenchS5Scenario(uint64_t seed);
// P = [[4.009, 3.768], [3.768, 3.549]] with the weights above.
DetectabilityCertificate PublishedBatchReactorCertificate(const SystemModel& model,
                                                          double lambda = 0.4);

struct BenchOptions {
  uint64_t seed = 1;
  double lambda = 0.4;
  double horizon = 2.0;
  bool strict_published = false;
  std::string out_dir;  // empty: no files
};

struct BenchResult {
  VerificationReport published;
  bool used_fallback = false;
  DetectabilityCertificate cert;
  double rho = 0.0;
  double min_horizon = 0.0;
  ScenarioResult result;
};

// Verifies the published certificate (falls back to synthesis with the same
// Q, R, lambda unless strict), checks rho = 0.86 +- 0.005, runs and audits.
// Throws InfeasibleError, HorizonError, Error (failed check) or AuditError.
BenchResult RunBenchS5(const BenchOptions& opts);

}  // namespace mhect

#endif  // MHECT_SCENARIO_H_
