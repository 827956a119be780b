#ifndef MHECT_SAMPLING_H_
#define MHECT_SAMPLING_H_

#include <limits>
#include <vector>

#include <json.hpp>

#include "mhect/linalg.h"
#include "mhect/signal.h"
#include "mhect/system_model.h"

namespace mhect {

// Finite, strictly increasing set of sampling times >= 0, each an integer
// multiple of dt. Times are kept as grid step counts as well so lookups are
// exact.
class SamplingSet {
 public:
  SamplingSet() = default;
  // Throws ConfigError on unsorted, negative or off-grid times.
  SamplingSet(std::vector<double> times, double dt);
  static SamplingSet FromSteps(std::vector<long> steps, double dt);

  const std::vector<double>& times() const { return times_; }
  const std::vector<long>& steps() const { return steps_; }
  double dt() const { return dt_; }
  size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  double last() const { return times_.back(); }
  bool Contains(double t) const;

  // Smallest sampling time >= t. DomainError beyond the last time.
  double KOf(double t) const;
  // sup over t in [0, last] of KOf(t) - t: the largest gap, counting the gap
  // from 0 to the first sample.
  double DeltaBar() const;

 private:
  double dt_ = 1.0;
  std::vector<double> times_;
  std::vector<long> steps_;
};

struct SamplerSpec {
  enum class Kind { kEquidistant, kExplicit, kEventTriggered };
  Kind kind = Kind::kEquidistant;
  double period = 0.1;                 // kEquidistant
  std::vector<double> times;           // kExplicit
  double threshold = std::numeric_limits<double>::infinity();  // kEventTriggered
  double min_gap = 0.0;
  double max_gap = 0.0;

  static SamplerSpec Equidistant(double period);
  static SamplerSpec Explicit(std::vector<double> times);
  static SamplerSpec EventTriggered(double threshold, double min_gap, double max_gap);
};

SamplerSpec SamplerSpecFromJson(const nlohmann::json& j);
nlohmann::json SamplerSpecToJson(const SamplerSpec& spec);

// Static sampling sets: equidistant -> {period, 2 period, ...} <= t_sim,
// explicit -> validated copy, event-triggered -> only when the trigger can
// never fire (threshold = inf), giving samples every max_gap. A finite
// threshold needs measurements; see NextEventSampleStep.
SamplingSet MakeSampler(const SamplerSpec& spec, double t_sim, double dt);

// Checks the spec itself: grid alignment and min_gap <= max_gap. For event
// triggering also requires max_gap < horizon (HorizonError otherwise), since
// the realized delta_bar can reach max_gap.
void ValidateSamplerSpec(const SamplerSpec& spec, double dt, double horizon);

// Next sampling step for the event trigger: integrates |y - y_pred|_R^2 dt
// from `last_step`, with y_pred from the nominal (w = 0) propagation of
// `x_last`, and fires at the first step where the energy exceeds the
// threshold, clamped to [min_gap, max_gap] after the last sample and to
// `final_step`. Returns the step index.
long NextEventSampleStep(const SamplerSpec& spec, const SystemModel& model,
                         const Vector& x_last, long last_step, long final_step,
                         const PiecewiseSignal& u, const PiecewiseSignal& y,
                         const Matrix& R, double dt);

// Documented 50-sample schedule on [0, 5] with dt = 0.01: gaps grow from
// 0.02 to 0.19 (denser early), last sample at 5.0, delta_bar = 0.19.
std::vector<double> BenchmarkSchedule();

}  // namespace mhect

#endif  // MHECT_SAMPLING_H_
