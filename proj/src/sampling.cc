#include "mhect/sampling.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "mhect/errors.h"
#include "mhect/grid.h"
#include "mhect/integrate.h"

namespace mhect {

using nlohmann::json;

SamplingSet::SamplingSet(std::vector<double> times, double dt)
    : dt_(dt), times_(std::move(times)) {
  steps_.reserve(times_.size());
  for (size_t i = 0; i < times_.size(); ++i) {
    if (!(times_[i] >= 0.0)) throw ConfigError("sampling: negative time");
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw ConfigError("sampling: times must be strictly increasing");
    }
    steps_.push_back(GridSteps(times_[i], dt, "sampling time"));
  }
}

SamplingSet SamplingSet::FromSteps(std::vector<long> steps, double dt) {
  std::vector<double> times;
  times.reserve(steps.size());
  for (long s : steps) times.push_back(static_cast<double>(s) * dt);
  return SamplingSet(std::move(times), dt);
}

bool SamplingSet::Contains(double t) const {
  if (!IsGridMultiple(t, dt_)) return false;
  return std::binary_search(steps_.begin(), steps_.end(), std::lround(t / dt_));
}

double SamplingSet::KOf(double t) const {
  const double tol = kGridTolerance * dt_;
  auto it = std::lower_bound(times_.begin(), times_.end(), t - tol);
  if (it == times_.end()) {
    throw DomainError("k(t): t=" + std::to_string(t) +
                      " is after the last sampling time");
  }
  return *it;
}

double SamplingSet::DeltaBar() const {
  if (times_.empty()) return 0.0;
  long gap = steps_.front();
  for (size_t i = 1; i < steps_.size(); ++i) {
    gap = std::max(gap, steps_[i] - steps_[i - 1]);
  }
  return static_cast<double>(gap) * dt_;
}

SamplerSpec SamplerSpec::Equidistant(double period) {
  SamplerSpec s;
  s.kind = Kind::kEquidistant;
  s.period = period;
  return s;
}

SamplerSpec SamplerSpec::Explicit(std::vector<double> times) {
  SamplerSpec s;
  s.kind = Kind::kExplicit;
  s.times = std::move(times);
  return s;
}

SamplerSpec SamplerSpec::EventTriggered(double threshold, double min_gap,
                                        double max_gap) {
  SamplerSpec s;
  s.kind = Kind::kEventTriggered;
  s.threshold = threshold;
  s.min_gap = min_gap;
  s.max_gap = max_gap;
  return s;
}

SamplerSpec SamplerSpecFromJson(const json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "equidistant") return SamplerSpec::Equidistant(j.at("period").get<double>());
    if (type == "explicit") {
      return SamplerSpec::Explicit(j.at("times").get<std::vector<double>>());
    }
    if (type == "benchmark") return SamplerSpec::Explicit(BenchmarkSchedule());
    if (type == "event_triggered") {
      const json& th = j.at("threshold");
      const double threshold =
          th.is_string() && th.get<std::string>() == "inf"
              ? std::numeric_limits<double>::infinity()
              : th.get<double>();
      return SamplerSpec::EventTriggered(threshold, j.at("min_gap").get<double>(),
                                         j.at("max_gap").get<double>());
    }
    throw ConfigError("sampler: unknown type '" + type + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sampler spec: ") + e.what());
  }
}

json SamplerSpecToJson(const SamplerSpec& spec) {
  switch (spec.kind) {
    case SamplerSpec::Kind::kEquidistant:
      return {{"type", "equidistant"}, {"period", spec.period}};
    case SamplerSpec::Kind::kExplicit:
      return {{"type", "explicit"}, {"times", spec.times}};
    case SamplerSpec::Kind::kEventTriggered:
      return {{"type", "event_triggered"},
              {"threshold", std::isinf(spec.threshold) ? json("inf") : json(spec.threshold)},
              {"min_gap", spec.min_gap},
              {"max_gap", spec.max_gap}};
  }
  return {};
}

void ValidateSamplerSpec(const SamplerSpec& spec, double dt, double horizon) {
  switch (spec.kind) {
    case SamplerSpec::Kind::kEquidistant:
      if (GridSteps(spec.period, dt, "sampling period") < 1) {
        throw ConfigError("sampler: period must be positive");
      }
      break;
    case SamplerSpec::Kind::kExplicit:
      SamplingSet(spec.times, dt);
      break;
    case SamplerSpec::Kind::kEventTriggered: {
      const long lo = GridSteps(spec.min_gap, dt, "event min_gap");
      const long hi = GridSteps(spec.max_gap, dt, "event max_gap");
      if (lo < 1 || lo > hi) {
        throw ConfigError("sampler: need 0 < min_gap <= max_gap");
      }
      if (!(spec.threshold >= 0.0)) throw ConfigError("sampler: threshold < 0");
      if (!(spec.max_gap < horizon)) {
        throw HorizonError("event trigger: max_gap " + std::to_string(spec.max_gap) +
                           " allows delta_bar >= T=" + std::to_string(horizon) +
                           "; the horizon must exceed delta_bar");
      }
      break;
    }
  }
}

SamplingSet MakeSampler(const SamplerSpec& spec, double t_sim, double dt) {
  const long final_step = std::lround(std::floor(t_sim / dt + kGridTolerance));
  switch (spec.kind) {
    case SamplerSpec::Kind::kEquidistant: {
      const long period = GridSteps(spec.period, dt, "sampling period");
      if (period < 1) throw ConfigError("sampler: period must be positive");
      std::vector<long> steps;
      for (long s = period; s <= final_step; s += period) steps.push_back(s);
      return SamplingSet::FromSteps(std::move(steps), dt);
    }
    case SamplerSpec::Kind::kExplicit: {
      SamplingSet set(spec.times, dt);
      if (!set.empty() && set.steps().back() > final_step) {
        throw ConfigError("sampler: explicit time beyond t_sim");
      }
      return set;
    }
    case SamplerSpec::Kind::kEventTriggered: {
      if (!std::isinf(spec.threshold)) {
        throw ConfigError("sampler: a finite event threshold is evaluated "
                          "online during estimation");
      }
      const long gap = GridSteps(spec.max_gap, dt, "event max_gap");
      if (gap < 1) throw ConfigError("sampler: max_gap must be positive");
      std::vector<long> steps;
      for (long s = gap; s <= final_step; s += gap) steps.push_back(s);
      return SamplingSet::FromSteps(std::move(steps), dt);
    }
  }
  throw ConfigError("sampler: unknown kind");
}

long NextEventSampleStep(const SamplerSpec& spec, const SystemModel& model,
                         const Vector& x_last, long last_step, long final_step,
                         const PiecewiseSignal& u, const PiecewiseSignal& y,
                         const Matrix& R, double dt) {
  const long lo = GridSteps(spec.min_gap, dt, "event min_gap");
  const long hi = GridSteps(spec.max_gap, dt, "event max_gap");
  const long cap = std::min(last_step + hi, final_step);
  if (std::isinf(spec.threshold)) return cap;
  GridIndexer y_index(y, 0.0, dt);
  std::unique_ptr<GridIndexer> u_index;
  if (model.m() > 0) u_index = std::make_unique<GridIndexer>(u, 0.0, dt);
  const Vector w0 = Vector::Zero(model.q());
  const Vector no_u(0);
  Vector x = x_last;
  double energy = 0.0;
  for (long k = last_step; k < cap; ++k) {
    const Vector& uk = u_index ? u.piece((*u_index)(k)) : no_u;
    const Vector innovation = y.piece(y_index(k)) - model.h(x, uk, w0);
    energy += dt * WeightedSquaredNorm(innovation, R);
    x = Rk4Step(model, x, uk, w0, dt);
    if (!x.allFinite()) return std::max(std::min(k + 1, cap), std::min(last_step + lo, cap));
    const long candidate = k + 1;
    if (energy > spec.threshold && candidate - last_step >= lo) return candidate;
  }
  return cap;
}

std::vector<double> BenchmarkSchedule() {
  // Gap i (in 0.01 steps) = round(2 + 17 (i/49)^1.13), i = 0..49; sums to 500.
  static const int kGaps[50] = {2,  2,  2,  3,  3,  3,  4,  4,  4,  5,
                                5,  5,  5,  6,  6,  6,  7,  7,  7,  8,
                                8,  9,  9,  9,  10, 10, 10, 11, 11, 11,
                                12, 12, 13, 13, 13, 14, 14, 14, 15, 15,
                                16, 16, 16, 17, 17, 17, 18, 18, 19, 19};
  std::vector<double> times;
  long step = 0;
  for (int g : kGaps) {
    step += g;
    times.push_back(static_cast<double>(step) * 0.01);
  }
  return times;
}

}  // namespace mhect
