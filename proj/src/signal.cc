#include "mhect/signal.h"

#include <cmath>
#include <string>

#include "mhect/errors.h"
#include "mhect/grid.h"

namespace mhect {

PiecewiseSignal::PiecewiseSignal(double t0, double dt, std::vector<Vector> values)
    : t0_(t0), dt_(dt), values_(std::move(values)) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError("signal: dt must be positive and finite");
  }
  dim_ = values_.empty() ? 0 : static_cast<int>(values_.front().size());
  for (const Vector& v : values_) {
    if (v.size() != dim_) throw ConfigError("signal: ragged values");
  }
}

PiecewiseSignal PiecewiseSignal::Constant(const Vector& value, double t0,
                                          double dt, long pieces) {
  PiecewiseSignal s(t0, dt, std::vector<Vector>(pieces, value));
  s.dim_ = static_cast<int>(value.size());
  return s;
}

PiecewiseSignal PiecewiseSignal::Zero(int dim, double t0, double dt,
                                      long pieces) {
  return Constant(Vector::Zero(dim), t0, dt, pieces);
}

long PiecewiseSignal::PieceIndex(double t) const {
  const double s = (t - t0_) / dt_;
  // Snap values within rounding of a breakpoint to that breakpoint.
  const double nearest = std::round(s);
  const double k = std::abs(s - nearest) <= kGridTolerance * std::max(1.0, std::abs(nearest))
                       ? nearest
                       : std::floor(s);
  if (!(k >= 0.0) || k >= static_cast<double>(size())) {
    throw DomainError("signal: t=" + std::to_string(t) + " outside [" +
                      std::to_string(t0_) + ", " + std::to_string(end_time()) +
                      ")");
  }
  return static_cast<long>(k);
}

PiecewiseSignal PiecewiseSignal::Resample(double t_begin, double dt_out,
                                          long pieces) const {
  std::vector<Vector> out;
  out.reserve(pieces);
  if (pieces > 0) {
    GridIndexer index(*this, t_begin, dt_out);
    if (index(pieces - 1) >= size()) {
      throw DomainError("signal: resample window exceeds the signal domain");
    }
    for (long k = 0; k < pieces; ++k) out.push_back(values_[index(k)]);
  }
  PiecewiseSignal s(t_begin, dt_out, std::move(out));
  s.dim_ = dim_;
  return s;
}

GridIndexer::GridIndexer(const PiecewiseSignal& signal, double grid_t0,
                         double grid_dt) {
  ratio_ = GridSteps(signal.dt(), grid_dt, "signal step vs integration step");
  if (ratio_ < 1) throw ConfigError("signal step finer than integration step");
  offset_ = GridSteps(grid_t0 - signal.t0(), grid_dt, "signal start offset");
  if (offset_ < 0) throw DomainError("grid starts before the signal");
}

}  // namespace mhect
