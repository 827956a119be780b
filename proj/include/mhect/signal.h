#ifndef MHECT_SIGNAL_H_
#define MHECT_SIGNAL_H_

#include <vector>

#include "mhect/linalg.h"

namespace mhect {

// Right-continuous piecewise-constant signal. values[k] holds on
// [t0 + k dt, t0 + (k+1) dt).
class PiecewiseSignal {
 public:
  PiecewiseSignal() = default;
  PiecewiseSignal(double t0, double dt, std::vector<Vector> values);

  static PiecewiseSignal Constant(const Vector& value, double t0, double dt,
                                  long pieces);
  static PiecewiseSignal Zero(int dim, double t0, double dt, long pieces);

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  double end_time() const { return t0_ + dt_ * static_cast<double>(size()); }
  long size() const { return static_cast<long>(values_.size()); }
  int dim() const { return dim_; }
  const std::vector<Vector>& values() const { return values_; }
  const Vector& piece(long k) const { return values_.at(k); }
  Vector& piece(long k) { return values_.at(k); }

  // Index of the piece covering t. Breakpoints snap to the right piece.
  // Throws DomainError outside [t0, end_time).
  long PieceIndex(double t) const;
  const Vector& Eval(double t) const { return values_[PieceIndex(t)]; }

  // Samples this signal on the grid t_begin + k*dt_out, k < pieces. The grid
  // must be a refinement of this signal's grid and lie inside its domain.
  PiecewiseSignal Resample(double t_begin, double dt_out, long pieces) const;

 private:
  double t0_ = 0.0;
  double dt_ = 1.0;
  int dim_ = 0;
  std::vector<Vector> values_;
};

// Piece index of `signal` that covers grid step k of a grid starting at
// `grid_t0` with step `grid_dt`. Integer arithmetic only; throws ConfigError
// if the grids are not nested.
class GridIndexer {
 public:
  GridIndexer(const PiecewiseSignal& signal, double grid_t0, double grid_dt);
  long operator()(long k) const { return (offset_ + k) / ratio_; }

 private:
  long offset_ = 0;
  long ratio_ = 1;
};

}  // namespace mhect

#endif  // MHECT_SIGNAL_H_
