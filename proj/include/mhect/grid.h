#ifndef MHECT_GRID_H_
#define MHECT_GRID_H_

namespace mhect {

// Relative tolerance for "t is an integer multiple of dt" checks.
inline constexpr double kGridTolerance = 1e-9;

// Number of dt steps in `span`. Throws ConfigError unless span/dt is an
// integer within kGridTolerance (relative to the step count, floor 1).
long GridSteps(double span, double dt, const char* what);

// True if span/dt is an integer within kGridTolerance.
bool IsGridMultiple(double span, double dt);

}  // namespace mhect

#endif  // MHECT_GRID_H_
