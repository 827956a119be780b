#include "mhect/grid.h"

#include <cmath>
#include <string>

#include "mhect/errors.h"

namespace mhect {

bool IsGridMultiple(double span, double dt) {
  if (!(dt > 0.0) || !std::isfinite(span)) return false;
  const double ratio = span / dt;
  const double rounded = std::round(ratio);
  return std::abs(ratio - rounded) <= kGridTolerance * std::max(1.0, rounded);
}

long GridSteps(double span, double dt, const char* what) {
  if (!(dt > 0.0)) {
    throw ConfigError(std::string(what) + ": step must be positive");
  }
  if (!IsGridMultiple(span, dt)) {
    throw ConfigError(std::string(what) + ": " + std::to_string(span) +
                      " is not an integer multiple of dt=" +
                      std::to_string(dt));
  }
  return std::lround(span / dt);
}

}  // namespace mhect
