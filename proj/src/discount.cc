#include "mhect/discount.h"

#include <algorithm>
#include <cmath>

#include "mhect/errors.h"

namespace mhect {

double DiscountWeight(double rate, double end, double begin, double stop) {
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw ConfigError("discount rate must lie in (0, 1]");
  }
  const double kappa = -std::log(rate);
  const double width = stop - begin;
  if (kappa == 0.0) return width;
  return std::exp(-kappa * (end - stop)) * (-std::expm1(-kappa * width)) / kappa;
}

std::vector<double> DiscountWeights(double rate, double dt, long n) {
  std::vector<double> out(std::max(0L, n));
  if (n <= 0) return out;
  const double span = static_cast<double>(n) * dt;
  // Same expression for every piece so windows of equal length agree bitwise.
  for (long j = 0; j < n; ++j) {
    out[j] = DiscountWeight(rate, span, static_cast<double>(j) * dt,
                            static_cast<double>(j + 1) * dt);
  }
  return out;
}

double DiscountedIntegral(double rate, double end, double begin, double stop,
                          const PiecewiseSignal& s,
                          const std::function<double(const Vector&)>& g) {
  if (stop <= begin) return 0.0;
  const long first = s.PieceIndex(begin);
  double total = 0.0;
  for (long k = first; k < s.size(); ++k) {
    const double a = std::max(begin, s.t0() + static_cast<double>(k) * s.dt());
    const double b = std::min(stop, s.t0() + static_cast<double>(k + 1) * s.dt());
    if (b <= a) break;
    total += DiscountWeight(rate, end, a, b) * g(s.piece(k));
    if (b >= stop) return total;
  }
  // Tolerate the last piece ending within rounding of `stop`.
  if (s.end_time() < stop - 1e-9 * std::max(1.0, std::abs(stop))) {
    throw DomainError("discounted integral: signal does not cover interval");
  }
  return total;
}

}  // namespace mhect
