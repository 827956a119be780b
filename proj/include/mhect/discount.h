#ifndef MHECT_DISCOUNT_H_
#define MHECT_DISCOUNT_H_

#include <functional>
#include <vector>

#include "mhect/signal.h"

namespace mhect {

// Closed-form integral of rate^(end - tau) over [begin, stop], rate in (0, 1].
// Equals (rate^(end-stop) - rate^(end-begin)) / (-ln rate); reduces to
// stop - begin at rate = 1.
double DiscountWeight(double rate, double end, double begin, double stop);

// Weights of the n pieces [j dt, (j+1) dt) of a window [0, n dt] discounted
// toward its right end.
std::vector<double> DiscountWeights(double rate, double dt, long n);

// Integral of rate^(end - tau) * g(s(tau)) over [begin, stop] for a
// piecewise-constant signal s covering that interval; pieces partially inside
// the interval contribute their overlap.
double DiscountedIntegral(double rate, double end, double begin, double stop,
                          const PiecewiseSignal& s,
                          const std::function<double(const Vector&)>& g);

}  // namespace mhect

#endif  // MHECT_DISCOUNT_H_
