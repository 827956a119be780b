#include "mhect/box.h"

#include <cmath>
#include <limits>

#include "mhect/errors.h"

namespace mhect {

Box::Box(Vector lower, Vector upper) : lo(std::move(lower)), hi(std::move(upper)) {
  if (lo.size() != hi.size()) throw ConfigError("box: bound size mismatch");
  for (int i = 0; i < lo.size(); ++i) {
    if (std::isnan(lo(i)) || std::isnan(hi(i)) || lo(i) > hi(i)) {
      throw ConfigError("box: empty along axis " + std::to_string(i));
    }
  }
}

Box Box::Unbounded(int dim) {
  const double inf = std::numeric_limits<double>::infinity();
  return Box(Vector::Constant(dim, -inf), Vector::Constant(dim, inf));
}

Box Box::Symmetric(const Vector& bound) { return Box(-bound, bound); }

bool Box::IsBounded() const {
  return lo.allFinite() && hi.allFinite();
}

bool Box::Contains(const Vector& z, double tol) const {
  if (z.size() != lo.size()) return false;
  for (int i = 0; i < z.size(); ++i) {
    if (!(z(i) >= lo(i) - tol && z(i) <= hi(i) + tol)) return false;
  }
  return true;
}

bool Box::ContainsBox(const Box& other) const {
  if (other.dim() != dim()) return false;
  return (other.lo.array() >= lo.array()).all() &&
         (other.hi.array() <= hi.array()).all();
}

Vector Box::Project(const Vector& z) const {
  return z.cwiseMax(lo).cwiseMin(hi);
}

Vector Box::Violation(const Vector& z) const {
  Vector v = Vector::Zero(z.size());
  for (int i = 0; i < z.size(); ++i) {
    if (z(i) > hi(i)) {
      v(i) = z(i) - hi(i);
    } else if (z(i) < lo(i)) {
      v(i) = z(i) - lo(i);
    }
  }
  return v;
}

std::vector<Vector> Box::Vertices() const {
  std::vector<Vector> out(1, Vector(dim()));
  for (int i = 0; i < dim(); ++i) {
    std::vector<Vector> next;
    next.reserve(out.size() * 2);
    for (const Vector& partial : out) {
      Vector a = partial;
      a(i) = lo(i);
      next.push_back(a);
      if (hi(i) != lo(i)) {
        Vector b = partial;
        b(i) = hi(i);
        next.push_back(b);
      }
    }
    out = std::move(next);
  }
  return out;
}

Vector Box::Center() const { return 0.5 * (lo + hi); }

}  // namespace mhect
