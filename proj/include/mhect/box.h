#ifndef MHECT_BOX_H_
#define MHECT_BOX_H_

#include <vector>

#include "mhect/linalg.h"

namespace mhect {

// Axis-aligned box {z : lo <= z <= hi}. Infinite bounds are allowed.
struct Box {
  Vector lo;
  Vector hi;

  Box() = default;
  Box(Vector lower, Vector upper);

  static Box Unbounded(int dim);
  static Box Symmetric(const Vector& bound);

  int dim() const { return static_cast<int>(lo.size()); }
  bool IsBounded() const;
  bool Contains(const Vector& z, double tol = 0.0) const;
  bool ContainsBox(const Box& other) const;
  Vector Project(const Vector& z) const;
  // Signed distance outside the box per coordinate: z - hi above, z - lo
  // below, 0 inside.
  Vector Violation(const Vector& z) const;
  // All 2^dim corners; degenerate axes (lo == hi) contribute one value.
  std::vector<Vector> Vertices() const;
  Vector Center() const;
};

}  // namespace mhect

#endif  // MHECT_BOX_H_
