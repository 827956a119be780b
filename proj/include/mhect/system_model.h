#ifndef MHECT_SYSTEM_MODEL_H_
#define MHECT_SYSTEM_MODEL_H_

#include <functional>
#include <random>
#include <string>

#include "mhect/box.h"
#include "mhect/linalg.h"

namespace mhect {

// x' = f(x, u, w), y = h(x, u, w) with box constraint sets. Immutable after
// construction; all members are pure functions.
//
// Solutions are assumed to exist globally and be unique; this is not checked.
class SystemModel {
 public:
  using VectorField =
      std::function<Vector(const Vector& x, const Vector& u, const Vector& w)>;
  using JacobianField =
      std::function<Matrix(const Vector& x, const Vector& u, const Vector& w)>;

  struct Definition {
    std::string name;
    int state_dim = 0;
    int input_dim = 0;
    int dist_dim = 0;
    int output_dim = 0;
    VectorField f;
    VectorField h;
    // Optional analytic Jacobians; central differences are used when empty.
    JacobianField jac_f_x, jac_f_w, jac_h_x, jac_h_w;
    Box X, U, W, Y;
    // Caller asserts h is affine in (x, w).
    bool output_affine = false;
  };

  explicit SystemModel(Definition def);

  const std::string& name() const { return def_.name; }
  int n() const { return def_.state_dim; }
  int m() const { return def_.input_dim; }
  int q() const { return def_.dist_dim; }
  int p() const { return def_.output_dim; }
  const Box& X() const { return def_.X; }
  const Box& U() const { return def_.U; }
  const Box& W() const { return def_.W; }
  const Box& Y() const { return def_.Y; }
  bool output_affine() const { return def_.output_affine; }
  bool has_analytic_jacobians() const;

  Vector f(const Vector& x, const Vector& u, const Vector& w) const;
  Vector h(const Vector& x, const Vector& u, const Vector& w) const;
  Matrix JacFx(const Vector& x, const Vector& u, const Vector& w) const;
  Matrix JacFw(const Vector& x, const Vector& u, const Vector& w) const;
  Matrix JacHx(const Vector& x, const Vector& u, const Vector& w) const;
  Matrix JacHw(const Vector& x, const Vector& u, const Vector& w) const;

 private:
  Definition def_;
};

// Central-difference Jacobian of g with respect to argument `wrt`
// (0 = x, 1 = u, 2 = w), step 1e-6 * max(1, |z_i|).
Matrix FiniteDifferenceJacobian(const SystemModel::VectorField& g,
                                const Vector& x, const Vector& u,
                                const Vector& w, int wrt);

// Worst relative mismatch between the model's f/h Jacobians and central
// differences over `samples` random points of X x U x W (bounded boxes only).
double MaxJacobianMismatch(const SystemModel& model, int samples,
                           std::mt19937_64& rng);

// Largest deviation of h(x+dx, u, w+dw) - h(x, u, w) from its linear part
// over random points and increments. Zero (to rounding) iff h is affine.
double OutputAffinityDefect(const SystemModel& model, int samples,
                            std::mt19937_64& rng);

// 2A <-> B batch reactor: x1' = -2 k1 x1^2 + 2 k2 x2 + w1,
// x2' = k1 x1^2 - k2 x2 + w2, y = x1 + x2 + w3, k1 = 0.16, k2 = 0.0064,
// X = [0.1, 5]^2, W = [-0.1, 0.1]^3.
SystemModel BatchReactor();

// Built-in model by name. Throws ConfigError for unknown names.
SystemModel BuiltinModel(const std::string& name);

}  // namespace mhect

#endif  // MHECT_SYSTEM_MODEL_H_
