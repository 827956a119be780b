#include "mhect/integrate.h"

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

#include "mhect/errors.h"
#include "mhect/grid.h"

namespace mhect {

const Vector& Trajectory::At(double t) const {
  if (!IsGridMultiple(t - t0, dt)) {
    throw DomainError("trajectory query off grid at t=" + std::to_string(t));
  }
  const long k = std::lround((t - t0) / dt);
  if (k < 0 || k >= size()) {
    throw DomainError("trajectory query outside domain at t=" + std::to_string(t));
  }
  return states[k];
}

Vector Rk4Step(const SystemModel& model, const Vector& x, const Vector& u,
               const Vector& w, double dt, StepJacobians* jac) {
  const double half = 0.5 * dt;
  const Vector k1 = model.f(x, u, w);
  const Vector xa = x + half * k1;
  const Vector k2 = model.f(xa, u, w);
  const Vector xb = x + half * k2;
  const Vector k3 = model.f(xb, u, w);
  const Vector xc = x + dt * k3;
  const Vector k4 = model.f(xc, u, w);
  if (jac != nullptr) {
    const int n = model.n();
    const Matrix eye = Matrix::Identity(n, n);
    const Matrix a1 = model.JacFx(x, u, w), b1 = model.JacFw(x, u, w);
    const Matrix a2 = model.JacFx(xa, u, w), b2 = model.JacFw(xa, u, w);
    const Matrix a3 = model.JacFx(xb, u, w), b3 = model.JacFw(xb, u, w);
    const Matrix a4 = model.JacFx(xc, u, w), b4 = model.JacFw(xc, u, w);
    const Matrix k1x = a1;
    const Matrix k2x = a2 * (eye + half * k1x);
    const Matrix k3x = a3 * (eye + half * k2x);
    const Matrix k4x = a4 * (eye + dt * k3x);
    const Matrix k1w = b1;
    const Matrix k2w = a2 * (half * k1w) + b2;
    const Matrix k3w = a3 * (half * k2w) + b3;
    const Matrix k4w = a4 * (dt * k3w) + b4;
    jac->dx = eye + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    jac->dw = (dt / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
  }
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

PiecewiseSignal NoInput(double t0, double dt, long pieces) {
  return PiecewiseSignal::Zero(0, t0, dt, pieces);
}

Trajectory Integrate(const SystemModel& model, const Vector& chi,
                     const PiecewiseSignal& u, const PiecewiseSignal& w,
                     double t0, double t1, double dt) {
  if (chi.size() != model.n()) throw ConfigError("integrate: chi dimension");
  const long steps = GridSteps(t1 - t0, dt, "integration span");
  if (steps < 0) throw ConfigError("integrate: t1 < t0");
  Trajectory traj{t0, dt, {}};
  traj.states.reserve(steps + 1);
  traj.states.push_back(chi);
  if (steps == 0) return traj;

  if (w.dim() != model.q()) throw ConfigError("integrate: w dimension");
  const bool has_u = model.m() > 0;
  if (has_u && u.dim() != model.m()) throw ConfigError("integrate: u dimension");
  GridIndexer w_index(w, t0, dt);
  if (w_index(steps - 1) >= w.size()) {
    throw ConfigError("integrate: w does not cover the integration span");
  }
  const Vector no_u(0);
  std::unique_ptr<GridIndexer> u_index;
  if (has_u) {
    u_index = std::make_unique<GridIndexer>(u, t0, dt);
    if ((*u_index)(steps - 1) >= u.size()) {
      throw ConfigError("integrate: u does not cover the integration span");
    }
  }
  for (long k = 0; k < steps; ++k) {
    const Vector& uk = has_u ? u.piece((*u_index)(k)) : no_u;
    Vector next = Rk4Step(model, traj.states.back(), uk, w.piece(w_index(k)), dt);
    if (!next.allFinite()) {
      const double t = t0 + static_cast<double>(k + 1) * dt;
      throw DivergenceError("integrate: non-finite state at t=" + std::to_string(t), t);
    }
    traj.states.push_back(std::move(next));
  }
  return traj;
}

PiecewiseSignal OutputAlong(const SystemModel& model, const Trajectory& traj,
                            const PiecewiseSignal& u, const PiecewiseSignal& w) {
  const long steps = traj.size() - 1;
  std::vector<Vector> ys;
  ys.reserve(std::max(0L, steps));
  if (steps > 0) {
    GridIndexer w_index(w, traj.t0, traj.dt);
    if (w_index(steps - 1) >= w.size()) {
      throw ConfigError("output: w does not cover the trajectory");
    }
    const bool has_u = model.m() > 0;
    std::unique_ptr<GridIndexer> u_index;
    if (has_u) u_index = std::make_unique<GridIndexer>(u, traj.t0, traj.dt);
    const Vector no_u(0);
    for (long k = 0; k < steps; ++k) {
      const Vector& uk = has_u ? u.piece((*u_index)(k)) : no_u;
      ys.push_back(model.h(traj.states[k], uk, w.piece(w_index(k))));
    }
  }
  PiecewiseSignal y(traj.t0, traj.dt, std::move(ys));
  return y.size() > 0 ? y : PiecewiseSignal::Zero(model.p(), traj.t0, traj.dt, 0);
}

void WriteTrajectoryCsv(std::ostream& os, const Trajectory& traj,
                        const std::string& prefix) {
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states[0].size());
  os << "t";
  for (int i = 1; i <= n; ++i) os << ',' << prefix << i;
  os << '\n';
  char buf[64];
  for (long k = 0; k < traj.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.t0 + static_cast<double>(k) * traj.dt);
    os << buf;
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", traj.states[k](i));
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace mhect
