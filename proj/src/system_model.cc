#include "mhect/system_model.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "mhect/errors.h"

namespace mhect {

namespace {

void CheckArgs(const SystemModel& model, const Vector& x, const Vector& u,
               const Vector& w) {
  if (x.size() != model.n() || u.size() != model.m() || w.size() != model.q()) {
    throw ConfigError("model " + model.name() + ": argument dimension mismatch");
  }
}

double UniformIn(double lo, double hi, std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vector RandomInterior(const Box& box, std::mt19937_64& rng) {
  Vector z(box.dim());
  for (int i = 0; i < box.dim(); ++i) {
    const double lo = std::isfinite(box.lo(i)) ? box.lo(i) : -1.0;
    const double hi = std::isfinite(box.hi(i)) ? box.hi(i) : lo + 2.0;
    z(i) = lo == hi ? lo : UniformIn(lo, hi, rng);
  }
  return z;
}

}  // namespace

SystemModel::SystemModel(Definition def) : def_(std::move(def)) {
  if (def_.state_dim <= 0 || def_.dist_dim <= 0 || def_.output_dim <= 0 ||
      def_.input_dim < 0) {
    throw ConfigError("model " + def_.name + ": invalid dimensions");
  }
  if (!def_.f || !def_.h) {
    throw ConfigError("model " + def_.name + ": f and h are required");
  }
  if (def_.X.dim() == 0) def_.X = Box::Unbounded(def_.state_dim);
  if (def_.U.dim() == 0 && def_.input_dim > 0) {
    def_.U = Box::Unbounded(def_.input_dim);
  }
  if (def_.W.dim() == 0) def_.W = Box::Unbounded(def_.dist_dim);
  if (def_.Y.dim() == 0) def_.Y = Box::Unbounded(def_.output_dim);
  if (def_.X.dim() != def_.state_dim || def_.U.dim() != def_.input_dim ||
      def_.W.dim() != def_.dist_dim || def_.Y.dim() != def_.output_dim) {
    throw ConfigError("model " + def_.name + ": constraint set dimensions");
  }
}

bool SystemModel::has_analytic_jacobians() const {
  return def_.jac_f_x && def_.jac_f_w && def_.jac_h_x && def_.jac_h_w;
}

Vector SystemModel::f(const Vector& x, const Vector& u, const Vector& w) const {
  CheckArgs(*this, x, u, w);
  return def_.f(x, u, w);
}

Vector SystemModel::h(const Vector& x, const Vector& u, const Vector& w) const {
  CheckArgs(*this, x, u, w);
  return def_.h(x, u, w);
}

Matrix SystemModel::JacFx(const Vector& x, const Vector& u, const Vector& w) const {
  return def_.jac_f_x ? def_.jac_f_x(x, u, w)
                      : FiniteDifferenceJacobian(def_.f, x, u, w, 0);
}

Matrix SystemModel::JacFw(const Vector& x, const Vector& u, const Vector& w) const {
  return def_.jac_f_w ? def_.jac_f_w(x, u, w)
                      : FiniteDifferenceJacobian(def_.f, x, u, w, 2);
}

Matrix SystemModel::JacHx(const Vector& x, const Vector& u, const Vector& w) const {
  return def_.jac_h_x ? def_.jac_h_x(x, u, w)
                      : FiniteDifferenceJacobian(def_.h, x, u, w, 0);
}

Matrix SystemModel::JacHw(const Vector& x, const Vector& u, const Vector& w) const {
  return def_.jac_h_w ? def_.jac_h_w(x, u, w)
                      : FiniteDifferenceJacobian(def_.h, x, u, w, 2);
}

Matrix FiniteDifferenceJacobian(const SystemModel::VectorField& g,
                                const Vector& x, const Vector& u,
                                const Vector& w, int wrt) {
  const Vector g0 = g(x, u, w);
  Vector args[3] = {x, u, w};
  Vector& z = args[wrt];
  Matrix jac(g0.size(), z.size());
  for (int i = 0; i < z.size(); ++i) {
    const double zi = z(i);
    const double step = 1e-6 * std::max(1.0, std::abs(zi));
    z(i) = zi + step;
    const Vector plus = g(args[0], args[1], args[2]);
    z(i) = zi - step;
    const Vector minus = g(args[0], args[1], args[2]);
    z(i) = zi;
    jac.col(i) = (plus - minus) / (2.0 * step);
  }
  return jac;
}

double MaxJacobianMismatch(const SystemModel& model, int samples,
                           std::mt19937_64& rng) {
  SystemModel::VectorField f = [&](const Vector& x, const Vector& u,
                                   const Vector& w) { return model.f(x, u, w); };
  SystemModel::VectorField h = [&](const Vector& x, const Vector& u,
                                   const Vector& w) { return model.h(x, u, w); };
  auto rel = [](const Matrix& a, const Matrix& b) {
    if (a.size() == 0) return 0.0;
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    return (a - b).cwiseAbs().maxCoeff() / scale;
  };
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector x = RandomInterior(model.X(), rng);
    const Vector u = model.m() > 0 ? RandomInterior(model.U(), rng) : Vector();
    const Vector w = RandomInterior(model.W(), rng);
    worst = std::max(worst, rel(model.JacFx(x, u, w),
                                FiniteDifferenceJacobian(f, x, u, w, 0)));
    worst = std::max(worst, rel(model.JacFw(x, u, w),
                                FiniteDifferenceJacobian(f, x, u, w, 2)));
    worst = std::max(worst, rel(model.JacHx(x, u, w),
                                FiniteDifferenceJacobian(h, x, u, w, 0)));
    worst = std::max(worst, rel(model.JacHw(x, u, w),
                                FiniteDifferenceJacobian(h, x, u, w, 2)));
  }
  return worst;
}

double OutputAffinityDefect(const SystemModel& model, int samples,
                            std::mt19937_64& rng) {
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector x = RandomInterior(model.X(), rng);
    const Vector u = model.m() > 0 ? RandomInterior(model.U(), rng) : Vector();
    const Vector w = RandomInterior(model.W(), rng);
    Vector dx(model.n()), dw(model.q());
    for (int i = 0; i < dx.size(); ++i) dx(i) = UniformIn(-1.0, 1.0, rng);
    for (int i = 0; i < dw.size(); ++i) dw(i) = UniformIn(-1.0, 1.0, rng);
    const Vector h0 = model.h(x, u, w);
    const Vector h1 = model.h(x + dx, u, w + dw);
    const Vector lin = model.JacHx(x, u, w) * dx + model.JacHw(x, u, w) * dw;
    const double scale = std::max(1.0, h1.cwiseAbs().maxCoeff());
    worst = std::max(worst, (h1 - h0 - lin).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

SystemModel BatchReactor() {
  constexpr double k1 = 0.16;
  constexpr double k2 = 0.0064;
  SystemModel::Definition d;
  d.name = "batch_reactor";
  d.state_dim = 2;
  d.input_dim = 0;
  d.dist_dim = 3;
  d.output_dim = 1;
  d.f = [](const Vector& x, const Vector&, const Vector& w) {
    Vector dx(2);
    const double r = k1 * x(0) * x(0) - k2 * x(1);
    dx(0) = -2.0 * r + w(0);
    dx(1) = r + w(1);
    return dx;
  };
  d.h = [](const Vector& x, const Vector&, const Vector& w) {
    Vector y(1);
    y(0) = x(0) + x(1) + w(2);
    return y;
  };
  d.jac_f_x = [](const Vector& x, const Vector&, const Vector&) {
    Matrix a(2, 2);
    a << -4.0 * k1 * x(0), 2.0 * k2,
          2.0 * k1 * x(0), -k2;
    return a;
  };
  d.jac_f_w = [](const Vector&, const Vector&, const Vector&) {
    Matrix b = Matrix::Zero(2, 3);
    b(0, 0) = 1.0;
    b(1, 1) = 1.0;
    return b;
  };
  d.jac_h_x = [](const Vector&, const Vector&, const Vector&) {
    return Matrix::Ones(1, 2).eval();
  };
  d.jac_h_w = [](const Vector&, const Vector&, const Vector&) {
    Matrix dm = Matrix::Zero(1, 3);
    dm(0, 2) = 1.0;
    return dm;
  };
  d.X = Box(Vector::Constant(2, 0.1), Vector::Constant(2, 5.0));
  d.W = Box::Symmetric(Vector::Constant(3, 0.1));
  d.output_affine = true;
  return SystemModel(std::move(d));
}

SystemModel BuiltinModel(const std::string& name) {
  if (name == "batch_reactor") return BatchReactor();
  throw ConfigError("unknown built-in model '" + name + "'");
}

}  // namespace mhect
