#include <random>

#include <doctest.h>
#include <json.hpp>

#include "mhect/box.h"
#include "mhect/errors.h"
#include "mhect/polynomial_model.h"
#include "mhect/signal.h"
#include "mhect/system_model.h"

using namespace mhect;

namespace {

Vector V(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

const char* kReactorJson = R"({
  "name": "reactor_poly", "state_dim": 2, "input_dim": 0, "dist_dim": 3, "output_dim": 1,
  "f": [
    [{"coeff": -0.32, "x": [2, 0]}, {"coeff": 0.0128, "x": [0, 1]}, {"coeff": 1, "w": [1, 0, 0]}],
    [{"coeff": 0.16, "x": [2, 0]}, {"coeff": -0.0064, "x": [0, 1]}, {"coeff": 1, "w": [0, 1, 0]}]
  ],
  "h": [[{"coeff": 1, "x": [1, 0]}, {"coeff": 1, "x": [0, 1]}, {"coeff": 1, "w": [0, 0, 1]}]],
  "X": [[0.1, 5], [0.1, 5]],
  "W": [[-0.1, 0.1], [-0.1, 0.1], [-0.1, 0.1]],
  "output_affine": true
})";

}  // namespace

TEST_SUITE("sysmodel") {

TEST_CASE("batch reactor right-hand side and output") {
  const SystemModel m = BatchReactor();
  const Vector f = m.f(V({3, 1}), Vector(0), Vector::Zero(3));
  CHECK(f(0) == doctest::Approx(-2 * 0.16 * 9 + 2 * 0.0064).epsilon(1e-14));
  CHECK(f(0) == doctest::Approx(-2.8672).epsilon(1e-14));
  CHECK(f(1) == doctest::Approx(1.4336).epsilon(1e-14));
  CHECK(m.h(V({3, 1}), Vector(0), Vector::Zero(3))(0) == doctest::Approx(4.0));
  CHECK(m.h(V({3, 1}), Vector(0), V({0, 0, 0.1}))(0) == doctest::Approx(4.1));
  CHECK(m.n() == 2);
  CHECK(m.m() == 0);
  CHECK(m.q() == 3);
  CHECK(m.p() == 1);
}

TEST_CASE("batch reactor Jacobian against hand derivative and differences") {
  const SystemModel m = BatchReactor();
  const Vector x = V({3, 1}), u(0), w = Vector::Zero(3);
  Matrix expect(2, 2);
  expect << -1.92, 0.0128, 0.96, -0.0064;
  CHECK((m.JacFx(x, u, w) - expect).norm() < 1e-14);
  const Matrix fd = FiniteDifferenceJacobian(
      [&m](const Vector& a, const Vector& b, const Vector& c) { return m.f(a, b, c); }, x, u,
      w, 0);
  CHECK((fd - expect).norm() < 1e-8);
  Matrix fw = Matrix::Zero(2, 3);
  fw(0, 0) = fw(1, 1) = 1.0;
  CHECK((m.JacFw(x, u, w) - fw).norm() == 0.0);
  CHECK((m.JacHx(x, u, w) - Matrix::Ones(1, 2)).norm() == 0.0);
}

TEST_CASE("Jacobians match central differences at random points") {
  std::mt19937_64 rng(42);
  CHECK(MaxJacobianMismatch(BatchReactor(), 100, rng) < 1e-5);
  CHECK(OutputAffinityDefect(BatchReactor(), 20, rng) < 1e-12);
}

TEST_CASE("polynomial model file reproduces the builtin reactor") {
  const SystemModel poly = PolynomialModelFromJson(nlohmann::json::parse(kReactorJson));
  const SystemModel ref = BatchReactor();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0.1, 5.0), uw(-0.1, 0.1);
  for (int k = 0; k < 20; ++k) {
    const Vector x = V({ux(rng), ux(rng)});
    const Vector w = V({uw(rng), uw(rng), uw(rng)});
    CHECK((poly.f(x, Vector(0), w) - ref.f(x, Vector(0), w)).norm() < 1e-14);
    CHECK((poly.h(x, Vector(0), w) - ref.h(x, Vector(0), w)).norm() < 1e-14);
    CHECK((poly.JacFx(x, Vector(0), w) - ref.JacFx(x, Vector(0), w)).norm() < 1e-13);
  }
  CHECK(poly.X().lo(0) == 0.1);
  CHECK(poly.output_affine());
  CHECK(MaxJacobianMismatch(poly, 50, rng) < 1e-5);
}

TEST_CASE("polynomial model rejects a false affinity claim") {
  nlohmann::json j = nlohmann::json::parse(kReactorJson);
  j["h"] = nlohmann::json::parse(R"([[{"coeff": 1, "x": [2, 0]}]])");
  CHECK_THROWS_AS(PolynomialModelFromJson(j), ConfigError);
  j["output_affine"] = false;
  CHECK_NOTHROW(PolynomialModelFromJson(j));
}

TEST_CASE("model resolution and bad dimensions") {
  CHECK(ResolveModel("batch_reactor").name() == BatchReactor().name());
  CHECK_THROWS_AS(BuiltinModel("no_such_model"), ConfigError);
  const SystemModel m = BatchReactor();
  CHECK_THROWS_AS(m.f(V({1, 2, 3}), Vector(0), Vector::Zero(3)), ConfigError);
}

TEST_CASE("boxes") {
  const Box b(V({0, -1}), V({1, 1}));
  CHECK(b.Contains(V({0.5, 0})));
  CHECK_FALSE(b.Contains(V({1.5, 0})));
  CHECK((b.Project(V({2, -3})) - V({1, -1})).norm() == 0.0);
  CHECK((b.Violation(V({2, -3})) - V({1, -2})).norm() == 0.0);
  CHECK(b.Vertices().size() == 4);
  CHECK(Box::Unbounded(2).Contains(V({1e300, -1e300})));
  CHECK_THROWS_AS(Box(V({1}), V({0})), ConfigError);
}

TEST_CASE("piecewise signals are right-continuous on a half-open domain") {
  const PiecewiseSignal s(0.0, 0.01, {V({1}), V({2})});
  CHECK(s.Eval(0.01)(0) == 2.0);
  CHECK(s.Eval(0.0099)(0) == 1.0);
  CHECK_THROWS_AS(s.Eval(0.02), DomainError);
  CHECK_THROWS_AS(s.Eval(-0.001), DomainError);
  const PiecewiseSignal fine = s.Resample(0.0, 0.005, 4);
  CHECK(fine.piece(1)(0) == 1.0);
  CHECK(fine.piece(2)(0) == 2.0);
  CHECK_THROWS_AS(s.Resample(0.0, 0.003, 3), ConfigError);
}

}  // TEST_SUITE
