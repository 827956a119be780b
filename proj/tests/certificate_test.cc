#include <cmath>
#include <cstdio>
#include <string>

#include <doctest.h>

#include "mhect/certificate.h"
#include "mhect/errors.h"
#include "mhect/scenario.h"
#include "test_models.h"

using namespace mhect;

namespace {

Matrix Scalar(double v) { return Matrix::Constant(1, 1, v); }

CertificateDomain DomainOf(const SystemModel& m) { return {m.X(), m.U(), m.W()}; }

Matrix ReactorQ() {
  return Vector((Vector(3) << 1000, 1000, 100).finished()).asDiagonal();
}

DetectabilityCertificate Identity2(double p1_scale, double p2_scale) {
  DetectabilityCertificate c;
  c.P1 = p1_scale * Matrix::Identity(2, 2);
  c.P2 = p2_scale * Matrix::Identity(2, 2);
  c.Q = Matrix::Identity(3, 3);
  c.R = Scalar(1.0);
  c.lambda = 0.4;
  c.kappa = -std::log(0.4);
  return c;
}

}  // namespace

TEST_SUITE("certify") {

TEST_CASE("scalar LMI entries") {
  const SystemModel m = testing::ScalarLinear(-1.0, 1.0, 0.0);
  const Matrix lmi = LmiMatrix(m, Scalar(1), Scalar(1), Scalar(1), 1.0, Vector::Zero(1),
                               Vector(0), Vector::Zero(1));
  Matrix expected(2, 2);
  expected << -2, 1, 1, -1;
  CHECK((lmi - expected).norm() < 1e-12);
  CHECK(MaxEigenvalue(lmi) == doctest::Approx((-3 + std::sqrt(5.0)) / 2));

  const Matrix hot = LmiMatrix(m, Scalar(1), Scalar(1), Scalar(1), 3.0, Vector::Zero(1),
                               Vector(0), Vector::Zero(1));
  CHECK(MaxEigenvalue(hot) == doctest::Approx((-1 + std::sqrt(5.0)) / 2));

  double prev = -1e300;
  for (double kappa = 0.0; kappa <= 4.0; kappa += 0.25) {
    const double e = MaxEigenvalue(LmiMatrix(m, Scalar(1), Scalar(1), Scalar(1), kappa,
                                             Vector::Zero(1), Vector(0), Vector::Zero(1)));
    CHECK(e >= prev);
    prev = e;
  }
}

TEST_CASE("no disturbance channel decouples the blocks") {
  const SystemModel m = testing::ScalarLinear(-1.0, 0.0, 0.0);
  const Matrix lmi = LmiMatrix(m, Scalar(2), Scalar(3), Scalar(1), 0.5, Vector::Zero(1),
                               Vector(0), Vector::Zero(1));
  CHECK(lmi(0, 1) == 0.0);
  CHECK(lmi(1, 0) == 0.0);
  CHECK(lmi(1, 1) == -3.0);
  CHECK(lmi(0, 0) == doctest::Approx(-4.0 + 1.0 - 1.0));
}

TEST_CASE("scalar verification follows kappa") {
  const SystemModel m = testing::ScalarLinear(-1.0, 1.0, 0.0);
  auto cert = DetectabilityCertificate::FromLmi(Scalar(1), Scalar(1), Scalar(1),
                                                std::exp(-1.0), DomainOf(m));
  CHECK(VerifyCertificate(m, cert, GridSpec::Uniform(2, 3)).passed);
  cert = DetectabilityCertificate::FromLmi(Scalar(1), Scalar(1), Scalar(1), std::exp(-3.0),
                                           DomainOf(m));
  const VerificationReport r = VerifyCertificate(m, cert, GridSpec::Uniform(2, 3));
  CHECK_FALSE(r.passed);
  CHECK(r.max_eigenvalue == doctest::Approx((-1 + std::sqrt(5.0)) / 2));
  CHECK(r.points == 9);
}

TEST_CASE("synthesis on a stable scalar system") {
  const SystemModel m = testing::ScalarLinear(-1.0, 1.0, 0.0);
  const DetectabilityCertificate c = SynthesizeCertificate(
      m, 0.5, SynthesisMode::FixedQR(Scalar(1), Scalar(1)), GridSpec::Vertices());
  CHECK(c.verification.passed);
  CHECK(c.verification.max_eigenvalue <= -1e-8);
  CHECK(VerifyCertificate(m, c, GridSpec::Uniform(2, 5)).passed);
  CHECK(c.P1 == c.P2);
  CHECK(c.kappa == doctest::Approx(std::log(2.0)));
  const DetectabilityCertificate j =
      SynthesizeCertificate(m, 0.5, SynthesisMode::Joint(), GridSpec::Vertices());
  CHECK(j.verification.passed);
}

TEST_CASE("synthesis is infeasible when nothing is observable") {
  const SystemModel m = testing::UnstableBlind();
  try {
    SynthesizeCertificate(m, 0.5, SynthesisMode::FixedQR(Scalar(1), Scalar(1)),
                          GridSpec::Vertices());
    FAIL("expected SynthesisInfeasible");
  } catch (const SynthesisInfeasible& e) {
    CHECK(e.report().best_slack > 0.0);
    CHECK(e.exit_code() == 3);
  }
  CHECK_THROWS_AS(SynthesizeCertificate(m, 0.5, SynthesisMode::Joint(), GridSpec::Vertices()),
                  InfeasibleError);
}

TEST_CASE("published reactor matrix misses the LMI by rounding") {
  const SystemModel m = BatchReactor();
  const DetectabilityCertificate pub = PublishedBatchReactorCertificate(m);
  const VerificationReport r = VerifyCertificate(m, pub, GridSpec::Vertices());
  CHECK_FALSE(r.passed);
  CHECK(r.max_eigenvalue == doctest::Approx(6.09e-5).epsilon(0.01));
  CHECK(r.worst.x(0) == doctest::Approx(0.1));
  const VerificationReport dense = VerifyCertificate(m, pub, GridSpec::Uniform(5, 3));
  CHECK(dense.max_eigenvalue <= r.max_eigenvalue + 1e-12);
}

TEST_CASE("reactor synthesis with the benchmark weights") {
  const SystemModel m = BatchReactor();
  const DetectabilityCertificate c = SynthesizeCertificate(
      m, 0.4, SynthesisMode::FixedQR(ReactorQ(), Scalar(100)), GridSpec::Vertices());
  CHECK(c.verification.passed);
  CHECK(VerifyCertificate(m, c, GridSpec::Uniform(5, 4)).passed);
  CHECK(IsSymmetricPositiveDefinite(c.P1));
  CHECK(MinHorizon(c, 0.19) == doctest::Approx(1.7030).epsilon(1e-4));
  CHECK(ContractionRate(c, 2.0, 0.19) == doctest::Approx(0.8604).epsilon(1e-4));
}

TEST_CASE("scaling") {
  const SystemModel m = testing::ScalarLinear(-1.0, 1.0, 0.0);
  const Matrix one = Scalar(1);
  struct Case {
    double p, q, r, k;
  };
  for (const Case& c : {Case{0.5, 0.5, 0.25, 2.0}, Case{1.0, 0.5, 1.0, 1.0},
                        Case{4.0, 1.0, 2.0, 0.25}}) {
    auto cert = DetectabilityCertificate::FromLmi(Scalar(c.p), Scalar(c.q), Scalar(c.r), 0.5,
                                                  DomainOf(m));
    double k = 0.0;
    const DetectabilityCertificate s = ScaleCertificate(cert, one, one, one, &k);
    CHECK(k == doctest::Approx(c.k));
    CHECK(s.P1(0, 0) == doctest::Approx(c.k * c.p));
    CHECK(s.P2 == one);
    CHECK(s.Q == one);
    CHECK(s.R == one);
    CHECK(s.witness.P(0, 0) == doctest::Approx(c.k * c.p));
    CHECK(s.lambda == cert.lambda);
    CHECK_NOTHROW(s.Validate());
  }
}

TEST_CASE("minimal horizon and contraction rate") {
  const DetectabilityCertificate c = Identity2(1.0, 1.0);
  const double base = -std::log(4.0) / std::log(0.4);
  CHECK(MinHorizon(c, 0.0) == doctest::Approx(1.5130).epsilon(1e-4));
  CHECK(MinHorizon(c, 0.19) == doctest::Approx(1.7030).epsilon(1e-4));
  CHECK(MinHorizon(c, 0.19) - MinHorizon(c, 0.0) == doctest::Approx(0.19));
  CHECK(MinHorizon(Identity2(1.0, 2.0), 0.0) ==
        doctest::Approx(-std::log(8.0) / std::log(0.4)));
  CHECK(MinHorizon(c, 0.0) == doctest::Approx(base));

  CHECK(ContractionRate(c, 2.0, 0.19) == doctest::Approx(0.8604).epsilon(1e-4));
  CHECK(ContractionRate(c, 10.0, 0.19) < ContractionRate(c, 2.0, 0.19));
  CHECK_THROWS_AS(ContractionRate(c, MinHorizon(c, 0.19), 0.19), HorizonError);
  CHECK_NOTHROW(ContractionRate(c, 1.7030, 0.19));
  CHECK_THROWS_AS(ContractionRate(c, 0.1, 0.19), HorizonError);

  for (double t : {1.8, 2.0, 3.5, 10.0}) {
    const double rho = ContractionRate(c, t, 0.19);
    CHECK(std::pow(rho, t - 0.19) ==
          doctest::Approx(4.0 * std::pow(0.4, t - 0.19)).epsilon(1e-12));
  }
}

TEST_CASE("validation rejects inconsistent certificates") {
  DetectabilityCertificate c = Identity2(2.0, 1.0);
  CHECK_THROWS_AS(c.Validate(), ConfigError);
  c = Identity2(1.0, 1.0);
  CHECK_NOTHROW(c.Validate());
  c.kappa = 1.0;
  CHECK_THROWS_AS(c.Validate(), ConfigError);
  c = Identity2(1.0, 1.0);
  c.lambda = 1.5;
  c.kappa = -std::log(1.5);
  CHECK_THROWS_AS(c.Validate(), ConfigError);
}

TEST_CASE("JSON round trip") {
  const SystemModel m = BatchReactor();
  const DetectabilityCertificate c = SynthesizeCertificate(
      m, 0.4, SynthesisMode::FixedQR(ReactorQ(), Scalar(100)), GridSpec::Vertices());
  const DetectabilityCertificate back = CertificateFromJson(CertificateToJson(c));
  CHECK(back.P1 == c.P1);
  CHECK(back.P2 == c.P2);
  CHECK(back.Q == c.Q);
  CHECK(back.R == c.R);
  CHECK(back.lambda == c.lambda);
  CHECK(back.witness.P == c.witness.P);
  CHECK(back.domain.X.lo == c.domain.X.lo);
  CHECK(back.verification.passed == c.verification.passed);
  const std::string path = "certificate_test_roundtrip.json";
  SaveCertificate(c, path);
  const DetectabilityCertificate loaded = LoadCertificate(path);
  CHECK(loaded.P1 == c.P1);
  std::remove(path.c_str());
  CHECK_THROWS_AS(LoadCertificate("does_not_exist.json"), ConfigError);
  CHECK_THROWS_AS(MatrixFromJson(nlohmann::json::parse("[[1,2],[3]]")), ConfigError);
}

}  // TEST_SUITE
