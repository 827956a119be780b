#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mhect/analysis.h"
#include "mhect/certificate.h"
#include "mhect/errors.h"
#include "mhect/integrate.h"
#include "mhect/mhe.h"
#include "mhect/sampling.h"
#include "mhect/scenario.h"
#include "mhect/system_model.h"

using namespace mhect;

namespace {

constexpr double kK1 = 0.16;
constexpr double kK2 = 0.0064;
constexpr double kLambda = 0.4;

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void Report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, what.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string Fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

Matrix BenchQ() { return Vector((Vector(3) << 1000, 1000, 100).finished()).asDiagonal(); }
Matrix BenchR() { return Matrix::Constant(1, 1, 100.0); }

// Reactor LMI from hand-written Jacobians; only x1 enters.
double ReactorLmiMax(const Matrix& p, const Matrix& q, const Matrix& r, double kappa,
                     double x1) {
  Matrix a(2, 2), b = Matrix::Zero(2, 3), c(1, 2), d(1, 3);
  a << -4 * kK1 * x1, 2 * kK2, 2 * kK1 * x1, -kK2;
  b(0, 0) = 1;
  b(1, 1) = 1;
  c << 1, 1;
  d << 0, 0, 1;
  Matrix m(5, 5);
  m.topLeftCorner(2, 2) = p * a + a.transpose() * p + kappa * p - c.transpose() * r * c;
  m.topRightCorner(2, 3) = p * b - c.transpose() * r * d;
  m.bottomLeftCorner(3, 2) = m.topRightCorner(2, 3).transpose();
  m.bottomRightCorner(3, 3) = -d.transpose() * r * d - q;
  const Matrix sym = 0.5 * (m + m.transpose());
  return Eigen::SelfAdjointEigenSolver<Matrix>(sym).eigenvalues().maxCoeff();
}

double ReactorLmiMaxOverX(const Matrix& p, const Matrix& q, const Matrix& r, double kappa) {
  double worst = -1e300;
  for (int i = 0; i <= 490; ++i) {
    worst = std::max(worst, ReactorLmiMax(p, q, r, kappa, 0.1 + 0.01 * i));
  }
  return worst;
}

double GenMax(const Matrix& a, const Matrix& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(a, b);
  return es.eigenvalues().maxCoeff();
}

// Independent reactor right-hand side.
Vector ReactorF(const Vector& x, const Vector& w) {
  Vector f(2);
  f << -2 * kK1 * x(0) * x(0) + 2 * kK2 * x(1) + w(0), kK1 * x(0) * x(0) - kK2 * x(1) + w(1);
  return f;
}

void Criterion1() {
  const auto t0 = Clock::now();
  const SystemModel m = BatchReactor();
  const DetectabilityCertificate pub = PublishedBatchReactorCertificate(m, kLambda);
  const VerificationReport r = VerifyCertificate(m, pub, GridSpec::Vertices());
  const double secs = Seconds(t0);
  const double oracle = ReactorLmiMaxOverX(pub.P1, BenchQ(), BenchR(), -std::log(kLambda));
  const bool pass = r.max_eigenvalue <= 1e-6 && secs < 1.0 &&
                    std::abs(oracle - r.max_eigenvalue) < 1e-9;
  Report(1, pass, "published reactor certificate verifies on the vertices",
         Fmt("max LMI eigenvalue %.3e, oracle %.3e, %.3f s", r.max_eigenvalue, oracle, secs));
}

DetectabilityCertificate Criterion2() {
  const auto t0 = Clock::now();
  const SystemModel m = BatchReactor();
  DetectabilityCertificate cert;
  try {
    cert = SynthesizeCertificate(m, kLambda, SynthesisMode::FixedQR(BenchQ(), BenchR()),
                                 GridSpec::Vertices());
  } catch (const Error& e) {
    Report(2, false, "fixed-QR synthesis", e.what());
    throw;
  }
  const double secs = Seconds(t0);
  const double oracle = ReactorLmiMaxOverX(cert.witness.P, cert.witness.Q, cert.witness.R,
                                           cert.kappa);
  const bool pd = Eigen::SelfAdjointEigenSolver<Matrix>(cert.P1).eigenvalues().minCoeff() > 0;
  const bool pass = oracle <= 1e-8 && pd && secs < 30.0 && cert.Q == BenchQ() &&
                    cert.R == BenchR();
  Report(2, pass, "fixed-QR synthesis passes the independent LMI oracle",
         Fmt("oracle max eigenvalue %.3e over 491 x1 points, %.2f s", oracle, secs));
  return cert;
}

void Criterion3(const DetectabilityCertificate& cert) {
  const double rho = ContractionRate(cert, 2.0, 0.19);
  const double tmin = MinHorizon(cert, 0.19);
  const double g = GenMax(cert.P2, cert.P1);
  const double rho_oracle = std::pow(4 * g, 1 / (2.0 - 0.19)) * kLambda;
  const double tmin_oracle = -std::log(4 * g) / std::log(kLambda) + 0.19;
  const bool pass = std::abs(rho - 0.86) <= 0.005 && std::abs(tmin - 1.703) <= 1e-3 &&
                    std::abs(rho - rho_oracle) < 1e-12 && std::abs(tmin - tmin_oracle) < 1e-12;
  Report(3, pass, "contraction rate and minimal horizon",
         Fmt("rho %.6f, min horizon %.6f", rho, tmin));
}

struct RunOutcome {
  std::string label;
  BoundReport report;
  bool audited = false;
  std::string error;
};

struct PropertySuite {
  std::vector<RunOutcome> runs;
  double seconds = 0.0;
};

ScenarioConfig RandomConfig(int index, SplitMix64& rng, const DetectabilityCertificate& cert,
                            std::string* label) {
  ScenarioConfig s = BenchS5Scenario(1000 + index);
  s.chi_hat = Vector(2);
  s.chi_hat << 0.1 + 4.9 * rng.Uniform(), 0.1 + 4.9 * rng.Uniform();
  const double dt = s.dt;
  double delta_bar = 0.0;
  if (index % 2 == 0) {
    static const int kPeriods[] = {5, 10, 20, 25};
    const int period = kPeriods[index / 2 % 4];
    s.sampler = SamplerSpec::Equidistant(period * dt);
    s.equidistant_mode = index % 4 == 0;
    delta_bar = s.equidistant_mode ? 0.0 : period * dt;
    const double tmin = MinHorizon(cert, delta_bar);
    long t_steps = period * (static_cast<long>(std::floor(tmin / (period * dt))) + 1);
    t_steps += period * static_cast<long>(4 * rng.Uniform());
    s.horizon = t_steps * dt;
    *label = Fmt("random equidistant period %.2f T %.2f", period * dt, s.horizon) +
             (s.equidistant_mode ? " aligned windows" : "");
  } else {
    std::vector<long> steps;
    long k = 0;
    long max_gap = 0;
    for (;;) {
      const long gap = 2 + static_cast<long>(24 * rng.Uniform());
      if (k + gap > 500) break;
      k += gap;
      max_gap = std::max(max_gap, gap);
      steps.push_back(k);
    }
    std::vector<double> times;
    for (long st : steps) times.push_back(st * dt);
    s.sampler = SamplerSpec::Explicit(times);
    delta_bar = max_gap * dt;
    const double tmin = MinHorizon(cert, delta_bar);
    const long t_steps = static_cast<long>(std::floor(tmin / dt)) + 1 +
                         static_cast<long>(150 * rng.Uniform());
    s.horizon = t_steps * dt;
    *label = Fmt("random schedule delta_bar %.2f T %.2f", delta_bar, s.horizon);
  }
  return s;
}

PropertySuite RunPropertySuite(const DetectabilityCertificate& cert) {
  const auto t0 = Clock::now();
  const SystemModel m = BatchReactor();
  PropertySuite suite;
  auto run = [&](const ScenarioConfig& s, const std::string& label) {
    RunOutcome out;
    out.label = label;
    try {
      const ScenarioResult r = RunScenario(m, s, cert, true);
      if (r.report) {
        out.report = *r.report;
        out.audited = true;
      } else {
        out.error = "not audited";
      }
    } catch (const Error& e) {
      out.error = e.what();
    }
    suite.runs.push_back(std::move(out));
  };
  for (int seed = 1; seed <= 10; ++seed) {
    run(BenchS5Scenario(seed), Fmt("benchmark seed %.0f", seed));
  }
  SplitMix64 rng(20240607);
  for (int i = 0; i < 10; ++i) {
    std::string label;
    const ScenarioConfig s = RandomConfig(i, rng, cert, &label);
    run(s, label);
  }
  suite.seconds = Seconds(t0);
  return suite;
}

void Criterion4(const PropertySuite& suite) {
  bool pass = suite.seconds < 300.0;
  int samples = 0;
  double worst = 1e300;
  for (const RunOutcome& r : suite.runs) {
    if (!r.audited) {
      std::printf("  run '%s' failed: %s\n", r.label.c_str(), r.error.c_str());
      pass = false;
      continue;
    }
    for (const SampleBound& b : r.report.samples) {
      ++samples;
      const bool ok = b.margin >= -1e-9 * b.rhs;
      if (b.rhs > 0) worst = std::min(worst, b.margin / b.rhs);
      if (!ok) {
        std::printf("  run '%s' t_i=%.2f margin %.3e rhs %.3e\n", r.label.c_str(), b.t_i,
                    b.margin, b.rhs);
        pass = false;
      }
    }
  }
  Report(4, pass, "error bound holds at every sample of 20 runs",
         Fmt("%.0f samples, worst relative margin %.3e, %.1f s", samples, worst, suite.seconds));
}

void Criterion6(const PropertySuite& suite) {
  bool pass = true;
  int samples = 0;
  double worst = -1e300;
  for (const RunOutcome& r : suite.runs) {
    if (!r.audited) {
      pass = false;
      continue;
    }
    for (const SampleBound& b : r.report.samples) {
      ++samples;
      const double excess = (b.cost - b.candidate_cost) / std::max(b.candidate_cost, 1e-300);
      worst = std::max(worst, excess);
      if (!(b.cost <= b.candidate_cost * (1 + 1e-6))) {
        std::printf("  run '%s' t_i=%.2f cost %.9e > candidate %.9e\n", r.label.c_str(),
                    b.t_i, b.cost, b.candidate_cost);
        pass = false;
      }
    }
  }
  Report(6, pass, "solver cost never exceeds the true-trajectory cost",
         Fmt("%.0f samples, largest relative excess %.3e", samples, worst));
}

// Augmented state [x1 (2), x2 (2), z] with z' = -kappa z + |dw|_Q^2 + |dy|_R^2.
Vector PairRhs(const Vector& s, const Vector& w1, const Vector& w2, const Matrix& q,
               const Matrix& r, double kappa) {
  Vector out(5);
  out.head(2) = ReactorF(s.head(2), w1);
  out.segment(2, 2) = ReactorF(s.segment(2, 2), w2);
  const Vector dw = w1 - w2;
  const double dy = s(0) + s(1) + w1(2) - s(2) - s(3) - w2(2);
  out(4) = -kappa * s(4) + dw.dot(q * dw) + dy * r(0, 0) * dy;
  return out;
}

void Criterion5(const DetectabilityCertificate& cert) {
  const Matrix& p = cert.witness.P;
  const Matrix& q = cert.witness.Q;
  const Matrix& r = cert.witness.R;
  const double kappa = cert.kappa;
  SplitMix64 rng(77);
  const double h = 0.001;
  const int pieces = 100, sub = 10;
  int accepted = 0, rejected = 0, checks = 0;
  double worst = -1e300;
  bool pass = true;
  while (accepted < 50 && rejected < 10000) {
    Vector s(5);
    for (int i = 0; i < 4; ++i) s(i) = 0.1 + 4.9 * rng.Uniform();
    s(4) = 0.0;
    const Vector e0 = s.head(2) - s.segment(2, 2);
    const double u0 = e0.dot(p * e0);
    bool inside = true;
    std::vector<std::pair<double, double>> samples;
    for (int k = 0; k < pieces && inside; ++k) {
      Vector w1(3), w2(3);
      for (int i = 0; i < 3; ++i) {
        w1(i) = -0.1 + 0.2 * rng.Uniform();
        w2(i) = -0.1 + 0.2 * rng.Uniform();
      }
      for (int j = 0; j < sub; ++j) {
        const Vector k1 = PairRhs(s, w1, w2, q, r, kappa);
        const Vector k2 = PairRhs(s + 0.5 * h * k1, w1, w2, q, r, kappa);
        const Vector k3 = PairRhs(s + 0.5 * h * k2, w1, w2, q, r, kappa);
        const Vector k4 = PairRhs(s + h * k3, w1, w2, q, r, kappa);
        s += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      }
      if (s.head(4).minCoeff() < 0.1 || s.head(4).maxCoeff() > 5.0) {
        inside = false;
        break;
      }
      const double t = (k + 1) * h * sub;
      const Vector e = s.head(2) - s.segment(2, 2);
      samples.emplace_back(e.dot(p * e), std::exp(-kappa * t) * u0 + s(4));
    }
    if (!inside) {
      ++rejected;
      continue;
    }
    ++accepted;
    for (const auto& [lhs, rhs] : samples) {
      ++checks;
      worst = std::max(worst, (lhs - rhs) / rhs);
      if (lhs > rhs * (1 + 1e-6)) pass = false;
    }
  }
  pass = pass && accepted == 50;
  Report(5, pass, "sampled dissipation inequality on random trajectory pairs",
         Fmt("%.0f pairs (%.0f left X and were redrawn), worst (lhs-rhs)/rhs %.3e", accepted,
             rejected, worst) + ", " + std::to_string(checks) + " checks");
}

void Criterion7(const DetectabilityCertificate& cert) {
  const SystemModel m = BatchReactor();
  ScenarioConfig s = BenchS5Scenario(1);
  s.disturbance.box = Box(Vector::Zero(3), Vector::Zero(3));
  s.chi_hat = s.chi;
  const ScenarioResult r = RunScenario(m, s, cert, false);
  double worst = 0.0;
  for (const SampleRecord& rec : r.run.samples) {
    worst = std::max(worst, (r.sim.truth.x.At(rec.t_i) - rec.x_hat).norm());
  }
  Report(7, worst <= 1e-6 && r.run.samples.size() == 50, "noise-free perfect-prior run is exact",
         Fmt("max error %.3e over %.0f samples", worst, r.run.samples.size()));
}

void Criterion8() {
  const SystemModel m = [] {
    SystemModel::Definition def;
    def.name = "decay";
    def.state_dim = 1;
    def.dist_dim = 1;
    def.output_dim = 1;
    def.f = [](const Vector& x, const Vector&, const Vector&) { return Vector(-x); };
    def.h = [](const Vector& x, const Vector&, const Vector&) { return x; };
    def.X = Box(Vector::Constant(1, -10.0), Vector::Constant(1, 10.0));
    def.U = Box(Vector(0), Vector(0));
    def.W = Box(Vector::Zero(1), Vector::Zero(1));
    def.Y = Box::Unbounded(1);
    def.output_affine = true;
    return SystemModel(def);
  }();
  auto err = [&](double dt) {
    const long n = std::lround(1.0 / dt);
    const Trajectory tr = Integrate(m, Vector::Ones(1), NoInput(0, dt, n),
                                    PiecewiseSignal::Zero(1, 0, dt, n), 0.0, 1.0, dt);
    return std::abs(tr.states.back()(0) - std::exp(-1.0));
  };
  const double e4 = err(0.04), e2 = err(0.02), e1 = err(0.01);
  const double r1 = e4 / e2, r2 = e2 / e1;
  const bool pass = r1 >= 12 && r1 <= 20 && r2 >= 12 && r2 <= 20 && e1 <= 1e-8;
  Report(8, pass, "RK4 fourth-order convergence",
         Fmt("ratios %.3f, %.3f; endpoint error %.3e", r1, r2, e1));
}

void Criterion9(const DetectabilityCertificate& cert) {
  const SystemModel m = BatchReactor();
  ScenarioConfig s = BenchS5Scenario(1);
  s.sampler = SamplerSpec::Equidistant(0.1);
  s.equidistant_mode = true;
  s.horizon = 2.0;
  const ScenarioResult r = RunScenario(m, s, cert, true);
  bool pass = r.report.has_value();
  std::string detail = "no audit";
  if (pass) {
    const BoundReport& b = *r.report;
    bool aligned = true;
    for (const SampleRecord& rec : r.run.samples) aligned = aligned && rec.window_start_step % 10 == 0;
    pass = b.factor == 4 && b.delta_bar == 0.0 && b.pass && aligned && b.samples.size() == 50;
    detail = Fmt("factor %.0f, delta_bar %.2f, worst relative margin %.3e", b.factor, b.delta_bar,
                 b.worst_relative_margin);
  }
  Report(9, pass, "aligned equidistant windows with the tightened bound", detail);
}

void Criterion10(const DetectabilityCertificate& cert) {
  const SystemModel m = BatchReactor();
  const ScenarioConfig s = BenchS5Scenario(1);
  const MheConfig cfg = MakeMheConfig(s, cert);
  const Simulation sim = Simulate(m, s);
  double worst = 0.0;
  for (long steps : {1L, 37L, 100L, 150L, 200L}) {
    const double t_i = steps * s.dt;
    const PiecewiseSignal y(0.0, s.dt, sim.data.y.Resample(0.0, s.dt, steps).values());
    const MheSolution mhe = SolveMhe(m, cfg, s.chi_hat, NoInput(0, s.dt, steps), y, t_i);
    const MheSolution fie = SolveFie(m, cfg, s.chi_hat, sim.data.u, sim.data.y, t_i);
    worst = std::max(worst, std::abs(mhe.cost - fie.cost) / std::max(std::abs(mhe.cost), 1e-300));
  }
  Report(10, worst <= 1e-12, "full information equals MHE while t_i <= T",
         Fmt("max relative cost gap %.3e", worst));
}

}  // namespace

int main() {
  try {
    Criterion1();
    const DetectabilityCertificate cert = Criterion2();
    Criterion3(cert);
    const PropertySuite suite = RunPropertySuite(cert);
    Criterion4(suite);
    Criterion5(cert);
    Criterion6(suite);
    Criterion7(cert);
    Criterion8();
    Criterion9(cert);
    Criterion10(cert);
  } catch (const std::exception& e) {
    std::printf("FAIL: aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
