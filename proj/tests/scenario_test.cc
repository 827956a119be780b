#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "mhect/errors.h"
#include "mhect/scenario.h"

using namespace mhect;

namespace {

Box WBox() { return Box::Symmetric(Vector::Constant(3, 0.1)); }

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("splitmix64 reference output") {
  SplitMix64 rng(0);
  CHECK(rng.Next() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.Next() == 0x6E789E6AA1B965F4ULL);
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    const double u = a.Uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.Uniform());
  }
}

TEST_CASE("disturbance generation") {
  DisturbanceSpec spec{WBox(), 0.01, 5};
  const PiecewiseSignal w = GenerateDisturbance(spec, WBox(), 5.0, 0.01);
  CHECK(w.size() == 500);
  CHECK(w.dt() == 0.01);
  double lo = 1, hi = -1;
  for (const Vector& v : w.values()) {
    CHECK(WBox().Contains(v));
    lo = std::min(lo, v.minCoeff());
    hi = std::max(hi, v.maxCoeff());
  }
  CHECK(lo < -0.09);
  CHECK(hi > 0.09);
  const PiecewiseSignal again = GenerateDisturbance(spec, WBox(), 5.0, 0.01);
  CHECK(again.values() == w.values());
  spec.seed = 6;
  CHECK(GenerateDisturbance(spec, WBox(), 5.0, 0.01).values() != w.values());

  const PiecewiseSignal zero =
      GenerateDisturbance({Box(Vector::Zero(3), Vector::Zero(3)), 0.05, 1}, WBox(), 1.0, 0.01);
  CHECK(zero.size() == 20);
  for (const Vector& v : zero.values()) CHECK(v.isZero(0.0));

  CHECK_THROWS_AS(GenerateDisturbance({Box::Symmetric(Vector::Constant(3, 0.2)), 0.01, 1},
                                      WBox(), 1.0, 0.01),
                  ConfigError);
  CHECK_THROWS_AS(GenerateDisturbance({WBox(), 0.015, 1}, WBox(), 1.0, 0.01), ConfigError);
}

TEST_CASE("scenario JSON round trip") {
  const ScenarioConfig s = BenchS5Scenario(9);
  const ScenarioConfig back = ScenarioFromJson(ScenarioToJson(s));
  CHECK(back.model == s.model);
  CHECK(back.chi == s.chi);
  CHECK(back.chi_hat == s.chi_hat);
  CHECK(back.disturbance.box.lo == s.disturbance.box.lo);
  CHECK(back.disturbance.box.hi == s.disturbance.box.hi);
  CHECK(back.disturbance.seed == 9);
  CHECK(back.sampler.times == s.sampler.times);
  CHECK(back.horizon == s.horizon);
  CHECK(back.solver.grad_tol == s.solver.grad_tol);
  CHECK(ScenarioToJson(back) == ScenarioToJson(s));
}

TEST_CASE("scenario JSON shorthand and errors") {
  const nlohmann::json j = nlohmann::json::parse(R"({
    "chi": [3, 1], "chi_hat": [0.1, 4.5],
    "sampler": {"type": "equidistant", "period": 0.1},
    "disturbance": {"bound": 0.05, "seed": 4}
  })");
  const ScenarioConfig s = ScenarioFromJson(j);
  CHECK(s.model == "batch_reactor");
  CHECK(s.disturbance.box.dim() == 1);
  CHECK(s.disturbance.seed == 4);
  CHECK(s.disturbance.piece_length == 0.01);
  const SystemModel m = BatchReactor();
  CHECK_NOTHROW(ValidateScenario(s, m));
  const Simulation sim = Simulate(m, s);
  CHECK(sim.truth.w.dim() == 3);
  for (const Vector& v : sim.truth.w.values()) CHECK(v.cwiseAbs().maxCoeff() <= 0.05);

  CHECK_THROWS_AS(ScenarioFromJson(nlohmann::json::parse(R"({"chi": [3, 1]})")), ConfigError);
  ScenarioConfig bad = s;
  bad.chi_hat = Vector::Constant(2, 6.0);
  CHECK_THROWS_AS(ValidateScenario(bad, m), ConfigError);
  bad = s;
  bad.chi = Vector::Ones(3);
  CHECK_THROWS_AS(ValidateScenario(bad, m), ConfigError);
  CHECK_THROWS_AS(LoadScenario("no_such_scenario.json"), ConfigError);
}

TEST_CASE("simulation matches its own outputs") {
  const SystemModel m = BatchReactor();
  const ScenarioConfig s = BenchS5Scenario(1);
  const Simulation sim = Simulate(m, s);
  CHECK(sim.truth.x.size() == 501);
  CHECK(sim.truth.x.states[0] == s.chi);
  CHECK(sim.data.y.size() == 500);
  for (long k : {0L, 123L, 499L}) {
    const Vector y = m.h(sim.truth.x.states[k], Vector(0), sim.truth.w.piece(k));
    CHECK(sim.data.y.piece(k) == y);
  }
}

TEST_CASE("signal CSV round trip") {
  const PiecewiseSignal s(0.5, 0.25, {Vector::Constant(2, 1.0 / 3.0), Vector::Constant(2, -2.5),
                                      Vector::Constant(2, 1e-17)});
  const std::string path = "scenario_test_signal.csv";
  {
    std::ofstream f(path);
    WriteSignalCsv(f, s, "y");
  }
  const PiecewiseSignal back = ReadSignalCsv(path);
  CHECK(back.t0() == 0.5);
  CHECK(back.dt() == 0.25);
  CHECK(back.values() == s.values());
  std::ostringstream os;
  WriteSignalCsv(os, s, "y");
  CHECK(os.str().rfind("t,y1,y2\n", 0) == 0);
  {
    std::ofstream f(path);
    f << "t,y1\n0,1\n0.1,2\n0.3,3\n";
  }
  CHECK_THROWS_AS(ReadSignalCsv(path), ConfigError);
  {
    std::ofstream f(path);
    f << "t,y1\n0,1\n0.1,abc\n";
  }
  CHECK_THROWS_AS(ReadSignalCsv(path), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("estimation from recorded measurements matches the live run") {
  const SystemModel m = BatchReactor();
  const ScenarioConfig s = BenchS5Scenario(1);
  const ScenarioResult live = RunScenario(m, s, PublishedBatchReactorCertificate(m), false);
  const std::string path = "scenario_test_y.csv";
  {
    std::ofstream f(path);
    WriteSignalCsv(f, live.sim.data.y, "y");
  }
  MeasurementData data;
  data.u = NoInput(0.0, s.dt, 500);
  data.y = ReadSignalCsv(path);
  std::remove(path.c_str());
  CHECK(data.y.values() == live.sim.data.y.values());
  const EstimationRun run = RunMhe(m, live.mhe, s.chi_hat, data, s.t_sim);
  CHECK(run.estimate.states == live.run.estimate.states);
}

TEST_CASE("scenario outputs") {
  const SystemModel m = BatchReactor();
  const ScenarioResult r = RunScenario(m, BenchS5Scenario(1), PublishedBatchReactorCertificate(m));
  const std::filesystem::path dir = "scenario_test_out";
  WriteScenarioOutputs(r, dir.string());
  for (const char* name : {"estimate.csv", "samples.csv", "truth.csv", "bounds.csv",
                           "summary.json", "disturbance.svg", "sampling.svg", "states.svg",
                           "error.svg"}) {
    CHECK(std::filesystem::exists(dir / name));
  }
  std::ifstream summary(dir / "summary.json");
  const nlohmann::json j = nlohmann::json::parse(summary);
  CHECK(j.contains("audit"));
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
