// mhect: certificates, simulation, moving-horizon estimation and bound audits.
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mhect/analysis.h"
#include "mhect/certificate.h"
#include "mhect/errors.h"
#include "mhect/mhe.h"
#include "mhect/polynomial_model.h"
#include "mhect/sampling.h"
#include "mhect/scenario.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string out;
  long long seed = -1;
  double horizon = -1.0;
};

std::string OutputDir(const std::string& flag, const std::string& from_config) {
  if (!flag.empty()) return flag;
  if (!from_config.empty()) return from_config;
  if (const char* env = std::getenv("MHECT_OUT"); env != nullptr && *env != '\0') return env;
  return "mhect_out";
}

mhect::ScenarioConfig LoadWithOverrides(const Common& c) {
  mhect::ScenarioConfig s = mhect::LoadScenario(c.config);
  if (c.seed >= 0) s.disturbance.seed = static_cast<uint64_t>(c.seed);
  if (c.horizon > 0.0) s.horizon = c.horizon;
  return s;
}

void PrintRunSummary(const mhect::ScenarioResult& r) {
  int flagged = 0;
  double max_wall = 0.0;
  for (const auto& s : r.run.samples) {
    if (s.stats.termination != "converged" || !s.stats.feasible) ++flagged;
    max_wall = std::max(max_wall, s.wall_time);
  }
  std::cout << "samples: " << r.run.samples.size() << ", flagged: " << flagged
            << ", max solve time: " << max_wall * 1e3 << " ms\n";
  if (!r.run.samples.empty() && !r.sim.truth.empty()) {
    const auto& last = r.run.samples.back();
    std::cout << "final error |x - x_hat|: "
              << (r.sim.truth.x.At(last.t_i) - last.x_hat).norm() << "\n";
  }
  if (r.report) {
    std::cout << "audit: rho=" << r.report->rho << " factor=" << r.report->factor
              << " worst margin=" << r.report->worst_margin << " -> "
              << (r.report->pass ? "PASS" : "FAIL") << "\n";
  }
}

int CmdCertify(const std::string& model_ref, const std::string& cert_path,
               double lambda, const std::string& mode, const std::string& q_json,
               const std::string& r_json, int per_axis, double horizon,
               double delta_bar, const std::string& out) {
  const mhect::SystemModel model = mhect::ResolveModel(model_ref);
  const mhect::GridSpec grid =
      per_axis > 0 ? mhect::GridSpec::Uniform(model.n() + model.m() + model.q(), per_axis)
                   : mhect::GridSpec::Vertices();
  mhect::DetectabilityCertificate cert;
  if (!cert_path.empty()) {
    cert = mhect::LoadCertificate(cert_path);
    const mhect::VerificationReport rep = mhect::VerifyCertificate(model, cert, grid);
    std::cout << mhect::DescribeVerification(rep) << "\n";
    if (!rep.passed) return 3;
  } else {
    if (!(lambda > 0.0)) throw mhect::ConfigError("certify: give --cert or --lambda");
    mhect::SynthesisMode m = mhect::SynthesisMode::Joint();
    if (mode == "fixed_QR") {
      if (q_json.empty() || r_json.empty()) {
        throw mhect::ConfigError("certify: fixed_QR needs --Q and --R");
      }
      m = mhect::SynthesisMode::FixedQR(mhect::MatrixFromJson(json::parse(q_json)),
                                        mhect::MatrixFromJson(json::parse(r_json)));
    } else if (mode != "joint") {
      throw mhect::ConfigError("certify: --mode must be fixed_QR or joint");
    }
    try {
      cert = mhect::SynthesizeCertificate(model, lambda, m, grid);
    } catch (const mhect::SynthesisInfeasible& e) {
      std::cerr << "infeasible: " << e.what() << "\n";
      return 3;
    }
    std::cout << mhect::DescribeVerification(cert.verification) << "\n";
    const std::string path = out.empty() ? "certificate.json" : out;
    mhect::SaveCertificate(cert, path);
    std::cout << "wrote " << path << "\n";
  }
  if (horizon > 0.0) {
    const double t_min = mhect::MinHorizon(cert, delta_bar);
    std::cout << "min horizon (delta_bar=" << delta_bar << "): " << t_min << "\n";
    std::cout << "rho(T=" << horizon << "): "
              << mhect::ContractionRate(cert, horizon, delta_bar) << "\n";
  }
  return 0;
}

int CmdSimulate(const Common& c) {
  const mhect::ScenarioConfig s = LoadWithOverrides(c);
  const mhect::SystemModel model = mhect::ResolveModel(s.model);
  const mhect::Simulation sim = mhect::Simulate(model, s);
  const fs::path dir = OutputDir(c.out, s.out_dir);
  fs::create_directories(dir);
  std::ofstream truth(dir / "truth.csv");
  mhect::WriteTrajectoryCsv(truth, sim.truth.x);
  std::ofstream y(dir / "y.csv");
  mhect::WriteSignalCsv(y, sim.data.y, "y");
  std::ofstream w(dir / "w.csv");
  mhect::WriteSignalCsv(w, sim.truth.w, "w");
  std::cout << "wrote truth.csv, y.csv, w.csv to " << dir.string() << "\n";
  return 0;
}

int CmdEstimate(const Common& c, bool audit) {
  const mhect::ScenarioConfig s = LoadWithOverrides(c);
  const mhect::SystemModel model = mhect::ResolveModel(s.model);
  const mhect::DetectabilityCertificate cert = mhect::ResolveCertificate(s, model);
  const std::string dir = OutputDir(c.out, s.out_dir);
  if (!s.measurements.empty()) {
    if (audit) throw mhect::AuditError("audit: recorded measurements carry no truth");
    mhect::MeasurementData data;
    data.y = mhect::ReadSignalCsv(s.measurements);
    const long steps = std::lround(s.t_sim / s.dt);
    data.u = model.m() > 0 ? mhect::PiecewiseSignal::Zero(model.m(), 0.0, s.dt, steps)
                           : mhect::NoInput(0.0, s.dt, steps);
    const mhect::MheConfig cfg = mhect::MakeMheConfig(s, cert);
    const mhect::EstimationRun run = mhect::RunMhe(model, cfg, s.chi_hat, data, s.t_sim);
    fs::create_directories(dir);
    std::ofstream f(fs::path(dir) / "estimate.csv");
    mhect::WriteTrajectoryCsv(f, run.estimate, "x_hat");
    std::cout << "samples: " << run.samples.size() << "; wrote " << dir << "\n";
    return 0;
  }
  if (audit) {
    const bool online = s.sampler.kind == mhect::SamplerSpec::Kind::kEventTriggered &&
                        std::isfinite(s.sampler.threshold);
    const double delta_bar =
        s.equidistant_mode ? 0.0
        : online           ? s.sampler.max_gap
                           : mhect::MakeSampler(s.sampler, s.t_sim, s.dt).DeltaBar();
    const double t_min = mhect::MinHorizon(cert, delta_bar);
    if (!(s.horizon > t_min)) {
      throw mhect::HorizonError("audit: T=" + std::to_string(s.horizon) +
                                " does not exceed the minimal horizon " +
                                std::to_string(t_min));
    }
  }
  const mhect::ScenarioResult r = mhect::RunScenario(model, s, cert, audit);
  mhect::WriteScenarioOutputs(r, dir);
  PrintRunSummary(r);
  std::cout << "wrote " << dir << "\n";
  if (audit && r.report && !r.report->pass) return 4;
  return 0;
}

int CmdBench(mhect::BenchOptions opts, int seeds, int jobs) {
  if (seeds <= 1) {
    const mhect::BenchResult b = mhect::RunBenchS5(opts);
    std::cout << "published certificate: " << mhect::DescribeVerification(b.published) << "\n";
    if (b.used_fallback) {
      std::cout << "using synthesized certificate with the same Q, R, lambda\n";
    }
    std::cout << "min horizon: " << b.min_horizon << ", rho: " << b.rho << "\n";
    PrintRunSummary(b.result);
    if (!opts.out_dir.empty()) std::cout << "wrote " << opts.out_dir << "\n";
    return 0;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  std::vector<int> codes(seeds, 0);
  std::vector<std::string> lines(seeds);
  auto worker = [&]() {
    for (int i = next++; i < seeds; i = next++) {
      mhect::BenchOptions o = opts;
      o.seed = opts.seed + static_cast<uint64_t>(i);
      if (!opts.out_dir.empty()) {
        o.out_dir = (fs::path(opts.out_dir) / ("seed_" + std::to_string(o.seed))).string();
      }
      std::string line;
      int code = 0;
      try {
        const mhect::BenchResult b = mhect::RunBenchS5(o);
        line = "seed " + std::to_string(o.seed) + ": PASS worst margin " +
               std::to_string(b.result.report->worst_margin);
      } catch (const mhect::Error& e) {
        line = "seed " + std::to_string(o.seed) + ": FAIL " + e.what();
        code = e.exit_code();
      }
      std::lock_guard<std::mutex> lock(mu);
      lines[i] = line;
      codes[i] = code;
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::max(1, jobs); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  int status = 0;
  for (int i = 0; i < seeds; ++i) {
    std::cout << lines[i] << "\n";
    if (codes[i] != 0 && status == 0) status = codes[i];
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mhect: robust moving-horizon estimation with certified detectability"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("config", common.config, "Scenario JSON file")->required();
    sub->add_option("--seed", common.seed, "Disturbance seed");
    sub->add_option("--horizon", common.horizon, "Horizon length T");
    sub->add_option("--out", common.out, "Output directory (default $MHECT_OUT)");
  };

  std::string model_ref = "batch_reactor", cert_path, mode = "fixed_QR", q_json, r_json,
              cert_out;
  double lambda = -1.0, cert_horizon = -1.0, delta_bar = 0.0;
  int per_axis = 0;
  CLI::App* certify = app.add_subcommand("certify", "Verify or synthesize a certificate");
  certify->add_option("--model", model_ref, "Builtin model name or model JSON file");
  certify->add_option("--cert", cert_path, "Certificate JSON to verify");
  certify->add_option("--lambda", lambda, "Synthesize with this discount factor");
  certify->add_option("--mode", mode, "fixed_QR or joint");
  certify->add_option("--Q", q_json, "Q as JSON matrix, e.g. [[1000,0],[0,1000]]");
  certify->add_option("--R", r_json, "R as JSON matrix");
  certify->add_option("--grid", per_axis, "Points per axis (default: box vertices)");
  certify->add_option("--horizon", cert_horizon, "Report rho and min horizon for T");
  certify->add_option("--delta-bar", delta_bar, "Largest sampling gap for --horizon");
  certify->add_option("--out", cert_out, "Where to write a synthesized certificate");

  CLI::App* simulate = app.add_subcommand("simulate", "Simulate truth and measurements");
  add_common(simulate);
  CLI::App* estimate = app.add_subcommand("estimate", "Run MHE on a scenario");
  add_common(estimate);
  CLI::App* audit = app.add_subcommand("audit", "Run MHE and audit the error bounds");
  add_common(audit);

  mhect::BenchOptions bench;
  long long bench_seed = 1;
  int seeds = 1, jobs = 1;
  std::string bench_out;
  CLI::App* bench_cmd = app.add_subcommand("bench-s5", "Batch-reactor benchmark");
  bench_cmd->add_option("--seed", bench_seed, "Disturbance seed (first seed with --seeds)");
  bench_cmd->add_option("--seeds", seeds, "Number of consecutive seeds");
  bench_cmd->add_option("--jobs", jobs, "Parallel runs across seeds");
  bench_cmd->add_option("--horizon", bench.horizon, "Horizon length T");
  bench_cmd->add_option("--lambda", bench.lambda, "Discount factor of the certificate");
  bench_cmd->add_flag("--strict-published", bench.strict_published,
                      "Fail if the published certificate does not verify");
  bench_cmd->add_option("--out", bench_out, "Output directory (default $MHECT_OUT)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*certify) {
      return CmdCertify(model_ref, cert_path, lambda, mode, q_json, r_json, per_axis,
                        cert_horizon, delta_bar, cert_out);
    }
    if (*simulate) return CmdSimulate(common);
    if (*estimate) return CmdEstimate(common, false);
    if (*audit) return CmdEstimate(common, true);
    if (*bench_cmd) {
      bench.seed = static_cast<uint64_t>(bench_seed);
      bench.out_dir = OutputDir(bench_out, "");
      return CmdBench(bench, seeds, jobs);
    }
  } catch (const mhect::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
