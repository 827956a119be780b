#include "mhect/scenario.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <algorithm>

#include "mhect/errors.h"
#include "mhect/grid.h"
#include "mhect/integrate.h"
#include "mhect/polynomial_model.h"
#include "mhect/svg_plot.h"

namespace mhect {

using nlohmann::json;
namespace fs = std::filesystem;

uint64_t SplitMix64::Next() {
  uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::Uniform() {
  return static_cast<double>(Next() >> 11) * 0x1.0p-53;
}

PiecewiseSignal GenerateDisturbance(const DisturbanceSpec& spec, const Box& W,
                                    double t_sim, double dt) {
  if (spec.box.dim() != W.dim()) throw ConfigError("disturbance: box dimension mismatch");
  if (!spec.box.IsBounded()) throw ConfigError("disturbance: box must be bounded");
  if (!W.ContainsBox(spec.box)) throw ConfigError("disturbance: box exceeds W");
  GridSteps(spec.piece_length, dt, "disturbance piece length");
  if (!(spec.piece_length > 0.0)) throw ConfigError("disturbance: piece length must be positive");
  const long pieces = std::max(
      1L, static_cast<long>(std::ceil(t_sim / spec.piece_length - kGridTolerance)));
  SplitMix64 rng(spec.seed);
  std::vector<Vector> values;
  values.reserve(pieces);
  for (long k = 0; k < pieces; ++k) {
    Vector v(spec.box.dim());
    for (int i = 0; i < v.size(); ++i) {
      const double lo = spec.box.lo(i);
      const double hi = spec.box.hi(i);
      v(i) = lo == hi ? lo : lo + (hi - lo) * rng.Uniform();
    }
    values.push_back(std::move(v));
  }
  return PiecewiseSignal(0.0, spec.piece_length, std::move(values));
}

namespace {

Vector VectorFromJson(const json& j) {
  const std::vector<double> v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json VectorToJson(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string Resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) return path;
  const fs::path p = fs::path(base_dir) / path;
  return fs::exists(p) ? p.string() : path;
}

// A scalar bound applies to every component.
Box DisturbanceBox(const DisturbanceSpec& spec, int q) {
  if (spec.box.dim() == 0) return Box(Vector::Zero(q), Vector::Zero(q));
  if (spec.box.dim() == 1 && q > 1) {
    return Box(Vector::Constant(q, spec.box.lo(0)), Vector::Constant(q, spec.box.hi(0)));
  }
  return spec.box;
}

}  // namespace

ScenarioConfig ScenarioFromJson(const json& j, const std::string& base_dir) {
  ScenarioConfig s;
  try {
    s.model = Resolve(j.value("model", s.model), base_dir);
    s.certificate = j.value("certificate", json());
    if (s.certificate.is_string()) {
      s.certificate = Resolve(s.certificate.get<std::string>(), base_dir);
    }
    s.chi = VectorFromJson(j.at("chi"));
    s.chi_hat = VectorFromJson(j.at("chi_hat"));
    s.t_sim = j.value("t_sim", s.t_sim);
    s.dt = j.value("dt", s.dt);
    s.horizon = j.value("horizon", s.horizon);
    s.equidistant_mode = j.value("equidistant_mode", false);
    s.out_dir = j.value("out", std::string());
    s.sampler = SamplerSpecFromJson(j.at("sampler"));
    s.measurements = Resolve(j.value("measurements", std::string()), base_dir);
    if (j.contains("disturbance")) {
      const json& d = j.at("disturbance");
      s.disturbance.piece_length = d.value("piece_length", s.dt);
      s.disturbance.seed = d.value("seed", uint64_t{0});
      if (d.contains("bound")) {
        const Vector b = d.at("bound").is_number()
                             ? Vector::Constant(1, d.at("bound").get<double>())
                             : VectorFromJson(d.at("bound"));
        s.disturbance.box = Box::Symmetric(b);
      } else if (d.contains("box")) {
        s.disturbance.box = BoxFromJson(d.at("box"), static_cast<int>(d.at("box").size()));
      }
    }
    if (j.contains("solver")) {
      const json& o = j.at("solver");
      s.solver.grad_tol = o.value("grad_tol", s.solver.grad_tol);
      s.solver.max_iters = o.value("max_iters", s.solver.max_iters);
      s.solver.lm_damping = o.value("lm_damping", s.solver.lm_damping);
      s.solver.penalty_weight = o.value("penalty_weight", s.solver.penalty_weight);
      s.solver.constraint_tol = o.value("constraint_tol", s.solver.constraint_tol);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  return s;
}

json ScenarioToJson(const ScenarioConfig& s) {
  json j;
  j["model"] = s.model;
  j["certificate"] = s.certificate;
  j["chi"] = VectorToJson(s.chi);
  j["chi_hat"] = VectorToJson(s.chi_hat);
  j["t_sim"] = s.t_sim;
  j["dt"] = s.dt;
  j["horizon"] = s.horizon;
  j["equidistant_mode"] = s.equidistant_mode;
  j["sampler"] = SamplerSpecToJson(s.sampler);
  j["disturbance"] = {{"box", BoxToJson(s.disturbance.box)},
                      {"piece_length", s.disturbance.piece_length},
                      {"seed", s.disturbance.seed}};
  j["solver"] = {{"grad_tol", s.solver.grad_tol},
                 {"max_iters", s.solver.max_iters},
                 {"lm_damping", s.solver.lm_damping},
                 {"penalty_weight", s.solver.penalty_weight},
                 {"constraint_tol", s.solver.constraint_tol}};
  if (!s.out_dir.empty()) j["out"] = s.out_dir;
  if (!s.measurements.empty()) j["measurements"] = s.measurements;
  return j;
}

ScenarioConfig LoadScenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open scenario " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("scenario " + path + ": " + e.what());
  }
  return ScenarioFromJson(j, fs::path(path).parent_path().string());
}

void ValidateScenario(const ScenarioConfig& s, const SystemModel& model) {
  if (s.chi.size() != model.n() || s.chi_hat.size() != model.n()) {
    throw ConfigError("scenario: chi / chi_hat dimension mismatch");
  }
  if (!model.X().Contains(s.chi)) throw ConfigError("scenario: chi outside X");
  if (!model.X().Contains(s.chi_hat)) throw ConfigError("scenario: chi_hat outside X");
  if (!(s.dt > 0.0)) throw ConfigError("scenario: dt must be positive");
  GridSteps(s.t_sim, s.dt, "t_sim");
  GridSteps(s.horizon, s.dt, "horizon T");
  const Box box = DisturbanceBox(s.disturbance, model.q());
  if (box.dim() != model.q()) {
    throw ConfigError("scenario: disturbance box dimension mismatch");
  }
  if (!model.W().ContainsBox(box)) {
    throw ConfigError("scenario: disturbance box exceeds W");
  }
  GridSteps(s.disturbance.piece_length, s.dt, "disturbance piece length");
}

DetectabilityCertificate ResolveCertificate(const ScenarioConfig& s,
                                            const SystemModel& model) {
  const json& c = s.certificate;
  if (c.is_string()) return LoadCertificate(c.get<std::string>());
  if (c.is_object() && c.contains("synthesize")) {
    const json& r = c.at("synthesize");
    try {
      const double lambda = r.at("lambda").get<double>();
      const std::string mode = r.value("mode", std::string("fixed_QR"));
      const GridSpec grid = r.contains("per_axis")
                                ? GridSpec::Uniform(model.n() + model.m() + model.q(),
                                                    r.at("per_axis").get<int>())
                                : GridSpec::Vertices();
      if (mode == "joint") {
        return SynthesizeCertificate(model, lambda, SynthesisMode::Joint(), grid);
      }
      if (mode != "fixed_QR") throw ConfigError("synthesis mode must be fixed_QR or joint");
      return SynthesizeCertificate(
          model, lambda,
          SynthesisMode::FixedQR(MatrixFromJson(r.at("Q")), MatrixFromJson(r.at("R"))), grid);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("certificate synthesis request: ") + e.what());
    }
  }
  if (c.is_object()) return CertificateFromJson(c);
  throw ConfigError("scenario: no certificate given");
}

MheConfig MakeMheConfig(const ScenarioConfig& s, const DetectabilityCertificate& cert) {
  MheConfig cfg;
  cfg.horizon = s.horizon;
  cfg.cert = cert;
  cfg.sampler = s.sampler;
  cfg.dt = s.dt;
  cfg.solver = s.solver;
  cfg.equidistant_mode = s.equidistant_mode;
  return cfg;
}

Simulation Simulate(const SystemModel& model, const ScenarioConfig& s) {
  ValidateScenario(s, model);
  const long steps = GridSteps(s.t_sim, s.dt, "t_sim");
  Simulation sim;
  sim.truth.chi = s.chi;
  DisturbanceSpec spec = s.disturbance;
  spec.box = DisturbanceBox(spec, model.q());
  sim.truth.w = GenerateDisturbance(spec, model.W(), s.t_sim, s.dt);
  sim.truth.u = model.m() > 0 ? PiecewiseSignal::Zero(model.m(), 0.0, s.dt, steps)
                              : NoInput(0.0, s.dt, steps);
  sim.truth.x = Integrate(model, s.chi, sim.truth.u, sim.truth.w, 0.0, s.t_sim, s.dt);
  sim.data.u = sim.truth.u;
  sim.data.y = OutputAlong(model, sim.truth.x, sim.truth.u, sim.truth.w);
  return sim;
}

void WriteSignalCsv(std::ostream& os, const PiecewiseSignal& s, const std::string& prefix) {
  os << "t";
  for (int i = 1; i <= s.dim(); ++i) os << ',' << prefix << i;
  os << '\n';
  char buf[64];
  for (long k = 0; k < s.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", s.t0() + static_cast<double>(k) * s.dt());
    os << buf;
    for (int i = 0; i < s.dim(); ++i) {
      std::snprintf(buf, sizeof(buf), ",%.17g", s.piece(k)(i));
      os << buf;
    }
    os << '\n';
  }
}

PiecewiseSignal ReadSignalCsv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw ConfigError(path + ": empty file");
  const long cols = std::count(line.begin(), line.end(), ',') + 1;
  if (cols < 2) throw ConfigError(path + ": need a time column and at least one value");
  std::vector<double> times;
  std::vector<Vector> values;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError(path + ": bad number '" + cell + "'");
      }
    }
    if (static_cast<long>(v.size()) != cols) throw ConfigError(path + ": ragged row");
    times.push_back(v[0]);
    values.push_back(Eigen::Map<const Vector>(v.data() + 1, cols - 1));
  }
  if (times.size() < 2) throw ConfigError(path + ": need at least two rows");
  const double dt = times[1] - times[0];
  for (size_t k = 1; k < times.size(); ++k) {
    const double expect = times[0] + static_cast<double>(k) * dt;
    if (std::abs(times[k] - expect) > kGridTolerance * std::max(1.0, std::abs(expect))) {
      throw ConfigError(path + ": rows are not equally spaced");
    }
  }
  return PiecewiseSignal(times[0], dt, std::move(values));
}

ScenarioResult RunScenario(const SystemModel& model, const ScenarioConfig& s,
                           const DetectabilityCertificate& cert, bool audit) {
  ScenarioResult r;
  r.scenario = s;
  r.mhe = MakeMheConfig(s, cert);
  r.sim = Simulate(model, s);
  r.run = RunMhe(model, r.mhe, s.chi_hat, r.sim.data, s.t_sim);
  if (audit) {
    const double delta_bar = s.equidistant_mode ? 0.0 : r.run.sampling.DeltaBar();
    if (s.horizon > MinHorizon(cert, delta_bar)) {
      r.report = AuditRun(model, r.run, r.sim.truth, r.mhe);
    }
  }
  return r;
}

namespace {

std::vector<double> Column(const std::vector<Vector>& v, int i) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const Vector& x : v) out.push_back(x(i));
  return out;
}

std::vector<double> NodeTimes(double t0, double dt, long count) {
  std::vector<double> t(count);
  for (long k = 0; k < count; ++k) t[k] = t0 + static_cast<double>(k) * dt;
  return t;
}

void WritePlots(const ScenarioResult& r, const fs::path& dir) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};
  const Trajectory& est = r.run.estimate;
  const Trajectory& truth = r.sim.truth.x;
  const int n = truth.states.empty() ? 0 : static_cast<int>(truth.states[0].size());

  SvgPlot wp("Disturbance", "t", "w");
  const PiecewiseSignal& w = r.sim.truth.w;
  std::vector<double> wt = NodeTimes(w.t0(), w.dt(), w.size() + 1);
  for (int i = 0; i < w.dim(); ++i) {
    wp.AddSteps("w" + std::to_string(i + 1), wt, Column(w.values(), i), kColors[i % 5]);
  }
  wp.Save((dir / "disturbance.svg").string());

  SvgPlot sp("Sampling times", "t", "gap to previous sample");
  std::vector<double> gaps;
  double prev = 0.0;
  for (double t : r.run.sampling.times()) {
    gaps.push_back(t - prev);
    prev = t;
  }
  sp.AddMarkers("t_i", r.run.sampling.times(), gaps, kColors[0]);
  sp.Save((dir / "sampling.svg").string());

  SvgPlot xp("States and measurements", "t", "concentration");
  const std::vector<double> tt = NodeTimes(truth.t0, truth.dt, truth.size());
  const std::vector<double> te = NodeTimes(est.t0, est.dt, est.size());
  for (int i = 0; i < n; ++i) {
    xp.AddLine("x" + std::to_string(i + 1), tt, Column(truth.states, i), kColors[i % 5]);
    xp.AddLine("x" + std::to_string(i + 1) + " est", te, Column(est.states, i),
               kColors[(i + 2) % 5]);
  }
  const PiecewiseSignal& y = r.sim.data.y;
  if (y.dim() > 0) {
    xp.AddMarkers("y1", NodeTimes(y.t0(), y.dt(), y.size()), Column(y.values(), 0), "#7f7f7f");
  }
  xp.Save((dir / "states.svg").string());

  SvgPlot ep("Estimation error", "t", "|x - x_hat|");
  std::vector<double> err;
  for (long k = 0; k < est.size(); ++k) err.push_back((truth.states[k] - est.states[k]).norm());
  ep.set_log_y(true);
  ep.AddLine("error", te, err, kColors[0]);
  if (r.report) {
    std::vector<double> ts, bound;
    for (const SampleBound& b : r.report->samples) {
      ts.push_back(b.t_i);
      bound.push_back(b.sup_bound);
    }
    ep.AddLine("sup bound", ts, bound, kColors[1]);
  }
  ep.Save((dir / "error.svg").string());
}

}  // namespace

void WriteScenarioOutputs(const ScenarioResult& r, const std::string& dir_str) {
  const fs::path dir(dir_str);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir_str);
  auto open = [&dir](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw ConfigError("cannot write " + (dir / name).string());
    return f;
  };
  char buf[128];

  {
    std::ofstream f = open("estimate.csv");
    const Trajectory& est = r.run.estimate;
    const int n = static_cast<int>(est.states[0].size());
    f << "t";
    for (int i = 1; i <= n; ++i) f << ",x_hat" << i;
    f << ",flag\n";
    for (long k = 0; k < est.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", est.t0 + static_cast<double>(k) * est.dt);
      f << buf;
      for (int i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), ",%.17g", est.states[k](i));
        f << buf;
      }
      const int src = r.run.source[k];
      const bool ok = src < 0 || (r.run.samples[src].stats.termination == "converged" &&
                                  r.run.samples[src].stats.feasible);
      f << ',' << (ok ? 0 : 1) << '\n';
    }
  }
  {
    std::ofstream f = open("samples.csv");
    f << "t_i,cost,iterations,grad_norm,wall_time,termination\n";
    for (const SampleRecord& s : r.run.samples) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,%.6e,%.6e,", s.t_i, s.cost,
                    s.stats.iterations, s.stats.grad_norm, s.wall_time);
      f << buf << s.stats.termination << '\n';
    }
  }
  {
    std::ofstream f = open("truth.csv");
    WriteTrajectoryCsv(f, r.sim.truth.x);
  }
  json summary;
  summary["scenario"] = ScenarioToJson(r.scenario);
  summary["certificate"] = CertificateToJson(r.mhe.cert);
  summary["samples"] = r.run.samples.size();
  summary["delta_bar"] = r.run.sampling.DeltaBar();
  double max_wall = 0.0;
  int flagged = 0;
  for (const SampleRecord& s : r.run.samples) {
    max_wall = std::max(max_wall, s.wall_time);
    if (s.stats.termination != "converged" || !s.stats.feasible) ++flagged;
  }
  summary["max_solve_time"] = max_wall;
  summary["total_time"] = r.run.total_time;
  summary["flagged_samples"] = flagged;
  if (r.report) {
    std::ofstream f = open("bounds.csv");
    WriteBoundsCsv(f, *r.report);
    summary["audit"] = BoundReportSummary(*r.report);
  }
  {
    std::ofstream f = open("summary.json");
    f << summary.dump(2) << '\n';
  }
  WritePlots(r, dir);
}

ScenarioConfig BenchS5Scenario(uint64_t seed) {
  ScenarioConfig s;
  s.model = "batch_reactor";
  s.chi = Vector(2);
  s.chi << 3.0, 1.0;
  s.chi_hat = Vector(2);
  s.chi_hat << 0.1, 4.5;
  s.disturbance.box = Box::Symmetric(Vector::Constant(3, 0.1));
  s.disturbance.piece_length = 0.01;
  s.disturbance.seed = seed;
  s.t_sim = 5.0;
  s.dt = 0.01;
  s.horizon = 2.0;
  s.sampler = SamplerSpec::Explicit(BenchmarkSchedule());
  return s;
}

DetectabilityCertificate PublishedBatchReactorCertificate(const SystemModel& model,
                                                          double lambda) {
  Matrix p(2, 2);
  p << 4.009, 3.768, 3.768, 3.549;
  const Matrix q = Vector::Map(std::vector<double>{1000, 1000, 100}.data(), 3).asDiagonal();
  const Matrix r = Matrix::Constant(1, 1, 100.0);
  const CertificateDomain domain{model.X(), Box(Vector(0), Vector(0)), model.W()};
  return DetectabilityCertificate::FromLmi(p, q, r, lambda, domain);
}

BenchResult RunBenchS5(const BenchOptions& opts) {
  const SystemModel model = BatchReactor();
  BenchResult out;
  DetectabilityCertificate published = PublishedBatchReactorCertificate(model, opts.lambda);
  out.published = VerifyCertificate(model, published, GridSpec::Vertices());
  if (out.published.passed) {
    published.verification = out.published;
    out.cert = published;
  } else {
    if (opts.strict_published) {
      throw InfeasibleError("published certificate fails verification: " +
                            DescribeVerification(out.published));
    }
    out.used_fallback = true;
    out.cert = SynthesizeCertificate(
        model, opts.lambda, SynthesisMode::FixedQR(published.Q, published.R),
        GridSpec::Vertices());
  }
  ScenarioConfig s = BenchS5Scenario(opts.seed);
  s.horizon = opts.horizon;
  const double delta_bar = MakeSampler(s.sampler, s.t_sim, s.dt).DeltaBar();
  out.min_horizon = MinHorizon(out.cert, delta_bar);
  out.rho = ContractionRate(out.cert, s.horizon, delta_bar);
  if (opts.lambda == 0.4 && opts.horizon == 2.0 && std::abs(out.rho - 0.86) > 0.005) {
    throw Error("check contraction_rate failed: rho=" + std::to_string(out.rho));
  }
  out.result = RunScenario(model, s, out.cert);
  if (!opts.out_dir.empty()) WriteScenarioOutputs(out.result, opts.out_dir);
  if (out.result.run.samples.size() != 50) {
    throw Error("check sample count failed: " +
                std::to_string(out.result.run.samples.size()));
  }
  if (!out.result.report || !out.result.report->pass) {
    throw AuditError("error bound check failed: worst margin " +
                     std::to_string(out.result.report ? out.result.report->worst_margin : 0.0));
  }
  return out;
}

}  // namespace mhect
