#include "mhect/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "mhect/discount.h"
#include "mhect/errors.h"
#include "mhect/grid.h"

namespace mhect {
namespace {

void CheckRho(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw ConfigError("rho must lie in (0, 1), got " + std::to_string(rho));
  }
}

void CheckFactor(int factor) {
  if (factor != 8 && factor != 4) throw ConfigError("bound factor must be 8 or 4");
}

}  // namespace

double Theorem1Bound(const DetectabilityCertificate& cert, double rho,
                     const Vector& chi, const Vector& chi_hat,
                     const PiecewiseSignal& w, double t_i, int factor) {
  CheckRho(rho);
  CheckFactor(factor);
  const double initial = 4.0 * std::pow(rho, t_i) * WeightedSquaredNorm(chi - chi_hat, cert.P2);
  if (t_i <= 0.0) return initial;
  const Matrix& q = cert.Q;
  const double energy = DiscountedIntegral(
      rho, t_i, 0.0, t_i, w, [&q](const Vector& v) { return WeightedSquaredNorm(v, q); });
  return initial + factor * energy;
}

double Prop3Bound(const DetectabilityCertificate& cert, double t, double t_i,
                  double window, double u_prior, const PiecewiseSignal& w) {
  if (t > t_i + kGridTolerance) {
    throw DomainError("window bound needs t <= t_i");
  }
  const double lambda = cert.lambda;
  const double c = 4.0 * GeneralizedMaxEigenvalue(cert.P2, cert.P1);
  double energy = 0.0;
  if (window > 0.0) {
    const Matrix& q = cert.Q;
    energy = DiscountedIntegral(lambda, t_i, t_i - window, t_i, w,
                                [&q](const Vector& v) { return WeightedSquaredNorm(v, q); });
  }
  return std::pow(lambda, -(t_i - t)) *
         (c * std::pow(lambda, window) * u_prior + 4.0 * energy);
}

SupBoundConstants ComputeSupBoundConstants(const DetectabilityCertificate& cert,
                                           double rho, int factor) {
  CheckRho(rho);
  CheckFactor(factor);
  const double p1_min = MinEigenvalue(cert.P1);
  SupBoundConstants c;
  c.C = std::sqrt(8.0 * MaxEigenvalue(cert.P2) / p1_min);
  c.rho_s = std::sqrt(rho);
  c.gamma_coeff = std::sqrt(2.0 * factor * MaxEigenvalue(cert.Q) /
                            (-p1_min * std::log(rho)));
  return c;
}

BoundReport AuditRun(const SystemModel& model, const EstimationRun& run,
                     const GroundTruth& truth, const MheConfig& cfg) {
  if (truth.empty() || truth.w.size() == 0) {
    throw AuditError("audit: run carries no ground truth");
  }
  const DetectabilityCertificate& cert = cfg.cert;
  BoundReport rep;
  rep.horizon = cfg.horizon;
  rep.equidistant_mode = cfg.equidistant_mode;
  rep.factor = cfg.equidistant_mode ? 4 : 8;
  rep.delta_bar = cfg.equidistant_mode ? 0.0 : run.sampling.DeltaBar();
  rep.min_horizon = MinHorizon(cert, rep.delta_bar);
  if (!(cfg.horizon > rep.min_horizon)) {
    throw HorizonError("audit: T=" + std::to_string(cfg.horizon) +
                       " does not exceed the minimal horizon " +
                       std::to_string(rep.min_horizon));
  }
  rep.rho = ContractionRate(cert, cfg.horizon, rep.delta_bar);
  const double span = cfg.horizon - rep.delta_bar;
  const double rate_lhs = std::pow(rep.rho, span);
  const double rate_rhs = 4.0 * GeneralizedMaxEigenvalue(cert.P2, cert.P1) *
                       std::pow(cert.lambda, span);
  rep.rate_residual = std::abs(rate_lhs - rate_rhs) / rate_rhs;
  rep.sup = ComputeSupBoundConstants(cert, rep.rho, rep.factor);

  const double dt = cfg.dt;
  const Vector no_u(0);
  const double chi_gap = (truth.chi - run.chi_hat).norm();
  double w_sup = 0.0;
  long w_pieces_seen = 0;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  rep.worst_relative_margin = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < run.samples.size(); ++i) {
    const SampleRecord& rec = run.samples[i];
    SampleBound b;
    b.t_i = rec.t_i;
    const Vector& x = truth.x.At(rec.t_i);
    const Vector e = x - rec.x_hat;
    b.lhs = WeightedSquaredNorm(e, cert.P1);
    b.rhs = Theorem1Bound(cert, rep.rho, truth.chi, run.chi_hat, truth.w, rec.t_i,
                          rep.factor);
    b.margin = b.rhs - b.lhs;
    b.pass = b.margin >= -1e-9 * b.rhs;

    const double start = static_cast<double>(rec.window_start_step) * dt;
    const Vector& x_start = truth.x.At(start);
    b.u_prior = WeightedSquaredNorm(x_start - rec.prior, cert.P2);
    b.prop3_rhs = Prop3Bound(cert, rec.t_i, rec.t_i, rec.window, b.u_prior, truth.w);
    b.prop3_pass = b.lhs <= b.prop3_rhs * (1.0 + 1e-6) + 1e-14;

    const long steps = GridSteps(rec.window, dt, "window");
    b.cost = rec.cost;
    if (steps > 0) {
      const PiecewiseSignal w_seg = truth.w.Resample(start, dt, steps);
      const PiecewiseSignal y_seg = run.data.y.Resample(start, dt, steps);
      std::vector<Vector> y_cand;
      y_cand.reserve(steps);
      for (long j = 0; j < steps; ++j) {
        const double t = start + static_cast<double>(j) * dt;
        const Vector& u = model.m() > 0 ? truth.u.Eval(t) : no_u;
        y_cand.push_back(model.h(truth.x.At(t), u, w_seg.piece(j)));
      }
      b.candidate_cost = MheObjective(cfg, rec.prior, x_start, w_seg, y_seg,
                                      PiecewiseSignal(start, dt, std::move(y_cand)),
                                      rec.window);
    } else {
      b.candidate_cost = 2.0 * WeightedSquaredNorm(x_start - rec.prior, cert.P2);
    }
    b.optimality_pass = std::isfinite(b.cost) &&
                        b.cost <= b.candidate_cost * (1.0 + 1e-6) + 1e-12;

    const long pieces = truth.w.PieceIndex(std::max(0.0, rec.t_i - 0.5 * dt)) + 1;
    for (; w_pieces_seen < pieces; ++w_pieces_seen) {
      w_sup = std::max(w_sup, truth.w.piece(w_pieces_seen).norm());
    }
    b.error_norm = e.norm();
    b.sup_bound = std::max(rep.sup.C * chi_gap * std::pow(rep.sup.rho_s, rec.t_i),
                           rep.sup.gamma_coeff * w_sup);
    b.sup_pass = !b.pass || b.error_norm <= b.sup_bound * (1.0 + 1e-9);

    rep.worst_margin = std::min(rep.worst_margin, b.margin);
    if (b.rhs > 0.0) {
      rep.worst_relative_margin = std::min(rep.worst_relative_margin, b.margin / b.rhs);
    }
    rep.pass = rep.pass && b.pass;
    rep.prop3_pass = rep.prop3_pass && b.prop3_pass;
    rep.optimality_pass = rep.optimality_pass && b.optimality_pass;
    rep.sup_pass = rep.sup_pass && b.sup_pass;
    rep.samples.push_back(b);
  }
  return rep;
}

void WriteBoundsCsv(std::ostream& os, const BoundReport& report) {
  os << "t_i,lhs,rhs,margin,U_prior,prop3_rhs\n";
  char buf[256];
  for (const SampleBound& b : report.samples) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", b.t_i,
                  b.lhs, b.rhs, b.margin, b.u_prior, b.prop3_rhs);
    os << buf;
  }
}

nlohmann::json BoundReportSummary(const BoundReport& report) {
  nlohmann::json j;
  j["rho"] = report.rho;
  j["horizon"] = report.horizon;
  j["delta_bar"] = report.delta_bar;
  j["min_horizon"] = report.min_horizon;
  j["factor"] = report.factor;
  j["equidistant_mode"] = report.equidistant_mode;
  j["rate_residual"] = report.rate_residual;
  j["sup_constants"] = {{"C", report.sup.C},
                        {"rho_s", report.sup.rho_s},
                        {"gamma_coeff", report.sup.gamma_coeff}};
  j["samples"] = report.samples.size();
  j["worst_margin"] = report.worst_margin;
  j["worst_relative_margin"] = report.worst_relative_margin;
  j["pass"] = report.pass;
  j["prop3_pass"] = report.prop3_pass;
  j["optimality_pass"] = report.optimality_pass;
  j["sup_pass"] = report.sup_pass;
  return j;
}

}  // namespace mhect
