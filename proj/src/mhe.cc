#include "mhect/mhe.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>

#include "mhect/discount.h"
#include "mhect/errors.h"
#include "mhect/grid.h"

namespace mhect {
namespace {

constexpr double kFixedDamping = 1e12;
constexpr double kMaxDamping = 1e16;
constexpr double kMeritNoise = 1e-13;

struct Stage {
  Vector x, r;
  Matrix jx, jw, fx, fw;
};

struct Evaluation {
  std::vector<Stage> stages;  // N stages
  Vector x_end, r_end;        // terminal node penalty
  Matrix j_end;
  Vector r_prior;
  double merit = 0.0;      // |r|^2 including penalties
  double objective = 0.0;  // J
  double max_violation = 0.0;
};

// One window problem: decision variables chi and N pieces of w on a dt grid.
class WindowProblem {
 public:
  WindowProblem(const SystemModel& model, const MheConfig& cfg,
                const Vector& prior, const PiecewiseSignal& u_seg,
                const PiecewiseSignal& y_seg, double window)
      : model_(model), n_(model.n()), q_(model.q()), p_(model.p()),
        dt_(cfg.dt), prior_(prior) {
    steps_ = GridSteps(window, dt_, "MHE window");
    const std::vector<double> omega = DiscountWeights(cfg.cert.lambda, dt_, steps_);
    sw_.resize(steps_);
    sy_.resize(steps_);
    for (long j = 0; j < steps_; ++j) {
      sw_[j] = std::sqrt(2.0 * omega[j]);
      sy_[j] = std::sqrt(omega[j]);
    }
    s_prior_ = std::sqrt(2.0 * std::pow(cfg.cert.lambda, window)) *
               CholeskyUpper(cfg.cert.P2);
    uq_ = CholeskyUpper(cfg.cert.Q);
    ur_ = CholeskyUpper(cfg.cert.R);
    if (steps_ > 0 && y_seg.dim() != p_) throw ConfigError("MHE: output segment dimension mismatch");
    if (steps_ > 0) {
      GridIndexer yi(y_seg, 0.0, dt_);
      if (y_seg.t0() != 0.0 || yi(steps_ - 1) >= y_seg.size()) {
        throw ConfigError("MHE: output segment must cover [0, T_ti)");
      }
      for (long j = 0; j < steps_; ++j) y_.push_back(y_seg.piece(yi(j)));
    }
    if (model.m() > 0 && steps_ > 0) {
      GridIndexer ui(u_seg, 0.0, dt_);
      if (u_seg.dim() != model.m() || ui(steps_ - 1) >= u_seg.size()) {
        throw ConfigError("MHE: input segment must cover [0, T_ti)");
      }
      for (long j = 0; j < steps_; ++j) u_.push_back(u_seg.piece(ui(j)));
    } else {
      u_.assign(steps_, Vector(0));
    }
  }

  long steps() const { return steps_; }
  const std::vector<Vector>& u() const { return u_; }
  const Matrix& s_prior() const { return s_prior_; }

  // Residuals, merit and (optionally) Jacobians at (chi, w). Returns false on
  // a non-finite rollout.
  bool Evaluate(const Vector& chi, const std::vector<Vector>& w, double weight,
                bool jac, Evaluation* ev) const {
    const double sp = std::sqrt(weight);
    const Box& xb = model_.X();
    const Box& yb = model_.Y();
    ev->stages.resize(steps_);
    ev->r_prior = s_prior_ * (chi - prior_);
    double objective = ev->r_prior.squaredNorm();
    double merit = objective;
    double worst = 0.0;
    Vector x = chi;
    const int rows = q_ + 2 * p_ + n_;
    StepJacobians sj;
    for (long j = 0; j < steps_; ++j) {
      Stage& st = ev->stages[j];
      st.x = x;
      const Vector& uj = u_[j];
      const Vector& wj = w[j];
      const Vector ybar = model_.h(x, uj, wj);
      const Vector xv = xb.Violation(x);
      const Vector yv = yb.Violation(ybar);
      st.r.resize(rows);
      st.r.segment(0, q_) = sw_[j] * (uq_ * wj);
      st.r.segment(q_, p_) = sy_[j] * (ur_ * (y_[j] - ybar));
      st.r.segment(q_ + p_, n_) = sp * xv;
      st.r.segment(q_ + p_ + n_, p_) = sp * yv;
      if (!st.r.allFinite()) return false;
      const double base = st.r.head(q_ + p_).squaredNorm();
      objective += base;
      merit += st.r.squaredNorm();
      worst = std::max({worst, xv.cwiseAbs().maxCoeff(),
                        p_ > 0 ? yv.cwiseAbs().maxCoeff() : 0.0});
      if (jac) {
        const Matrix hx = model_.JacHx(x, uj, wj);
        const Matrix hw = model_.JacHw(x, uj, wj);
        st.jx = Matrix::Zero(rows, n_);
        st.jw = Matrix::Zero(rows, q_);
        st.jw.topRows(q_) = sw_[j] * uq_;
        st.jx.middleRows(q_, p_) = -sy_[j] * (ur_ * hx);
        st.jw.middleRows(q_, p_) = -sy_[j] * (ur_ * hw);
        for (int i = 0; i < n_; ++i) {
          if (xv(i) != 0.0) st.jx(q_ + p_ + i, i) = sp;
        }
        for (int i = 0; i < p_; ++i) {
          if (yv(i) != 0.0) {
            st.jx.row(q_ + p_ + n_ + i) = sp * hx.row(i);
            st.jw.row(q_ + p_ + n_ + i) = sp * hw.row(i);
          }
        }
        x = Rk4Step(model_, x, uj, wj, dt_, &sj);
        st.fx = sj.dx;
        st.fw = sj.dw;
      } else {
        x = Rk4Step(model_, x, uj, wj, dt_);
      }
      if (!x.allFinite()) return false;
    }
    ev->x_end = x;
    const Vector xv = xb.Violation(x);
    ev->r_end = sp * xv;
    merit += ev->r_end.squaredNorm();
    worst = std::max(worst, xv.cwiseAbs().maxCoeff());
    if (jac) {
      ev->j_end = Matrix::Zero(n_, n_);
      for (int i = 0; i < n_; ++i) {
        if (xv(i) != 0.0) ev->j_end(i, i) = sp;
      }
    }
    ev->merit = merit;
    ev->objective = objective;
    ev->max_violation = worst;
    return std::isfinite(merit);
  }

  // Gradient of |r|^2 / 2 by the adjoint recursion.
  void Gradient(const Evaluation& ev, Vector* g_chi, std::vector<Vector>* g_w) const {
    Vector lam = ev.j_end.transpose() * ev.r_end;
    g_w->resize(steps_);
    for (long j = steps_ - 1; j >= 0; --j) {
      const Stage& st = ev.stages[j];
      (*g_w)[j] = st.jw.transpose() * st.r + st.fw.transpose() * lam;
      lam = st.jx.transpose() * st.r + st.fx.transpose() * lam;
    }
    *g_chi = lam + s_prior_.transpose() * ev.r_prior;
  }

  // Damped Gauss-Newton step by a backward Riccati sweep and forward
  // rollout. d_chi / d_w are per-coordinate damping added to the diagonal.
  bool Step(const Evaluation& ev, const Vector& d_chi,
            const std::vector<Vector>& d_w, Vector* dchi,
            std::vector<Vector>* dw) const {
    std::vector<Matrix> gains(steps_);
    std::vector<Vector> ffwd(steps_);
    Matrix s = ev.j_end.transpose() * ev.j_end;
    Vector v = ev.j_end.transpose() * ev.r_end;
    for (long j = steps_ - 1; j >= 0; --j) {
      const Stage& st = ev.stages[j];
      const Matrix sfx = s * st.fx;
      const Matrix sfw = s * st.fw;
      Matrix qxx = st.jx.transpose() * st.jx + st.fx.transpose() * sfx;
      Matrix qww = st.jw.transpose() * st.jw + st.fw.transpose() * sfw;
      qww.diagonal() += d_w[j];
      const Matrix qwx = st.jw.transpose() * st.jx + st.fw.transpose() * sfx;
      const Vector qx = st.jx.transpose() * st.r + st.fx.transpose() * v;
      const Vector qw = st.jw.transpose() * st.r + st.fw.transpose() * v;
      Eigen::LLT<Matrix> llt(qww);
      if (llt.info() != Eigen::Success) return false;
      gains[j] = -llt.solve(qwx);
      ffwd[j] = -llt.solve(qw);
      s = Symmetrize(qxx + qwx.transpose() * gains[j]);
      v = qx + qwx.transpose() * ffwd[j];
    }
    Matrix h0 = s + s_prior_.transpose() * s_prior_;
    h0.diagonal() += d_chi;
    const Vector g0 = v + s_prior_.transpose() * ev.r_prior;
    Eigen::LLT<Matrix> llt(h0);
    if (llt.info() != Eigen::Success) return false;
    *dchi = -llt.solve(g0);
    dw->resize(steps_);
    Vector dx = *dchi;
    for (long j = 0; j < steps_; ++j) {
      const Stage& st = ev.stages[j];
      (*dw)[j] = gains[j] * dx + ffwd[j];
      dx = st.fx * dx + st.fw * (*dw)[j];
    }
    return dchi->allFinite();
  }

  // |r|^2 - |r + J d|^2 for a given step, accumulated term by term so small
  // steps do not cancel.
  double PredictedReduction(const Evaluation& ev, const Vector& dchi,
                            const std::vector<Vector>& dw) const {
    auto term = [](const Vector& r, const Vector& jd) {
      return -(2.0 * r.dot(jd) + jd.squaredNorm());
    };
    double total = term(ev.r_prior, s_prior_ * dchi);
    Vector dx = dchi;
    for (long j = 0; j < steps_; ++j) {
      const Stage& st = ev.stages[j];
      total += term(st.r, st.jx * dx + st.jw * dw[j]);
      dx = st.fx * dx + st.fw * dw[j];
    }
    return total + term(ev.r_end, ev.j_end * dx);
  }

 private:
  const SystemModel& model_;
  int n_, q_, p_;
  double dt_;
  Vector prior_;
  long steps_ = 0;
  std::vector<double> sw_, sy_;
  Matrix s_prior_, uq_, ur_;
  std::vector<Vector> u_, y_;
};

// Coordinates sitting on a bound with the gradient pointing outward.
Vector FixedDamping(const Vector& z, const Vector& g, const Box& box) {
  Vector d = Vector::Zero(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double tol = 1e-12 * std::max(1.0, std::abs(z(i)));
    if ((z(i) <= box.lo(i) + tol && g(i) > 0.0) ||
        (z(i) >= box.hi(i) - tol && g(i) < 0.0)) {
      d(i) = kFixedDamping;
    }
  }
  return d;
}

double ProjectedGradientSq(const Vector& z, const Vector& g, const Box& box) {
  return (z - box.Project(z - g)).squaredNorm();
}

MheSolution SolveWindow(const SystemModel& model, const MheConfig& cfg,
                        const Vector& prior_in, const PiecewiseSignal& u_seg,
                        const PiecewiseSignal& y_seg, double t_i, double window,
                        const MheGuess* warm) {
  const int n = model.n();
  const int q = model.q();
  if (prior_in.size() != n) throw ConfigError("MHE: prior dimension mismatch");
  const Box& xb = model.X();
  const Box& wb = model.W();
  MheSolution sol;
  sol.t_i = t_i;
  sol.window = window;
  sol.prior = xb.Project(prior_in);
  sol.stats.prior_projected = !xb.Contains(prior_in);

  WindowProblem prob(model, cfg, sol.prior, u_seg, y_seg, window);
  const long steps = prob.steps();
  const SolverOptions& opt = cfg.solver;
  double weight = opt.penalty_weight;

  Vector chi = sol.prior;
  std::vector<Vector> w(steps, Vector::Zero(q));
  if (warm != nullptr) {
    if (warm->chi.size() == n) chi = xb.Project(warm->chi);
    for (long j = 0; j < steps && j < static_cast<long>(warm->w.size()); ++j) {
      if (warm->w[j].size() == q) w[j] = wb.Project(warm->w[j]);
    }
  }

  Evaluation ev;
  if (!prob.Evaluate(chi, w, weight, true, &ev)) {
    chi = sol.prior;
    std::fill(w.begin(), w.end(), Vector::Zero(q));
    ++sol.stats.divergence_retries;
    if (!prob.Evaluate(chi, w, weight, true, &ev)) {
      throw DivergenceError("MHE: nominal rollout from the prior diverges", t_i);
    }
  }

  double mu = opt.lm_damping;
  double nu = 2.0;
  Vector g_chi;
  std::vector<Vector> g_w;
  Evaluation trial;
  Vector dchi;
  std::vector<Vector> dw;
  std::string termination = "max_iters";
  int iter = 0;
  double grad_norm = 0.0;
  for (;; ++iter) {
    prob.Gradient(ev, &g_chi, &g_w);
    // Gradient of the merit |r|^2 is twice the adjoint gradient.
    double pg = ProjectedGradientSq(chi, 2.0 * g_chi, xb);
    for (long j = 0; j < steps; ++j) pg += ProjectedGradientSq(w[j], 2.0 * g_w[j], wb);
    grad_norm = std::sqrt(pg);
    if (grad_norm <= opt.grad_tol) {
      if (ev.max_violation <= opt.constraint_tol) {
        termination = "converged";
        break;
      }
    }
    if (iter >= opt.max_iters) break;

    const Vector d_chi = FixedDamping(chi, g_chi, xb).array() + mu;
    std::vector<Vector> d_w(steps);
    for (long j = 0; j < steps; ++j) d_w[j] = FixedDamping(w[j], g_w[j], wb).array() + mu;

    bool accepted = false;
    if (prob.Step(ev, d_chi, d_w, &dchi, &dw)) {
      Vector chi_t = xb.Project(chi + dchi);
      std::vector<Vector> w_t(steps);
      for (long j = 0; j < steps; ++j) w_t[j] = wb.Project(w[j] + dw[j]);
      dchi = chi_t - chi;
      for (long j = 0; j < steps; ++j) dw[j] = w_t[j] - w[j];
      const double predicted = prob.PredictedReduction(ev, dchi, dw);
      // Below this the merit difference is rounding noise; accept steps that
      // do not raise the merit beyond it.
      const double noise = kMeritNoise * ev.merit;
      if (predicted > 0.0) {
        if (prob.Evaluate(chi_t, w_t, weight, true, &trial)) {
          const double actual = ev.merit - trial.merit;
          const double ratio = actual / predicted;
          if (ratio > 1e-4 || (predicted <= noise && actual >= -noise)) {
            chi = std::move(chi_t);
            w = std::move(w_t);
            std::swap(ev, trial);
            mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * std::min(ratio, 1.0) - 1.0, 3));
            mu = std::max(mu, 1e-15);
            nu = 2.0;
            accepted = true;
          }
        } else {
          ++sol.stats.divergence_retries;
        }
      }
    }
    if (accepted) {
      sol.stats.merit_history.push_back(ev.merit);
      sol.stats.weight_history.push_back(weight);
      if (ev.max_violation > opt.constraint_tol) {
        weight *= 2.0;
        prob.Evaluate(chi, w, weight, true, &ev);
      }
      continue;
    }
    if (ev.max_violation > opt.constraint_tol && mu > 1e6) {
      weight *= 2.0;
      prob.Evaluate(chi, w, weight, true, &ev);
      mu = opt.lm_damping;
      nu = 2.0;
      continue;
    }
    mu *= nu;
    nu *= 2.0;
    if (mu > kMaxDamping) {
      termination = "stalled";
      break;
    }
  }

  sol.stats.iterations = iter;
  sol.stats.grad_norm = grad_norm;
  sol.stats.termination = termination;
  sol.stats.max_violation = ev.max_violation;
  sol.stats.feasible = ev.max_violation <= opt.constraint_tol;
  sol.stats.penalty_weight = weight;

  sol.chi_star = chi;
  sol.w_star = PiecewiseSignal(0.0, cfg.dt, std::move(w));
  const PiecewiseSignal u_grid =
      model.m() > 0 ? PiecewiseSignal(0.0, cfg.dt, prob.u()) : NoInput(0.0, cfg.dt, steps);
  if (steps == 0) {
    sol.x_star.t0 = 0.0;
    sol.x_star.dt = cfg.dt;
    sol.x_star.states = {chi};
    sol.y_star = PiecewiseSignal(0.0, cfg.dt, {});
  } else {
    sol.x_star = Integrate(model, chi, u_grid, sol.w_star, 0.0, window, cfg.dt);
    sol.y_star = OutputAlong(model, sol.x_star, u_grid, sol.w_star);
  }
  sol.cost = ev.objective;
  return sol;
}

}  // namespace

void ValidateConfig(const MheConfig& cfg, const SamplingSet& sampling) {
  if (!(cfg.dt > 0.0)) throw ConfigError("MHE: dt must be positive");
  if (GridSteps(cfg.horizon, cfg.dt, "horizon T") < 1) {
    throw ConfigError("MHE: horizon must be positive");
  }
  cfg.cert.Validate();
  if (cfg.solver.max_iters < 0 || !(cfg.solver.grad_tol > 0.0) ||
      !(cfg.solver.lm_damping > 0.0) || !(cfg.solver.penalty_weight > 0.0)) {
    throw ConfigError("MHE: invalid solver options");
  }
  if (!sampling.empty()) {
    const double delta_bar = sampling.DeltaBar();
    if (!(cfg.horizon > delta_bar)) {
      throw HorizonError("horizon T=" + std::to_string(cfg.horizon) +
                         " must exceed delta_bar=" + std::to_string(delta_bar));
    }
  }
  if (cfg.equidistant_mode) {
    if (cfg.sampler.kind != SamplerSpec::Kind::kEquidistant) {
      throw ConfigError("equidistant mode needs an equidistant sampler");
    }
    if (!IsGridMultiple(cfg.horizon, cfg.sampler.period)) {
      throw ConfigError("equidistant mode needs T to be a multiple of the period");
    }
  }
}

double MheObjective(const MheConfig& cfg, const Vector& prior, const Vector& chi,
                    const PiecewiseSignal& w, const PiecewiseSignal& y_meas,
                    const PiecewiseSignal& y_est, double window) {
  const long steps = GridSteps(window, cfg.dt, "T_ti");
  const std::vector<double> omega = DiscountWeights(cfg.cert.lambda, cfg.dt, steps);
  double total = 2.0 * WeightedSquaredNorm(chi - prior, cfg.cert.P2) *
                 std::pow(cfg.cert.lambda, window);
  if (steps == 0) return total;
  const GridIndexer wi(w, w.t0(), cfg.dt);
  const GridIndexer mi(y_meas, y_meas.t0(), cfg.dt);
  const GridIndexer ei(y_est, y_est.t0(), cfg.dt);
  if (wi(steps - 1) >= w.size() || mi(steps - 1) >= y_meas.size() ||
      ei(steps - 1) >= y_est.size()) {
    throw ConfigError("MHE objective: signals do not cover the window");
  }
  for (long j = 0; j < steps; ++j) {
    total += omega[j] *
             (2.0 * WeightedSquaredNorm(w.piece(wi(j)), cfg.cert.Q) +
              WeightedSquaredNorm(y_meas.piece(mi(j)) - y_est.piece(ei(j)), cfg.cert.R));
  }
  return total;
}

MheSolution SolveMhe(const SystemModel& model, const MheConfig& cfg,
                     const Vector& prior, const PiecewiseSignal& u_seg,
                     const PiecewiseSignal& y_seg, double t_i,
                     const MheGuess* warm) {
  if (!(t_i >= 0.0)) throw ConfigError("MHE: t_i must be >= 0");
  return SolveWindow(model, cfg, prior, u_seg, y_seg, t_i,
                     std::min(t_i, cfg.horizon), warm);
}

MheSolution SolveFie(const SystemModel& model, const MheConfig& cfg,
                     const Vector& chi_hat, const PiecewiseSignal& u,
                     const PiecewiseSignal& y, double t_i) {
  const long steps = GridSteps(t_i, cfg.dt, "t_i");
  const PiecewiseSignal y_seg = y.Resample(0.0, cfg.dt, steps);
  const PiecewiseSignal u_seg =
      model.m() > 0 ? u.Resample(0.0, cfg.dt, steps) : NoInput(0.0, cfg.dt, steps);
  return SolveWindow(model, cfg, chi_hat, u_seg, y_seg, t_i, t_i, nullptr);
}

EstimationRun RunMhe(const SystemModel& model, const MheConfig& cfg,
                     const Vector& chi_hat, const MeasurementData& data,
                     double t_sim) {
  using Clock = std::chrono::steady_clock;
  const auto run_start = Clock::now();
  const double dt = cfg.dt;
  const long final_step = GridSteps(t_sim, dt, "t_sim");
  const long horizon_steps = GridSteps(cfg.horizon, dt, "horizon T");
  if (chi_hat.size() != model.n()) throw ConfigError("MHE: chi_hat dimension mismatch");
  if (data.y.dim() != model.p() || data.y.t0() > 0.0 ||
      data.y.end_time() < t_sim - kGridTolerance) {
    throw ConfigError("MHE: output data must cover [0, t_sim]");
  }
  const bool online = cfg.sampler.kind == SamplerSpec::Kind::kEventTriggered &&
                      std::isfinite(cfg.sampler.threshold);
  ValidateSamplerSpec(cfg.sampler, dt, cfg.horizon);
  SamplingSet planned;
  if (!online) {
    planned = MakeSampler(cfg.sampler, t_sim, dt);
    ValidateConfig(cfg, planned);
  } else {
    ValidateConfig(cfg, SamplingSet());
  }

  EstimationRun run;
  run.chi_hat = chi_hat;
  run.data = data;
  std::vector<Vector> est{chi_hat};
  run.source.push_back(-1);
  std::vector<long> steps;

  long prev_index = -1;
  long prev_start = 0;
  long last = 0;
  size_t next_planned = 0;
  for (;;) {
    long s;
    if (online) {
      if (last >= final_step) break;
      s = NextEventSampleStep(cfg.sampler, model, est.back(), last, final_step,
                              data.u, data.y, cfg.cert.R, dt);
    } else {
      if (next_planned >= planned.size()) break;
      s = planned.steps()[next_planned++];
    }
    if (s <= last && !steps.empty()) break;
    const long window_steps = std::min(s, horizon_steps);
    const long start = s - window_steps;
    const double t_i = static_cast<double>(s) * dt;
    const double window = static_cast<double>(window_steps) * dt;

    SampleRecord rec;
    rec.t_i = t_i;
    rec.window = window;
    rec.window_start_step = start;
    rec.prior = est.at(start);

    const PiecewiseSignal y_seg =
        data.y.Resample(static_cast<double>(start) * dt, dt, window_steps);
    PiecewiseSignal y_rel(0.0, dt, y_seg.values());
    PiecewiseSignal u_rel = NoInput(0.0, dt, window_steps);
    if (model.m() > 0) {
      const PiecewiseSignal u_seg =
          data.u.Resample(static_cast<double>(start) * dt, dt, window_steps);
      u_rel = PiecewiseSignal(0.0, dt, u_seg.values());
    }

    MheGuess guess;
    const MheGuess* warm = nullptr;
    if (prev_index >= 0 && start >= prev_start) {
      const MheSolution* prev = &run.solutions[prev_index];
      const long shift = start - prev_start;
      const long prev_steps = prev->w_star.size();
      if (shift <= prev_steps) {
        guess.chi = prev->x_star.states[shift];
        for (long j = shift; j < prev_steps; ++j) guess.w.push_back(prev->w_star.piece(j));
        warm = &guess;
      }
    }

    const auto t0 = Clock::now();
    MheSolution sol;
    try {
      sol = SolveMhe(model, cfg, rec.prior, u_rel, y_rel, t_i, warm);
    } catch (const Error& e) {
      // Keep estimating: hold the prior over the segment.
      sol.t_i = t_i;
      sol.window = window;
      sol.prior = rec.prior;
      sol.chi_star = rec.prior;
      sol.w_star = PiecewiseSignal::Zero(model.q(), 0.0, dt, window_steps);
      sol.x_star.t0 = 0.0;
      sol.x_star.dt = dt;
      sol.x_star.states.assign(window_steps + 1, rec.prior);
      sol.y_star = PiecewiseSignal::Zero(model.p(), 0.0, dt, window_steps);
      sol.cost = std::numeric_limits<double>::quiet_NaN();
      sol.stats.termination = std::string("error: ") + e.what();
      sol.stats.feasible = false;
    }
    rec.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
    rec.cost = sol.cost;
    rec.stats = sol.stats;
    rec.x_hat = sol.x_star.states.back();

    const int index = static_cast<int>(run.samples.size());
    for (long k = last + 1; k <= s; ++k) {
      est.push_back(sol.x_star.states[k - start]);
      run.source.push_back(index);
    }
    steps.push_back(s);
    run.samples.push_back(std::move(rec));
    run.solutions.push_back(std::move(sol));
    prev_index = static_cast<long>(run.solutions.size()) - 1;
    prev_start = start;
    last = s;
  }

  run.sampling = SamplingSet::FromSteps(steps, dt);
  if (online) ValidateConfig(cfg, run.sampling);
  run.estimate.t0 = 0.0;
  run.estimate.dt = dt;
  run.estimate.states = std::move(est);
  run.total_time = std::chrono::duration<double>(Clock::now() - run_start).count();
  return run;
}

}  // namespace mhect
