#include "mhect/lmi_solver.h"

#include <cmath>
#include <limits>

#include "mhect/errors.h"

namespace mhect {

namespace {

// Barrier value -sum log det G_i(z); +inf if any block is not PD.
double LogBarrier(const LmiProgram& prog, const Vector& z) {
  double value = 0.0;
  for (const LmiBlock& block : prog.blocks) {
    Eigen::LLT<Matrix> llt(EvaluateBlock(block, z));
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const auto& l = llt.matrixLLT();
    for (int i = 0; i < l.rows(); ++i) {
      if (!(l(i, i) > 0.0)) return std::numeric_limits<double>::infinity();
      value -= 2.0 * std::log(l(i, i));
    }
  }
  return value;
}

}  // namespace

Matrix EvaluateBlock(const LmiBlock& block, const Vector& z) {
  Matrix g = block.f0;
  for (size_t k = 0; k < block.fk.size(); ++k) {
    if (block.fk[k].size() != 0 && z(k) != 0.0) g += z(k) * block.fk[k];
  }
  return g;
}

BarrierResult SolveLmiBarrier(const LmiProgram& prog, const Vector& z0,
                              const BarrierOptions& opts,
                              const std::function<bool(const Vector&)>& done) {
  const int nv = prog.num_vars;
  if (z0.size() != nv || prog.cost.size() != nv) {
    throw ConfigError("LMI program: dimension mismatch");
  }
  if (!std::isfinite(LogBarrier(prog, z0))) {
    throw ConfigError("LMI program: starting point not strictly feasible");
  }
  BarrierResult res;
  res.z = z0;
  double s = opts.initial_barrier_weight;
  auto merit = [&](const Vector& z) { return s * prog.cost.dot(z) + LogBarrier(prog, z); };

  while (true) {
    // Centering for the current weight.
    while (true) {
      if (res.newton_iters >= opts.max_newton_iters) {
        res.termination = "max_iters";
        res.objective = prog.cost.dot(res.z);
        return res;
      }
      Vector grad = s * prog.cost;
      Matrix hess = Matrix::Zero(nv, nv);
      for (const LmiBlock& block : prog.blocks) {
        const Matrix ginv = EvaluateBlock(block, res.z).llt().solve(
            Matrix::Identity(block.f0.rows(), block.f0.cols()));
        std::vector<Matrix> m(nv);
        for (int k = 0; k < nv; ++k) {
          if (k < static_cast<int>(block.fk.size()) && block.fk[k].size() != 0) {
            m[k] = ginv * block.fk[k];
            grad(k) -= m[k].trace();
          }
        }
        for (int k = 0; k < nv; ++k) {
          if (m[k].size() == 0) continue;
          for (int l = k; l < nv; ++l) {
            if (m[l].size() == 0) continue;
            const double v = (m[k].array() * m[l].transpose().array()).sum();
            hess(k, l) += v;
            if (l != k) hess(l, k) += v;
          }
        }
      }
      Eigen::LDLT<Matrix> ldlt(hess);
      const Vector step = -ldlt.solve(grad);
      const double decrement = -grad.dot(step);
      if (!step.allFinite()) {
        res.termination = "singular_hessian";
        res.objective = prog.cost.dot(res.z);
        return res;
      }
      if (0.5 * decrement <= opts.newton_tol) break;
      const double f0 = merit(res.z);
      double alpha = 1.0;
      Vector trial = res.z + step;
      double f1 = merit(trial);
      while (!(f1 <= f0 - opts.armijo * alpha * decrement)) {
        alpha *= opts.backtrack;
        if (alpha < 1e-20) break;
        trial = res.z + alpha * step;
        f1 = merit(trial);
      }
      ++res.newton_iters;
      if (alpha < 1e-20) break;  // no progress possible at this weight
      res.z = trial;
      if (done && done(res.z)) {
        res.stopped_early = true;
        res.termination = "target_reached";
        res.objective = prog.cost.dot(res.z);
        return res;
      }
    }
    if (1.0 / s <= opts.min_barrier_parameter) {
      res.termination = "barrier_converged";
      res.objective = prog.cost.dot(res.z);
      return res;
    }
    s *= opts.weight_growth;
  }
}

}  // namespace mhect
