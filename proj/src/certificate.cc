#include "mhect/certificate.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mhect/polynomial_model.h"

namespace mhect {

using nlohmann::json;

namespace {

// Symmetric basis E_ij (i <= j) used to vectorize symmetric variables.
std::vector<Matrix> SymmetricBasis(int dim) {
  std::vector<Matrix> basis;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      Matrix e = Matrix::Zero(dim, dim);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      basis.push_back(std::move(e));
    }
  }
  return basis;
}

Vector VectorizeSymmetric(const Matrix& m) {
  const int dim = static_cast<int>(m.rows());
  Vector v(dim * (dim + 1) / 2);
  int k = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) v(k++) = m(i, j);
  }
  return v;
}

Matrix Unvectorize(const Vector& v, int offset, int dim) {
  Matrix m(dim, dim);
  int k = offset;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      m(i, j) = v(k);
      m(j, i) = v(k);
      ++k;
    }
  }
  return m;
}

std::vector<double> AxisSamples(double lo, double hi, int count) {
  if (count < 1) throw ConfigError("grid: axis count must be >= 1");
  if (count == 1 || lo == hi) return {0.5 * (lo + hi)};
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  }
  return out;
}

void CheckSymmetricPd(const Matrix& m, const char* name) {
  if (!IsSymmetricPositiveDefinite(m, 1e-9)) {
    throw ConfigError(std::string("certificate: ") + name +
                      " must be symmetric positive definite");
  }
}

}  // namespace

std::vector<GridPoint> GridPoints(const CertificateDomain& domain,
                                  const GridSpec& grid) {
  const int n = domain.X.dim(), m = domain.U.dim(), q = domain.W.dim();
  Vector lo(n + m + q), hi(n + m + q);
  lo << domain.X.lo, domain.U.lo, domain.W.lo;
  hi << domain.X.hi, domain.U.hi, domain.W.hi;
  if (!lo.allFinite() || !hi.allFinite()) {
    throw ConfigError("grid: certificate domain must be bounded");
  }
  std::vector<Vector> stacked;
  if (grid.vertices_only) {
    stacked = Box(lo, hi).Vertices();
  } else {
    if (static_cast<int>(grid.counts.size()) != n + m + q) {
      throw ConfigError("grid: need one count per axis of X x U x W");
    }
    stacked.assign(1, Vector(n + m + q));
    for (int a = 0; a < n + m + q; ++a) {
      std::vector<Vector> next;
      for (double v : AxisSamples(lo(a), hi(a), grid.counts[a])) {
        for (const Vector& partial : stacked) {
          Vector z = partial;
          z(a) = v;
          next.push_back(std::move(z));
        }
      }
      stacked = std::move(next);
    }
  }
  if (stacked.empty()) throw ConfigError("grid: no sample points");
  std::vector<GridPoint> points;
  points.reserve(stacked.size());
  for (const Vector& z : stacked) {
    points.push_back({z.head(n), z.segment(n, m), z.tail(q)});
  }
  return points;
}

DetectabilityCertificate DetectabilityCertificate::FromLmi(
    const Matrix& P, const Matrix& Q, const Matrix& R, double lambda,
    const CertificateDomain& domain) {
  DetectabilityCertificate c;
  c.P1 = P;
  c.P2 = P;
  c.Q = Q;
  c.R = R;
  c.lambda = lambda;
  c.kappa = -std::log(lambda);
  c.witness = {P, Q, R};
  c.domain = domain;
  return c;
}

void DetectabilityCertificate::Validate() const {
  CheckSymmetricPd(P1, "P1");
  CheckSymmetricPd(P2, "P2");
  CheckSymmetricPd(Q, "Q");
  CheckSymmetricPd(R, "R");
  if (P1.rows() != P2.rows()) throw ConfigError("certificate: P1/P2 size");
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw ConfigError("certificate: lambda must lie in (0, 1)");
  }
  if (std::abs(kappa + std::log(lambda)) > 1e-12) {
    throw ConfigError("certificate: kappa != -ln(lambda)");
  }
  const double gap = MinEigenvalue(Symmetrize(P2 - P1));
  if (gap < -1e-10 * std::max(1.0, MaxEigenvalue(Symmetrize(P2)))) {
    throw ConfigError("certificate: P1 <= P2 violated");
  }
}

Linearization Linearize(const SystemModel& model, const Vector& x,
                        const Vector& u, const Vector& w) {
  return {model.JacFx(x, u, w), model.JacFw(x, u, w), model.JacHx(x, u, w),
          model.JacHw(x, u, w)};
}

Matrix LmiMatrix(const Linearization& lin, const Matrix& P, const Matrix& Q,
                 const Matrix& R, double kappa) {
  const Eigen::Index n = lin.A.rows(), q = lin.B.cols();
  if (lin.A.cols() != n || lin.B.rows() != n || P.rows() != n || P.cols() != n ||
      Q.rows() != q || Q.cols() != q || lin.C.cols() != n ||
      lin.D.cols() != q || R.rows() != lin.C.rows() ||
      R.cols() != lin.C.rows() || lin.D.rows() != lin.C.rows()) {
    throw ConfigError("LMI: dimension mismatch");
  }
  Matrix m(n + q, n + q);
  const Matrix rc = R * lin.C;
  const Matrix rd = R * lin.D;
  m.topLeftCorner(n, n) = P * lin.A + lin.A.transpose() * P + kappa * P -
                          lin.C.transpose() * rc;
  m.topRightCorner(n, q) = P * lin.B - lin.C.transpose() * rd;
  m.bottomLeftCorner(q, n) = lin.B.transpose() * P - lin.D.transpose() * rc;
  m.bottomRightCorner(q, q) = -lin.D.transpose() * rd - Q;
  return Symmetrize(m);
}

Matrix LmiMatrix(const SystemModel& model, const Matrix& P, const Matrix& Q,
                 const Matrix& R, double kappa, const Vector& x,
                 const Vector& u, const Vector& w) {
  return LmiMatrix(Linearize(model, x, u, w), P, Q, R, kappa);
}

VerificationReport VerifyCertificate(const SystemModel& model,
                                     const DetectabilityCertificate& cert,
                                     const GridSpec& grid, double tol_psd) {
  const CertificateDomain& dom = cert.domain;
  if (!model.X().ContainsBox(dom.X) || !model.W().ContainsBox(dom.W) ||
      (model.m() > 0 && !model.U().ContainsBox(dom.U)) ||
      dom.U.dim() != model.m()) {
    throw ConfigError("verify: certificate domain not inside the model's sets");
  }
  VerificationReport rep;
  rep.vertices_only = grid.vertices_only;
  rep.counts = grid.counts;
  rep.tol_psd = tol_psd;
  rep.max_eigenvalue = -std::numeric_limits<double>::infinity();
  for (const GridPoint& pt : GridPoints(dom, grid)) {
    const double e = MaxEigenvalue(LmiMatrix(model, cert.witness.P, cert.witness.Q,
                                             cert.witness.R, cert.kappa, pt.x,
                                             pt.u, pt.w));
    ++rep.points;
    if (e > rep.max_eigenvalue) {
      rep.max_eigenvalue = e;
      rep.worst = pt;
    }
  }
  rep.passed = rep.max_eigenvalue <= tol_psd;
  return rep;
}

DetectabilityCertificate SynthesizeCertificate(const SystemModel& model,
                                               double lambda,
                                               const SynthesisMode& mode,
                                               const GridSpec& grid,
                                               const SdpOptions& opts) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw ConfigError("synthesis: lambda must lie in (0, 1)");
  }
  const int n = model.n(), q = model.q(), p = model.p();
  const bool joint = mode.kind == SynthesisMode::Kind::kJoint;
  if (!joint) {
    if (mode.Q.rows() != q || mode.R.rows() != p) {
      throw ConfigError("synthesis: fixed Q/R dimension mismatch");
    }
    CheckSymmetricPd(mode.Q, "Q");
    CheckSymmetricPd(mode.R, "R");
  }
  const double kappa = -std::log(lambda);
  CertificateDomain domain{model.X(), model.m() > 0 ? model.U() : Box(Vector(0), Vector(0)),
                           model.W()};
  const std::vector<GridPoint> points = GridPoints(domain, grid);

  // Variable layout: [vec P | vec Q | vec R | t].
  const int np = n * (n + 1) / 2, nq = joint ? q * (q + 1) / 2 : 0,
            nr = joint ? p * (p + 1) / 2 : 0;
  const int nv = np + nq + nr + 1;
  const int it = nv - 1;
  const std::vector<Matrix> bp = SymmetricBasis(n), bq = SymmetricBasis(q),
                            br = SymmetricBasis(p);
  const Matrix zq = Matrix::Zero(q, q), zr = Matrix::Zero(p, p),
               zp = Matrix::Zero(n, n);

  LmiProgram prog;
  prog.num_vars = nv;
  prog.cost = Vector::Zero(nv);
  prog.cost(it) = 1.0;
  std::vector<Linearization> lins;
  lins.reserve(points.size());
  for (const GridPoint& pt : points) {
    lins.push_back(Linearize(model, pt.x, pt.u, pt.w));
    const Linearization& lin = lins.back();
    // t I - LMI(P, Q, R) > 0, LMI linear in the decision matrices.
    LmiBlock b;
    b.f0 = joint ? Matrix::Zero(n + q, n + q)
                 : Matrix(-LmiMatrix(lin, zp, mode.Q, mode.R, kappa));
    b.fk.resize(nv);
    for (int k = 0; k < np; ++k) b.fk[k] = -LmiMatrix(lin, bp[k], zq, zr, kappa);
    for (int k = 0; k < nq; ++k) b.fk[np + k] = -LmiMatrix(lin, zp, bq[k], zr, kappa);
    for (int k = 0; k < nr; ++k) b.fk[np + nq + k] = -LmiMatrix(lin, zp, zq, br[k], kappa);
    b.fk[it] = Matrix::Identity(n + q, n + q);
    prog.blocks.push_back(std::move(b));
  }
  auto add_bounds = [&](int offset, const std::vector<Matrix>& basis, int dim) {
    LmiBlock lower, upper;
    lower.f0 = -opts.eps_pd * Matrix::Identity(dim, dim);
    upper.f0 = opts.max_eigenvalue * Matrix::Identity(dim, dim);
    lower.fk.resize(nv);
    upper.fk.resize(nv);
    for (size_t k = 0; k < basis.size(); ++k) {
      lower.fk[offset + k] = basis[k];
      upper.fk[offset + k] = -basis[k];
    }
    prog.blocks.push_back(std::move(lower));
    prog.blocks.push_back(std::move(upper));
  };
  add_bounds(0, bp, n);
  if (joint) {
    add_bounds(np, bq, q);
    add_bounds(np + nq, br, p);
  }

  auto decode = [&](const Vector& z, Matrix* P, Matrix* Q, Matrix* R) {
    *P = Unvectorize(z, 0, n);
    *Q = joint ? Unvectorize(z, np, q) : mode.Q;
    *R = joint ? Unvectorize(z, np + nq, p) : mode.R;
  };
  auto worst_point = [&](const Vector& z, double* worst_eig) {
    Matrix P, Q, R;
    decode(z, &P, &Q, &R);
    size_t arg = 0;
    *worst_eig = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < lins.size(); ++i) {
      const double e = MaxEigenvalue(LmiMatrix(lins[i], P, Q, R, kappa));
      if (e > *worst_eig) {
        *worst_eig = e;
        arg = i;
      }
    }
    return arg;
  };

  // Strictly feasible start: scaled identities and t above every eigenvalue.
  const double scale0 = std::clamp(1.0, 2.0 * opts.eps_pd, 0.5 * opts.max_eigenvalue);
  Vector z0 = Vector::Zero(nv);
  z0.head(np) = VectorizeSymmetric(scale0 * Matrix::Identity(n, n));
  if (joint) {
    z0.segment(np, nq) = VectorizeSymmetric(scale0 * Matrix::Identity(q, q));
    z0.segment(np + nq, nr) = VectorizeSymmetric(scale0 * Matrix::Identity(p, p));
  }
  double e0 = 0.0;
  worst_point(z0, &e0);
  z0(it) = e0 + std::max(1.0, 0.1 * std::abs(e0));

  BarrierOptions bo;
  bo.max_newton_iters = opts.max_iters;
  bo.min_barrier_parameter = opts.min_barrier_parameter;
  // Start with a weight that balances the objective against ~dim barrier terms.
  bo.initial_barrier_weight = 1.0 / std::max(1.0, std::abs(z0(it)));
  const BarrierResult res = SolveLmiBarrier(
      prog, z0, bo, [&](const Vector& z) { return z(it) < opts.target; });

  if (!res.stopped_early) {
    InfeasibilityReport rep;
    rep.best_slack = res.z(it);
    rep.iterations = res.newton_iters;
    rep.termination = res.termination;
    rep.worst = points[worst_point(res.z, &rep.worst_eigenvalue)];
    std::ostringstream os;
    os << "LMI synthesis infeasible (" << res.termination << " after "
       << res.newton_iters << " Newton steps): best slack t=" << rep.best_slack
       << ", largest LMI eigenvalue " << rep.worst_eigenvalue << " at x=["
       << rep.worst.x.transpose() << "] w=[" << rep.worst.w.transpose() << "]";
    throw SynthesisInfeasible(os.str(), std::move(rep));
  }

  Matrix P, Q, R;
  decode(res.z, &P, &Q, &R);
  DetectabilityCertificate cert = DetectabilityCertificate::FromLmi(
      Symmetrize(P), Symmetrize(Q), Symmetrize(R), lambda, domain);
  cert.verification = VerifyCertificate(model, cert, grid, opts.tol_psd);
  if (!cert.verification.passed) {
    throw InternalError("synthesis returned a certificate that fails "
                        "re-verification (max eigenvalue " +
                        std::to_string(cert.verification.max_eigenvalue) + ")");
  }
  cert.Validate();
  return cert;
}

DetectabilityCertificate ScaleCertificate(const DetectabilityCertificate& cert,
                                          const Matrix& P2t, const Matrix& Qt,
                                          const Matrix& Rt, double* k_out) {
  CheckSymmetricPd(P2t, "target P2");
  CheckSymmetricPd(Qt, "target Q");
  CheckSymmetricPd(Rt, "target R");
  if (P2t.rows() != cert.P2.rows() || Qt.rows() != cert.Q.rows() ||
      Rt.rows() != cert.R.rows()) {
    throw ConfigError("scale: target dimension mismatch");
  }
  const double k = 1.0 / std::max({GeneralizedMaxEigenvalue(cert.P2, P2t),
                                   GeneralizedMaxEigenvalue(cert.Q, Qt),
                                   GeneralizedMaxEigenvalue(cert.R, Rt)});
  DetectabilityCertificate out = cert;
  out.P1 = k * cert.P1;
  out.P2 = P2t;
  out.Q = Qt;
  out.R = Rt;
  out.witness = {k * cert.witness.P, k * cert.witness.Q, k * cert.witness.R};
  if (k_out != nullptr) *k_out = k;
  return out;
}

double MinHorizon(const DetectabilityCertificate& cert, double delta_bar) {
  return -std::log(4.0 * GeneralizedMaxEigenvalue(cert.P2, cert.P1)) /
             std::log(cert.lambda) +
         delta_bar;
}

double ContractionRate(const DetectabilityCertificate& cert, double horizon,
                       double delta_bar) {
  const double bound = MinHorizon(cert, delta_bar);
  if (!(horizon > bound)) {
    std::ostringstream os;
    os.precision(10);
    os << "horizon T=" << horizon << " does not satisfy the contraction "
       << "condition 4 lmax(P2,P1) lambda^(T-delta_bar) < 1 (need T > " << bound
       << ")";
    throw HorizonError(os.str());
  }
  return std::pow(4.0 * GeneralizedMaxEigenvalue(cert.P2, cert.P1),
                  1.0 / (horizon - delta_bar)) *
         cert.lambda;
}

json MatrixToJson(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Matrix MatrixFromJson(const json& j) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) throw ConfigError("matrix: expected rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) throw ConfigError("matrix: ragged rows");
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

json CertificateToJson(const DetectabilityCertificate& cert) {
  const VerificationReport& v = cert.verification;
  auto vec = [](const Vector& z) {
    return std::vector<double>(z.data(), z.data() + z.size());
  };
  return json{
      {"P1", MatrixToJson(cert.P1)},
      {"P2", MatrixToJson(cert.P2)},
      {"Q", MatrixToJson(cert.Q)},
      {"R", MatrixToJson(cert.R)},
      {"lambda", cert.lambda},
      {"kappa", cert.kappa},
      {"witness",
       {{"P", MatrixToJson(cert.witness.P)},
        {"Q", MatrixToJson(cert.witness.Q)},
        {"R", MatrixToJson(cert.witness.R)}}},
      {"domain",
       {{"X", BoxToJson(cert.domain.X)},
        {"U", BoxToJson(cert.domain.U)},
        {"W", BoxToJson(cert.domain.W)}}},
      {"verification",
       {{"vertices_only", v.vertices_only},
        {"counts", v.counts},
        {"points", v.points},
        {"max_eigenvalue", v.max_eigenvalue},
        {"worst_x", vec(v.worst.x)},
        {"worst_u", vec(v.worst.u)},
        {"worst_w", vec(v.worst.w)},
        {"tol_psd", v.tol_psd},
        {"passed", v.passed}}}};
}

DetectabilityCertificate CertificateFromJson(const json& j) {
  try {
    DetectabilityCertificate c;
    c.lambda = j.at("lambda").get<double>();
    c.kappa = j.contains("kappa") ? j.at("kappa").get<double>() : -std::log(c.lambda);
    if (j.contains("P")) {
      c.P1 = c.P2 = MatrixFromJson(j.at("P"));
    } else {
      c.P1 = MatrixFromJson(j.at("P1"));
      c.P2 = MatrixFromJson(j.at("P2"));
    }
    c.Q = MatrixFromJson(j.at("Q"));
    c.R = MatrixFromJson(j.at("R"));
    if (j.contains("witness")) {
      const json& w = j.at("witness");
      c.witness = {MatrixFromJson(w.at("P")), MatrixFromJson(w.at("Q")),
                   MatrixFromJson(w.at("R"))};
    } else {
      c.witness = {c.P2, c.Q, c.R};
    }
    const int n = static_cast<int>(c.P1.rows());
    const int q = static_cast<int>(c.Q.rows());
    if (j.contains("domain")) {
      const json& d = j.at("domain");
      c.domain.X = BoxFromJson(d.value("X", json()), n);
      const json& u = d.value("U", json::array());
      c.domain.U = BoxFromJson(u, static_cast<int>(u.size()));
      c.domain.W = BoxFromJson(d.value("W", json()), q);
    } else {
      c.domain = {Box::Unbounded(n), Box(Vector(0), Vector(0)), Box::Unbounded(q)};
    }
    if (j.contains("verification")) {
      const json& v = j.at("verification");
      VerificationReport& r = c.verification;
      r.vertices_only = v.value("vertices_only", false);
      r.counts = v.value("counts", std::vector<int>{});
      r.points = v.value("points", 0L);
      r.max_eigenvalue = v.value("max_eigenvalue", 0.0);
      auto vec = [&](const char* key) {
        auto d = v.value(key, std::vector<double>{});
        return Vector(Eigen::Map<Vector>(d.data(), static_cast<Eigen::Index>(d.size())));
      };
      r.worst = {vec("worst_x"), vec("worst_u"), vec("worst_w")};
      r.tol_psd = v.value("tol_psd", 1e-8);
      r.passed = v.value("passed", false);
    }
    c.Validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("certificate JSON: ") + e.what());
  }
}

void SaveCertificate(const DetectabilityCertificate& cert, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write certificate " + path);
  out << CertificateToJson(cert).dump(2) << '\n';
}

DetectabilityCertificate LoadCertificate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open certificate " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("certificate " + path + ": " + e.what());
  }
  return CertificateFromJson(j);
}

std::string DescribeVerification(const VerificationReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << (r.passed ? "PASS" : "FAIL") << ": max LMI eigenvalue "
     << r.max_eigenvalue << " (tol " << r.tol_psd << ") over " << r.points
     << (r.vertices_only ? " box vertices" : " grid points");
  if (r.worst.x.size() > 0) {
    os << "; worst at x=[" << r.worst.x.transpose() << "]";
    if (r.worst.u.size() > 0) os << " u=[" << r.worst.u.transpose() << "]";
    os << " w=[" << r.worst.w.transpose() << "]";
  }
  if (r.vertices_only) {
    os << "\nnote: vertex checks certify the whole box only if the LMI entries "
          "are affine in each axis; otherwise only the sampled points are "
          "certified";
  }
  return os.str();
}

}  // namespace mhect
