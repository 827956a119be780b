#include "mhect/polynomial_model.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "mhect/errors.h"

namespace mhect {

namespace {

using nlohmann::json;

double BoundFromJson(const json& v, double if_null) {
  if (v.is_null()) return if_null;
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError("bad bound '" + s + "'");
  }
  return v.get<double>();
}

std::vector<int> Exponents(const json& term, const char* key, int dim) {
  if (!term.contains(key)) return std::vector<int>(dim, 0);
  auto e = term.at(key).get<std::vector<int>>();
  if (static_cast<int>(e.size()) != dim) {
    throw ConfigError(std::string("monomial exponent list '") + key +
                      "' has wrong length");
  }
  for (int k : e) {
    if (k < 0) throw ConfigError("negative monomial exponent");
  }
  return e;
}

PolynomialMap ParseMap(const json& j, int rows, int n, int m, int q) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw ConfigError("polynomial map has wrong number of coordinates");
  }
  PolynomialMap map(rows);
  for (int r = 0; r < rows; ++r) {
    for (const json& term : j[r]) {
      Monomial mono;
      mono.coeff = term.at("coeff").get<double>();
      mono.x_exp = Exponents(term, "x", n);
      mono.u_exp = Exponents(term, "u", m);
      mono.w_exp = Exponents(term, "w", q);
      map[r].push_back(std::move(mono));
    }
  }
  return map;
}

// Product of z_i^e_i with exponent `skip` (if >= 0) lowered by one and the
// original exponent returned through `factor`.
double PowerProduct(const Vector& z, const std::vector<int>& e, int skip,
                    double* factor) {
  double v = 1.0;
  for (int i = 0; i < z.size(); ++i) {
    int k = e[i];
    if (i == skip) {
      *factor = k;
      if (k == 0) return 0.0;
      --k;
    }
    for (int c = 0; c < k; ++c) v *= z(i);
  }
  return v;
}

double Evaluate(const Monomial& mono, const Vector& x, const Vector& u,
                const Vector& w) {
  double unused = 0.0;
  return mono.coeff * PowerProduct(x, mono.x_exp, -1, &unused) *
         PowerProduct(u, mono.u_exp, -1, &unused) *
         PowerProduct(w, mono.w_exp, -1, &unused);
}

// d(mono)/d(arg_i) for arg 0 = x, 2 = w.
double Derivative(const Monomial& mono, const Vector& x, const Vector& u,
                  const Vector& w, int arg, int i) {
  double factor = 0.0, unused = 0.0;
  if (arg == 0) {
    const double px = PowerProduct(x, mono.x_exp, i, &factor);
    return mono.coeff * factor * px * PowerProduct(u, mono.u_exp, -1, &unused) *
           PowerProduct(w, mono.w_exp, -1, &unused);
  }
  const double pw = PowerProduct(w, mono.w_exp, i, &factor);
  return mono.coeff * factor * pw * PowerProduct(x, mono.x_exp, -1, &unused) *
         PowerProduct(u, mono.u_exp, -1, &unused);
}

SystemModel::VectorField MakeField(PolynomialMap map) {
  return [map = std::move(map)](const Vector& x, const Vector& u,
                                const Vector& w) {
    Vector out = Vector::Zero(static_cast<int>(map.size()));
    for (size_t r = 0; r < map.size(); ++r) {
      for (const Monomial& mono : map[r]) out(r) += Evaluate(mono, x, u, w);
    }
    return out;
  };
}

SystemModel::JacobianField MakeJacobian(PolynomialMap map, int arg, int cols) {
  return [map = std::move(map), arg, cols](const Vector& x, const Vector& u,
                                           const Vector& w) {
    Matrix jac = Matrix::Zero(static_cast<int>(map.size()), cols);
    for (size_t r = 0; r < map.size(); ++r) {
      for (const Monomial& mono : map[r]) {
        for (int i = 0; i < cols; ++i) jac(r, i) += Derivative(mono, x, u, w, arg, i);
      }
    }
    return jac;
  };
}

bool AffineInStateAndDisturbance(const PolynomialMap& map) {
  for (const auto& row : map) {
    for (const Monomial& mono : row) {
      int degree = 0;
      for (int k : mono.x_exp) degree += k;
      for (int k : mono.w_exp) degree += k;
      if (degree > 1) return false;
    }
  }
  return true;
}

}  // namespace

Box BoxFromJson(const json& j, int dim) {
  if (j.is_null()) return Box::Unbounded(dim);
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ConfigError("box must list " + std::to_string(dim) + " [lo, hi] pairs");
  }
  const double inf = std::numeric_limits<double>::infinity();
  Vector lo(dim), hi(dim);
  for (int i = 0; i < dim; ++i) {
    if (!j[i].is_array() || j[i].size() != 2) {
      throw ConfigError("box entries must be [lo, hi]");
    }
    lo(i) = BoundFromJson(j[i][0], -inf);
    hi(i) = BoundFromJson(j[i][1], inf);
  }
  return Box(lo, hi);
}

json BoxToJson(const Box& box) {
  json out = json::array();
  auto bound = [](double v) -> json {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  for (int i = 0; i < box.dim(); ++i) {
    out.push_back(json::array({bound(box.lo(i)), bound(box.hi(i))}));
  }
  return out;
}

SystemModel PolynomialModelFromJson(const json& j) {
  try {
    SystemModel::Definition d;
    d.name = j.value("name", std::string("polynomial_model"));
    d.state_dim = j.at("state_dim").get<int>();
    d.input_dim = j.value("input_dim", 0);
    d.dist_dim = j.at("dist_dim").get<int>();
    d.output_dim = j.at("output_dim").get<int>();
    const int n = d.state_dim, m = d.input_dim, q = d.dist_dim, p = d.output_dim;
    if (n <= 0 || q <= 0 || p <= 0 || m < 0) {
      throw ConfigError("model file: invalid dimensions");
    }
    PolynomialMap f = ParseMap(j.at("f"), n, n, m, q);
    PolynomialMap h = ParseMap(j.at("h"), p, n, m, q);
    const bool affine = AffineInStateAndDisturbance(h);
    d.output_affine = j.value("output_affine", affine);
    if (d.output_affine && !affine) {
      throw ConfigError("model file: output_affine declared but h has terms of "
                        "degree > 1 in (x, w)");
    }
    d.jac_f_x = MakeJacobian(f, 0, n);
    d.jac_f_w = MakeJacobian(f, 2, q);
    d.jac_h_x = MakeJacobian(h, 0, n);
    d.jac_h_w = MakeJacobian(h, 2, q);
    d.f = MakeField(std::move(f));
    d.h = MakeField(std::move(h));
    d.X = BoxFromJson(j.value("X", json()), n);
    if (m > 0) d.U = BoxFromJson(j.value("U", json()), m);
    d.W = BoxFromJson(j.value("W", json()), q);
    d.Y = BoxFromJson(j.value("Y", json()), p);
    return SystemModel(std::move(d));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model file: ") + e.what());
  }
}

SystemModel LoadModelFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("model file " + path + ": " + e.what());
  }
  return PolynomialModelFromJson(j);
}

SystemModel ResolveModel(const std::string& name_or_path) {
  if (std::filesystem::exists(name_or_path)) return LoadModelFile(name_or_path);
  return BuiltinModel(name_or_path);
}

}  // namespace mhect
