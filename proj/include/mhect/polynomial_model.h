#ifndef MHECT_POLYNOMIAL_MODEL_H_
#define MHECT_POLYNOMIAL_MODEL_H_

#include <string>
#include <vector>

#include <json.hpp>

#include "mhect/system_model.h"

namespace mhect {

// coeff * prod x_i^ex_i * prod u_i^eu_i * prod w_i^ew_i
struct Monomial {
  double coeff = 0.0;
  std::vector<int> x_exp, u_exp, w_exp;
};

// Polynomial right-hand side: one sum of monomials per output coordinate.
using PolynomialMap = std::vector<std::vector<Monomial>>;

// Model file schema (JSON):
//   { "name": "...", "state_dim": n, "input_dim": m, "dist_dim": q,
//     "output_dim": p,
//     "f": [[{"coeff": c, "x": [..n], "u": [..m], "w": [..q]}, ...], ...n],
//     "h": [[...], ...p],
//     "X": [[lo, hi], ...], "U": [...], "W": [...], "Y": [...],
//     "output_affine": bool }
// Missing exponent arrays mean all zeros. Bounds may be null or the strings
// "-inf"/"inf". Box arrays default to unbounded. Jacobians are analytic.
// A declared output_affine flag is checked against the monomials.
SystemModel PolynomialModelFromJson(const nlohmann::json& j);
SystemModel LoadModelFile(const std::string& path);

// Built-in name or path to a model file.
SystemModel ResolveModel(const std::string& name_or_path);

// Box arrays [[lo, hi], ...] with null/"inf" handling; shared with configs.
Box BoxFromJson(const nlohmann::json& j, int dim);
nlohmann::json BoxToJson(const Box& box);

}  // namespace mhect

#endif  // MHECT_POLYNOMIAL_MODEL_H_
