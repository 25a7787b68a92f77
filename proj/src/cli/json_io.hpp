#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hoc/bounds.hpp"
#include "hoc/montecarlo.hpp"
#include "hoc/product_space.hpp"
#include "hoc/smooth.hpp"

namespace hoc::cli {

using json = nlohmann::json;

json read_json_file(const std::string& path);

/// {"coords":[{"support":[...],"probs":[...]}]} or {"rademacher": n}.
SpacePtr parse_space(const json& j, const Limits& limits);

/// {"table":[...]} or {"poly":{"coeffs":[{"I":[1,2],"a":1.0}]}}; indices are 1-based.
FunctionTable parse_function(const json& j, const SpacePtr& space);

/// Polynomial in n variables; n < 0 takes "n" from the object or the largest index used.
MultilinearPolynomial parse_poly(const json& j, int n);

/// {"op2":[...], "op_inf":..., "hs2":...}.
SmoothNorms parse_norms(const json& j, int d);

json to_json(const Certificate& c);
json to_json(const TailReport& r);
json to_json(const MCEstimate& e);
json to_json(const NormValue& v);
json to_json(const SmoothNorms& n);

/// 1-based index list.
json one_based(const std::vector<int>& indices);

}  // namespace hoc::cli
