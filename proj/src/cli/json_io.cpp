#include "cli/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

namespace hoc::cli {

namespace {

json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double read_number(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
  }
  throw ValidationError(what + " must be a number");
}

std::vector<int> zero_based(const json& list, int n) {
  if (!list.is_array()) throw ValidationError("index list must be an array");
  std::vector<int> out;
  for (const auto& v : list) {
    const int i = v.get<int>();
    if (i < 1 || (n >= 0 && i > n)) throw ValidationError("index " + std::to_string(i) + " out of range [1, n]");
    out.push_back(i - 1);
  }
  return out;
}

std::optional<NormValue> read_norm(const json& j, const std::string& what) {
  if (j.is_null()) return std::nullopt;
  NormValue v;
  v.provenance = Provenance::SUPPLIED;
  if (j.is_object()) {
    v.value = read_number(j.at("value"), what);
    if (j.contains("std_error")) {
      v.std_error = j.at("std_error").get<double>();
      v.provenance = Provenance::MONTE_CARLO;
    }
  } else {
    v.value = read_number(j, what);
  }
  if (!(v.value >= 0.0)) throw ValidationError(what + " must be nonnegative");
  return v;
}

}  // namespace

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in '" + path + "': " + e.what());
  }
}

SpacePtr parse_space(const json& j, const Limits& limits) {
  if (!j.is_object()) throw ValidationError("space must be an object");
  if (j.contains("rademacher")) return rademacher_space(j.at("rademacher").get<int>(), limits);
  std::vector<FiniteDistribution> dists;
  for (const auto& c : j.at("coords")) {
    dists.emplace_back(c.at("support").get<std::vector<double>>(), c.at("probs").get<std::vector<double>>());
  }
  if (dists.empty()) throw ValidationError("space needs at least one coordinate");
  return build_space(std::move(dists), limits);
}

MultilinearPolynomial parse_poly(const json& j, int n) {
  const auto& coeffs = j.at("coeffs");
  if (n < 0) {
    if (j.contains("n")) {
      n = j.at("n").get<int>();
    } else {
      n = 0;
      for (const auto& term : coeffs) {
        for (const auto& i : term.at("I")) n = std::max(n, i.get<int>());
      }
    }
  }
  if (n < 1) throw ValidationError("polynomial needs at least one variable");
  MultilinearPolynomial p(n);
  for (const auto& term : coeffs) {
    const auto idx = zero_based(term.at("I"), n);
    p.add_term(idx, term.at("a").get<double>());
  }
  return p;
}

FunctionTable parse_function(const json& j, const SpacePtr& space) {
  if (!j.is_object()) throw ValidationError("function must be an object");
  if (j.contains("table")) return {space, j.at("table").get<std::vector<double>>()};
  if (j.contains("poly")) return eval_polynomial(space, parse_poly(j.at("poly"), space->dimension()));
  throw ValidationError("function needs a \"table\" or a \"poly\" entry");
}

SmoothNorms parse_norms(const json& j, int d) {
  SmoothNorms norms;
  norms.order = d;
  if (j.contains("op2")) {
    int k = 1;
    for (const auto& v : j.at("op2")) norms.op2.push_back(read_norm(v, "op2[" + std::to_string(k++) + "]"));
  }
  if (j.contains("op_inf")) norms.op_inf = read_norm(j.at("op_inf"), "op_inf");
  if (j.contains("hs2")) norms.hs2 = read_norm(j.at("hs2"), "hs2");
  return norms;
}

json one_based(const std::vector<int>& indices) {
  json out = json::array();
  for (int i : indices) out.push_back(i + 1);
  return out;
}

json to_json(const Certificate& c) {
  json j;
  j["statement"] = std::string(to_string(c.statement));
  j["order"] = c.order;
  j["issued"] = c.issued;
  j["scale"] = number(c.scale);
  j["constant"] = number(c.constant);
  j["claim"] = c.claim;
  j["exact_value"] = c.exact_value ? number(*c.exact_value) : json(nullptr);
  json conds = json::array();
  for (const auto& k : c.conditions) {
    conds.push_back({{"name", k.name}, {"value", number(k.value)}, {"threshold", number(k.threshold)}, {"pass", k.pass}});
  }
  j["conditions"] = conds;
  json values = json::object();
  for (const auto& [key, v] : c.values) values[key] = number(v);
  j["values"] = values;
  j["notes"] = c.notes;
  j["failed_conditions"] = c.failed_conditions();
  return j;
}

json to_json(const TailReport& r) {
  json j = {{"t", number(r.t)},
            {"eta", number(r.eta)},
            {"bound", number(r.bound)},
            {"probability_bound", number(r.probability_bound)}};
  j["exact_probability"] = r.exact_probability ? number(*r.exact_probability) : json(nullptr);
  return j;
}

json to_json(const MCEstimate& e) {
  return {{"value", number(e.value)},
          {"std_error", number(e.std_error)},
          {"samples", e.samples},
          {"seed", e.seed},
          {"clamped", e.clamped}};
}

json to_json(const NormValue& v) {
  json j = {{"value", number(v.value)}, {"provenance", std::string(to_string(v.provenance))}};
  if (v.provenance == Provenance::MONTE_CARLO) {
    j["std_error"] = number(v.std_error);
    j["samples"] = v.samples;
    j["seed"] = v.seed;
  }
  return j;
}

json to_json(const SmoothNorms& n) {
  json j;
  j["order"] = n.order;
  json op2 = json::array();
  for (const auto& v : n.op2) op2.push_back(v ? to_json(*v) : json(nullptr));
  j["op2"] = op2;
  j["op_inf"] = n.op_inf ? to_json(*n.op_inf) : json(nullptr);
  j["hs2"] = n.hs2 ? to_json(*n.hs2) : json(nullptr);
  return j;
}

}  // namespace hoc::cli
