#include "hoc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "hoc/detail/numeric.hpp"
#include "hoc/hoeffding.hpp"

namespace hoc {

namespace {

constexpr double kMeanTolerance = 1e-12;
constexpr double kDegeneracyTolerance = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_p(double p, double lowest) {
  if (!(p >= lowest)) {
    throw ValidationError("moment order p = " + std::to_string(p) + " must be at least " + std::to_string(lowest));
  }
}

bool mean_is_zero(const FunctionTable& f) {
  return std::abs(f.mean()) <= kMeanTolerance * std::max(f.sup_norm(), 1.0);
}

void require_mean_zero(const FunctionTable& f) {
  if (!mean_is_zero(f)) {
    std::ostringstream msg;
    msg << "function must have mean zero, got E f = " << f.mean();
    throw PreconditionError(msg.str());
  }
}

void require_order(const FunctionTable& f, int d) {
  const int n = f.space()->dimension();
  if (d < 1 || d > n) throw ValidationError("order d = " + std::to_string(d) + " must lie in [1, n]");
}

double exp_moment(const FunctionTable& g, double c, int d) {
  const double e = 2.0 / d;
  const auto values = g.values();
  std::vector<double> terms(values.size());
  for (std::size_t o = 0; o < values.size(); ++o) terms[o] = std::exp(c * std::pow(std::abs(values[o]), e));
  return expectation(*g.space(), terms);
}

Condition make_condition(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, value <= threshold * (1.0 + 1e-12)};
}

/// Cond1 / Cond2 for the rescaled norms.
void add_discrete_conditions(Certificate& cert, const DiscreteNorms& norms, double s, const std::string& prefix) {
  const int d = norms.order;
  for (int k = 1; k < d; ++k) {
    cert.conditions.push_back(
        make_condition(prefix + "hs2.order" + std::to_string(k), norms.hs2[static_cast<std::size_t>(k - 1)] / s, 1.0));
  }
  cert.conditions.push_back(make_condition(prefix + "hs_inf.order" + std::to_string(d), norms.hs_inf / s, 1.0));
}

void finish(Certificate& cert) {
  cert.issued = std::all_of(cert.conditions.begin(), cert.conditions.end(), [](const Condition& c) { return c.pass; });
  if (cert.exact_value && *cert.exact_value > 2.0) {
    cert.notes.push_back("BUG: exact exponential moment exceeds 2");
  }
}

std::string exponent_text(int d) {
  if (d == 1) return "^2";
  return d == 2 ? "" : "^{2/" + std::to_string(d) + "}";
}

}  // namespace

KappaConstants kappa(double p) {
  require_p(p, 1.0);
  KappaConstants k;
  k.p = p;
  k.kappa_p = 0.5 / (1.0 - std::pow(1.0 - 1.0 / p, p / 2.0));
  k.kappa_limit = kappa_limit();
  return k;
}

double kappa_limit() {
  const double r = std::sqrt(std::numbers::e);
  return r / (2.0 * (r - 1.0));
}

double exp_moment_constant() { return 1.0 / (208.0 * std::numbers::e); }

BBLMReport bblm_moment_check(const FunctionTable& f, double p) {
  require_p(p, 2.0);
  BBLMReport r;
  r.p = p;
  r.kappa = kappa_limit();
  const double factor = std::sqrt(8.0 * r.kappa * p);
  const auto centered = f + (-f.mean());
  r.plus = {lp_norm(centered.positive_part(), p), factor * field_lp_norm(f, OperatorKind::H_PLUS, 1, p)};
  r.minus = {lp_norm(centered.negative_part(), p), factor * field_lp_norm(f, OperatorKind::H_MINUS, 1, p)};
  return r;
}

double centered_moment_bound(const FunctionTable& f, double p) {
  require_p(p, 2.0);
  const double h_term = std::sqrt(32.0 * kappa_limit() * p) * field_lp_norm(f, OperatorKind::H, 1, p);
  if (mean_is_zero(f)) return h_term;
  return lp_norm(f, 2.0) + h_term;
}

double iterated_moment_bound(const FunctionTable& f, int d, double p) {
  require_p(p, 2.0);
  require_order(f, d);
  require_mean_zero(f);
  const double A = std::sqrt(32.0 * kappa_limit() * p);
  double bound = 0.0;
  for (int k = 1; k < d; ++k) bound += std::pow(A, k) * field_lp_norm(f, OperatorKind::H, k, 2.0);
  return bound + std::pow(A, d) * field_lp_norm(f, OperatorKind::H, d, p);
}

double moment_recursion_margin(const FunctionTable& f, double p) {
  require_p(p, 2.0);
  const auto fp = f.positive_part();
  const double np = lp_norm(fp, p);
  const double lhs = std::pow(np, p);
  const double hplus = field_lp_norm(f, OperatorKind::H_PLUS, 1, p);
  const double rhs = std::pow(lp_norm(fp, p - 1.0), p) + 4.0 * (p - 1.0) * hplus * hplus * std::pow(np, p - 2.0);
  return rhs - lhs;
}

double tensorization_margin(const FunctionTable& g, double q) {
  if (!(q > 1.0 && q <= 2.0)) throw ValidationError("tensorization exponent q must lie in (1, 2]");
  const auto a = g.abs();
  const auto aq = a.map([q](double x) { return std::pow(x, q); });
  const double lhs = aq.mean() - std::pow(a.mean(), q);
  double rhs = 0.0;
  for (int i = 0; i < g.space()->dimension(); ++i) {
    const auto ei = cond_expectation(a, CoordSet{}.with(i)).map([q](double x) { return std::pow(x, q); });
    rhs += aq.mean() - ei.mean();
  }
  return rhs - lhs;
}

BaseLemmaMargins base_lemma_margins(const FunctionTable& f) {
  require_mean_zero(f);
  return {std::sqrt(2.0) * field_lp_norm(f, OperatorKind::H, 1, 2.0) - lp_norm(f, 2.0),
          2.0 * field_lp_norm(f, OperatorKind::H_PLUS, 1, 2.0) - lp_norm(f.positive_part(), 2.0)};
}

std::string_view to_string(StatementKind kind) {
  switch (kind) {
    case StatementKind::EXP_MOMENT: return "EXP_MOMENT";
    case StatementKind::TAIL: return "TAIL";
    case StatementKind::SUP: return "SUP";
    case StatementKind::USTAT: return "USTAT";
    case StatementKind::PARTIAL_SUM: return "PARTIAL_SUM";
    case StatementKind::LSI: return "LSI";
    case StatementKind::SPHERE: return "SPHERE";
  }
  return "?";
}

std::vector<std::string> Certificate::failed_conditions() const {
  std::vector<std::string> out;
  for (const auto& c : conditions) {
    if (!c.pass) out.push_back(c.name);
  }
  return out;
}

DiscreteNorms discrete_norms(const FunctionTable& f, int d) {
  require_order(f, d);
  DiscreteNorms norms;
  norms.order = d;
  for (int k = 1; k <= d; ++k) {
    const auto hs = hs_field(f, OperatorKind::H, k);
    norms.hs2.push_back(lp_norm(hs, 2.0));
    if (k == d) norms.hs_inf = lp_norm(hs, kInf);
  }
  return norms;
}

double certificate_scale(const DiscreteNorms& norms) {
  double s = norms.hs_inf;
  for (int k = 1; k < norms.order; ++k) s = std::max(s, norms.hs2[static_cast<std::size_t>(k - 1)]);
  return s;
}

Certificate exp_moment_certificate(const FunctionTable& f, int d) {
  require_order(f, d);
  require_mean_zero(f);
  Certificate cert;
  cert.statement = StatementKind::EXP_MOMENT;
  cert.order = d;
  cert.constant = exp_moment_constant();
  const auto norms = discrete_norms(f, d);
  const double s = certificate_scale(norms);
  for (int k = 1; k <= d; ++k) cert.values["hs2.order" + std::to_string(k)] = norms.hs2[static_cast<std::size_t>(k - 1)];
  cert.values["hs_inf.order" + std::to_string(d)] = norms.hs_inf;
  cert.values["s"] = s;
  if (s == 0.0) {
    cert.scale = 1.0;
    cert.claim = "f = 0, so E exp(c |f|" + exponent_text(d) + ") = 1 <= 2";
    cert.exact_value = 1.0;
    cert.notes.push_back("trivial certificate for a constant function");
    finish(cert);
    return cert;
  }
  cert.scale = s;
  add_discrete_conditions(cert, norms, s, "");
  cert.claim = "E exp(c |f/s|" + exponent_text(d) + ") <= 2";
  cert.exact_value = exp_moment(f * (1.0 / s), cert.constant, d);
  finish(cert);
  return cert;
}

TailReport tail_from_norms(const DiscreteNorms& norms, double t) {
  if (!(t >= 0.0)) throw ValidationError("tail level t must be nonnegative");
  const int d = norms.order;
  TailReport r;
  r.t = t;
  if (t == 0.0) {
    r.eta = 0.0;
  } else {
    auto term = [t](double norm, int k) { return norm == 0.0 ? kInf : std::pow(t / norm, 2.0 / k); };
    r.eta = term(norms.hs_inf, d);
    for (int k = 1; k < d; ++k) r.eta = std::min(r.eta, term(norms.hs2[static_cast<std::size_t>(k - 1)], k));
  }
  const double de = d * std::numbers::e;
  r.bound = std::isinf(r.eta) ? 0.0 : std::exp(2.0 - r.eta / (41.0 * de * de));
  r.probability_bound = std::min(1.0, r.bound);
  return r;
}

TailReport tail_certificate(const FunctionTable& f, int d, double t) {
  require_order(f, d);
  require_mean_zero(f);
  auto r = tail_from_norms(discrete_norms(f, d), t);
  r.exact_probability = exact_tail(f, t);
  return r;
}

double exact_tail(const FunctionTable& f, double t) {
  const auto values = f.values();
  std::vector<double> indicator(values.size());
  for (std::size_t o = 0; o < values.size(); ++o) indicator[o] = std::abs(values[o]) >= t ? 1.0 : 0.0;
  return expectation(*f.space(), indicator);
}

Certificate sup_certificate(std::span<const FunctionTable> fs, int d) {
  if (fs.empty()) throw ValidationError("function class must be nonempty");
  require_order(fs.front(), d);
  Certificate cert;
  cert.statement = StatementKind::SUP;
  cert.order = d;
  cert.constant = exp_moment_constant();
  cert.notes.push_back("implementation choice: the constant for suprema reuses 1/(208e) from the single-function case");

  DiscreteNorms norms;
  norms.order = d;
  for (int k = 1; k <= d; ++k) {
    const auto hs = sup_class_hs_field(fs, k);
    norms.hs2.push_back(lp_norm(hs, 2.0));
    if (k == d) norms.hs_inf = lp_norm(hs, kInf);
  }
  for (int k = 1; k <= d; ++k) cert.values["star_hs2.order" + std::to_string(k)] = norms.hs2[static_cast<std::size_t>(k - 1)];
  cert.values["star_hs_inf.order" + std::to_string(d)] = norms.hs_inf;

  auto sup_abs = fs.front().abs();
  for (std::size_t j = 1; j < fs.size(); ++j) {
    auto& v = sup_abs.mutable_values();
    const auto w = fs[j].values();
    for (std::size_t o = 0; o < v.size(); ++o) v[o] = std::max(v[o], std::abs(w[o]));
  }
  const auto deviation = sup_abs + (-sup_abs.mean());
  cert.values["mean_sup"] = sup_abs.mean();

  const double s = certificate_scale(norms);
  cert.values["s"] = s;
  cert.claim = "E exp(c |sup|f| - E sup|f||" + exponent_text(d) + " / s" + exponent_text(d) + ") <= 2";
  if (s == 0.0) {
    cert.scale = 1.0;
    cert.exact_value = 1.0;
    cert.notes.push_back("trivial certificate: every function in the class is constant");
  } else {
    cert.scale = s;
    add_discrete_conditions(cert, norms, s, "star_");
    cert.exact_value = exp_moment(deviation * (1.0 / s), cert.constant, d);
  }
  finish(cert);
  return cert;
}

FunctionTable ustat_build(const FunctionTable& kernel, int n) {
  const auto& kspace = *kernel.space();
  const int d = kspace.dimension();
  if (n < d) throw ValidationError("U-statistic needs n >= d, got n = " + std::to_string(n));
  for (int i = 1; i < d; ++i) {
    if (!(kspace.coordinate(i) == kspace.coordinate(0))) {
      throw ValidationError("kernel arguments must share one marginal distribution");
    }
  }
  const double tol = kDegeneracyTolerance * std::max(kernel.sup_norm(), 1e-300);
  for (int i = 0; i < d; ++i) {
    if (cond_expectation(kernel, CoordSet{}.with(i)).sup_norm() > tol) {
      throw PreconditionError("kernel is not completely degenerate: E_i h != 0 for argument " + std::to_string(i + 1));
    }
  }

  std::vector<std::vector<int>> tuples;
  std::vector<int> cur;
  std::uint64_t used = 0;
  std::function<void()> rec = [&] {
    if (static_cast<int>(cur.size()) == d) {
      tuples.push_back(cur);
      return;
    }
    for (int i = 0; i < n; ++i) {
      if ((used >> i) & 1U) continue;
      used |= std::uint64_t{1} << i;
      cur.push_back(i);
      rec();
      cur.pop_back();
      used &= ~(std::uint64_t{1} << i);
    }
  };
  rec();

  auto space = build_space(std::vector<FiniteDistribution>(static_cast<std::size_t>(n), kspace.coordinate(0)),
                           kspace.limits());
  const double work = static_cast<double>(space->outcome_count()) * static_cast<double>(tuples.size());
  if (work > static_cast<double>(kspace.limits().max_tensor_evaluations)) {
    throw BudgetError("U-statistic enumeration needs " + std::to_string(work) + " kernel evaluations");
  }
  const auto kv = kernel.values();
  const double norm = 1.0 / static_cast<double>(tuples.size());
  std::vector<double> values(space->outcome_count());
  std::vector<std::size_t> digits(static_cast<std::size_t>(n));
  for (std::uint64_t o = 0; o < values.size(); ++o) {
    for (int i = 0; i < n; ++i) digits[static_cast<std::size_t>(i)] = space->digit(o, i);
    detail::CompensatedSum acc;
    for (const auto& t : tuples) {
      std::uint64_t idx = 0;
      for (int s = 0; s < d; ++s) idx += digits[static_cast<std::size_t>(t[static_cast<std::size_t>(s)])] * kspace.stride(s);
      acc.add(kv[idx]);
    }
    values[o] = norm * acc.value();
  }
  return {space, std::move(values)};
}

Certificate ustat_certificate(const FunctionTable& kernel, int n, double M) {
  if (!(M >= 0.0)) throw ValidationError("kernel bound M must be nonnegative");
  if (kernel.sup_norm() > M * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "kernel bound violated: |h|_inf = " << kernel.sup_norm() << " > M = " << M;
    throw PreconditionError(msg.str());
  }
  const int d = kernel.space()->dimension();
  const auto f = ustat_build(kernel, n);
  auto cert = exp_moment_certificate(f, d);
  cert.statement = StatementKind::USTAT;
  const double c0 = cert.constant;
  const double s = cert.values.at("s");
  cert.values["n"] = n;
  cert.values["M"] = M;
  cert.values["c0"] = c0;
  if (s == 0.0) {
    cert.constant = c0;
    cert.notes.push_back("zero kernel: any c works");
  } else {
    cert.constant = c0 / (n * std::pow(s, 2.0 / d));
  }
  cert.values["c_times_M_pow"] = cert.constant * std::pow(M, 2.0 / d);
  cert.claim = "E exp(c n |f|" + exponent_text(d) + ") <= 2";
  return cert;
}

double partial_sum_tail(int n, double sup_norm, double t, double c) {
  if (n < 1) throw ValidationError("partial sum length n must be positive");
  if (!(sup_norm > 0.0)) throw ValidationError("sup norm must be positive");
  if (!(t >= 0.0)) throw ValidationError("tail level t must be nonnegative");
  if (!(c > 0.0)) throw ValidationError("constant c must be positive");
  const double nn = n;
  const double m = std::min(t * t / (nn * nn * nn * sup_norm * sup_norm), t / (nn * nn * sup_norm));
  return std::exp(2.0 - c * m);
}

FunctionTable partial_sum_table(const std::function<double(double)>& f, int n, const Limits& limits) {
  if (n < 1) throw ValidationError("partial sum length n must be positive");
  auto space = rademacher_space(n, limits);
  return FunctionTable::from_point_function(space, [&f](std::span<const double> x) {
    double walk = 0.0;
    double total = 0.0;
    for (double step : x) {
      walk += step;
      total += f(walk);
    }
    return total;
  });
}

double partial_sum_constant(const FunctionTable& s_f, int n, double sup_norm) {
  if (!(sup_norm > 0.0)) throw ValidationError("sup norm must be positive");
  const auto norms = discrete_norms(s_f, 2);
  const double nn = n;
  const double de = 2.0 * std::numbers::e;
  const double a = norms.hs_inf == 0.0 ? kInf : nn * nn * sup_norm / norms.hs_inf;
  const double b = norms.hs2[0] == 0.0 ? kInf : nn * nn * nn * sup_norm * sup_norm / (norms.hs2[0] * norms.hs2[0]);
  return std::min(a, b) / (41.0 * de * de);
}

double subexp_constant(double gamma) {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  return 1.0 / (2.0 * gamma * std::numbers::e);
}

ImplicationReport multilinear_implication_check(const SpacePtr& space, const MultilinearPolynomial& poly, int d) {
  const int n = space->dimension();
  if (poly.dimension() != n) throw ValidationError("polynomial dimension does not match the space");
  if (d < 1 || d > n) throw ValidationError("order d must lie in [1, n]");
  for (int i = 0; i < n; ++i) {
    const auto& c = space->coordinate(i);
    if (std::abs(c.moment(1)) > kMeanTolerance || std::abs(c.moment(2) - 1.0) > kMeanTolerance) {
      throw PreconditionError("coordinate " + std::to_string(i + 1) + " must satisfy E X = 0 and E X^2 = 1");
    }
  }
  for (const auto& [I, a] : poly.terms()) {
    if (I.size() >= 1 && I.size() < d && a != 0.0) {
      throw PreconditionError("polynomial has a term of degree " + std::to_string(I.size()) + " below d = " +
                              std::to_string(d));
    }
  }
  const auto f = eval_polynomial(space, poly);
  ImplicationReport r;
  r.order = d;
  const double top = field_lp_norm(f, OperatorKind::H, d, kInf);
  r.scale = top > 0.0 ? top : 1.0;
  r.holds = true;
  for (int k = 1; k < d; ++k) {
    const double v = field_lp_norm(f, OperatorKind::H, k, 2.0) / r.scale;
    r.lower_norms.push_back(v);
    if (v > 1.0 + 1e-12) r.holds = false;
  }
  return r;
}

}  // namespace hoc
