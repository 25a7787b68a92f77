#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hoc/diff_ops.hpp"

namespace hoc {

struct KappaConstants {
  double p = 1.0;
  double kappa_p = 0.5;
  double kappa_limit = 0.0;
};

/// kappa_p = 1/2 (1 - (1 - 1/p)^{p/2})^{-1}; kappa_limit = sqrt(e) / (2 (sqrt(e) - 1)).
KappaConstants kappa(double p);
double kappa_limit();

/// c = 1/(208 e), the exponential-moment constant for the discrete setting.
double exp_moment_constant();

struct MomentCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin() const { return rhs - lhs; }
};

struct BBLMReport {
  double p = 2.0;
  double kappa = 0.0;
  MomentCheck plus;   ///< |(f - E f)_+|_p <= sqrt(8 kappa p) |h+ f|_p
  MomentCheck minus;  ///< |(f - E f)_-|_p <= sqrt(8 kappa p) |h- f|_p
};

BBLMReport bblm_moment_check(const FunctionTable& f, double p);

/// sqrt(32 kappa p) |h f|_p, plus |f|_2 when E f != 0.
double centered_moment_bound(const FunctionTable& f, double p);

/// sum_{k<d} A^k |h^(k) f|_{HS,2} + A^d |h^(d) f|_{HS,p} with A = sqrt(32 kappa p); needs E f = 0.
double iterated_moment_bound(const FunctionTable& f, int d, double p);

/// rhs - lhs of |f_+|_p^p <= |f_+|_{p-1}^p + 4 (p-1) |h+ f|_p^2 |f_+|_p^{p-2}.
double moment_recursion_margin(const FunctionTable& f, double p);

/// rhs - lhs of E|g|^q - (E|g|)^q <= E sum_i (E_i |g|^q - (E_i |g|)^q), q in (1, 2].
double tensorization_margin(const FunctionTable& g, double q);

/// sqrt(2)|h f|_2 - |f|_2 and 2|h+ f|_2 - |f_+|_2 for mean-zero f.
struct BaseLemmaMargins {
  double l2 = 0.0;
  double positive_part = 0.0;
};
BaseLemmaMargins base_lemma_margins(const FunctionTable& f);

enum class StatementKind { EXP_MOMENT, TAIL, SUP, USTAT, PARTIAL_SUM, LSI, SPHERE };
std::string_view to_string(StatementKind kind);

struct Condition {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct Certificate {
  StatementKind statement = StatementKind::EXP_MOMENT;
  int order = 1;
  std::vector<Condition> conditions;
  /// The certified function is f / scale.
  double scale = 1.0;
  double constant = 0.0;
  std::string claim;
  /// True iff every condition passed; the claim is asserted only then.
  bool issued = false;
  /// Exact value of the claimed exponential moment, when the space was enumerated.
  std::optional<double> exact_value;
  std::map<std::string, double> values;
  std::vector<std::string> notes;

  std::vector<std::string> failed_conditions() const;
};

/// |h^(k) f|_{HS,2} for k = 1..d (entry k-1) and |h^(d) f|_{HS,inf}.
struct DiscreteNorms {
  int order = 1;
  std::vector<double> hs2;
  double hs_inf = 0.0;
};
DiscreteNorms discrete_norms(const FunctionTable& f, int d);

/// max(max_{k<d} |h^(k)|_{HS,2}, |h^(d)|_{HS,inf}).
double certificate_scale(const DiscreteNorms& norms);

/// E exp(c |f|^{2/d}) <= 2 for f / s, with s from certificate_scale.
Certificate exp_moment_certificate(const FunctionTable& f, int d);

struct TailReport {
  double t = 0.0;
  double eta = 0.0;
  /// e^2 exp(-eta / (41 (d e)^2)); may exceed 1.
  double bound = 0.0;
  double probability_bound = 0.0;
  std::optional<double> exact_probability;
};

TailReport tail_from_norms(const DiscreteNorms& norms, double t);
TailReport tail_certificate(const FunctionTable& f, int d, double t);

/// P(|f| >= t) by enumeration.
double exact_tail(const FunctionTable& f, double t);

/// Exponential concentration of sup_{f in class} |f| around its mean, via the starred tensors.
Certificate sup_certificate(std::span<const FunctionTable> fs, int d);

/// (n-d)!/n! sum over ordered distinct tuples of h(X_{i_1}, ..., X_{i_d}) on the n-fold
/// product of the kernel's common marginal.
FunctionTable ustat_build(const FunctionTable& kernel, int n);

/// E exp(c n |f|^{2/d}) <= 2 for the U-statistic, with c derived from its exact norms.
Certificate ustat_certificate(const FunctionTable& kernel, int n, double M);

/// e^2 exp(-c min(t^2 / (n^3 |f|_inf^2), t / (n^2 |f|_inf))).
double partial_sum_tail(int n, double sup_norm, double t, double c);

/// S_f = sum_{i<=n} f(X_1 + ... + X_i) for Rademacher steps.
FunctionTable partial_sum_table(const std::function<double(double)>& f, int n, const Limits& limits = {});

/// Largest c for which partial_sum_tail dominates the order-2 tail bound of S_f - E S_f.
double partial_sum_constant(const FunctionTable& s_f, int n, double sup_norm);

/// c = 1/(2 gamma e): |f|_k <= gamma k for all k implies E e^{c|f|} <= 2.
double subexp_constant(double gamma);

struct ImplicationReport {
  int order = 1;
  /// f is rescaled by 1/scale so that |h^(d) f|_{HS,inf} = 1.
  double scale = 1.0;
  /// |h^(k) f / scale|_{HS,2} for k = 1..d-1.
  std::vector<double> lower_norms;
  bool holds = false;
};

/// Checks that the top-order condition implies the lower-order ones for a polynomial
/// without Hoeffding terms of degree 1..d-1 in centered, unit-variance coordinates.
ImplicationReport multilinear_implication_check(const SpacePtr& space, const MultilinearPolynomial& poly, int d);

}  // namespace hoc
