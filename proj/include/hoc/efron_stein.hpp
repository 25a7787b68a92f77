#pragma once

#include <string>
#include <vector>

#include "hoc/diff_ops.hpp"
#include "hoc/hoeffding.hpp"

namespace hoc {

/// Var f against a (higher order) Efron-Stein bound.
struct ESReport {
  double variance = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  OperatorKind kind = OperatorKind::V;
  int order = 1;
  /// f = E f + f_d up to relative L2 distance 1e-9.
  bool equality = false;
};

/// E |Gamma^{(d)} f|_HS^2, doubled for D_PLUS and D_MINUS so that every admissible kind
/// yields the same value up to rounding.
double tensor_energy(const FunctionTable& f, OperatorKind kind, int d);

/// Var f <= E |Gamma f|^2 for kind in {V, DD, D_SMALL, D_PLUS, D_MINUS}.
ESReport efron_stein_check(const FunctionTable& f, OperatorKind kind);

/// Var f <= (1/d!) E |Gamma^{(d)} f|^2 for f with vanishing Hoeffding terms of degree 1..d-1.
ESReport higher_order_es(const FunctionTable& f, int d, OperatorKind kind);

/// c_k = (1/k!) E |Gamma^{(k)} f_k|^2 for k = 1..n (entry k-1); they sum to Var f.
std::vector<double> variance_identity(const FunctionTable& f, OperatorKind kind);

/// t_k = (-1)^{k+1}/k! E |Gamma^{(k)} f|^2 for k = 1..n (entry k-1); they sum to Var f.
std::vector<double> alternating_identity(const FunctionTable& f, OperatorKind kind);

struct IdentityCheck {
  std::string name;
  /// Worst violation found; a check passes when residual <= tolerance.
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Runs every exact identity and inequality on f rescaled to sup norm 1.
std::vector<IdentityCheck> verify_identities(const FunctionTable& f, double tolerance = 1e-10);

}  // namespace hoc
