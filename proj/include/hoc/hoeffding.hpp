#pragma once

#include <map>
#include <vector>

#include "hoc/product_space.hpp"

namespace hoc {

/// Orthogonal decomposition f = sum_S h_S where each h_S depends only on the
/// coordinates in S and integrates to zero in each of them.
///
/// Components are stored sparsely: subsets whose component vanishes (sup norm below
/// 1e-13 relative to |f|_inf) are omitted, and component() returns a zero table for them.
class HoeffdingDecomposition {
 public:
  HoeffdingDecomposition(SpacePtr space, std::map<CoordSet, FunctionTable> components);

  const SpacePtr& space() const { return space_; }
  const std::map<CoordSet, FunctionTable>& components() const { return components_; }
  FunctionTable component(CoordSet S) const;
  double mean() const;
  FunctionTable reconstruct() const;

 private:
  SpacePtr space_;
  std::map<CoordSet, FunctionTable> components_;
};

HoeffdingDecomposition decompose(const FunctionTable& f);

/// f_k = sum over |S| = k of h_S.
FunctionTable degree_component(const HoeffdingDecomposition& dec, int k);

/// |f_k|_2^2 for k = 0..n.
std::vector<double> degree_profile(const HoeffdingDecomposition& dec);

/// Smallest k >= 1 with f_k != 0 (relative tolerance 1e-10), or 0 when f is constant.
int lowest_nonvanishing_degree(const HoeffdingDecomposition& dec, double rel_tol = 1e-10);

/// True iff f_1 = ... = f_{d-1} = 0, i.e. f = E f + sum_{k >= d} f_k.
bool is_degenerate_from(const FunctionTable& f, int d);
bool is_degenerate_from(const HoeffdingDecomposition& dec, int d);

/// Coefficients alpha_I = E f prod_{i in I} X_i on a Rademacher space.
MultilinearPolynomial fourier_walsh(const FunctionTable& f);

}  // namespace hoc
