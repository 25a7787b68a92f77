#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hoc/bounds.hpp"
#include "hoc/montecarlo.hpp"
#include "hoc/product_space.hpp"

namespace hoc {

/// Dense order-d array over [n]^d, row-major in the index tuple (last index fastest).
class ConstantHypermatrix {
 public:
  ConstantHypermatrix(int n, int order, std::vector<double> entries);
  static ConstantHypermatrix zeros(int n, int order);

  int dimension() const { return n_; }
  int order() const { return order_; }
  std::span<const double> entries() const { return entries_; }
  double at(std::span<const int> index) const;
  void set(std::span<const int> index, double value);
  bool is_symmetric(double tol = 1e-12) const;

  /// A[v, ..., v] with the last `free` slots left open; free = 1 gives a vector.
  std::vector<double> contract(std::span<const double> v, int free) const;

 private:
  std::size_t offset(std::span<const int> index) const;

  int n_;
  int order_;
  std::vector<double> entries_;
};

/// Order-k derivative of a multilinear polynomial at x; entries on tuples with a repeated
/// index vanish.
ConstantHypermatrix poly_derivative_tensor(const MultilinearPolynomial& p, int k, std::span<const double> x);

double tensor_hs_norm(const ConstantHypermatrix& A);
/// max |a_{i_1...i_d}| over strictly increasing tuples.
double tensor_max_norm(const ConstantHypermatrix& A);

struct OpNormOptions {
  int restarts = 32;
  int iterations = 500;
  double tolerance = 1e-10;
  std::uint64_t seed = 0x5EED;
  /// Use power iteration even where a closed form exists.
  bool force_iteration = false;
};

struct OpNormResult {
  /// Attained value of |A[v, ..., v]| at a unit vector, hence a lower bound.
  double value = 0.0;
  /// Upper bound; equals value when exact.
  double upper = 0.0;
  bool exact = false;
};

/// sup over unit v_1..v_d of A[v_1, ..., v_d] for symmetric A.
OpNormResult tensor_op_norm(const ConstantHypermatrix& A, const OpNormOptions& options = {});

/// (E |f^{(k)}(X)|_Op^2)^{1/2} under the standard Gaussian, by sampling.
MCEstimate gaussian_norm_estimate(const MultilinearPolynomial& p, int k, std::uint64_t N, std::uint64_t seed);

enum class Provenance { EXACT, MONTE_CARLO, UPPER_BOUND, SUPPLIED };
std::string_view to_string(Provenance p);

struct NormValue {
  double value = 0.0;
  Provenance provenance = Provenance::SUPPLIED;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

  /// Value entering certificate conditions: Monte Carlo values are raised by 3 standard errors.
  double certified() const { return provenance == Provenance::MONTE_CARLO ? value + 3.0 * std_error : value; }
};

struct SmoothNorms {
  int order = 1;
  /// |f^{(k)}|_{Op,2} for k = 1..order-1 (entry k-1).
  std::vector<std::optional<NormValue>> op2;
  std::optional<NormValue> op_inf;
  std::optional<NormValue> hs2;
};

/// Norms of a multilinear polynomial under the standard Gaussian. Hilbert-Schmidt norms and
/// the first-order norm are exact; higher-order Op,2 norms are sampled.
SmoothNorms smooth_norms_for_polynomial(const MultilinearPolynomial& p, int d, std::uint64_t N, std::uint64_t seed);

/// |f^{(k)}|_{HS,2} under the standard Gaussian, exactly.
double gaussian_hs_norm(const MultilinearPolynomial& p, int k);

enum class LsiVariant { OP_CONDITIONS, HS_CONDITIONS };

/// c = 1/(8e) exponential moment under a log-Sobolev measure with constant sigma2.
Certificate lsi_certificate(const SmoothNorms& norms, double sigma2, int d, LsiVariant variant);

/// e^2 exp(-eta / (d e)^2) with eta built from sigma2 and the Op norms.
TailReport continuous_tail(const SmoothNorms& norms, double sigma2, int d, double t);

/// exp((n-1) |f|^{2/d} / (8e)) on the unit sphere S^{n-1}.
Certificate sphere_certificate(int n, int d, std::span<const double> op2, double sup_op);

}  // namespace hoc
