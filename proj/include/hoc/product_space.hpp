#pragma once

#include <bit>
#include <compare>
#include <initializer_list>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "hoc/errors.hpp"

namespace hoc {

/// Resource caps shared by every enumeration-based routine.
struct Limits {
  std::uint64_t max_outcomes = std::uint64_t{1} << 24;
  int max_hoeffding_coords = 20;
  /// Cap on stored Hoeffding cells (components x outcomes).
  std::uint64_t max_decomposition_cells = std::uint64_t{1} << 27;
  /// Cap on function evaluations spent building one hypermatrix field.
  std::uint64_t max_tensor_evaluations = std::uint64_t{1} << 34;
};

/// A set of coordinates (0-based) stored as a bitmask; spaces hold at most 64 coordinates.
class CoordSet {
 public:
  constexpr CoordSet() = default;
  constexpr explicit CoordSet(std::uint64_t bits) : bits_(bits) {}

  static CoordSet of(std::span<const int> indices);
  static CoordSet of(std::initializer_list<int> indices) {
    return of(std::span<const int>(indices.begin(), indices.size()));
  }
  static constexpr CoordSet full(int n) {
    return CoordSet(n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1));
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool contains(int i) const { return (bits_ >> i) & 1U; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr CoordSet with(int i) const { return CoordSet(bits_ | (std::uint64_t{1} << i)); }
  constexpr CoordSet without(int i) const { return CoordSet(bits_ & ~(std::uint64_t{1} << i)); }
  constexpr bool subset_of(CoordSet other) const { return (bits_ & ~other.bits_) == 0; }
  std::vector<int> indices() const;

  friend constexpr CoordSet operator|(CoordSet a, CoordSet b) { return CoordSet(a.bits_ | b.bits_); }
  friend constexpr CoordSet operator&(CoordSet a, CoordSet b) { return CoordSet(a.bits_ & b.bits_); }
  friend constexpr bool operator==(CoordSet, CoordSet) = default;
  friend constexpr auto operator<=>(CoordSet a, CoordSet b) {
    // Order by cardinality first, then lexicographically on the sorted index list.
    if (a.size() != b.size()) return a.size() <=> b.size();
    const std::uint64_t diff = a.bits_ ^ b.bits_;
    if (diff == 0) return std::strong_ordering::equal;
    const std::uint64_t low = diff & (~diff + 1);
    return (a.bits_ & low) ? std::strong_ordering::less : std::strong_ordering::greater;
  }

 private:
  std::uint64_t bits_ = 0;
};

class FiniteDistribution {
 public:
  FiniteDistribution(std::vector<double> support, std::vector<double> probs);

  static FiniteDistribution rademacher();
  static FiniteDistribution point_mass(double atom);

  std::size_t size() const { return support_.size(); }
  std::span<const double> support() const { return support_; }
  std::span<const double> probs() const { return probs_; }
  double atom(std::size_t k) const { return support_[k]; }
  double prob(std::size_t k) const { return probs_[k]; }

  double mean() const;
  double moment(int k) const;
  bool is_rademacher(double tol = 1e-12) const;

  friend bool operator==(const FiniteDistribution&, const FiniteDistribution&) = default;

 private:
  std::vector<double> support_;
  std::vector<double> probs_;
};

class ProductSpace;
using SpacePtr = std::shared_ptr<const ProductSpace>;

/// Independent finite coordinates enumerated in mixed radix, coordinate 0 fastest.
class ProductSpace {
 public:
  int dimension() const { return static_cast<int>(coords_.size()); }
  std::uint64_t outcome_count() const { return outcomes_; }
  const FiniteDistribution& coordinate(int i) const { return coords_[static_cast<std::size_t>(i)]; }
  std::span<const FiniteDistribution> coordinates() const { return coords_; }
  std::uint64_t stride(int i) const { return strides_[static_cast<std::size_t>(i)]; }
  std::size_t radix(int i) const { return coords_[static_cast<std::size_t>(i)].size(); }
  const Limits& limits() const { return limits_; }

  /// Atom index of coordinate i at outcome.
  std::size_t digit(std::uint64_t outcome, int i) const {
    return static_cast<std::size_t>((outcome / strides_[static_cast<std::size_t>(i)]) % radix(i));
  }
  double value(std::uint64_t outcome, int i) const { return coordinate(i).atom(digit(outcome, i)); }
  void point(std::uint64_t outcome, std::span<double> x) const;

  /// Probability of each outcome.
  std::span<const double> weights() const { return weights_; }

  bool is_rademacher() const;
  bool same_as(const ProductSpace& other) const;

 private:
  friend SpacePtr build_space(std::vector<FiniteDistribution>, const Limits&);
  ProductSpace() = default;

  std::vector<FiniteDistribution> coords_;
  std::vector<std::uint64_t> strides_;
  std::vector<double> weights_;
  std::uint64_t outcomes_ = 1;
  Limits limits_;
};

SpacePtr build_space(std::vector<FiniteDistribution> dists, const Limits& limits = {});
SpacePtr rademacher_space(int n, const Limits& limits = {});

/// A real function on the outcomes of a product space.
class FunctionTable {
 public:
  FunctionTable(SpacePtr space, std::vector<double> values);

  static FunctionTable constant(SpacePtr space, double c);
  static FunctionTable coordinate(SpacePtr space, int i);
  static FunctionTable from_point_function(SpacePtr space,
                                           const std::function<double(std::span<const double>)>& f);

  const SpacePtr& space() const { return space_; }
  std::span<const double> values() const { return values_; }
  std::uint64_t size() const { return values_.size(); }
  double operator[](std::uint64_t outcome) const { return values_[outcome]; }

  double mean() const;
  double variance() const;
  double sup_norm() const;
  double inner(const FunctionTable& other) const;

  FunctionTable map(const std::function<double(double)>& op) const;
  FunctionTable abs() const;
  FunctionTable positive_part() const;
  FunctionTable negative_part() const;

  FunctionTable& operator+=(const FunctionTable& other);
  FunctionTable& operator-=(const FunctionTable& other);
  FunctionTable& operator*=(double a);
  FunctionTable& operator+=(double b);
  friend FunctionTable operator+(FunctionTable a, const FunctionTable& b) { return a += b; }
  friend FunctionTable operator-(FunctionTable a, const FunctionTable& b) { return a -= b; }
  friend FunctionTable operator*(double a, FunctionTable f) { return f *= a; }
  friend FunctionTable operator*(FunctionTable f, double a) { return f *= a; }
  friend FunctionTable operator+(FunctionTable f, double b) { return f += b; }
  FunctionTable operator*(const FunctionTable& other) const;

  /// Mutable access for builders inside the library.
  std::vector<double>& mutable_values() { return values_; }

 private:
  void require_same_space(const FunctionTable& other) const;

  SpacePtr space_;
  std::vector<double> values_;
};

/// f(x) = sum over index subsets I of alpha_I * prod_{i in I} x_i.
class MultilinearPolynomial {
 public:
  explicit MultilinearPolynomial(int n) : n_(n) {}

  int dimension() const { return n_; }
  void add_term(std::span<const int> indices, double coeff);
  void add_term(std::initializer_list<int> indices, double coeff) {
    add_term(std::span<const int>(indices.begin(), indices.size()), coeff);
  }
  void add_term(CoordSet set, double coeff);
  double coefficient(CoordSet set) const;
  const std::map<CoordSet, double>& terms() const { return coeffs_; }
  int degree() const;
  /// Lowest degree among terms of degree >= 1; 0 when only a constant is present.
  int lowest_positive_degree() const;

  double evaluate(std::span<const double> x) const;

 private:
  int n_;
  std::map<CoordSet, double> coeffs_;
};

FunctionTable eval_polynomial(const SpacePtr& space, const MultilinearPolynomial& p);

/// E_S f: integrate out the coordinates in S; the result is constant along them.
FunctionTable cond_expectation(const FunctionTable& f, CoordSet S);

/// (Id - E_S) applied coordinate by coordinate: prod_{i in S} (Id - E_i) f.
FunctionTable centered_difference(const FunctionTable& f, CoordSet S);

/// (sum_w P(w)|f(w)|^p)^{1/p}; p = infinity gives the max over outcomes.
double lp_norm(const FunctionTable& f, double p);

/// Compensated weighted sum sum_w P(w) g(w).
double expectation(const ProductSpace& space, std::span<const double> values);

}  // namespace hoc
