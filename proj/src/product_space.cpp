#include "hoc/product_space.hpp"

#include "hoc/detail/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

namespace hoc {

namespace {

constexpr double kProbTolerance = 1e-12;
using detail::CompensatedSum;

}  // namespace

// ---------------------------------------------------------------------------
// CoordSet

CoordSet CoordSet::of(std::span<const int> indices) {
  std::uint64_t bits = 0;
  for (int i : indices) {
    if (i < 0 || i >= 64) throw ValidationError("coordinate index out of range: " + std::to_string(i));
    const std::uint64_t bit = std::uint64_t{1} << i;
    if (bits & bit) throw ValidationError("duplicate coordinate index " + std::to_string(i));
    bits |= bit;
  }
  return CoordSet(bits);
}

std::vector<int> CoordSet::indices() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (std::uint64_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b));
  return out;
}

// ---------------------------------------------------------------------------
// FiniteDistribution

FiniteDistribution::FiniteDistribution(std::vector<double> support, std::vector<double> probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
  if (support_.empty()) throw ValidationError("distribution needs at least one atom");
  if (support_.size() != probs_.size()) throw ValidationError("support and probs differ in length");
  CompensatedSum total;
  for (std::size_t k = 0; k < support_.size(); ++k) {
    if (!std::isfinite(support_[k])) throw ValidationError("support atoms must be finite");
    if (!(probs_[k] > 0.0) || !std::isfinite(probs_[k])) {
      throw ValidationError("every probability must be positive and finite");
    }
    total.add(probs_[k]);
    for (std::size_t j = 0; j < k; ++j) {
      if (support_[j] == support_[k]) throw ValidationError("support atoms must be pairwise distinct");
    }
  }
  if (std::abs(total.value() - 1.0) > kProbTolerance) {
    std::ostringstream msg;
    msg << "probabilities sum to " << total.value() << ", not 1";
    throw ValidationError(msg.str());
  }
}

FiniteDistribution FiniteDistribution::rademacher() { return {{-1.0, 1.0}, {0.5, 0.5}}; }

FiniteDistribution FiniteDistribution::point_mass(double atom) { return {{atom}, {1.0}}; }

double FiniteDistribution::mean() const { return moment(1); }

double FiniteDistribution::moment(int k) const {
  CompensatedSum s;
  for (std::size_t j = 0; j < size(); ++j) s.add(probs_[j] * std::pow(support_[j], k));
  return s.value();
}

bool FiniteDistribution::is_rademacher(double tol) const {
  if (size() != 2) return false;
  const bool atoms = (support_[0] == -1.0 && support_[1] == 1.0) || (support_[0] == 1.0 && support_[1] == -1.0);
  return atoms && std::abs(probs_[0] - 0.5) <= tol && std::abs(probs_[1] - 0.5) <= tol;
}

// ---------------------------------------------------------------------------
// ProductSpace

SpacePtr build_space(std::vector<FiniteDistribution> dists, const Limits& limits) {
  if (dists.empty()) throw ValidationError("product space needs at least one coordinate");
  if (dists.size() > 64) throw ValidationError("at most 64 coordinates are supported");
  std::shared_ptr<ProductSpace> space(new ProductSpace());
  space->limits_ = limits;
  std::uint64_t count = 1;
  for (const auto& d : dists) {
    space->strides_.push_back(count);
    if (count > limits.max_outcomes / d.size()) {
      throw BudgetError("enumeration too large: outcome count exceeds budget of " +
                        std::to_string(limits.max_outcomes));
    }
    count *= d.size();
  }
  if (count > limits.max_outcomes) {
    throw BudgetError("enumeration too large: outcome count exceeds budget of " +
                      std::to_string(limits.max_outcomes));
  }
  space->outcomes_ = count;
  space->coords_ = std::move(dists);

  // Outcome weights built one coordinate at a time in enumeration order.
  std::vector<double> w(count, 1.0);
  for (int i = 0; i < space->dimension(); ++i) {
    const auto& c = space->coords_[static_cast<std::size_t>(i)];
    const std::uint64_t s = space->strides_[static_cast<std::size_t>(i)];
    for (std::uint64_t o = 0; o < count; ++o) w[o] *= c.prob((o / s) % c.size());
  }
  space->weights_ = std::move(w);
  return space;
}

SpacePtr rademacher_space(int n, const Limits& limits) {
  return build_space(std::vector<FiniteDistribution>(static_cast<std::size_t>(n), FiniteDistribution::rademacher()),
                     limits);
}

void ProductSpace::point(std::uint64_t outcome, std::span<double> x) const {
  for (int i = 0; i < dimension(); ++i) x[static_cast<std::size_t>(i)] = value(outcome, i);
}

bool ProductSpace::is_rademacher() const {
  return std::all_of(coords_.begin(), coords_.end(), [](const auto& c) { return c.is_rademacher(); });
}

bool ProductSpace::same_as(const ProductSpace& other) const {
  return this == &other || coords_ == other.coords_;
}

double expectation(const ProductSpace& space, std::span<const double> values) {
  const auto w = space.weights();
  CompensatedSum s;
  for (std::size_t o = 0; o < values.size(); ++o) s.add(w[o] * values[o]);
  return s.value();
}

// ---------------------------------------------------------------------------
// FunctionTable

FunctionTable::FunctionTable(SpacePtr space, std::vector<double> values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (!space_) throw ValidationError("function table needs a space");
  if (values_.size() != space_->outcome_count()) {
    throw ValidationError("table length " + std::to_string(values_.size()) + " does not match outcome count " +
                          std::to_string(space_->outcome_count()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("function values must be finite");
  }
}

FunctionTable FunctionTable::constant(SpacePtr space, double c) {
  const auto n = space->outcome_count();
  return {std::move(space), std::vector<double>(n, c)};
}

FunctionTable FunctionTable::coordinate(SpacePtr space, int i) {
  if (i < 0 || i >= space->dimension()) throw ValidationError("coordinate index out of range");
  std::vector<double> v(space->outcome_count());
  for (std::uint64_t o = 0; o < v.size(); ++o) v[o] = space->value(o, i);
  return {std::move(space), std::move(v)};
}

FunctionTable FunctionTable::from_point_function(SpacePtr space,
                                                 const std::function<double(std::span<const double>)>& f) {
  std::vector<double> v(space->outcome_count());
  std::vector<double> x(static_cast<std::size_t>(space->dimension()));
  for (std::uint64_t o = 0; o < v.size(); ++o) {
    space->point(o, x);
    v[o] = f(x);
  }
  return {std::move(space), std::move(v)};
}

double FunctionTable::mean() const { return expectation(*space_, values_); }

double FunctionTable::variance() const {
  const double m = mean();
  const auto w = space_->weights();
  CompensatedSum s;
  for (std::size_t o = 0; o < values_.size(); ++o) s.add(w[o] * (values_[o] - m) * (values_[o] - m));
  return s.value();
}

double FunctionTable::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double FunctionTable::inner(const FunctionTable& other) const {
  require_same_space(other);
  const auto w = space_->weights();
  CompensatedSum s;
  for (std::size_t o = 0; o < values_.size(); ++o) s.add(w[o] * values_[o] * other.values_[o]);
  return s.value();
}

FunctionTable FunctionTable::map(const std::function<double(double)>& op) const {
  std::vector<double> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(), op);
  return {space_, std::move(v)};
}

FunctionTable FunctionTable::abs() const {
  return map([](double x) { return std::abs(x); });
}

FunctionTable FunctionTable::positive_part() const {
  return map([](double x) { return std::max(x, 0.0); });
}

FunctionTable FunctionTable::negative_part() const {
  return map([](double x) { return std::max(-x, 0.0); });
}

void FunctionTable::require_same_space(const FunctionTable& other) const {
  if (!space_->same_as(*other.space_)) throw ValidationError("function tables live on different spaces");
}

FunctionTable& FunctionTable::operator+=(const FunctionTable& other) {
  require_same_space(other);
  for (std::size_t o = 0; o < values_.size(); ++o) values_[o] += other.values_[o];
  return *this;
}

FunctionTable& FunctionTable::operator-=(const FunctionTable& other) {
  require_same_space(other);
  for (std::size_t o = 0; o < values_.size(); ++o) values_[o] -= other.values_[o];
  return *this;
}

FunctionTable& FunctionTable::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

FunctionTable& FunctionTable::operator+=(double b) {
  for (double& v : values_) v += b;
  return *this;
}

FunctionTable FunctionTable::operator*(const FunctionTable& other) const {
  require_same_space(other);
  std::vector<double> v(values_.size());
  for (std::size_t o = 0; o < values_.size(); ++o) v[o] = values_[o] * other.values_[o];
  return {space_, std::move(v)};
}

// ---------------------------------------------------------------------------
// MultilinearPolynomial

void MultilinearPolynomial::add_term(std::span<const int> indices, double coeff) {
  for (int i : indices) {
    if (i < 0 || i >= n_) throw ValidationError("polynomial index " + std::to_string(i) + " out of range");
  }
  add_term(CoordSet::of(indices), coeff);
}

void MultilinearPolynomial::add_term(CoordSet set, double coeff) {
  if (!set.subset_of(CoordSet::full(n_))) throw ValidationError("polynomial term outside of coordinate range");
  if (!std::isfinite(coeff)) throw ValidationError("polynomial coefficients must be finite");
  coeffs_[set] += coeff;
}

double MultilinearPolynomial::coefficient(CoordSet set) const {
  const auto it = coeffs_.find(set);
  return it == coeffs_.end() ? 0.0 : it->second;
}

int MultilinearPolynomial::degree() const {
  int d = 0;
  for (const auto& [set, a] : coeffs_) {
    if (a != 0.0) d = std::max(d, set.size());
  }
  return d;
}

int MultilinearPolynomial::lowest_positive_degree() const {
  int d = 0;
  for (const auto& [set, a] : coeffs_) {
    if (a != 0.0 && set.size() > 0 && (d == 0 || set.size() < d)) d = set.size();
  }
  return d;
}

double MultilinearPolynomial::evaluate(std::span<const double> x) const {
  double total = 0.0;
  for (const auto& [set, a] : coeffs_) {
    double term = a;
    for (std::uint64_t b = set.bits(); b != 0; b &= b - 1) term *= x[static_cast<std::size_t>(std::countr_zero(b))];
    total += term;
  }
  return total;
}

FunctionTable eval_polynomial(const SpacePtr& space, const MultilinearPolynomial& p) {
  if (p.dimension() != space->dimension()) {
    throw ValidationError("polynomial dimension " + std::to_string(p.dimension()) +
                          " does not match space dimension " + std::to_string(space->dimension()));
  }
  return FunctionTable::from_point_function(space, [&p](std::span<const double> x) { return p.evaluate(x); });
}

// ---------------------------------------------------------------------------
// Conditional expectations and norms

namespace {

void check_set(const ProductSpace& space, CoordSet S) {
  if (!S.subset_of(CoordSet::full(space.dimension()))) throw ValidationError("coordinate set outside of space");
}

/// In place: v <- E_i v.
void integrate_coordinate(const ProductSpace& space, std::vector<double>& v, int i) {
  const std::uint64_t stride = space.stride(i);
  const std::size_t radix = space.radix(i);
  if (radix == 1) return;
  const auto probs = space.coordinate(i).probs();
  const std::uint64_t block = stride * radix;
  for (std::uint64_t base = 0; base < v.size(); base += block) {
    for (std::uint64_t off = 0; off < stride; ++off) {
      const std::uint64_t o = base + off;
      double s = 0.0;
      for (std::size_t a = 0; a < radix; ++a) s += probs[a] * v[o + a * stride];
      for (std::size_t a = 0; a < radix; ++a) v[o + a * stride] = s;
    }
  }
}

}  // namespace

FunctionTable cond_expectation(const FunctionTable& f, CoordSet S) {
  const auto& space = *f.space();
  check_set(space, S);
  std::vector<double> v(f.values().begin(), f.values().end());
  for (int i : S.indices()) integrate_coordinate(space, v, i);
  return {f.space(), std::move(v)};
}

FunctionTable centered_difference(const FunctionTable& f, CoordSet S) {
  const auto& space = *f.space();
  check_set(space, S);
  std::vector<double> v(f.values().begin(), f.values().end());
  std::vector<double> e;
  for (int i : S.indices()) {
    e = v;
    integrate_coordinate(space, e, i);
    for (std::size_t o = 0; o < v.size(); ++o) v[o] -= e[o];
  }
  return {f.space(), std::move(v)};
}

double lp_norm(const FunctionTable& f, double p) {
  if (!(p >= 1.0)) throw ValidationError("L^p norm requires p >= 1");
  const double m = f.sup_norm();
  if (std::isinf(p) || m == 0.0) return m;
  const auto w = f.space()->weights();
  const auto v = f.values();
  CompensatedSum s;
  for (std::size_t o = 0; o < v.size(); ++o) s.add(w[o] * std::pow(std::abs(v[o]) / m, p));
  return m * std::pow(s.value(), 1.0 / p);
}

}  // namespace hoc
