#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hoc/product_space.hpp"

namespace hoc {

/// Counter-based generator: draw k of stream s under seed is a fixed hash of (seed, s, k),
/// so sample blocks can be produced in any order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal via the inverse CDF.
  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct MCEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  /// Some exponent argument exceeded 700 and was clamped.
  bool clamped = false;
};

/// Where sample points come from: a finite product space or the standard Gaussian on R^n.
class SampleSource {
 public:
  static SampleSource product(SpacePtr space);
  static SampleSource gaussian(int n);

  int dimension() const { return n_; }
  bool is_gaussian() const { return space_ == nullptr; }
  const SpacePtr& space() const { return space_; }
  void draw(CounterRng& rng, std::span<double> x) const;

 private:
  SampleSource(int n, SpacePtr space);

  int n_;
  SpacePtr space_;
  /// Per-coordinate cumulative probabilities for product sources.
  std::vector<std::vector<double>> cdf_;
};

using PointFunction = std::function<double(std::span<const double>)>;

/// Mean of g(X) over N samples in fixed blocks; std_error is the jackknife estimate.
MCEstimate sample_mean(const SampleSource& source, const PointFunction& g, std::uint64_t N, std::uint64_t seed);

/// Mean of exp(c |f(X)|^exponent); arguments above 700 are clamped and flagged.
MCEstimate sample_exp_moment(const SampleSource& source, const PointFunction& f, double c, double exponent,
                             std::uint64_t N, std::uint64_t seed);

/// Fraction of samples with |f(X)| >= t and its binomial standard error.
MCEstimate empirical_tail(const SampleSource& source, const PointFunction& f, double t, std::uint64_t N,
                          std::uint64_t seed);

/// Evaluates a table at a point whose coordinates are atoms of its space.
PointFunction table_function(FunctionTable f);
PointFunction poly_function(MultilinearPolynomial p);

}  // namespace hoc
