#include "hoc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "hoc/detail/parallel.hpp"

namespace hoc {

namespace {

constexpr std::uint64_t kBlockSize = 1024;
constexpr double kMaxExponent = 700.0;
constexpr std::uint64_t kMinSamples = 100;

std::uint64_t mix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Running count, mean and sum of squared deviations.
struct Moments {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const Moments& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    const double delta = other.mean - mean;
    const double total = na + nb;
    mean += delta * nb / total;
    m2 += other.m2 + delta * delta * na * nb / total;
    count += other.count;
  }
};

void require_samples(std::uint64_t N) {
  if (N < kMinSamples) throw ValidationError("Monte Carlo needs at least 100 samples, got " + std::to_string(N));
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream ^ 0xD1B54A32D192ED03ULL))) {}

std::uint64_t CounterRng::next() { return mix(key_ + mix(counter_++)); }

double CounterRng::uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

double CounterRng::normal() { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * uniform()); }

SampleSource::SampleSource(int n, SpacePtr space) : n_(n), space_(std::move(space)) {
  if (!space_) return;
  for (const auto& c : space_->coordinates()) {
    std::vector<double> cdf;
    double acc = 0.0;
    for (double p : c.probs()) cdf.push_back(acc += p);
    cdf.back() = 1.0;
    cdf_.push_back(std::move(cdf));
  }
}

SampleSource SampleSource::product(SpacePtr space) {
  if (!space) throw ValidationError("product source needs a space");
  const int n = space->dimension();
  return {n, std::move(space)};
}

SampleSource SampleSource::gaussian(int n) {
  if (n < 1) throw ValidationError("Gaussian source needs n >= 1");
  return {n, nullptr};
}

void SampleSource::draw(CounterRng& rng, std::span<double> x) const {
  if (!space_) {
    for (double& v : x) v = rng.normal();
    return;
  }
  for (int i = 0; i < n_; ++i) {
    const auto& cdf = cdf_[static_cast<std::size_t>(i)];
    const double u = rng.uniform();
    const auto k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    x[static_cast<std::size_t>(i)] = space_->coordinate(i).atom(std::min(k, cdf.size() - 1));
  }
}

namespace {

template <typename Transform>
MCEstimate run_blocks(const SampleSource& source, std::uint64_t N, std::uint64_t seed, Transform&& transform,
                      bool& clamped) {
  require_samples(N);
  const std::uint64_t blocks = (N + kBlockSize - 1) / kBlockSize;
  std::vector<Moments> partial(blocks);
  std::vector<char> flags(blocks, 0);
  detail::parallel_for(blocks, [&](std::size_t b) {
    CounterRng rng(seed, b);
    std::vector<double> x(static_cast<std::size_t>(source.dimension()));
    const std::uint64_t end = std::min<std::uint64_t>(N, (b + 1) * kBlockSize);
    bool local = false;
    for (std::uint64_t k = b * kBlockSize; k < end; ++k) {
      source.draw(rng, x);
      partial[b].add(transform(x, local));
    }
    flags[b] = local ? 1 : 0;
  });
  Moments total;
  for (const auto& m : partial) total.merge(m);
  clamped = std::any_of(flags.begin(), flags.end(), [](char c) { return c != 0; });
  MCEstimate est;
  est.value = total.mean;
  est.samples = N;
  est.seed = seed;
  // The leave-one-out jackknife of the sample mean reduces to s / sqrt(N).
  const double nn = static_cast<double>(N);
  est.std_error = N > 1 ? std::sqrt(std::max(total.m2, 0.0) / (nn - 1.0) / nn) : 0.0;
  return est;
}

}  // namespace

MCEstimate sample_mean(const SampleSource& source, const PointFunction& g, std::uint64_t N, std::uint64_t seed) {
  bool clamped = false;
  return run_blocks(source, N, seed, [&](std::span<const double> x, bool&) { return g(x); }, clamped);
}

MCEstimate sample_exp_moment(const SampleSource& source, const PointFunction& f, double c, double exponent,
                             std::uint64_t N, std::uint64_t seed) {
  if (!(c >= 0.0)) throw ValidationError("exponential-moment constant c must be nonnegative");
  if (!(exponent > 0.0 && exponent <= 2.0)) throw ValidationError("exponent must lie in (0, 2]");
  bool clamped = false;
  auto est = run_blocks(
      source, N, seed,
      [&](std::span<const double> x, bool& flag) {
        double arg = c * std::pow(std::abs(f(x)), exponent);
        if (arg > kMaxExponent) {
          arg = kMaxExponent;
          flag = true;
        }
        return std::exp(arg);
      },
      clamped);
  est.clamped = clamped;
  return est;
}

MCEstimate empirical_tail(const SampleSource& source, const PointFunction& f, double t, std::uint64_t N,
                          std::uint64_t seed) {
  if (!(t >= 0.0)) throw ValidationError("tail level t must be nonnegative");
  bool clamped = false;
  auto est = run_blocks(source, N, seed, [&](std::span<const double> x, bool&) { return std::abs(f(x)) >= t ? 1.0 : 0.0; },
                        clamped);
  const double p = est.value;
  est.std_error = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(N));
  return est;
}

PointFunction table_function(FunctionTable f) {
  const auto space = f.space();
  return [f = std::move(f), space](std::span<const double> x) {
    std::uint64_t o = 0;
    for (int i = 0; i < space->dimension(); ++i) {
      const auto support = space->coordinate(i).support();
      const double xi = x[static_cast<std::size_t>(i)];
      const auto it = std::find(support.begin(), support.end(), xi);
      if (it == support.end()) throw ValidationError("point coordinate is not an atom of the space");
      o += static_cast<std::uint64_t>(it - support.begin()) * space->stride(i);
    }
    return f[o];
  };
}

PointFunction poly_function(MultilinearPolynomial p) {
  return [p = std::move(p)](std::span<const double> x) { return p.evaluate(x); };
}

}  // namespace hoc
